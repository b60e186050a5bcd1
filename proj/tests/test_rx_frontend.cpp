#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "ura/rx_frontend.hpp"

using namespace ura;

namespace {

CMatrix random_matrix(int r, int c, Rng& rng, double var = 1.0) {
  CMatrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = complex_gaussian(rng, var);
  return m;
}

}  // namespace

TEST_CASE("mmse_pilot_estimate") {
  Rng rng(1);
  const CMatrix y = random_matrix(8, 3, rng);
  CHECK((mmse_pilot_estimate(y, 1.0, 0.0) - y).norm() < 1e-15);
  CHECK(mmse_pilot_estimate(CMatrix::Zero(8, 3), 40.0, 1.0).norm() == 0.0);
  CHECK((mmse_pilot_estimate(y, 1.0, 1.0) - y / 2.0).norm() < 1e-15);

  // Oracle: A^H (A A^H + s I)^-1 with A = sqrt(p) I evaluated as matrices.
  const double p = 40.0, s2 = 1.0;
  const CMatrix a = std::sqrt(p) * CMatrix::Identity(8, 8);
  const CMatrix w = a.adjoint() * (a * a.adjoint() + s2 * CMatrix::Identity(8, 8)).inverse();
  CHECK((mmse_pilot_estimate(y, p, s2) - w * y).norm() < 1e-12);

  const CMatrix y2 = random_matrix(8, 3, rng);
  const cplx al{0.3, -1.2}, be{2.0, 0.5};
  CHECK((mmse_pilot_estimate(al * y + be * y2, p, s2) -
         (al * mmse_pilot_estimate(y, p, s2) + be * mmse_pilot_estimate(y2, p, s2)))
            .norm() < 1e-12);
  for (double n2 : {0.0, 0.1, 1.0, 10.0}) CHECK(mmse_pilot_estimate(y, 1.0, n2).norm() <= y.norm() + 1e-12);

  // Effective noise: variance of the estimate of pure noise.
  const CMatrix z = random_matrix(128, 200, rng, s2);
  const double measured = mmse_pilot_estimate(z, p, s2).squaredNorm() / (128.0 * 200.0);
  CHECK(measured == doctest::Approx(mmse_pilot_noise_var(p, s2)).epsilon(0.03));
}

TEST_CASE("detect_active_rows") {
  SystemConfig cfg;
  cfg.antennas = 16;
  const double p = cfg.pilot_power(), s2 = cfg.noise_var;
  const double eff = mmse_pilot_noise_var(p, s2);
  const double thr = activity_threshold(cfg, eff);
  CHECK(thr == doctest::Approx(4.0 * 16 * eff));

  Rng rng(2);
  int flagged = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r)
    flagged += static_cast<int>(detect_active_rows(mmse_pilot_estimate(random_matrix(128, 16, rng), p, s2), thr).size());
  const double rate = flagged / (128.0 * reps);
  // Row energy / sigma_eff^2 is Gamma(M, 1); the threshold sits at 4 M.
  CHECK(oracle::gamma_tail(16, 64.0) < 1e-3);
  CHECK(rate <= 1e-3);

  CMatrix g = CMatrix::Zero(128, 4);
  g.row(41) = random_matrix(1, 4, rng);
  CHECK(detect_active_rows(g, 0.0) == std::vector<int>{42});

  CMatrix two = CMatrix::Zero(128, 4);
  two.row(9) = random_matrix(1, 4, rng) + random_matrix(1, 4, rng);
  two.row(3) = random_matrix(1, 4, rng);
  CHECK(detect_active_rows(two, 0.0) == std::vector<int>{4, 10});
}

TEST_CASE("mmse_data_estimate") {
  CMatrix h(1, 1);
  h(0, 0) = cplx{0.7, -0.2};
  CMatrix y(1, 1);
  y(0, 0) = h(0, 0) * cplx{-1.0, 0.0};
  CHECK(std::abs(mmse_data_estimate(y, h, 0.0)(0, 0) - cplx{-1.0, 0.0}) < 1e-14);

  Rng rng(3);
  const CMatrix hk = random_matrix(3, 8, rng);
  CHECK(mmse_data_estimate(CMatrix::Zero(5, 8), hk, 1.0).norm() == 0.0);
  CHECK(mmse_data_estimate(CMatrix::Zero(5, 8), hk, 1.0).rows() == 3);
  CHECK(mmse_data_estimate(CMatrix::Zero(5, 8), hk, 1.0).cols() == 5);

  // Two orthogonal channel rows separate perfectly without noise.
  CMatrix h2 = CMatrix::Zero(2, 4);
  h2(0, 0) = 1.0;
  h2(0, 1) = cplx{0.0, 1.0};
  h2(1, 2) = 2.0;
  h2(1, 3) = -2.0;
  const CMatrix x = random_matrix(2, 6, rng);
  const CMatrix y2 = (h2.transpose() * x).transpose();  // S x M
  CHECK((mmse_data_estimate(y2, h2, 0.0) - x).norm() < 1e-12);

  // Oracle: the M x M form as written.
  const double s2 = 0.4;
  const CMatrix yy = random_matrix(6, 8, rng);
  const CMatrix direct =
      hk.conjugate() * (hk.transpose() * hk.conjugate() + s2 * CMatrix::Identity(8, 8)).inverse() * yy.transpose();
  CHECK((mmse_data_estimate(yy, hk, s2) - direct).norm() < 1e-10);

  // One user: matched filter scaled by 1 / (||h||^2 + sigma^2).
  const CMatrix h1 = random_matrix(1, 8, rng);
  const CMatrix mf = (h1.conjugate() * yy.transpose()) / (h1.squaredNorm() + s2);
  CHECK((mmse_data_estimate(yy, h1, s2) - mf).norm() < 1e-12);

  const CMatrix ya = random_matrix(6, 8, rng);
  CHECK((mmse_data_estimate(2.0 * yy - ya, hk, s2) - (2.0 * mmse_data_estimate(yy, hk, s2) - mmse_data_estimate(ya, hk, s2)))
            .norm() < 1e-10);

  CMatrix dup(2, 4);
  dup.row(0) = h2.row(0);
  dup.row(1) = h2.row(0);
  CHECK_THROWS_AS(mmse_data_estimate(y2, dup, 0.0), std::domain_error);
  CHECK_NOTHROW(mmse_data_estimate(y2, dup, 0.1));
}

TEST_CASE("separate_data restricts each channel use to its occupants") {
  Rng rng(4);
  const int s = 8, td = 3, m = 4;
  std::vector<CVector> h{random_matrix(4, 1, rng).col(0), random_matrix(4, 1, rng).col(0)};
  std::vector<std::vector<int>> pos{{0, 5, 9, 17}, {5, 6, 17, 23}};
  std::vector<std::vector<double>> b{{1, -1, 1, 1}, {-1, -1, 1, -1}};
  const double psym = 2.0;
  std::vector<CMatrix> y(td, CMatrix::Zero(s, m));
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 4; ++j) {
      const int q = pos[k][j];
      y[q / s].row(q % s) += std::sqrt(psym) * b[k][j] * h[k].transpose();
    }
  const auto out = separate_data(y, h, pos, psym, 0.0);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(out[k].symbols[j] - cplx{b[k][j], 0.0}) < 1e-12);

  const auto noisy = separate_data(y, h, pos, psym, 0.5);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 4; ++j) {
      CHECK(noisy[k].bias[j] > 0.0);
      CHECK(noisy[k].bias[j] < 1.0);
    }
  // Single occupant: beta = g / (g + sigma^2) with g = P ||h||^2.
  const double g = psym * h[0].squaredNorm();
  CHECK(noisy[0].bias[0] == doctest::Approx(g / (g + 0.5)));
}

TEST_CASE("bpsk_llr") {
  const std::vector<cplx> s{{0.9, 0.1}, {-0.4, 0.0}, {0.0, 1.0}, {100.0, 0.0}};
  const std::vector<double> beta{0.8, 0.8, 0.8, 0.999};
  const auto llr = bpsk_llr(s, beta);
  CHECK(llr[0] == doctest::Approx(4.0 * 0.9 / 0.2));
  CHECK(llr[1] == doctest::Approx(4.0 * -0.4 / 0.2));
  CHECK(llr[2] == 0.0);
  CHECK(llr[3] == 50.0);
  const std::vector<double> exact{1.0, 1.0, 1.0, 1.0};
  const auto hard = bpsk_llr(s, exact);
  CHECK(hard[0] == 50.0);
  CHECK(hard[1] == -50.0);
}
