#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "ura/phy_model.hpp"

using namespace ura;

namespace {

SystemConfig small_cfg(int nc, int ncp, std::vector<int> s) {
  SystemConfig cfg;
  cfg.num_subcarriers = nc;
  cfg.cp_length = ncp;
  cfg.subcarriers_per_user = static_cast<int>(s.size());
  cfg.subcarrier_indices = std::move(s);
  return cfg;
}

std::vector<int> random_subset(int n, int k, Rng& rng) {
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i + 1;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

TEST_CASE("phase_coeff closed-form examples") {
  const auto cfg = small_cfg(8, 2, {1, 3});
  CHECK(std::abs(phase_coeff(0, 0.0, 3, 3, cfg) - cplx{1.0, 0.0}) < 1e-12);
  CHECK(std::abs(phase_coeff(8, 0.0, 2, 3, cfg) - phase_coeff(0, 0.0, 2, 3, cfg)) < 1e-12);
  CHECK(std::abs(phase_coeff(1, 0.0, 1, 3, cfg) - cplx{0.0, -1.0}) < 1e-12);
}

TEST_CASE("phase_coeff is unit modulus and both forms agree") {
  Rng rng(5);
  std::uniform_real_distribution<double> eps(-0.5, 0.5);
  std::uniform_int_distribution<int> tau(0, 72), sym(1, 25), sc(1, 1024);
  const SystemConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    const int t = tau(rng), s = sym(rng), k = sc(rng);
    const double e = eps(rng);
    const cplx a = phase_coeff(t, e, s, k, cfg);
    CHECK(std::abs(std::abs(a) - 1.0) < 1e-12);
    CHECK(std::abs(a - phase_coeff_accumulated(t, e, s, k, cfg)) < 1e-9);
  }
}

TEST_CASE("dirichlet kernel limits and periodicity") {
  CHECK(std::abs(dirichlet_kernel(0.0, 16) - cplx{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(dirichlet_kernel(3.0, 16)) < 1e-15);
  CHECK(std::abs(dirichlet_kernel(16.0, 16) - cplx{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(dirichlet_kernel(2.3, 16) - dirichlet_kernel(2.3 + 16.0, 16)) < 1e-12);
  const double e = 1e-9;
  CHECK(std::abs(dirichlet_kernel(e, 1024) - cplx{1.0, 0.0}) < 1e-8);
}

TEST_CASE("fo_matrix_exact matches DFT conjugation") {
  SUBCASE("eps = 0 is the identity") {
    const auto cfg = small_cfg(16, 4, {1, 2, 5, 9});
    CHECK((fo_matrix_exact(0.0, 1, cfg) - CMatrix::Identity(4, 4)).norm() < 1e-12);
  }
  SUBCASE("N_c = 8, s = [1, 2], eps = 0.1") {
    const auto cfg = small_cfg(8, 2, {1, 2});
    CHECK((fo_matrix_exact(0.1, 1, cfg) - oracle::fo_matrix(8, 2, 0.1, 1, {1, 2})).norm() < 1e-10);
  }
  SUBCASE("random draws") {
    Rng rng(17);
    std::uniform_real_distribution<double> eps(-0.5, 0.5);
    std::uniform_int_distribution<int> sym(1, 25);
    for (int nc : {8, 16, 1024}) {
      for (int rep = 0; rep < 4; ++rep) {
        const auto s = random_subset(nc, std::min(nc, 6), rng);
        const auto cfg = small_cfg(nc, nc / 8, s);
        const double e = eps(rng);
        const int t = sym(rng);
        CHECK((fo_matrix_exact(e, t, cfg) - oracle::fo_matrix(nc, nc / 8, e, t, s)).norm() < 1e-10);
      }
    }
  }
  SUBCASE("diagonal magnitude") {
    const SystemConfig cfg;
    const double e = 0.0133;
    const CMatrix p = fo_matrix_exact(e, 1, cfg);
    const double expect = std::sin(oracle::kPi * e) / (1024 * std::sin(oracle::kPi * e / 1024));
    for (int k = 0; k < 128; k += 17) CHECK(std::abs(std::abs(p(k, k)) - expect) < 1e-12);
  }
}

TEST_CASE("to_matrix_exact matches DFT conjugation") {
  const auto cfg = small_cfg(8, 2, {1, 3});
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(0, 0) = 1.0;
  expect(1, 1) = cplx{0.0, -1.0};
  CHECK((to_matrix_exact(1, cfg) - expect).norm() < 1e-12);
  CHECK((to_matrix_exact(0, cfg) - CMatrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((to_matrix_exact(8, cfg) - CMatrix::Identity(2, 2)).norm() < 1e-12);

  Rng rng(3);
  for (int nc : {8, 16, 1024}) {
    const auto s = random_subset(nc, std::min(nc, 5), rng);
    const auto c = small_cfg(nc, nc / 8, s);
    for (int tau : {0, 1, nc / 8}) CHECK((to_matrix_exact(tau, c) - oracle::to_matrix(nc, tau, s)).norm() < 1e-10);
  }
}

TEST_CASE("approx_error") {
  const SystemConfig cfg;
  CHECK(approx_error(0.0, 3, cfg) < 1e-12);

  // Oracle: Frobenius norm of the DFT-conjugated product minus its diagonal phase model.
  const double e = 0.0133;
  const Eigen::MatrixXcd exact = oracle::fo_matrix(1024, 72, e, 1, cfg.subcarrier_indices) *
                                 oracle::to_matrix(1024, 4, cfg.subcarrier_indices);
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(128, 128);
  for (int k = 0; k < 128; ++k) diag(k, k) = phase_coeff(4, e, 1, cfg.subcarrier_indices[k], cfg);
  const double err = approx_error(e, 4, cfg);
  CHECK(err > 0.0);
  CHECK(std::abs(err - (exact - diag).norm()) < 1e-9);
  // Small next to the model's own norm sqrt(S).
  CHECK(err / std::sqrt(128.0) < 0.02);

  CHECK(approx_error(0.5, 4, cfg) > 3.0);
  double prev = approx_error(0.5, 0, cfg);
  for (double x : {0.3, 0.1, 0.03, 0.01, 0.001, 0.0}) {
    const double cur = approx_error(x, 0, cfg);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
  CHECK(std::abs(approx_error(0.01, 0, cfg) - approx_error(0.01, 7, cfg)) < 1e-10);
}

TEST_CASE("PhaseGrid") {
  SystemConfig cfg;
  const auto g = PhaseGrid::from_config(cfg);
  REQUIRE(g.delays.size() == 9);
  REQUIRE(g.freqs.size() == 9);
  CHECK(g.delays.front() == 1);
  CHECK(g.delays.back() == 9);
  CHECK(g.freqs[4] == 0.0);
  for (int k = 0; k < 9; ++k) CHECK(g.freqs[k] == doctest::Approx(-g.freqs[8 - k]));
  CHECK(g.freqs.back() == doctest::Approx(cfg.max_freq_offset));
  const auto pts = g.points();
  CHECK(pts.size() == 81);
  CHECK(pts[10].tau == 2);
  CHECK(pts[10].eps == g.freqs[1]);
}

TEST_CASE("simulate_pilot_symbol") {
  SystemConfig cfg;
  cfg.antennas = 4;
  cfg.noise_var = 0.0;
  Rng rng(1);

  SUBCASE("no users, no noise") {
    std::vector<ActiveUser> none;
    std::vector<int> cw;
    CHECK(simulate_pilot_symbol(none, 1, cw, cfg, rng, ChannelMode::exact).norm() == 0.0);
  }
  SUBCASE("one user, simplified") {
    ActiveUser u;
    u.tau = 3;
    u.eps = 0.007;
    u.channel = draw_channel(cfg, rng);
    std::vector<ActiveUser> users{u};
    std::vector<int> cw{17};
    const CMatrix y = simulate_pilot_symbol(users, 2, cw, cfg, rng, ChannelMode::simplified);
    const cplx p = phase_coeff(3, 0.007, 2, cfg.subcarrier_indices[16], cfg);
    CMatrix expect = CMatrix::Zero(128, 4);
    expect.row(16) = std::sqrt(cfg.pilot_power()) * p * u.channel.transpose();
    CHECK((y - expect).norm() < 1e-12);
  }
  SUBCASE("collision superposition and linearity") {
    std::vector<ActiveUser> a(1), b(1);
    a[0].tau = 2;
    a[0].eps = 0.01;
    a[0].channel = draw_channel(cfg, rng);
    b[0].tau = 7;
    b[0].eps = -0.004;
    b[0].channel = draw_channel(cfg, rng);
    for (auto mode : {ChannelMode::simplified, ChannelMode::exact}) {
      std::vector<ActiveUser> both{a[0], b[0]};
      std::vector<int> one{40}, two{40, 40};
      const CMatrix ya = simulate_pilot_symbol(a, 3, one, cfg, rng, mode);
      const CMatrix yb = simulate_pilot_symbol(b, 3, one, cfg, rng, mode);
      const CMatrix yab = simulate_pilot_symbol(both, 3, two, cfg, rng, mode);
      CHECK((yab - ya - yb).norm() < 1e-12);
    }
  }
  SUBCASE("exact mode column equals the rotation applied to e_row") {
    ActiveUser u;
    u.tau = 5;
    u.eps = 0.012;
    u.channel = draw_channel(cfg, rng);
    std::vector<ActiveUser> users{u};
    std::vector<int> cw{9};
    const CMatrix y = simulate_pilot_symbol(users, 4, cw, cfg, rng, ChannelMode::exact);
    CVector e = CVector::Zero(128);
    e(8) = std::sqrt(cfg.pilot_power());
    const CMatrix full = fo_matrix_exact(u.eps, 4, cfg) * to_matrix_exact(u.tau, cfg);
    CHECK((y - (full * e) * u.channel.transpose()).norm() < 1e-9);
  }
}

TEST_CASE("simulate_data_symbol") {
  SystemConfig cfg;
  cfg.antennas = 3;
  cfg.noise_var = 0.0;
  Rng rng(2);
  ActiveUser u;
  u.channel = draw_channel(cfg, rng);
  std::vector<ActiveUser> users{u};

  std::vector<CVector> zero{CVector::Zero(128)};
  CHECK(simulate_data_symbol(users, zero, 5, cfg, rng, ChannelMode::exact).norm() == 0.0);

  const double amp = std::sqrt(cfg.symbol_power());
  std::vector<CVector> ones{CVector::Constant(128, amp)};
  const CMatrix y = simulate_data_symbol(users, ones, 5, cfg, rng, ChannelMode::exact);
  for (int s = 0; s < 128; s += 31) CHECK((y.row(s) - amp * u.channel.transpose()).norm() < 1e-12);

  users[0].tau = 4;
  users[0].eps = 0.011;
  const CMatrix yr = simulate_data_symbol(users, ones, 9, cfg, rng, ChannelMode::simplified);
  for (int s = 0; s < 128; s += 31) {
    const cplx p = phase_coeff(4, 0.011, 9, cfg.subcarrier_indices[s], cfg);
    CHECK((yr.row(s) - amp * p * users[0].channel.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("noise has the configured variance") {
  SystemConfig cfg;
  cfg.antennas = 16;
  cfg.noise_var = 2.0;
  Rng rng(9);
  std::vector<ActiveUser> none;
  std::vector<int> cw;
  double e = 0.0;
  for (int i = 0; i < 20; ++i) e += simulate_pilot_symbol(none, 1, cw, cfg, rng, ChannelMode::exact).squaredNorm();
  const double per_entry = e / (20.0 * 128 * 16);
  CHECK(per_entry == doctest::Approx(2.0).epsilon(0.03));
}
