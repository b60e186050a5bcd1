#include "ura/rx_frontend.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ura {

namespace {

constexpr double kLlrClamp = 50.0;

}  // namespace

CMatrix mmse_pilot_estimate(const CMatrix& y, double signal_power, double noise_var) {
  const double denom = signal_power + noise_var;
  if (denom <= 0.0) throw std::domain_error("mmse_pilot_estimate: zero signal and noise power");
  return y * (std::sqrt(signal_power) / denom);
}

double mmse_pilot_noise_var(double signal_power, double noise_var) {
  const double denom = signal_power + noise_var;
  return noise_var * signal_power / (denom * denom);
}

std::vector<int> detect_active_rows(const CMatrix& g, double threshold) {
  std::vector<int> rows;
  for (Eigen::Index r = 0; r < g.rows(); ++r)
    if (g.row(r).squaredNorm() > threshold) rows.push_back(static_cast<int>(r) + 1);
  return rows;
}

double activity_threshold(const SystemConfig& cfg, double effective_noise_var) {
  return cfg.act_thresh_coeff * cfg.antennas * effective_noise_var;
}

namespace {

// (H^* H^T + sigma^2 I)^-1 applied to rhs; H is K x M.
CMatrix solve_gram(const CMatrix& h, double noise_var, const CMatrix& rhs) {
  const Eigen::Index k = h.rows();
  CMatrix gram = h.conjugate() * h.transpose();
  gram.diagonal().array() += noise_var;
  if (noise_var > 0.0) return gram.llt().solve(rhs);
  Eigen::FullPivLU<CMatrix> lu(gram);
  if (lu.rank() < k) throw std::domain_error("mmse_data_estimate: rank-deficient channel matrix without noise");
  return lu.solve(rhs);
}

}  // namespace

CMatrix mmse_data_estimate(const CMatrix& y, const CMatrix& h, double noise_var) {
  if (h.cols() != y.cols()) throw std::invalid_argument("mmse_data_estimate: antenna count mismatch");
  return solve_gram(h, noise_var, h.conjugate() * y.transpose());
}

std::vector<SeparatedUser> separate_data(std::span<const CMatrix> y_data, std::span<const CVector> h,
                                         std::span<const std::vector<int>> positions, double symbol_power,
                                         double noise_var) {
  const std::size_t users = h.size();
  if (positions.size() != users) throw std::invalid_argument("separate_data: one position list per user");
  std::vector<SeparatedUser> out(users);
  if (users == 0 || y_data.empty()) return out;

  const int subcarriers = static_cast<int>(y_data.front().rows());
  const int frame_len = subcarriers * static_cast<int>(y_data.size());

  // occupancy[q]: (user, coded bit) pairs sharing channel use q.
  std::vector<std::vector<std::pair<int, int>>> occupancy(frame_len);
  for (std::size_t k = 0; k < users; ++k) {
    out[k].symbols.assign(positions[k].size(), cplx{0.0, 0.0});
    out[k].bias.assign(positions[k].size(), 0.0);
    for (std::size_t j = 0; j < positions[k].size(); ++j) {
      const int q = positions[k][j];
      if (q < 0 || q >= frame_len) throw std::out_of_range("separate_data: position outside the frame");
      occupancy[q].emplace_back(static_cast<int>(k), static_cast<int>(j));
    }
  }

  const double amp = std::sqrt(symbol_power);
  const Eigen::Index m = y_data.front().cols();
  for (int q = 0; q < frame_len; ++q) {
    const auto& occ = occupancy[q];
    if (occ.empty()) continue;
    const auto local = static_cast<Eigen::Index>(occ.size());
    CMatrix hs(local, m);
    for (Eigen::Index i = 0; i < local; ++i) hs.row(i) = amp * h[occ[i].first].transpose();
    const CMatrix y = y_data[q / subcarriers].row(q % subcarriers);
    const CMatrix x = mmse_data_estimate(y, hs, noise_var);

    // 1 - beta_k = sigma^2 [(G + sigma^2 I)^-1]_kk with G = H^* H^T.
    CMatrix inv_diag;
    if (noise_var > 0.0) {
      inv_diag = solve_gram(hs, noise_var, CMatrix::Identity(local, local));
    }
    for (Eigen::Index i = 0; i < local; ++i) {
      auto [k, j] = occ[i];
      out[k].symbols[j] = x(i, 0);
      out[k].bias[j] = noise_var > 0.0 ? 1.0 - noise_var * inv_diag(i, i).real() : 1.0;
    }
  }
  return out;
}

std::vector<double> bpsk_llr(std::span<const cplx> derotated, std::span<const double> bias) {
  if (derotated.size() != bias.size()) throw std::invalid_argument("bpsk_llr: size mismatch");
  std::vector<double> llr(derotated.size());
  for (std::size_t j = 0; j < derotated.size(); ++j) {
    const double spread = 1.0 - bias[j];
    const double re = derotated[j].real();
    double v;
    if (spread <= 1e-12)
      v = re > 0.0 ? kLlrClamp : (re < 0.0 ? -kLlrClamp : 0.0);
    else
      v = 4.0 * re / spread;
    llr[j] = std::clamp(v, -kLlrClamp, kLlrClamp);
  }
  return llr;
}

}  // namespace ura
