#include "ura/phy_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ura {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(j 2 pi k / n) for an integer exponent, reduced exactly before scaling.
cplx root_of_unity(long long k, int n) {
  long long r = k % n;
  if (r < 0) r += n;
  return std::polar(1.0, kTwoPi * static_cast<double>(r) / n);
}

// omega^e = exp(j 2 pi eps e / N_c) for a real exponent e.
cplx omega_pow(double eps, double exponent, int n) {
  return std::polar(1.0, kTwoPi * eps * exponent / n);
}

cplx phi(double eps, int symbol, const SystemConfig& cfg) {
  const double e = cfg.cp_length + static_cast<double>(symbol - 1) * (cfg.cp_length + cfg.num_subcarriers);
  return omega_pow(eps, e, cfg.num_subcarriers);
}

void add_noise(CMatrix& y, const SystemConfig& cfg, Rng& rng) {
  if (cfg.noise_var <= 0.0) return;
  for (Eigen::Index c = 0; c < y.cols(); ++c)
    for (Eigen::Index r = 0; r < y.rows(); ++r) y(r, c) += complex_gaussian(rng, cfg.noise_var);
}

}  // namespace

PhaseGrid PhaseGrid::from_config(const SystemConfig& cfg) {
  PhaseGrid g;
  for (int d = 1; d <= cfg.max_timing_offset; ++d) g.delays.push_back(d);
  const int q = cfg.freq_grid_size;
  if (q == 1) {
    g.freqs.push_back(0.0);
  } else {
    for (int k = 0; k < q; ++k) {
      // Symmetric construction so that odd Q contains 0 exactly.
      const double frac = static_cast<double>(2 * k - (q - 1)) / (q - 1);
      g.freqs.push_back(frac * cfg.max_freq_offset);
    }
  }
  return g;
}

std::vector<TfoPoint> PhaseGrid::points() const {
  std::vector<TfoPoint> out;
  out.reserve(delays.size() * freqs.size());
  for (int d : delays)
    for (double f : freqs) out.push_back({d, f});
  return out;
}

cplx phase_coeff(int tau, double eps, int symbol, int subcarrier, const SystemConfig& cfg) {
  const int n = cfg.num_subcarriers;
  const double fo_exp = static_cast<double>(cfg.cp_length + n) * symbol - (n + 1) / 2.0;
  long long to_exp = static_cast<long long>(tau) * (1 - subcarrier) % n;
  if (to_exp < 0) to_exp += n;
  return std::polar(1.0, kTwoPi * (static_cast<double>(to_exp) + eps * fo_exp) / n);
}

cplx phase_coeff_accumulated(int tau, double eps, int symbol, int subcarrier, const SystemConfig& cfg) {
  const int n = cfg.num_subcarriers;
  return phi(eps, symbol, cfg) * omega_pow(eps, (n - 1) / 2.0, n) *
         root_of_unity(static_cast<long long>(tau) * (1 - subcarrier), n);
}

cplx dirichlet_kernel(double x, int n) {
  const double k = std::round(x);
  const double r = x - k;
  const long long ki = static_cast<long long>(k);
  const bool multiple_of_n = ki % n == 0;
  if (r == 0.0) return multiple_of_n ? cplx{1.0, 0.0} : cplx{0.0, 0.0};

  const double phase = std::numbers::pi * x * (n - 1) / n;
  // Reduce the arguments so that sin() is evaluated near zero when the
  // denominator is small.
  const double sign_num = (ki % 2 == 0) ? 1.0 : -1.0;
  const double num = sign_num * std::sin(std::numbers::pi * r);
  double den;
  if (multiple_of_n) {
    const double sign_den = ((ki / n) % 2 == 0) ? 1.0 : -1.0;
    den = n * sign_den * std::sin(std::numbers::pi * r / n);
  } else {
    den = n * std::sin(std::numbers::pi * x / n);
  }
  return std::polar(num / den, phase);
}

namespace {

CMatrix fo_kernel(double eps, const SystemConfig& cfg) {
  const auto& s = cfg.subcarrier_indices;
  const int size = static_cast<int>(s.size());
  const int span = s.back() - s.front();
  std::vector<cplx> by_diff(2 * span + 1);
  for (int d = -span; d <= span; ++d) by_diff[d + span] = dirichlet_kernel(d + eps, cfg.num_subcarriers);
  CMatrix k(size, size);
  for (int b = 0; b < size; ++b)
    for (int a = 0; a < size; ++a) k(a, b) = by_diff[s[b] - s[a] + span];
  return k;
}

CVector psi_vector(int tau, const SystemConfig& cfg) {
  CVector psi(cfg.subcarriers_per_user);
  for (int k = 0; k < cfg.subcarriers_per_user; ++k)
    psi(k) = root_of_unity(static_cast<long long>(tau) * (1 - cfg.subcarrier_indices[k]), cfg.num_subcarriers);
  return psi;
}

}  // namespace

CMatrix fo_matrix_exact(double eps, int symbol, const SystemConfig& cfg) {
  return phi(eps, symbol, cfg) * fo_kernel(eps, cfg);
}

CMatrix to_matrix_exact(int tau, const SystemConfig& cfg) {
  return psi_vector(tau, cfg).asDiagonal();
}

CVector phase_vector(int tau, double eps, int symbol, const SystemConfig& cfg) {
  CVector p(cfg.subcarriers_per_user);
  for (int k = 0; k < cfg.subcarriers_per_user; ++k)
    p(k) = phase_coeff(tau, eps, symbol, cfg.subcarrier_indices[k], cfg);
  return p;
}

double approx_error(double eps, int tau, const SystemConfig& cfg) {
  const int symbol = 1;
  const CMatrix exact = fo_matrix_exact(eps, symbol, cfg) * to_matrix_exact(tau, cfg);
  const CMatrix diag = phase_vector(tau, eps, symbol, cfg).asDiagonal();
  return (exact - diag).norm();
}

UserRotation::UserRotation(int tau, double eps, const SystemConfig& cfg)
    : cfg_(cfg), tau_(tau), eps_(eps), kernel_(fo_kernel(eps, cfg)), psi_(psi_vector(tau, cfg)) {}

CVector UserRotation::apply(const CVector& x, int symbol, ChannelMode mode) const {
  if (mode == ChannelMode::simplified) return phase_vector(tau_, eps_, symbol, cfg_).cwiseProduct(x);
  return phi(eps_, symbol, cfg_) * (kernel_ * psi_.cwiseProduct(x));
}

CVector UserRotation::column(int row, int symbol, ChannelMode mode) const {
  const int s = cfg_.subcarriers_per_user;
  if (row < 1 || row > s) throw std::out_of_range("codeword row out of range");
  if (mode == ChannelMode::simplified) {
    CVector e = CVector::Zero(s);
    e(row - 1) = phase_coeff(tau_, eps_, symbol, cfg_.subcarrier_indices[row - 1], cfg_);
    return e;
  }
  return phi(eps_, symbol, cfg_) * psi_(row - 1) * kernel_.col(row - 1);
}

CMatrix simulate_pilot_symbol(std::span<const ActiveUser> users, int stage, std::span<const int> codewords,
                              const SystemConfig& cfg, Rng& rng, ChannelMode mode) {
  if (codewords.size() != users.size()) throw std::invalid_argument("one codeword index per user required");
  CMatrix y = CMatrix::Zero(cfg.subcarriers_per_user, cfg.antennas);
  const double amp = std::sqrt(cfg.pilot_power());
  for (std::size_t k = 0; k < users.size(); ++k) {
    const auto& u = users[k];
    CVector col;
    if (mode == ChannelMode::simplified) {
      col = CVector::Zero(cfg.subcarriers_per_user);
      const int row = codewords[k];
      col(row - 1) = phase_coeff(u.tau, u.eps, stage, cfg.subcarrier_indices[row - 1], cfg);
    } else {
      // Only column `row` of P_eps^t P_tau is needed: phi^t psi^(1 - n_row) P(n_row - n_a + eps).
      const int row = codewords[k];
      const int n_row = cfg.subcarrier_indices[row - 1];
      const cplx lead = phi(u.eps, stage, cfg) * root_of_unity(static_cast<long long>(u.tau) * (1 - n_row), cfg.num_subcarriers);
      col.resize(cfg.subcarriers_per_user);
      for (int a = 0; a < cfg.subcarriers_per_user; ++a)
        col(a) = lead * dirichlet_kernel(n_row - cfg.subcarrier_indices[a] + u.eps, cfg.num_subcarriers);
    }
    y.noalias() += (amp * col) * u.channel.transpose();
  }
  add_noise(y, cfg, rng);
  return y;
}

CMatrix simulate_data_symbol(std::span<const ActiveUser> users, std::span<const UserRotation> rotations,
                             std::span<const CVector> symbols, int stage, const SystemConfig& cfg, Rng& rng,
                             ChannelMode mode) {
  if (symbols.size() != users.size() || rotations.size() != users.size())
    throw std::invalid_argument("one symbol vector and rotation per user required");
  CMatrix y = CMatrix::Zero(cfg.subcarriers_per_user, cfg.antennas);
  for (std::size_t k = 0; k < users.size(); ++k) {
    if (symbols[k].isZero(0.0)) continue;
    y.noalias() += rotations[k].apply(symbols[k], stage, mode) * users[k].channel.transpose();
  }
  add_noise(y, cfg, rng);
  return y;
}

CMatrix simulate_data_symbol(std::span<const ActiveUser> users, std::span<const CVector> symbols, int stage,
                             const SystemConfig& cfg, Rng& rng, ChannelMode mode) {
  std::vector<UserRotation> rot;
  rot.reserve(users.size());
  for (const auto& u : users) rot.emplace_back(u.tau, u.eps, cfg);
  return simulate_data_symbol(users, rot, symbols, stage, cfg, rng, mode);
}

CVector draw_channel(const SystemConfig& cfg, Rng& rng) {
  CVector h(cfg.antennas);
  for (int m = 0; m < cfg.antennas; ++m) h(m) = complex_gaussian(rng, cfg.channel_var);
  return h;
}

}  // namespace ura
