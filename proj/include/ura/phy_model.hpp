#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ura/config.hpp"
#include "ura/rng.hpp"

namespace ura {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Ground truth of one active user. Stage indices are 1-based codeword
/// indices, which for the ESOP codebook are also the 1-based row of the
/// user's subcarrier in s.
struct ActiveUser {
  std::vector<std::uint8_t> payload;
  std::array<int, kStages> indices{};
  int tau = 0;
  double eps = 0.0;
  CVector channel;
};

/// A timing/frequency offset hypothesis.
struct TfoPoint {
  int tau = 0;
  double eps = 0.0;
  friend bool operator==(const TfoPoint&, const TfoPoint&) = default;
};

/// Receiver search grid: d = [1..D] and Q uniform samples of [-eps_max, eps_max].
struct PhaseGrid {
  std::vector<int> delays;
  std::vector<double> freqs;

  static PhaseGrid from_config(const SystemConfig& cfg);
  /// Row-major over (delay, freq): index = delay_idx * Q + freq_idx.
  std::vector<TfoPoint> points() const;
};

/// p^t(k) = psi^(1 - s_k) * omega^((N_cp + N_c) t - (N_c + 1) / 2) with
/// psi = exp(j 2 pi tau / N_c), omega = exp(j 2 pi eps / N_c). `symbol` is
/// the 1-based OFDM symbol index, `subcarrier` the 1-based subcarrier n_s.
cplx phase_coeff(int tau, double eps, int symbol, int subcarrier, const SystemConfig& cfg);

/// Same phase written as phi^t * omega^((N_c - 1) / 2) * psi^(1 - n_s), with
/// phi^t = omega^(N_cp + (t - 1)(N_cp + N_c)).
cplx phase_coeff_accumulated(int tau, double eps, int symbol, int subcarrier, const SystemConfig& cfg);

/// P(x) = sin(pi x) / (N sin(pi x / N)) * exp(j pi x (N - 1) / N), with the
/// removable singularities at integer x evaluated as their limits.
cplx dirichlet_kernel(double x, int n);

/// F_s D_eps^t F_s^H = phi^t [P]_{s x s}; entry (a, b) = phi^t P(n_b - n_a + eps).
CMatrix fo_matrix_exact(double eps, int symbol, const SystemConfig& cfg);

/// F_s (I)_tau F_s^H = diag(psi^(1 - n_s)).
CMatrix to_matrix_exact(int tau, const SystemConfig& cfg);

/// diag(p^t) of the simplified model, as an S-vector.
CVector phase_vector(int tau, double eps, int symbol, const SystemConfig& cfg);

/// || P_eps^t P_tau - diag(p^t) ||_F. Independent of tau and t because both
/// terms share the unit-modulus factors phi^t and diag(psi).
double approx_error(double eps, int tau, const SystemConfig& cfg);

/// Precomputed exact per-user rotation; applying it costs one S x S product.
class UserRotation {
 public:
  UserRotation(int tau, double eps, const SystemConfig& cfg);

  /// P^t x for the S-vector x (exact or diagonal model).
  CVector apply(const CVector& x, int symbol, ChannelMode mode) const;
  /// P^t e_row, i.e. one column of the rotation; row is 1-based.
  CVector column(int row, int symbol, ChannelMode mode) const;

 private:
  SystemConfig cfg_;
  int tau_;
  double eps_;
  CMatrix kernel_;   // [P]_{s x s}
  CVector psi_;      // psi^(1 - n_s)
};

/// Y^t for a pilot stage. Each user sends sqrt(pilot_power) on codeword
/// `codewords[k]` (1-based). Noise is added when cfg.noise_var > 0.
CMatrix simulate_pilot_symbol(std::span<const ActiveUser> users, int stage, std::span<const int> codewords,
                              const SystemConfig& cfg, Rng& rng, ChannelMode mode);

/// Y^t for a data symbol, t in [T_p + 1, T_p + T_d]. `symbols[k]` is user
/// k's frequency-domain S-vector for this OFDM symbol, already scaled.
CMatrix simulate_data_symbol(std::span<const ActiveUser> users, std::span<const CVector> symbols, int stage,
                             const SystemConfig& cfg, Rng& rng, ChannelMode mode);

/// Same as above with precomputed rotations (one per user).
CMatrix simulate_data_symbol(std::span<const ActiveUser> users, std::span<const UserRotation> rotations,
                             std::span<const CVector> symbols, int stage, const SystemConfig& cfg, Rng& rng,
                             ChannelMode mode);

/// i.i.d. CN(0, channel_var) channel of length M.
CVector draw_channel(const SystemConfig& cfg, Rng& rng);

}  // namespace ura
