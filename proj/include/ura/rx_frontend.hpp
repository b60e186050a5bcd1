#pragma once

#include <array>
#include <span>
#include <vector>

#include "ura/phy_model.hpp"

namespace ura {

/// Per-stage MMSE pilot outputs G^t (N x M each) and the per-entry noise
/// variance left in them. SIC rewrites rows in place.
struct PilotObservationSet {
  std::array<CMatrix, kStages> g;
  double noise_var = 0.0;
};

/// A^H (A A^H + sigma^2 I)^-1 Y for the scaled identity codebook
/// A = sqrt(signal_power) I, i.e. Y * sqrt(p) / (p + sigma^2).
CMatrix mmse_pilot_estimate(const CMatrix& y, double signal_power, double noise_var);

/// Noise variance per entry of the estimate above: sigma^2 p / (p + sigma^2)^2.
double mmse_pilot_noise_var(double signal_power, double noise_var);

/// Rows whose energy exceeds `threshold`, 1-based and ascending.
std::vector<int> detect_active_rows(const CMatrix& g, double threshold);

/// Activity threshold act_thresh_coeff * M * sigma_eff^2.
double activity_threshold(const SystemConfig& cfg, double effective_noise_var);

/// X = H^* (H^T H^* + sigma^2 I_M)^-1 Y^T, evaluated in the K x K form
/// (H^* H^T + sigma^2 I_K)^-1 H^* Y^T. `h` is K x M, `y` is S x M, the
/// result is K x S. Throws std::domain_error when sigma^2 = 0 and H has
/// dependent rows.
CMatrix mmse_data_estimate(const CMatrix& y, const CMatrix& h, double noise_var);

/// Output of the data-phase separation for one user, in coded-bit order.
struct SeparatedUser {
  std::vector<cplx> symbols;  // MMSE estimate of p * b, b in {+1, -1}
  std::vector<double> bias;   // beta = [G (G + sigma^2 I)^-1]_kk of the local system
};

/// Runs the MMSE separation on every data channel use, restricted to the
/// users whose interleaver places a coded bit there. `y_data[d]` is the
/// S x M observation of data symbol d, `positions[k][j]` the channel use of
/// user k's coded bit j and `h[k]` its estimated channel; the channels are
/// scaled by sqrt(symbol_power) so that the estimates live on the unit
/// constellation.
std::vector<SeparatedUser> separate_data(std::span<const CMatrix> y_data, std::span<const CVector> h,
                                         std::span<const std::vector<int>> positions, double symbol_power,
                                         double noise_var);

/// LLRs 4 Re(s) / (1 - beta) of de-rotated estimates, clamped to +-50.
std::vector<double> bpsk_llr(std::span<const cplx> derotated, std::span<const double> bias);

}  // namespace ura
