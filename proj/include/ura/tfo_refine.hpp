#pragma once

#include <span>
#include <vector>

#include "ura/gbcr2.hpp"

namespace ura {

struct TfoCandidate {
  TfoPoint tfo;
  double mse = 0.0;
};

/// The n_cand grid points with the smallest path MSE for the given rows,
/// ascending; equal values keep grid order.
std::vector<TfoCandidate> candidate_list(const Path& path, const std::array<CVector, kStages>& rows,
                                         const PhaseGrid& grid, const SystemConfig& cfg, int n_cand);
std::vector<TfoCandidate> candidate_list(const Path& path, const PilotObservationSet& obs, const PhaseGrid& grid,
                                         const SystemConfig& cfg, int n_cand);

/// rho = sum_{Re s > 0} s - sum_{Re s < 0} s. Entries with Re s == 0 are skipped.
cplx compensation_degree(std::span<const cplx> symbols);

/// s_j * conj(p(tau, eps)) at data channel use positions[j] (0-based over
/// the T_d x S data frame, symbol-major).
std::vector<cplx> derotate_data(std::span<const cplx> symbols, std::span<const int> positions, const TfoPoint& tfo,
                                const SystemConfig& cfg);

/// Index of the candidate whose de-rotation maximises |rho| over all the
/// user's data positions. Ties go to the earlier candidate.
std::size_t select_tfo(std::span<const TfoCandidate> candidates, std::span<const cplx> symbols,
                       std::span<const int> positions, const SystemConfig& cfg);

/// Re-runs the path extraction on a copy of the original observations with
/// P = the accepted paths, each pinned to its refined TFO. Users the re-run
/// does not accept keep their coarse channel.
std::vector<CVector> reestimate_channels(const PilotObservationSet& original, std::span<const RecoveredUser> users,
                                         std::span<const TfoPoint> refined, const PhaseGrid& grid,
                                         const SystemConfig& cfg);

}  // namespace ura
