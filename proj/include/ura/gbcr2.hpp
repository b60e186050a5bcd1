#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "ura/collision_graph.hpp"
#include "ura/phy_model.hpp"
#include "ura/rx_frontend.hpp"

namespace ura {

/// One accepted path with its reconstructed channel and grid TFO.
struct RecoveredUser {
  Path path{};
  CVector h_hat;
  int tau = 0;
  double eps = 0.0;
  double mse = 0.0;
  std::array<bool, kStages> collided{};
  int noncollided = 0;                  // |V_p|
  std::array<CVector, kStages> rows;    // observation rows when the path was extracted
};

struct GbcrResult {
  std::vector<RecoveredUser> users;
  int iterations = 0;
};

/// Paths listed here are evaluated at their single TFO point instead of
/// the full grid (re-estimation with known offsets, genie runs).
using TfoOverrides = std::map<Path, TfoPoint>;

struct GbcrOptions {
  const TfoOverrides* fixed = nullptr;
  /// One line per iteration:
  ///   iter=<n> path=<a>,<b>,<c>,<d> mse=<v> tau=<d> eps=<e> status=accepted|rejected
  ///   vp=<stages> sic=<stage>:<row>;...
  std::ostream* trace = nullptr;
};

/// Unit-modulus phases of the grid for every (point, stage, row).
class GridPhases {
 public:
  GridPhases(const PhaseGrid& grid, const SystemConfig& cfg);
  const std::vector<TfoPoint>& points() const { return points_; }
  /// stage and row are 1-based.
  cplx at(std::size_t point, int stage, int row) const {
    return table_[(point * kStages + (stage - 1)) * rows_ + (row - 1)];
  }

 private:
  std::vector<TfoPoint> points_;
  int rows_;
  std::vector<cplx> table_;
};

/// gamma = gamma_coeff * M * sigma_eff^2.
double collision_threshold(const SystemConfig& cfg, double effective_noise_var);

std::array<CVector, kStages> path_rows(const Path& path, const PilotObservationSet& obs);
std::array<cplx, kStages> path_phases(const Path& path, const TfoPoint& tfo, const SystemConfig& cfg);
std::array<CVector, kStages> derotate(const std::array<CVector, kStages>& rows, const std::array<cplx, kStages>& p);

/// Sum over stage pairs of || u_i - u_j ||^2 for de-rotated rows u.
double pairwise_mse(std::span<const CVector> derotated);
/// Every pair satisfies || u_i - u_j ||^2 < max(||u_i||^2, ||u_j||^2).
bool rows_valid(std::span<const CVector> derotated);
/// Index of the stage with the lowest energy (first on ties).
int reference_stage(std::span<const CVector> derotated);
/// || u_stage - u_ref ||^2 > gamma.
bool stage_collided(std::span<const CVector> derotated, int stage, double gamma);
/// Mean of the rows with collided[i] == false. Throws if there is none.
CVector average_rows(std::span<const CVector> derotated, std::span<const bool> collided);

double path_mse(const Path& path, const PilotObservationSet& obs, const TfoPoint& tfo, const SystemConfig& cfg);
bool path_valid(const Path& path, const TfoPoint& tfo, const PilotObservationSet& obs, const SystemConfig& cfg);
/// `stage` is 0-based.
bool node_collided(const Path& path, int stage, const TfoPoint& tfo, const PilotObservationSet& obs, double gamma,
                   const SystemConfig& cfg);
CVector reconstruct_channel(const Path& path, std::span<const bool> collided, const PilotObservationSet& obs,
                            const TfoPoint& tfo, const SystemConfig& cfg);

/// G^stage(row, :) -= p^stage(row) h^T. stage and row are 1-based.
void sic_update(PilotObservationSet& obs, int stage, int row, const CVector& h, const TfoPoint& tfo,
                const SystemConfig& cfg);

struct PathChoice {
  Path path{};
  TfoPoint tfo;
  double mse = 0.0;
};

/// argmin over P x grid of the path MSE. Paths are visited in
/// lexicographic order and the grid delay-major, and only a strictly
/// smaller value replaces the incumbent. Throws on an empty P.
PathChoice min_weight_search(const std::set<Path>& paths, const PilotObservationSet& obs, const PhaseGrid& grid,
                             const SystemConfig& cfg);

/// Minimum-weight extraction with validity and collision tests, channel
/// reconstruction and SIC, until P is empty. `obs` holds the residual
/// observations afterwards.
GbcrResult run_gbcr2(PilotObservationSet& obs, std::set<Path> paths, const PhaseGrid& grid, const SystemConfig& cfg,
                     const GbcrOptions& options = {});

}  // namespace ura
