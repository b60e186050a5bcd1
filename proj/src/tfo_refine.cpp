#include "ura/tfo_refine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ura {

std::vector<TfoCandidate> candidate_list(const Path& path, const std::array<CVector, kStages>& rows,
                                         const PhaseGrid& grid, const SystemConfig& cfg, int n_cand) {
  const auto points = grid.points();
  if (n_cand < 1 || n_cand > static_cast<int>(points.size()))
    throw std::invalid_argument("candidate_list: n_cand must be in [1, D*Q]");
  std::vector<TfoCandidate> all;
  all.reserve(points.size());
  for (const auto& pt : points) all.push_back({pt, pairwise_mse(derotate(rows, path_phases(path, pt, cfg)))});
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.mse < b.mse; });
  all.resize(n_cand);
  return all;
}

std::vector<TfoCandidate> candidate_list(const Path& path, const PilotObservationSet& obs, const PhaseGrid& grid,
                                         const SystemConfig& cfg, int n_cand) {
  return candidate_list(path, path_rows(path, obs), grid, cfg, n_cand);
}

cplx compensation_degree(std::span<const cplx> symbols) {
  cplx rho{0.0, 0.0};
  for (const auto& s : symbols) {
    if (s.real() > 0.0)
      rho += s;
    else if (s.real() < 0.0)
      rho -= s;
  }
  return rho;
}

std::vector<cplx> derotate_data(std::span<const cplx> symbols, std::span<const int> positions, const TfoPoint& tfo,
                                const SystemConfig& cfg) {
  if (symbols.size() != positions.size()) throw std::invalid_argument("derotate_data: size mismatch");
  const int s = cfg.subcarriers_per_user;
  std::vector<cplx> out(symbols.size());
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    const int q = positions[j];
    const int t = cfg.pilot_symbols + 1 + q / s;
    out[j] = symbols[j] * std::conj(phase_coeff(tfo.tau, tfo.eps, t, cfg.subcarrier_indices[q % s], cfg));
  }
  return out;
}

std::size_t select_tfo(std::span<const TfoCandidate> candidates, std::span<const cplx> symbols,
                       std::span<const int> positions, const SystemConfig& cfg) {
  if (candidates.empty()) throw std::invalid_argument("select_tfo: no candidates");
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double score = std::abs(compensation_degree(derotate_data(symbols, positions, candidates[c].tfo, cfg)));
    if (score > best_score) {
      best = c;
      best_score = score;
    }
  }
  return best;
}

std::vector<CVector> reestimate_channels(const PilotObservationSet& original, std::span<const RecoveredUser> users,
                                         std::span<const TfoPoint> refined, const PhaseGrid& grid,
                                         const SystemConfig& cfg) {
  if (users.size() != refined.size()) throw std::invalid_argument("reestimate_channels: one TFO per user");
  std::vector<CVector> out;
  out.reserve(users.size());
  TfoOverrides fixed;
  std::set<Path> paths;
  for (std::size_t k = 0; k < users.size(); ++k) {
    out.push_back(users[k].h_hat);
    fixed[users[k].path] = refined[k];
    paths.insert(users[k].path);
  }
  PilotObservationSet obs = original;
  GbcrOptions options;
  options.fixed = &fixed;
  const auto rerun = run_gbcr2(obs, std::move(paths), grid, cfg, options);
  for (const auto& r : rerun.users)
    for (std::size_t k = 0; k < users.size(); ++k)
      if (users[k].path == r.path) out[k] = r.h_hat;
  return out;
}

}  // namespace ura
