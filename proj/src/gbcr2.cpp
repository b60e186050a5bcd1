#include "ura/gbcr2.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ura {

GridPhases::GridPhases(const PhaseGrid& grid, const SystemConfig& cfg)
    : points_(grid.points()), rows_(cfg.subcarriers_per_user) {
  table_.resize(points_.size() * kStages * rows_);
  for (std::size_t g = 0; g < points_.size(); ++g)
    for (int t = 1; t <= kStages; ++t)
      for (int r = 1; r <= rows_; ++r)
        table_[(g * kStages + (t - 1)) * rows_ + (r - 1)] =
            phase_coeff(points_[g].tau, points_[g].eps, t, cfg.subcarrier_indices[r - 1], cfg);
}

double collision_threshold(const SystemConfig& cfg, double effective_noise_var) {
  return cfg.gamma_coeff * cfg.antennas * effective_noise_var;
}

std::array<CVector, kStages> path_rows(const Path& path, const PilotObservationSet& obs) {
  std::array<CVector, kStages> rows;
  for (int i = 0; i < kStages; ++i) rows[i] = obs.g[i].row(path[i] - 1).transpose();
  return rows;
}

std::array<cplx, kStages> path_phases(const Path& path, const TfoPoint& tfo, const SystemConfig& cfg) {
  std::array<cplx, kStages> p;
  for (int i = 0; i < kStages; ++i)
    p[i] = phase_coeff(tfo.tau, tfo.eps, i + 1, cfg.subcarrier_indices[path[i] - 1], cfg);
  return p;
}

std::array<CVector, kStages> derotate(const std::array<CVector, kStages>& rows, const std::array<cplx, kStages>& p) {
  std::array<CVector, kStages> u;
  for (int i = 0; i < kStages; ++i) u[i] = rows[i] * std::conj(p[i]);
  return u;
}

double pairwise_mse(std::span<const CVector> u) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j) sum += (u[i] - u[j]).squaredNorm();
  return sum;
}

bool rows_valid(std::span<const CVector> u) {
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j)
      if (!((u[i] - u[j]).squaredNorm() < std::max(u[i].squaredNorm(), u[j].squaredNorm()))) return false;
  return true;
}

int reference_stage(std::span<const CVector> u) {
  int best = 0;
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i].squaredNorm() < u[best].squaredNorm()) best = static_cast<int>(i);
  return best;
}

bool stage_collided(std::span<const CVector> u, int stage, double gamma) {
  return (u[stage] - u[reference_stage(u)]).squaredNorm() > gamma;
}

CVector average_rows(std::span<const CVector> u, std::span<const bool> collided) {
  CVector sum = CVector::Zero(u.front().size());
  int count = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!collided[i]) {
      sum += u[i];
      ++count;
    }
  if (count == 0) throw std::invalid_argument("average_rows: no non-collided stage");
  return sum / static_cast<double>(count);
}

double path_mse(const Path& path, const PilotObservationSet& obs, const TfoPoint& tfo, const SystemConfig& cfg) {
  return pairwise_mse(derotate(path_rows(path, obs), path_phases(path, tfo, cfg)));
}

bool path_valid(const Path& path, const TfoPoint& tfo, const PilotObservationSet& obs, const SystemConfig& cfg) {
  return rows_valid(derotate(path_rows(path, obs), path_phases(path, tfo, cfg)));
}

bool node_collided(const Path& path, int stage, const TfoPoint& tfo, const PilotObservationSet& obs, double gamma,
                   const SystemConfig& cfg) {
  return stage_collided(derotate(path_rows(path, obs), path_phases(path, tfo, cfg)), stage, gamma);
}

CVector reconstruct_channel(const Path& path, std::span<const bool> collided, const PilotObservationSet& obs,
                            const TfoPoint& tfo, const SystemConfig& cfg) {
  return average_rows(derotate(path_rows(path, obs), path_phases(path, tfo, cfg)), collided);
}

void sic_update(PilotObservationSet& obs, int stage, int row, const CVector& h, const TfoPoint& tfo,
                const SystemConfig& cfg) {
  const cplx p = phase_coeff(tfo.tau, tfo.eps, stage, cfg.subcarrier_indices[row - 1], cfg);
  obs.g[stage - 1].row(row - 1) -= p * h.transpose();
}

namespace {

struct Best {
  TfoPoint tfo;
  double mse = std::numeric_limits<double>::infinity();
};

Best best_over_grid(const Path& path, const PilotObservationSet& obs, const GridPhases& phases,
                    const TfoOverrides* fixed, const SystemConfig& cfg) {
  const auto rows = path_rows(path, obs);
  if (fixed) {
    if (auto it = fixed->find(path); it != fixed->end())
      return {it->second, pairwise_mse(derotate(rows, path_phases(path, it->second, cfg)))};
  }
  Best best;
  std::array<CVector, kStages> u;
  for (std::size_t g = 0; g < phases.points().size(); ++g) {
    for (int i = 0; i < kStages; ++i) u[i] = rows[i] * std::conj(phases.at(g, i + 1, path[i]));
    const double mse = pairwise_mse(u);
    if (mse < best.mse) best = {phases.points()[g], mse};
  }
  return best;
}

}  // namespace

PathChoice min_weight_search(const std::set<Path>& paths, const PilotObservationSet& obs, const PhaseGrid& grid,
                             const SystemConfig& cfg) {
  if (paths.empty()) throw std::invalid_argument("min_weight_search: empty path set");
  const GridPhases phases(grid, cfg);
  PathChoice choice;
  choice.mse = std::numeric_limits<double>::infinity();
  for (const auto& p : paths) {
    const Best b = best_over_grid(p, obs, phases, nullptr, cfg);
    if (b.mse < choice.mse) choice = {p, b.tfo, b.mse};
  }
  return choice;
}

GbcrResult run_gbcr2(PilotObservationSet& obs, std::set<Path> paths, const PhaseGrid& grid, const SystemConfig& cfg,
                     const GbcrOptions& options) {
  GbcrResult result;
  const GridPhases phases(grid, cfg);
  const double gamma = collision_threshold(cfg, obs.noise_var);
  std::map<Path, Best> cache;

  while (!paths.empty()) {
    ++result.iterations;
    const Path* chosen = nullptr;
    Best chosen_best;
    for (const auto& p : paths) {
      auto it = cache.find(p);
      if (it == cache.end()) it = cache.emplace(p, best_over_grid(p, obs, phases, options.fixed, cfg)).first;
      if (!chosen || it->second.mse < chosen_best.mse) {
        chosen = &p;
        chosen_best = it->second;
      }
    }
    const Path path = *chosen;
    prune(paths, path);
    cache.erase(path);

    const auto rows = path_rows(path, obs);
    const auto u = derotate(rows, path_phases(path, chosen_best.tfo, cfg));

    std::ostringstream line;
    if (options.trace) {
      line.precision(10);
      line << "iter=" << result.iterations << " path=" << path[0] << ',' << path[1] << ',' << path[2] << ','
           << path[3] << " mse=" << chosen_best.mse << " tau=" << chosen_best.tfo.tau
           << " eps=" << chosen_best.tfo.eps;
    }
    auto emit = [&](const char* status, const std::string& vp, const std::string& sic) {
      if (options.trace) *options.trace << line.str() << " status=" << status << " vp=" << vp << " sic=" << sic << '\n';
    };

    if (!rows_valid(u)) {
      emit("rejected", "", "");
      continue;
    }
    RecoveredUser user;
    user.path = path;
    user.tau = chosen_best.tfo.tau;
    user.eps = chosen_best.tfo.eps;
    user.mse = chosen_best.mse;
    user.rows = rows;
    std::string vp;
    for (int i = 0; i < kStages; ++i) {
      user.collided[i] = stage_collided(u, i, gamma);
      if (!user.collided[i]) {
        ++user.noncollided;
        vp += (vp.empty() ? "" : ",") + std::to_string(i + 1);
      }
    }
    if (user.noncollided == 0) {
      emit("rejected", "", "");
      continue;
    }
    user.h_hat = average_rows(u, user.collided);

    std::string sic;
    for (int i = 0; i < kStages; ++i) {
      if (!user.collided[i]) continue;
      sic_update(obs, i + 1, path[i], user.h_hat, chosen_best.tfo, cfg);
      sic += (sic.empty() ? "" : ";") + std::to_string(i + 1) + ':' + std::to_string(path[i]);
      for (auto it = cache.begin(); it != cache.end();) {
        if (it->first[i] == path[i])
          it = cache.erase(it);
        else
          ++it;
      }
    }
    emit("accepted", vp, sic);
    result.users.push_back(std::move(user));
  }
  return result;
}

}  // namespace ura
