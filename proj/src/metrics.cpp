#include "ura/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ura {

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("min_cost_assignment: cost matrix must be square");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Potentials u (rows), v (columns); way[] tracks the augmenting path.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j)
    if (match[j] > 0) assignment[match[j] - 1] = j - 1;
  return assignment;
}

double nmse(std::span<const CVector> truth, std::span<const CVector> estimate) {
  const int ka = static_cast<int>(truth.size());
  const int kh = static_cast<int>(estimate.size());
  double energy = 0.0;
  for (const auto& h : truth) energy += h.squaredNorm();
  if (ka == 0 || energy == 0.0) return 0.0;
  if (kh == 0) return 1.0;

  // Rows: true users then dummies; columns: estimates then dummies.
  const int n = ka + kh;
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kh; ++j) cost(i, j) = (truth[i] - estimate[j]).squaredNorm();
    for (int j = kh; j < n; ++j) cost(i, j) = truth[i].squaredNorm();
  }
  const auto a = min_cost_assignment(cost);
  double residual = 0.0;
  for (int i = 0; i < ka; ++i) residual += cost(i, a[i]);
  return residual / energy;
}

std::pair<double, double> pmd_pfa(std::span<const Bits> recovered, std::span<const Bits> truth) {
  auto in = [](std::span<const Bits> set, const Bits& x) { return std::find(set.begin(), set.end(), x) != set.end(); };
  double missed = 0.0;
  for (const auto& v : truth)
    if (!in(recovered, v)) missed += 1.0;
  double false_alarms = 0.0;
  for (const auto& v : recovered)
    if (!in(truth, v)) false_alarms += 1.0;
  const double pmd = truth.empty() ? 0.0 : missed / static_cast<double>(truth.size());
  const double pfa = recovered.empty() ? 0.0 : false_alarms / static_cast<double>(recovered.size());
  return {pmd, pfa};
}

double ebn0_to_power(double ebn0_db, const SystemConfig& cfg) {
  const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
  return ebn0 * cfg.message_bits * cfg.noise_var / cfg.total_channel_uses();
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace ura
