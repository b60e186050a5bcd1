#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ura/config.hpp"
#include "ura/ldpc.hpp"
#include "ura/phy_model.hpp"

namespace ura {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(n^3)). Returns assignment[row] = column.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

/// Residual of the best one-to-one alignment of the estimated rows to the
/// true rows, divided by ||H||_F^2. Unmatched true rows count with their
/// full energy, surplus estimates are ignored. Defined as 0 when H is empty.
double nmse(std::span<const CVector> truth, std::span<const CVector> estimate);

/// (P_md, P_fa) of a duplicate-free recovered list against the true
/// messages. P_fa is 0 for an empty list, P_md is 0 when there are no users.
std::pair<double, double> pmd_pfa(std::span<const Bits> recovered, std::span<const Bits> truth);

/// P = (Eb/N0) B N0 / L with N0 = noise_var and L the total channel uses.
double ebn0_to_power(double ebn0_db, const SystemConfig& cfg);

double to_db(double linear);

}  // namespace ura
