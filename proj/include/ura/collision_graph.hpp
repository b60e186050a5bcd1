#pragma once

#include <array>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ura/config.hpp"
#include "ura/tx_chain.hpp"

namespace ura {

/// Node values (1-based codeword indices) of one candidate user, one per stage.
using Path = std::array<int, kStages>;
using NodeLists = std::array<std::vector<int>, kStages>;

/// Stage node lists plus the surviving candidate paths.
struct CollisionGraph {
  NodeLists nodes;
  std::set<Path> paths;

  bool degenerate() const;

  /// Text dump:
  ///   stage <i>: <node> <node> ...     (i = 1..4, ascending nodes)
  ///   path <a> <b> <c> <d>             (one line per path, lexicographic)
  void write(std::ostream& out) const;
};

/// Every (a, b) in v1 x v2 whose parity indices (c, d) are present in v3
/// and v4. Any empty stage gives an empty set.
std::set<Path> tree_decode(const NodeLists& nodes, const TreeCode& tree);

CollisionGraph build_graph(NodeLists nodes, const TreeCode& tree);

/// Removes exactly `accepted`; throws std::logic_error if it is not in P.
void prune(std::set<Path>& paths, const Path& accepted);

/// Ground-truth K_a x N_i selection matrix of one stage: entry (k, n) is 1
/// when user k's index at this stage equals nodes[n].
Eigen::MatrixXi selection_matrix(std::span<const int> user_indices, std::span<const int> nodes);

}  // namespace ura
