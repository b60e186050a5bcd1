#include "ura/collision_graph.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace ura {

bool CollisionGraph::degenerate() const {
  return std::any_of(nodes.begin(), nodes.end(), [](const auto& v) { return v.empty(); });
}

void CollisionGraph::write(std::ostream& out) const {
  for (int i = 0; i < kStages; ++i) {
    out << "stage " << (i + 1) << ':';
    for (int n : nodes[i]) out << ' ' << n;
    out << '\n';
  }
  for (const auto& p : paths) out << "path " << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << p[3] << '\n';
}

std::set<Path> tree_decode(const NodeLists& nodes, const TreeCode& tree) {
  std::set<Path> paths;
  for (const auto& v : nodes)
    if (v.empty()) return paths;
  auto has = [](const std::vector<int>& v, int x) { return std::binary_search(v.begin(), v.end(), x); };
  for (int a : nodes[0])
    for (int b : nodes[1]) {
      const auto [c, d] = tree.parity_indices(a, b);
      if (has(nodes[2], c) && has(nodes[3], d)) paths.insert({a, b, c, d});
    }
  return paths;
}

CollisionGraph build_graph(NodeLists nodes, const TreeCode& tree) {
  for (auto& v : nodes) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  CollisionGraph g;
  g.paths = tree_decode(nodes, tree);
  g.nodes = std::move(nodes);
  return g;
}

void prune(std::set<Path>& paths, const Path& accepted) {
  if (paths.erase(accepted) != 1) throw std::logic_error("prune: path is not in the candidate set");
}

Eigen::MatrixXi selection_matrix(std::span<const int> user_indices, std::span<const int> nodes) {
  Eigen::MatrixXi d = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(user_indices.size()),
                                            static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < user_indices.size(); ++k)
    for (std::size_t n = 0; n < nodes.size(); ++n)
      if (user_indices[k] == nodes[n]) d(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = 1;
  return d;
}

}  // namespace ura
