#include "ura/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "ura/rng.hpp"

namespace ura {

namespace {

using Word = std::uint64_t;

struct DenseGf2 {
  int rows = 0;
  int cols = 0;
  int words = 0;
  std::vector<Word> data;

  DenseGf2(int r, int c) : rows(r), cols(c), words((c + 63) / 64), data(static_cast<std::size_t>(r) * words, 0) {}

  Word* row(int r) { return data.data() + static_cast<std::size_t>(r) * words; }
  bool get(int r, int c) const { return (data[static_cast<std::size_t>(r) * words + c / 64] >> (c % 64)) & 1U; }
  void set(int r, int c) { row(r)[c / 64] |= Word{1} << (c % 64); }
  void swap_rows(int a, int b) {
    if (a != b) std::swap_ranges(row(a), row(a) + words, row(b));
  }
  void xor_into(int dst, int src) {
    Word* d = row(dst);
    const Word* s = row(src);
    for (int w = 0; w < words; ++w) d[w] ^= s[w];
  }
};

DenseGf2 to_dense(int n, const std::vector<std::vector<int>>& checks) {
  DenseGf2 h(static_cast<int>(checks.size()), n);
  for (int r = 0; r < h.rows; ++r)
    for (int v : checks[r]) {
      if (v < 0 || v >= n) throw std::invalid_argument("LDPC check references variable out of range");
      if (h.get(r, v)) throw std::invalid_argument("LDPC check lists a variable twice");
      h.set(r, v);
    }
  return h;
}

// Reduced row echelon form, pivoting on columns from the last to the first
// so that the parity positions end up at the tail when possible.
std::vector<int> reduce_from_right(DenseGf2& h) {
  std::vector<int> pivots;
  int rank = 0;
  for (int c = h.cols - 1; c >= 0 && rank < h.rows; --c) {
    int found = -1;
    for (int r = rank; r < h.rows; ++r)
      if (h.get(r, c)) {
        found = r;
        break;
      }
    if (found < 0) continue;
    h.swap_rows(rank, found);
    for (int r = 0; r < h.rows; ++r)
      if (r != rank && h.get(r, c)) h.xor_into(r, rank);
    pivots.push_back(c);
    ++rank;
  }
  return pivots;
}

// PEG: every new edge of variable v goes to a check as far from v as the
// current graph allows, lowest degree first, random among equals.
std::vector<std::vector<int>> peg_checks(int n, int m, int column_weight, Rng& rng) {
  std::vector<std::vector<int>> check_vars(m);
  std::vector<std::vector<int>> var_checks(n);
  std::vector<int> degree(m, 0);

  auto pick_min_degree = [&](const std::vector<int>& candidates) {
    int best = degree[candidates.front()];
    for (int c : candidates) best = std::min(best, degree[c]);
    std::vector<int> ties;
    for (int c : candidates)
      if (degree[c] == best) ties.push_back(c);
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    return ties[pick(rng)];
  };

  for (int v = 0; v < n; ++v) {
    for (int e = 0; e < column_weight; ++e) {
      std::vector<int> candidates;
      if (var_checks[v].empty()) {
        candidates.resize(m);
        std::iota(candidates.begin(), candidates.end(), 0);
      } else {
        std::vector<char> reached(m, 0), var_seen(n, 0);
        std::vector<int> frontier_vars = {v};
        var_seen[v] = 1;
        int reached_count = 0;
        std::vector<int> last_new;
        while (true) {
          std::vector<int> new_checks;
          for (int u : frontier_vars)
            for (int c : var_checks[u])
              if (!reached[c]) {
                reached[c] = 1;
                new_checks.push_back(c);
              }
          if (new_checks.empty()) {
            for (int c = 0; c < m; ++c)
              if (!reached[c]) candidates.push_back(c);
            if (candidates.empty()) candidates = last_new;
            break;
          }
          reached_count += static_cast<int>(new_checks.size());
          if (reached_count == m) {
            candidates = new_checks;
            break;
          }
          last_new = new_checks;
          std::vector<int> next_vars;
          for (int c : new_checks)
            for (int u : check_vars[c])
              if (!var_seen[u]) {
                var_seen[u] = 1;
                next_vars.push_back(u);
              }
          frontier_vars = std::move(next_vars);
        }
        // Never connect the same pair twice.
        std::erase_if(candidates, [&](int c) {
          return std::find(var_checks[v].begin(), var_checks[v].end(), c) != var_checks[v].end();
        });
        if (candidates.empty())
          for (int c = 0; c < m; ++c)
            if (std::find(var_checks[v].begin(), var_checks[v].end(), c) == var_checks[v].end())
              candidates.push_back(c);
      }
      const int c = pick_min_degree(candidates);
      var_checks[v].push_back(c);
      check_vars[c].push_back(v);
      ++degree[c];
    }
  }
  for (auto& row : check_vars) std::sort(row.begin(), row.end());
  return check_vars;
}

double clamp_llr(double x) { return std::clamp(x, -500.0, 500.0); }

// Pairwise check-node combination: 2 atanh(tanh(a/2) tanh(b/2)).
double boxplus(double a, double b) {
  const double s = ((a < 0) != (b < 0)) ? -1.0 : 1.0;
  return s * std::min(std::abs(a), std::abs(b)) + std::log1p(std::exp(-std::abs(a + b))) -
         std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

LdpcCode LdpcCode::generate(int n, int k, int column_weight, std::uint64_t seed) {
  if (n <= k || k <= 0) throw std::invalid_argument("LDPC requires 0 < k < n");
  if (column_weight < 1 || column_weight > n - k) throw std::invalid_argument("bad LDPC column weight");
  const int m = n - k;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng rng(seed);
    auto checks = peg_checks(n, m, column_weight, rng);
    DenseGf2 h = to_dense(n, checks);
    if (static_cast<int>(reduce_from_right(h).size()) == m) return from_checks(n, std::move(checks));
    seed = splitmix64(seed);
  }
  throw std::runtime_error("could not construct a full-rank LDPC matrix");
}

LdpcCode LdpcCode::from_checks(int n, std::vector<std::vector<int>> checks) {
  const int m = static_cast<int>(checks.size());
  if (m == 0 || m >= n) throw std::invalid_argument("LDPC requires 0 < checks < n");
  DenseGf2 reduced = to_dense(n, checks);
  const auto found = reduce_from_right(reduced);
  if (static_cast<int>(found.size()) != m) throw std::invalid_argument("LDPC parity-check matrix is rank deficient");
  // Order parity positions by ascending column so that a matrix whose tail
  // is already invertible keeps its column order.
  std::vector<int> row_of(m);
  std::iota(row_of.begin(), row_of.end(), 0);
  std::sort(row_of.begin(), row_of.end(), [&](int a, int b) { return found[a] < found[b]; });
  std::vector<int> pivots(m);
  for (int r = 0; r < m; ++r) pivots[r] = found[row_of[r]];

  std::vector<char> is_pivot(n, 0);
  for (int c : pivots) is_pivot[c] = 1;
  LdpcCode code;
  code.n_ = n;
  code.k_ = n - m;
  for (int c = 0; c < n; ++c)
    if (!is_pivot[c]) code.column_order_.push_back(c);
  const std::vector<int> info_cols = code.column_order_;
  for (int c : pivots) code.column_order_.push_back(c);

  std::vector<int> new_pos(n);
  for (int j = 0; j < n; ++j) new_pos[code.column_order_[j]] = j;
  code.checks_.resize(m);
  for (int r = 0; r < m; ++r) {
    for (int v : checks[r]) code.checks_[r].push_back(new_pos[v]);
    std::sort(code.checks_[r].begin(), code.checks_[r].end());
  }
  code.var_checks_.assign(n, {});
  for (int r = 0; r < m; ++r)
    for (int v : code.checks_[r]) code.var_checks_[v].push_back(r);

  // Row r of the RREF has its pivot at pivots[r] and is zero on the other
  // pivot columns, so that parity bit equals the row restricted to info.
  code.parity_rows_.assign(m, Bits(code.k_, 0));
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < code.k_; ++j) code.parity_rows_[r][j] = reduced.get(row_of[r], info_cols[j]) ? 1 : 0;
  return code;
}

Bits LdpcCode::encode(std::span<const std::uint8_t> info) const {
  if (static_cast<int>(info.size()) != k_) throw std::invalid_argument("LDPC encode: wrong info length");
  Bits word(info.begin(), info.end());
  word.resize(n_, 0);
  for (int r = 0; r < n_ - k_; ++r) {
    std::uint8_t p = 0;
    const auto& g = parity_rows_[r];
    for (int j = 0; j < k_; ++j) p ^= g[j] & info[j];
    word[k_ + r] = p;
  }
  return word;
}

bool LdpcCode::is_codeword(std::span<const std::uint8_t> word) const {
  if (static_cast<int>(word.size()) != n_) return false;
  for (const auto& row : checks_) {
    std::uint8_t s = 0;
    for (int v : row) s ^= word[v] & 1U;
    if (s) return false;
  }
  return true;
}

BpResult LdpcCode::decode_bp(std::span<const double> llr, int max_iter) const {
  if (static_cast<int>(llr.size()) != n_) throw std::invalid_argument("LDPC decode: wrong LLR length");
  const int m = num_checks();

  std::vector<double> channel(n_);
  for (int v = 0; v < n_; ++v) channel[v] = clamp_llr(llr[v]);

  // Edge storage follows checks_ order; edge_of[v] lists (check, slot).
  std::vector<int> offset(m + 1, 0);
  for (int c = 0; c < m; ++c) offset[c + 1] = offset[c] + static_cast<int>(checks_[c].size());
  std::vector<double> v2c(offset[m]), c2v(offset[m], 0.0);
  std::vector<std::vector<int>> var_edges(n_);
  for (int c = 0; c < m; ++c)
    for (std::size_t i = 0; i < checks_[c].size(); ++i) var_edges[checks_[c][i]].push_back(offset[c] + static_cast<int>(i));

  BpResult out;
  out.bits.assign(n_, 0);
  std::vector<double> total = channel;

  auto decide = [&]() {
    bool undecided = false;
    for (int v = 0; v < n_; ++v) {
      out.bits[v] = total[v] < 0.0 ? 1 : 0;
      undecided |= total[v] == 0.0;
    }
    return !undecided && is_codeword(out.bits);
  };

  if (decide()) {
    out.converged = true;
    return out;
  }

  for (int v = 0; v < n_; ++v)
    for (int e : var_edges[v]) v2c[e] = channel[v];

  std::vector<double> fwd, bwd;
  for (int it = 1; it <= max_iter; ++it) {
    for (int c = 0; c < m; ++c) {
      const int base = offset[c];
      const int deg = offset[c + 1] - base;
      fwd.assign(deg, 0.0);
      bwd.assign(deg, 0.0);
      fwd[0] = v2c[base];
      for (int i = 1; i < deg; ++i) fwd[i] = boxplus(fwd[i - 1], v2c[base + i]);
      bwd[deg - 1] = v2c[base + deg - 1];
      for (int i = deg - 2; i >= 0; --i) bwd[i] = boxplus(bwd[i + 1], v2c[base + i]);
      for (int i = 0; i < deg; ++i) {
        double ext;
        if (deg == 1) {
          ext = 0.0;
        } else if (i == 0) {
          ext = bwd[1];
        } else if (i == deg - 1) {
          ext = fwd[deg - 2];
        } else {
          ext = boxplus(fwd[i - 1], bwd[i + 1]);
        }
        c2v[base + i] = clamp_llr(ext);
      }
    }
    for (int v = 0; v < n_; ++v) {
      double t = channel[v];
      for (int e : var_edges[v]) t += c2v[e];
      total[v] = t;
      for (int e : var_edges[v]) v2c[e] = clamp_llr(t - c2v[e]);
    }
    out.iterations = it;
    if (decide()) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

int LdpcCode::rank() const {
  DenseGf2 h = to_dense(n_, checks_);
  return static_cast<int>(reduce_from_right(h).size());
}

void LdpcCode::write(std::ostream& out) const {
  out << "ldpc " << n_ << ' ' << k_ << ' ' << num_checks() << '\n';
  for (int c = 0; c < num_checks(); ++c) {
    out << c << ':';
    for (int v : checks_[c]) out << ' ' << v;
    out << '\n';
  }
}

LdpcCode LdpcCode::read(std::istream& in) {
  std::string tag;
  int n = 0, k = 0, m = 0;
  if (!(in >> tag >> n >> k >> m) || tag != "ldpc") throw std::invalid_argument("LDPC read: bad header");
  std::vector<std::vector<int>> checks(m);
  std::string line;
  std::getline(in, line);
  for (int r = 0; r < m; ++r) {
    if (!std::getline(in, line)) throw std::invalid_argument("LDPC read: truncated");
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("LDPC read: missing ':'");
    if (std::stoi(line.substr(0, colon)) != r) throw std::invalid_argument("LDPC read: checks out of order");
    std::istringstream vars(line.substr(colon + 1));
    for (int v; vars >> v;) checks[r].push_back(v);
  }
  LdpcCode code = from_checks(n, std::move(checks));
  if (code.dimension() != k) throw std::invalid_argument("LDPC read: dimension mismatch");
  return code;
}

const LdpcCode& default_ldpc_code(int n, int k, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, std::uint64_t>, LdpcCode> cache;
  std::lock_guard lock(mu);
  auto key = std::make_tuple(n, k, seed);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, LdpcCode::generate(n, k, 3, seed)).first;
  return it->second;
}

}  // namespace ura
