#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ura {

using Bits = std::vector<std::uint8_t>;

struct BpResult {
  Bits bits;
  bool converged = false;
  int iterations = 0;
};

/// Binary LDPC code with a sparse parity-check matrix and a systematic
/// encoder: encode(info) starts with the info bits.
///
/// LLR convention everywhere: positive means bit 0.
class LdpcCode {
 public:
  /// Progressive-edge-growth construction with constant column weight.
  /// Tie-breaks draw from a generator seeded with `seed`; if the resulting
  /// matrix is rank deficient the construction is repeated with
  /// splitmix64(seed) until H has full rank n - k.
  static LdpcCode generate(int n, int k, int column_weight, std::uint64_t seed);

  /// Builds a code from check rows (each a list of 0-based variable
  /// indices). Columns are permuted so that the last n - k positions are
  /// parity; the permutation is available via column_order().
  static LdpcCode from_checks(int n, std::vector<std::vector<int>> checks);

  int length() const { return n_; }
  int dimension() const { return k_; }
  int num_checks() const { return static_cast<int>(checks_.size()); }
  const std::vector<std::vector<int>>& checks() const { return checks_; }
  /// column_order()[j] is the column of the input matrix now at position j.
  const std::vector<int>& column_order() const { return column_order_; }

  Bits encode(std::span<const std::uint8_t> info) const;
  bool is_codeword(std::span<const std::uint8_t> word) const;

  /// Flooding sum-product decoder in the log domain. Convergence means the
  /// hard decision satisfies every check and no posterior LLR is exactly 0.
  BpResult decode_bp(std::span<const double> llr, int max_iter) const;

  /// Rank of H over GF(2).
  int rank() const;

  /// Sparse text dump:
  ///   ldpc <n> <k> <m>
  ///   <check index>: <var> <var> ...      (one line per check, 0-based)
  void write(std::ostream& out) const;
  static LdpcCode read(std::istream& in);

  /// Dense parity part of the systematic generator, one row per parity bit:
  /// parity[r] = xor_j generator_parity()[r][j] & info[j].
  const std::vector<Bits>& generator_parity() const { return parity_rows_; }

 private:
  LdpcCode() = default;

  int n_ = 0;
  int k_ = 0;
  std::vector<std::vector<int>> checks_;
  std::vector<std::vector<int>> var_checks_;
  std::vector<Bits> parity_rows_;
  std::vector<int> column_order_;
};

/// The shared (200, 86) code: column weight 3, public seed.
const LdpcCode& default_ldpc_code(int n, int k, std::uint64_t seed);

}  // namespace ura
