#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "ura/ldpc.hpp"
#include "ura/phy_model.hpp"

namespace ura {

/// The B message bits cut into the two preamble halves and the LDPC payload.
struct MessageSplit {
  Bits v1;
  Bits v2;
  Bits vc;
};

MessageSplit split_message(std::span<const std::uint8_t> payload, const SystemConfig& cfg);
Bits join_message(const MessageSplit& parts);

/// Dense GF(2) matrix, row-major.
struct Gf2Matrix {
  int rows = 0;
  int cols = 0;
  Bits data;

  Gf2Matrix() = default;
  Gf2Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0) {}
  std::uint8_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  Bits multiply(std::span<const std::uint8_t> v) const;
};

/// Outer tree code producing the two parity segments of the preamble:
///   r1 = G1 v1 + G2 v2
///   r2 = G3 v1 + G4 v2 + G5 r1        (mod 2)
class TreeCode {
 public:
  TreeCode(int bits, std::array<Gf2Matrix, 5> g);

  /// G1..G5 filled in that order, row-major, one draw per entry from a
  /// generator seeded with `seed`.
  static TreeCode generate(int bits, std::uint64_t seed);

  int bits() const { return bits_; }
  const Gf2Matrix& matrix(int which) const { return g_.at(which); }

  std::pair<Bits, Bits> encode(std::span<const std::uint8_t> v1, std::span<const std::uint8_t> v2) const;
  /// (i3, i4) implied by (i1, i2); all 1-based codeword indices.
  std::pair<int, int> parity_indices(int i1, int i2) const;

  /// Text dump: "tree <bits>" then five blocks "G<k>" of `bits` rows of 0/1.
  void write(std::ostream& out) const;

 private:
  int bits_;
  std::array<Gf2Matrix, 5> g_;
};

/// Big-endian value of the bits, plus one.
int segment_to_index(std::span<const std::uint8_t> bits);
Bits index_to_segment(int index, int bits);

/// ESOP codeword e_index of length `length` (1-based index).
Eigen::VectorXd esop_codeword(int index, int length);

/// User-specific IDMA permutation of the 0-based data positions
/// [0, length). Seeded from derive_seed({seed, i1, i2, i3, i4}).
std::vector<int> build_interleaver(const std::array<int, kStages>& indices, int length, std::uint64_t seed);

/// Data-phase frame of one user.
struct DataFrame {
  Bits coded;                    // LDPC codeword
  std::vector<int> positions;    // positions[j]: channel use carrying coded bit j
  std::vector<cplx> symbols;     // length T_d * S, zero where padded

  /// Slice for data symbol d in [0, T_d): entries d*S .. d*S + S - 1.
  CVector slice(int d, int subcarriers) const;
};

/// LDPC-encode, BPSK-map (0 -> +sqrt(P_sym), 1 -> -sqrt(P_sym)) and place
/// coded bit j at channel use interleaver[j]; the rest stays zero.
DataFrame encode_data(std::span<const std::uint8_t> vc, std::span<const int> interleaver, const LdpcCode& code,
                      const SystemConfig& cfg);

/// Everything the transmitter derives from one payload.
struct EncodedUser {
  MessageSplit split;
  Bits r1, r2;
  std::array<int, kStages> indices{};
  std::vector<int> interleaver;
  DataFrame frame;
};

EncodedUser encode_user(std::span<const std::uint8_t> payload, const TreeCode& tree, const LdpcCode& code,
                        const SystemConfig& cfg);

}  // namespace ura
