#include "ura/tx_chain.hpp"

#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "ura/rng.hpp"

namespace ura {

MessageSplit split_message(std::span<const std::uint8_t> payload, const SystemConfig& cfg) {
  if (static_cast<int>(payload.size()) != cfg.message_bits)
    throw std::invalid_argument("split_message: payload must have message_bits bits");
  const auto bp = static_cast<std::size_t>(cfg.preamble_bits);
  MessageSplit out;
  out.v1.assign(payload.begin(), payload.begin() + bp);
  out.v2.assign(payload.begin() + bp, payload.begin() + 2 * bp);
  out.vc.assign(payload.begin() + 2 * bp, payload.end());
  return out;
}

Bits join_message(const MessageSplit& parts) {
  Bits out = parts.v1;
  out.insert(out.end(), parts.v2.begin(), parts.v2.end());
  out.insert(out.end(), parts.vc.begin(), parts.vc.end());
  return out;
}

Bits Gf2Matrix::multiply(std::span<const std::uint8_t> v) const {
  if (static_cast<int>(v.size()) != cols) throw std::invalid_argument("Gf2Matrix: dimension mismatch");
  Bits out(rows, 0);
  for (int r = 0; r < rows; ++r) {
    std::uint8_t acc = 0;
    for (int c = 0; c < cols; ++c) acc ^= at(r, c) & v[c];
    out[r] = acc;
  }
  return out;
}

TreeCode::TreeCode(int bits, std::array<Gf2Matrix, 5> g) : bits_(bits), g_(std::move(g)) {
  for (const auto& m : g_)
    if (m.rows != bits || m.cols != bits) throw std::invalid_argument("TreeCode: matrices must be bits x bits");
}

TreeCode TreeCode::generate(int bits, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x74726565ULL}));
  std::bernoulli_distribution coin(0.5);
  std::array<Gf2Matrix, 5> g;
  for (auto& m : g) {
    m = Gf2Matrix(bits, bits);
    for (auto& b : m.data) b = coin(rng) ? 1 : 0;
  }
  return TreeCode(bits, std::move(g));
}

std::pair<Bits, Bits> TreeCode::encode(std::span<const std::uint8_t> v1, std::span<const std::uint8_t> v2) const {
  if (static_cast<int>(v1.size()) != bits_ || static_cast<int>(v2.size()) != bits_)
    throw std::invalid_argument("TreeCode::encode: segment length mismatch");
  Bits r1 = g_[0].multiply(v1);
  const Bits b = g_[1].multiply(v2);
  for (int i = 0; i < bits_; ++i) r1[i] ^= b[i];
  Bits r2 = g_[2].multiply(v1);
  const Bits d = g_[3].multiply(v2);
  const Bits e = g_[4].multiply(r1);
  for (int i = 0; i < bits_; ++i) r2[i] ^= d[i] ^ e[i];
  return {std::move(r1), std::move(r2)};
}

std::pair<int, int> TreeCode::parity_indices(int i1, int i2) const {
  const auto [r1, r2] = encode(index_to_segment(i1, bits_), index_to_segment(i2, bits_));
  return {segment_to_index(r1), segment_to_index(r2)};
}

void TreeCode::write(std::ostream& out) const {
  out << "tree " << bits_ << '\n';
  for (int k = 0; k < 5; ++k) {
    out << 'G' << (k + 1) << '\n';
    for (int r = 0; r < bits_; ++r) {
      for (int c = 0; c < bits_; ++c) out << (c ? " " : "") << static_cast<int>(g_[k].at(r, c));
      out << '\n';
    }
  }
}

int segment_to_index(std::span<const std::uint8_t> bits) {
  int value = 0;
  for (auto b : bits) value = (value << 1) | (b & 1);
  return value + 1;
}

Bits index_to_segment(int index, int bits) {
  if (index < 1 || index > (1 << bits)) throw std::out_of_range("segment index out of range");
  Bits out(bits);
  const int value = index - 1;
  for (int i = 0; i < bits; ++i) out[i] = (value >> (bits - 1 - i)) & 1;
  return out;
}

Eigen::VectorXd esop_codeword(int index, int length) {
  if (index < 1 || index > length) throw std::out_of_range("ESOP codeword index out of range");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(length);
  e(index - 1) = 1.0;
  return e;
}

std::vector<int> build_interleaver(const std::array<int, kStages>& indices, int length, std::uint64_t seed) {
  Rng rng(derive_seed({seed, static_cast<std::uint64_t>(indices[0]), static_cast<std::uint64_t>(indices[1]),
                       static_cast<std::uint64_t>(indices[2]), static_cast<std::uint64_t>(indices[3])}));
  std::vector<int> perm(length);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

CVector DataFrame::slice(int d, int subcarriers) const {
  CVector out(subcarriers);
  for (int s = 0; s < subcarriers; ++s) out(s) = symbols[static_cast<std::size_t>(d) * subcarriers + s];
  return out;
}

DataFrame encode_data(std::span<const std::uint8_t> vc, std::span<const int> interleaver, const LdpcCode& code,
                      const SystemConfig& cfg) {
  if (static_cast<int>(vc.size()) != cfg.payload_bits) throw std::invalid_argument("encode_data: wrong payload length");
  if (code.dimension() != cfg.payload_bits || code.length() != cfg.coded_bits)
    throw std::invalid_argument("encode_data: LDPC code does not match config");
  const int frame_len = cfg.data_channel_uses();
  if (static_cast<int>(interleaver.size()) != frame_len) throw std::invalid_argument("encode_data: interleaver length");

  DataFrame f;
  f.coded = code.encode(vc);
  f.symbols.assign(frame_len, cplx{0.0, 0.0});
  f.positions.assign(interleaver.begin(), interleaver.begin() + cfg.coded_bits);
  const double amp = std::sqrt(cfg.symbol_power());
  for (int j = 0; j < cfg.coded_bits; ++j) f.symbols[f.positions[j]] = f.coded[j] ? -amp : amp;
  return f;
}

EncodedUser encode_user(std::span<const std::uint8_t> payload, const TreeCode& tree, const LdpcCode& code,
                        const SystemConfig& cfg) {
  EncodedUser u;
  u.split = split_message(payload, cfg);
  std::tie(u.r1, u.r2) = tree.encode(u.split.v1, u.split.v2);
  u.indices = {segment_to_index(u.split.v1), segment_to_index(u.split.v2), segment_to_index(u.r1),
               segment_to_index(u.r2)};
  u.interleaver = build_interleaver(u.indices, cfg.data_channel_uses(), cfg.code_seed);
  u.frame = encode_data(u.split.vc, u.interleaver, code, cfg);
  return u;
}

}  // namespace ura
