#include "doctest.h"

#include <random>
#include <set>
#include <sstream>

#include "ura/config.hpp"
#include "ura/ldpc.hpp"
#include "ura/rng.hpp"

using namespace ura;

namespace {

Bits random_bits(int n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Bits b(n);
  for (auto& x : b) x = coin(rng) ? 1 : 0;
  return b;
}

// Independent syndrome check straight from the check lists.
bool satisfies(const LdpcCode& code, const Bits& w) {
  for (const auto& row : code.checks()) {
    int parity = 0;
    for (int v : row) parity ^= w[v];
    if (parity) return false;
  }
  return true;
}

std::vector<double> clean_llr(const Bits& w, double mag) {
  std::vector<double> llr(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) llr[i] = w[i] ? -mag : mag;
  return llr;
}

}  // namespace

TEST_CASE("default code structure") {
  const SystemConfig cfg;
  const auto& code = default_ldpc_code(200, 86, cfg.code_seed);
  CHECK(code.length() == 200);
  CHECK(code.dimension() == 86);
  CHECK(code.num_checks() == 114);
  CHECK(code.rank() == 114);
  std::vector<int> degree(200, 0);
  for (const auto& row : code.checks())
    for (int v : row) ++degree[v];
  for (int d : degree) CHECK(d == 3);
  CHECK(&code == &default_ldpc_code(200, 86, cfg.code_seed));
}

TEST_CASE("systematic encoding and BP round trip") {
  const SystemConfig cfg;
  const auto& code = default_ldpc_code(200, 86, cfg.code_seed);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Bits info = random_bits(86, rng);
    const Bits w = code.encode(info);
    CHECK(std::equal(info.begin(), info.end(), w.begin()));
    CHECK(satisfies(code, w));
    CHECK(code.is_codeword(w));
    const auto r = code.decode_bp(clean_llr(w, 4.0), 50);
    CHECK(r.converged);
    CHECK(r.bits == w);
  }
}

TEST_CASE("BP corrects a few flipped bits") {
  const SystemConfig cfg;
  const auto& code = default_ldpc_code(200, 86, cfg.code_seed);
  Rng rng(2);
  std::uniform_int_distribution<int> pos(0, 199);
  int ok = 0;
  for (int i = 0; i < 50; ++i) {
    const Bits w = code.encode(random_bits(86, rng));
    auto llr = clean_llr(w, 2.0);
    for (int f = 0; f < 3; ++f) llr[pos(rng)] *= -0.5;
    const auto r = code.decode_bp(llr, 50);
    ok += r.converged && r.bits == w;
  }
  CHECK(ok >= 48);
}

TEST_CASE("zero LLRs never count as converged") {
  const auto& code = default_ldpc_code(200, 86, SystemConfig{}.code_seed);
  const auto r = code.decode_bp(std::vector<double>(200, 0.0), 10);
  CHECK_FALSE(r.converged);
}

TEST_CASE("from_checks on the (7, 4) Hamming code") {
  const std::vector<std::vector<int>> h = {{0, 1, 2, 4}, {0, 1, 3, 5}, {0, 2, 3, 6}};
  const LdpcCode code = LdpcCode::from_checks(7, h);
  CHECK(code.dimension() == 4);
  CHECK(code.column_order() == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  std::set<Bits> words;
  for (int m = 0; m < 16; ++m) {
    const Bits info{static_cast<uint8_t>(m >> 3 & 1), static_cast<uint8_t>(m >> 2 & 1),
                    static_cast<uint8_t>(m >> 1 & 1), static_cast<uint8_t>(m & 1)};
    const Bits w = code.encode(info);
    CHECK(satisfies(code, w));
    words.insert(w);
  }
  CHECK(words.size() == 16);
  CHECK_THROWS(LdpcCode::from_checks(7, {{0, 9}}));
}

TEST_CASE("sparse text format round trip") {
  const auto& code = default_ldpc_code(200, 86, SystemConfig{}.code_seed);
  std::stringstream buf;
  code.write(buf);
  CHECK(buf.str().rfind("ldpc 200 86 114\n0:", 0) == 0);
  const LdpcCode back = LdpcCode::read(buf);
  CHECK(back.checks() == code.checks());
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Bits info = random_bits(86, rng);
    CHECK(back.encode(info) == code.encode(info));
  }
}

TEST_CASE("generation is deterministic and full rank") {
  const LdpcCode a = LdpcCode::generate(60, 30, 3, 99);
  const LdpcCode b = LdpcCode::generate(60, 30, 3, 99);
  CHECK(a.checks() == b.checks());
  CHECK(a.rank() == 30);
}
