#include "ofsim/random.hpp"

#include <openssl/rand.h>

#include <cstring>

#include "ofsim/group_crypto.hpp"

namespace ofsim {

Bytes RandomSource::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t RandomSource::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (auto byte : b) v = v << 8 | byte;
  return v;
}

std::uint64_t RandomSource::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("below(0)");
  // Rejection sampling over the top multiple of bound.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

DeterministicRandom::DeterministicRandom(std::uint64_t seed)
    : DeterministicRandom(seed, 0) {}

DeterministicRandom::DeterministicRandom(std::uint64_t seed, std::uint64_t lane) {
  for (int i = 0; i < 8; ++i) {
    seed_block_[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    seed_block_[8 + i] = static_cast<std::uint8_t>(lane >> (56 - 8 * i));
  }
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
  std::size_t written = 0;
  while (written < out.size()) {
    if (pool_used_ == pool_.size()) {
      Bytes block(seed_block_.begin(), seed_block_.end());
      put_u64_be(block, counter_++);
      pool_ = crypto::sha256(block);
      pool_used_ = 0;
    }
    std::size_t take = std::min(out.size() - written, pool_.size() - pool_used_);
    std::memcpy(out.data() + written, pool_.data() + pool_used_, take);
    pool_used_ += take;
    written += take;
  }
}

DeterministicRandom DeterministicRandom::fork(std::uint64_t lane) {
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed = seed << 8 | seed_block_[i];
  std::uint64_t base_lane = 0;
  for (int i = 8; i < 16; ++i) base_lane = base_lane << 8 | seed_block_[i];
  // Mix parent lane and child lane so nested forks stay distinct.
  return DeterministicRandom(seed, base_lane * 0x9E3779B97F4A7C15ull + lane + 1);
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
    throw Error("system RNG failure");
}

}  // namespace ofsim
