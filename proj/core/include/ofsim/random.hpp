#ifndef OFSIM_RANDOM_HPP
#define OFSIM_RANDOM_HPP

#include <cstdint>
#include <memory>
#include <span>

#include "ofsim/common.hpp"

namespace ofsim {

/// Source of random bytes. Injected everywhere randomness is consumed so
/// that a whole run can be replayed from a single seed. Instances are
/// single-owner; do not share one across threads.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  /// Uniform in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);
};

/// SHA-256 counter generator: block_k = SHA-256(seed || k). Deterministic,
/// platform-stable, and statistically uniform; the only generator used in
/// tests and simulations.
class DeterministicRandom final : public RandomSource {
 public:
  explicit DeterministicRandom(std::uint64_t seed);
  void fill(std::span<std::uint8_t> out) override;

  /// Derives an independent child stream (used to give each simulated
  /// device its own stream without interleaving artifacts).
  DeterministicRandom fork(std::uint64_t lane);

 private:
  DeterministicRandom(std::uint64_t seed, std::uint64_t lane);
  std::array<std::uint8_t, 16> seed_block_;
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> pool_{};
  std::size_t pool_used_ = 32;  // empty
};

/// OS-entropy generator for interactive CLI use (`keychain new` without a
/// seed). Never used inside simulations.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

}  // namespace ofsim

#endif
