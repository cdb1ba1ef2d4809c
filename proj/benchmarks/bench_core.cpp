#include <benchmark/benchmark.h>

#include "ofsim/contfrac.hpp"
#include "ofsim/keychain.hpp"

using namespace ofsim;

static void BM_Kdf(benchmark::State& state) {
  Bytes secret(32, 0x5A);
  for (auto _ : state) {
    auto out = crypto::kdf(secret, "update", static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_Kdf)->Arg(32)->Arg(72)->Arg(1024);

static void BM_EciesEncrypt(benchmark::State& state) {
  DeterministicRandom rng(1);
  auto d = crypto::Scalar::random_nonzero(rng);
  auto p = crypto::mul_generator(d);
  Bytes msg(static_cast<std::size_t>(state.range(0)), 0x42);
  for (auto _ : state) {
    auto c = crypto::ecies_encrypt(msg, p, rng);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_EciesEncrypt)->Arg(16)->Arg(256)->Arg(4096);

static void BM_EciesRoundtrip(benchmark::State& state) {
  DeterministicRandom rng(2);
  auto d = crypto::Scalar::random_nonzero(rng);
  auto p = crypto::mul_generator(d);
  Bytes msg(64, 0x42);
  for (auto _ : state) {
    auto c = crypto::ecies_encrypt(msg, p, rng);
    auto back = crypto::ecies_decrypt(c, d);
    benchmark::DoNotOptimize(back);
  }
}
BENCHMARK(BM_EciesRoundtrip);

static void BM_DeriveEpoch(benchmark::State& state) {
  DeterministicRandom rng(3);
  auto master = keychain::MasterKeyRecord::generate(rng, 0);
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto e = keychain::derive_epoch(master, i % 4);
    benchmark::DoNotOptimize(e);
    ++i;
  }
}
BENCHMARK(BM_DeriveEpoch);

static void BM_ChainWalk(benchmark::State& state) {
  DeterministicRandom rng(4);
  auto master = keychain::MasterKeyRecord::generate(rng, 0);
  for (auto _ : state) {
    keychain::ChainWalker walker(master);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(state.range(0)); ++i)
      benchmark::DoNotOptimize(walker.seek(i));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChainWalk)->Arg(16)->Arg(64)->Arg(256)->Complexity();

static void BM_CfExpand(benchmark::State& state) {
  auto x = contfrac::PreciseReal::root_of_log(123456789, 3);
  for (auto _ : state) {
    auto q = contfrac::cf_expand(x, static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_CfExpand)->Arg(9)->Arg(40)->Arg(75);

static void BM_DeriveFc(benchmark::State& state) {
  DeterministicRandom rng(5);
  auto ka = crypto::mul_generator(crypto::Scalar::random_nonzero(rng));
  auto kb = crypto::mul_generator(crypto::Scalar::random_nonzero(rng));
  mpz_class nonce = 987654321;
  for (auto _ : state) {
    auto fc = contfrac::derive_fc(nonce, ka, kb);
    benchmark::DoNotOptimize(fc);
  }
}
BENCHMARK(BM_DeriveFc);

BENCHMARK_MAIN();
