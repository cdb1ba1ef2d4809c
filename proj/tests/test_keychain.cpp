#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "ofsim/keychain.hpp"

using namespace ofsim;
using namespace ofsim::keychain;
using crypto::Scalar;
using crypto::SymmetricSecret;

namespace {
MasterKeyRecord fixture_master() {
  return MasterKeyRecord::from_text(fixtures::kMasterText);
}
}  // namespace

TEST_CASE("ratchet is deterministic and moves") {
  SymmetricSecret zero{};
  CHECK(ratchet(zero) == ratchet(zero));

  SymmetricSecret sk = zero;
  for (int i = 0; i < 10; ++i) sk = ratchet(sk);
  CHECK(to_hex(sk.bytes) == fixtures::kRatchet10Zero);

  DeterministicRandom rng(21);
  for (int i = 0; i < 1000; ++i) {
    SymmetricSecret s = SymmetricSecret::random(rng);
    CHECK(ratchet(s) != s);
  }
}

TEST_CASE("diversify matches the oracle and stays reduced") {
  SymmetricSecret ab;
  ab.bytes.fill(0xAB);
  auto [u, v] = diversify(ab);
  CHECK(to_hex(u.bytes()) == fixtures::kDiversifyAbU);
  CHECK(to_hex(v.bytes()) == fixtures::kDiversifyAbV);

  auto [u2, v2] = diversify(ab);
  CHECK(u == u2);
  CHECK(v == v2);
  CHECK_FALSE(u.is_zero());

  // Reduction contract: round-trips through the canonical parser.
  CHECK(Scalar::from_bytes(u.bytes()) == u);
  CHECK(Scalar::from_bytes(v.bytes()) == v);
}

TEST_CASE("derive_epoch reproduces the independent oracle") {
  MasterKeyRecord m = fixture_master();
  for (const auto& g : fixtures::kEpochGoldens) {
    EpochState e = derive_epoch(m, g.i);
    CHECK(to_hex(e.u.bytes()) == g.u);
    CHECK(to_hex(e.v.bytes()) == g.v);
    CHECK(to_hex(e.d_i.bytes()) == g.d_i);
    CHECK(to_hex(e.P_i.bytes()) == g.P_i);
    CHECK(to_hex(crypto::hash_index(e.P_i)) == g.index);
  }
}

TEST_CASE("epoch invariants: d_i*G = P_i, identity at (u=1, v=0)") {
  MasterKeyRecord m = fixture_master();
  ChainWalker walker(m);
  for (std::uint64_t i = 0; i <= 100; ++i) {
    const EpochState& e = walker.seek(i);
    CHECK(crypto::mul_generator(e.d_i) == e.P_i);
    CHECK_FALSE(e.u.is_zero());
  }

  // Affine identity: u=1, v=0 maps the master pair to itself.
  Scalar one = Scalar::from_u64(1);
  Scalar d_i = one.mul_add(m.d, Scalar{});
  CHECK(d_i == m.d);
  CHECK(crypto::mul_combine(one, m.P, Scalar{}) == m.P);
}

TEST_CASE("epoch keys and indices never repeat over 2000 epochs") {
  MasterKeyRecord m = fixture_master();
  ChainWalker walker(m);
  std::set<std::array<std::uint8_t, 29>> keys;
  std::set<crypto::Digest> indices;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const EpochState& e = walker.seek(i);
    CHECK(keys.insert(e.P_i.bytes()).second);
    CHECK(indices.insert(crypto::hash_index(e.P_i)).second);
  }
}

TEST_CASE("chain determinism: same (d, sk0) gives identical streams") {
  MasterKeyRecord a = fixture_master();
  MasterKeyRecord b = fixture_master();
  for (std::uint64_t i : {0ull, 3ull, 17ull})
    CHECK(derive_epoch(a, i) == derive_epoch(b, i));
}

TEST_CASE("broadcast_key windows") {
  DeterministicRandom rng(22);
  MasterKeyRecord m = MasterKeyRecord::generate(rng, 1000);

  CHECK(broadcast_key(m, 1000).i == 0);
  CHECK(broadcast_key(m, 1000 + 899).i == 0);
  CHECK(broadcast_key(m, 1000 + 900).i == 1);
  CHECK(broadcast_key(m, 1000 + 90000).i == 100);
  CHECK_THROWS_AS(broadcast_key(m, 999), InvalidTime);
}

TEST_CASE("owner_lookup_indices") {
  DeterministicRandom rng(23);
  MasterKeyRecord m = MasterKeyRecord::generate(rng, 0);

  auto one = owner_lookup_indices(m, 100, 100);
  CHECK(one.size() == 1);

  auto five = owner_lookup_indices(m, 0, 3600);
  REQUIRE(five.size() == 5);
  for (std::uint64_t i = 0; i < 5; ++i)
    CHECK(five[i] == crypto::hash_index(derive_epoch(m, i).P_i));

  CHECK_THROWS_AS(owner_lookup_indices(m, 10, 5), InvalidArgument);
}

TEST_CASE("master record serialization round-trips and validates") {
  DeterministicRandom rng(24);
  MasterKeyRecord m = MasterKeyRecord::generate(rng, 12345);

  Bytes wire = m.serialize();
  CHECK(wire.size() == 98);
  CHECK(MasterKeyRecord::deserialize(wire) == m);

  CHECK(MasterKeyRecord::from_text(m.to_text()) == m);

  // Corrupt d: public key no longer matches.
  Bytes bad = wire;
  bad[5] ^= 0xFF;
  CHECK_THROWS_AS(MasterKeyRecord::deserialize(bad), InvalidArgument);
  CHECK_THROWS_AS(MasterKeyRecord::deserialize(Bytes{0x01, 0x02}), InvalidArgument);
}
