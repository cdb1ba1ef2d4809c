#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "ofsim/group_crypto.hpp"

using namespace ofsim;
using namespace ofsim::crypto;

TEST_CASE("scalar_mul basics") {
  GroupElement g = GroupElement::generator();

  CHECK(scalar_mul(Scalar{}, g).is_identity());
  CHECK(scalar_mul(Scalar::from_u64(1), g) == g);

  // (order-1)*G + G = identity
  Scalar minus_one = Scalar::from_u64(1).negate();
  GroupElement neg_g = scalar_mul(minus_one, g);
  CHECK_FALSE(neg_g.is_identity());
  CHECK((neg_g + g).is_identity());
}

TEST_CASE("scalar arithmetic matches the curve homomorphism") {
  DeterministicRandom rng(11);
  GroupElement g = GroupElement::generator();
  for (int i = 0; i < 100; ++i) {
    Scalar a = Scalar::random(rng);
    Scalar b = Scalar::random(rng);
    GroupElement lhs = mul_generator(a.add(b));
    GroupElement rhs = mul_generator(a) + mul_generator(b);
    CHECK(lhs == rhs);

    // mul_combine agrees with the two-step route.
    GroupElement p = mul_generator(Scalar::random_nonzero(rng));
    CHECK(mul_combine(a, p, b) == scalar_mul(a, p) + mul_generator(b));
  }
  (void)g;
}

TEST_CASE("scalar parsing enforces canonical range") {
  Bytes order_minus;  // order-1 round-trips
  Scalar m1 = Scalar::from_u64(1).negate();
  CHECK(Scalar::from_bytes(m1.bytes()) == m1);
  // order itself is rejected: order-1 + 1 as raw bytes
  Bytes order_bytes(m1.bytes().begin(), m1.bytes().end());
  order_bytes.back() += 1;
  CHECK_THROWS_AS(Scalar::from_bytes(order_bytes), InvalidArgument);
  CHECK_THROWS_AS(Scalar::from_bytes(Bytes{1, 2, 3}), InvalidArgument);
  (void)order_minus;
}

TEST_CASE("group element serialization round-trips") {
  DeterministicRandom rng(12);
  GroupElement p = mul_generator(Scalar::random_nonzero(rng));
  CHECK(GroupElement::from_bytes(p.bytes()) == p);
  CHECK_THROWS_AS(GroupElement::identity().bytes(), InvalidKey);

  Bytes garbage(kPointBytes, 0x05);
  CHECK_THROWS_AS(GroupElement::from_bytes(garbage), InvalidKey);
}

TEST_CASE("kdf golden vectors and contracts") {
  Bytes zero(32, 0);
  CHECK(to_hex(kdf(zero, "update", 32)) == fixtures::kKdfZeroUpdate32);
  CHECK(to_hex(kdf(zero, "diversify", 32)) == fixtures::kKdfZeroDiversify32);
  CHECK(to_hex(kdf(zero, "update", 80)) == fixtures::kKdfZeroUpdate80);

  CHECK(kdf(zero, "update", 32) == kdf(zero, "update", 32));
  CHECK(kdf(zero, "update", 32) != kdf(zero, "diversify", 32));
  CHECK(kdf(zero, "update", 7).size() == 7);

  CHECK_THROWS_AS(kdf(zero, "update", 0), InvalidArgument);
  CHECK_THROWS_AS(kdf(zero, "update", 255 * 32 + 1), InvalidArgument);
}

TEST_CASE("kdf never collides across labels") {
  DeterministicRandom rng(13);
  for (int i = 0; i < 10000; ++i) {
    Bytes secret = rng.bytes(32);
    CHECK(kdf(secret, "update", 32) != kdf(secret, "diversify", 32));
  }
}

TEST_CASE("ecies round-trip, probabilism, authenticity") {
  DeterministicRandom rng(14);
  Scalar d = Scalar::random_nonzero(rng);
  GroupElement p = mul_generator(d);
  Bytes msg = to_bytes("meet me at square x");

  Ciphertext c = ecies_encrypt(msg, p, rng);
  auto back = ecies_decrypt(c, d);
  REQUIRE(back.has_value());
  CHECK(*back == msg);

  // Randomized: same inputs, fresh randomness, different wire bytes.
  Ciphertext c2 = ecies_encrypt(msg, p, rng);
  CHECK(c.serialize() != c2.serialize());

  // Tampered tag fails.
  Ciphertext tampered = c;
  tampered.tag[0] ^= 0x01;
  CHECK_FALSE(ecies_decrypt(tampered, d).has_value());

  // Wrong private key fails.
  Scalar other = Scalar::random_nonzero(rng);
  CHECK_FALSE(ecies_decrypt(c, other).has_value());

  // Truncated body fails at parse.
  Bytes wire = c.serialize();
  wire.resize(wire.size() - 3);
  CHECK_FALSE(ecies_decrypt(wire, d).has_value());

  CHECK_THROWS_AS(ecies_encrypt(msg, GroupElement::identity(), rng), InvalidKey);
  CHECK_THROWS_AS(ecies_encrypt(Bytes{}, p, rng), InvalidArgument);
}

TEST_CASE("ciphertext wire format is bit-exact") {
  DeterministicRandom rng(15);
  Scalar d = Scalar::random_nonzero(rng);
  GroupElement p = mul_generator(d);
  Bytes msg = to_bytes("abc");
  Ciphertext c = ecies_encrypt(msg, p, rng);
  Bytes wire = c.serialize();

  REQUIRE(wire.size() == 1 + 29 + 4 + msg.size() + 16);
  CHECK(wire[0] == kCiphertextVersion);
  CHECK(get_u32_be(ByteView(wire).subspan(30)) == msg.size());
  auto parsed = Ciphertext::parse(wire);
  REQUIRE(parsed.has_value());
  CHECK(*parsed == c);

  // Wrong version byte is rejected.
  Bytes bad = wire;
  bad[0] = 0x02;
  CHECK_FALSE(Ciphertext::parse(bad).has_value());
}

TEST_CASE("parity flip of the ephemeral point is caught by the tag") {
  // -E has the same x-coordinate as E, so x-only ECDH alone would accept a
  // flipped compression prefix; the header AAD must reject it.
  DeterministicRandom rng(18);
  Scalar d = Scalar::random_nonzero(rng);
  GroupElement p = mul_generator(d);
  Bytes wire = ecies_encrypt(to_bytes("payload"), p, rng).serialize();
  wire[1] ^= 0x01;  // 0x02 <-> 0x03
  CHECK_FALSE(ecies_decrypt(wire, d).has_value());
}

TEST_CASE("single-bit corruption always fails authentication") {
  DeterministicRandom rng(16);
  Scalar d = Scalar::random_nonzero(rng);
  GroupElement p = mul_generator(d);
  Bytes msg = rng.bytes(48);
  Bytes wire = ecies_encrypt(msg, p, rng).serialize();

  for (int trial = 0; trial < 64; ++trial) {
    Bytes flipped = wire;
    std::size_t bit = rng.below(flipped.size() * 8);
    flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    auto out = ecies_decrypt(flipped, d);
    CHECK((!out.has_value() || *out != msg));
    if (out.has_value()) {
      // Only acceptable survivor: a flip inside the length field that still
      // parses is impossible, so reaching here is a failure.
      CHECK(false);
    }
  }
}

TEST_CASE("hash_index is deterministic and key-separating") {
  DeterministicRandom rng(17);
  Scalar d = Scalar::random_nonzero(rng);
  GroupElement p = mul_generator(d);
  GroupElement p2 = p + p;

  CHECK(hash_index(p) == hash_index(p));
  CHECK(hash_index(p) != hash_index(p2));
  CHECK(hash_index(p).size() == 32);
  CHECK_THROWS_AS(hash_index(GroupElement::identity()), InvalidKey);

  // Matches a direct SHA-256 of the serialization.
  CHECK(hash_index(p) == sha256(p.bytes()));
}

TEST_CASE("deterministic RNG reproduces and forks") {
  DeterministicRandom a(42), b(42);
  CHECK(a.bytes(40) == b.bytes(40));
  DeterministicRandom c = a.fork(1), d2 = a.fork(2);
  CHECK(c.bytes(16) != d2.bytes(16));
}
