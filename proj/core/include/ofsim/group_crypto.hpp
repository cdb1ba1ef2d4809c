#ifndef OFSIM_GROUP_CRYPTO_HPP
#define OFSIM_GROUP_CRYPTO_HPP

#include <array>
#include <compare>
#include <optional>
#include <string_view>

#include "ofsim/common.hpp"
#include "ofsim/random.hpp"

namespace ofsim::crypto {

inline constexpr std::size_t kScalarBytes = 28;   // P-224 order fits 224 bits
inline constexpr std::size_t kPointBytes = 29;    // 1 sign byte + 28-byte x
inline constexpr std::size_t kSecretBytes = 32;
inline constexpr std::size_t kDigestBytes = 32;
inline constexpr std::size_t kTagBytes = 16;
inline constexpr std::uint8_t kCiphertextVersion = 0x01;

using Digest = std::array<std::uint8_t, kDigestBytes>;

Digest sha256(ByteView data);
Digest hmac_sha256(ByteView key, ByteView data);

/// Integer in [0, n) where n is the P-224 group order. Canonical 28-byte
/// big-endian representation; value semantics.
class Scalar {
 public:
  Scalar() = default;  // zero

  /// Parses a canonical 28-byte big-endian value; throws InvalidArgument
  /// if it is >= the group order.
  static Scalar from_bytes(ByteView bytes28);

  /// Reduces an arbitrary-length big-endian integer mod the group order.
  static Scalar reduce_wide(ByteView bytes);

  /// Uniform in [0, n) with bias < 2^-64 (samples 36 bytes, reduces).
  static Scalar random(RandomSource& rng);

  /// Uniform in [1, n).
  static Scalar random_nonzero(RandomSource& rng);

  static Scalar from_u64(std::uint64_t v);

  const std::array<std::uint8_t, kScalarBytes>& bytes() const { return b_; }
  bool is_zero() const;

  /// this * a + c (mod n) — the affine map used by key diversification.
  Scalar mul_add(const Scalar& a, const Scalar& c) const;
  Scalar add(const Scalar& other) const;
  Scalar negate() const;

  friend bool operator==(const Scalar&, const Scalar&) = default;
  friend auto operator<=>(const Scalar&, const Scalar&) = default;

 private:
  std::array<std::uint8_t, kScalarBytes> b_{};
};

/// Element of the P-224 curve group, or the identity. Stored in canonical
/// 29-byte compressed form, so equality is byte equality.
class GroupElement {
 public:
  GroupElement() = default;  // identity

  static GroupElement generator();
  static GroupElement identity() { return {}; }

  /// Parses the 29-byte compressed form; throws InvalidKey if the bytes do
  /// not name a curve point.
  static GroupElement from_bytes(ByteView bytes29);

  bool is_identity() const { return identity_; }

  /// Canonical 29-byte serialization; throws InvalidKey for the identity
  /// (it has no wire form).
  const std::array<std::uint8_t, kPointBytes>& bytes() const;

  friend GroupElement operator+(const GroupElement&, const GroupElement&);
  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;

 private:
  bool identity_ = true;
  std::array<std::uint8_t, kPointBytes> b_{};
};

/// k·P. Identity results are valid (e.g. k = 0).
GroupElement scalar_mul(const Scalar& k, const GroupElement& p);

/// k·G.
GroupElement mul_generator(const Scalar& k);

/// u·P + v·G in one pass.
GroupElement mul_combine(const Scalar& u, const GroupElement& p, const Scalar& v);

/// 32-byte opaque symmetric secret.
struct SymmetricSecret {
  std::array<std::uint8_t, kSecretBytes> bytes{};

  static SymmetricSecret from_bytes(ByteView b);  // throws unless exactly 32 bytes
  static SymmetricSecret random(RandomSource& rng);
  friend bool operator==(const SymmetricSecret&, const SymmetricSecret&) = default;
};

/// One-step KDF per NIST SP 800-56A §5.8.1 with SHA-256:
/// out = SHA-256(counter_be32 || secret || label) blocks, counter from 1.
/// out_len must be in [1, 255*32]; zero length throws InvalidArgument.
Bytes kdf(ByteView secret, std::string_view label, std::size_t out_len);

/// ECIES ciphertext. Wire form is
/// [0x01][29-byte ephemeral][4-byte BE body length][body][16-byte tag].
struct Ciphertext {
  GroupElement ephemeral_public;
  Bytes body;
  std::array<std::uint8_t, kTagBytes> tag{};

  Bytes serialize() const;
  /// Returns nullopt on any malformed input (wrong version, truncation,
  /// bad point, empty body) — indistinguishable from a decrypt failure.
  static std::optional<Ciphertext> parse(ByteView wire);

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

/// Hybrid encryption: fresh ephemeral P-224 pair, ECDH against `pub`,
/// kdf(shared_x, "ecies", 44) -> AES-256-GCM key + IV, with the wire header
/// (version byte + ephemeral key) bound as AAD. Each call draws fresh
/// randomness, so equal inputs give distinct ciphertexts. Throws InvalidKey
/// for an identity public key, InvalidArgument for an empty plaintext.
Ciphertext ecies_encrypt(ByteView plaintext, const GroupElement& pub, RandomSource& rng);

/// Returns the plaintext iff `priv` matches the encryption key; nullopt on
/// any failure, with no reason distinguishable to the caller.
std::optional<Bytes> ecies_decrypt(const Ciphertext& c, const Scalar& priv);
std::optional<Bytes> ecies_decrypt(ByteView wire, const Scalar& priv);

/// SHA-256 of the 29-byte compressed serialization: the server index a
/// finder report is filed under. Throws InvalidKey for the identity.
Digest hash_index(const GroupElement& p);

}  // namespace ofsim::crypto

#endif
