#include "ofsim/group_crypto.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/obj_mac.h>
#include <openssl/sha.h>

#include <cassert>
#include <cstring>
#include <memory>

namespace ofsim::crypto {

namespace {

struct BnDeleter {
  void operator()(BIGNUM* p) const { BN_free(p); }
};
struct BnCtxDeleter {
  void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
struct PointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;

const EC_GROUP* p224() {
  static EC_GROUP* group = [] {
    EC_GROUP* g = EC_GROUP_new_by_curve_name(NID_secp224r1);
    if (!g) throw Error("cannot construct P-224 group");
    return g;
  }();
  return group;
}

const BIGNUM* p224_order() {
  static BIGNUM* order = [] {
    BIGNUM* n = BN_new();
    BnCtxPtr ctx(BN_CTX_new());
    if (!n || !ctx || !EC_GROUP_get_order(p224(), n, ctx.get()))
      throw Error("cannot read P-224 order");
    return n;
  }();
  return order;
}

BnPtr to_bn(ByteView bytes) {
  BnPtr bn(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
  if (!bn) throw Error("BN_bin2bn failed");
  return bn;
}

std::array<std::uint8_t, kScalarBytes> bn_to_scalar_bytes(const BIGNUM* bn) {
  std::array<std::uint8_t, kScalarBytes> out{};
  if (BN_bn2binpad(bn, out.data(), kScalarBytes) < 0)
    throw Error("scalar does not fit 28 bytes");
  return out;
}

PointPtr to_point(const GroupElement& e, BN_CTX* ctx) {
  PointPtr p(EC_POINT_new(p224()));
  if (!p) throw Error("EC_POINT_new failed");
  if (e.is_identity()) {
    if (!EC_POINT_set_to_infinity(p224(), p.get()))
      throw Error("set_to_infinity failed");
    return p;
  }
  const auto& b = e.bytes();
  if (!EC_POINT_oct2point(p224(), p.get(), b.data(), b.size(), ctx))
    throw InvalidKey("bytes do not name a P-224 point");
  return p;
}

GroupElement from_point(const EC_POINT* p, BN_CTX* ctx) {
  if (EC_POINT_is_at_infinity(p224(), p)) return GroupElement::identity();
  std::array<std::uint8_t, kPointBytes> buf{};
  std::size_t n = EC_POINT_point2oct(p224(), p, POINT_CONVERSION_COMPRESSED,
                                     buf.data(), buf.size(), ctx);
  if (n != kPointBytes) throw Error("unexpected compressed point length");
  return GroupElement::from_bytes(buf);
}

}  // namespace

Digest sha256(ByteView data) {
  Digest out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Digest hmac_sha256(ByteView key, ByteView data) {
  Digest out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
            data.size(), out.data(), &len) ||
      len != out.size())
    throw Error("HMAC failure");
  return out;
}

// ---------------------------------------------------------------------------
// Scalar

Scalar Scalar::from_bytes(ByteView bytes28) {
  if (bytes28.size() != kScalarBytes)
    throw InvalidArgument("scalar must be 28 bytes");
  auto bn = to_bn(bytes28);
  if (BN_cmp(bn.get(), p224_order()) >= 0)
    throw InvalidArgument("scalar not reduced mod group order");
  Scalar s;
  std::memcpy(s.b_.data(), bytes28.data(), kScalarBytes);
  return s;
}

Scalar Scalar::reduce_wide(ByteView bytes) {
  auto bn = to_bn(bytes);
  BnPtr r(BN_new());
  BnCtxPtr ctx(BN_CTX_new());
  if (!r || !ctx || !BN_mod(r.get(), bn.get(), p224_order(), ctx.get()))
    throw Error("BN_mod failed");
  Scalar s;
  s.b_ = bn_to_scalar_bytes(r.get());
  return s;
}

Scalar Scalar::random(RandomSource& rng) {
  // 36 bytes (288 bits) before reduction keeps the modular bias below 2^-64.
  std::array<std::uint8_t, 36> wide{};
  rng.fill(wide);
  return reduce_wide(wide);
}

Scalar Scalar::random_nonzero(RandomSource& rng) {
  Scalar s;
  do {
    s = random(rng);
  } while (s.is_zero());
  return s;
}

Scalar Scalar::from_u64(std::uint64_t v) {
  Bytes b;
  put_u64_be(b, v);
  return reduce_wide(b);
}

bool Scalar::is_zero() const {
  for (auto byte : b_)
    if (byte != 0) return false;
  return true;
}

Scalar Scalar::mul_add(const Scalar& a, const Scalar& c) const {
  auto x = to_bn(b_);
  auto y = to_bn(a.b_);
  auto z = to_bn(c.b_);
  BnPtr r(BN_new());
  BnCtxPtr ctx(BN_CTX_new());
  if (!r || !ctx || !BN_mod_mul(r.get(), x.get(), y.get(), p224_order(), ctx.get()) ||
      !BN_mod_add(r.get(), r.get(), z.get(), p224_order(), ctx.get()))
    throw Error("modular arithmetic failure");
  Scalar s;
  s.b_ = bn_to_scalar_bytes(r.get());
  return s;
}

Scalar Scalar::add(const Scalar& other) const {
  auto x = to_bn(b_);
  auto y = to_bn(other.b_);
  BnPtr r(BN_new());
  BnCtxPtr ctx(BN_CTX_new());
  if (!r || !ctx || !BN_mod_add(r.get(), x.get(), y.get(), p224_order(), ctx.get()))
    throw Error("modular arithmetic failure");
  Scalar s;
  s.b_ = bn_to_scalar_bytes(r.get());
  return s;
}

Scalar Scalar::negate() const {
  if (is_zero()) return {};
  auto x = to_bn(b_);
  BnPtr r(BN_new());
  if (!r || !BN_sub(r.get(), p224_order(), x.get())) throw Error("BN_sub failure");
  Scalar s;
  s.b_ = bn_to_scalar_bytes(r.get());
  return s;
}

// ---------------------------------------------------------------------------
// GroupElement

GroupElement GroupElement::generator() {
  BnCtxPtr ctx(BN_CTX_new());
  return from_point(EC_GROUP_get0_generator(p224()), ctx.get());
}

GroupElement GroupElement::from_bytes(ByteView bytes29) {
  if (bytes29.size() != kPointBytes)
    throw InvalidKey("compressed point must be 29 bytes");
  BnCtxPtr ctx(BN_CTX_new());
  PointPtr p(EC_POINT_new(p224()));
  if (!p || !ctx) throw Error("EC_POINT_new failed");
  if (!EC_POINT_oct2point(p224(), p.get(), bytes29.data(), bytes29.size(), ctx.get()))
    throw InvalidKey("bytes do not name a P-224 point");
  GroupElement e;
  e.identity_ = false;
  std::memcpy(e.b_.data(), bytes29.data(), kPointBytes);
  return e;
}

const std::array<std::uint8_t, kPointBytes>& GroupElement::bytes() const {
  if (identity_) throw InvalidKey("identity element has no serialization");
  return b_;
}

GroupElement operator+(const GroupElement& a, const GroupElement& b) {
  BnCtxPtr ctx(BN_CTX_new());
  auto pa = to_point(a, ctx.get());
  auto pb = to_point(b, ctx.get());
  PointPtr r(EC_POINT_new(p224()));
  if (!r || !EC_POINT_add(p224(), r.get(), pa.get(), pb.get(), ctx.get()))
    throw Error("EC_POINT_add failed");
  return from_point(r.get(), ctx.get());
}

GroupElement scalar_mul(const Scalar& k, const GroupElement& p) {
  BnCtxPtr ctx(BN_CTX_new());
  auto point = to_point(p, ctx.get());
  auto bk = to_bn(k.bytes());
  PointPtr r(EC_POINT_new(p224()));
  if (!r ||
      !EC_POINT_mul(p224(), r.get(), nullptr, point.get(), bk.get(), ctx.get()))
    throw Error("EC_POINT_mul failed");
  return from_point(r.get(), ctx.get());
}

GroupElement mul_generator(const Scalar& k) {
  BnCtxPtr ctx(BN_CTX_new());
  auto bk = to_bn(k.bytes());
  PointPtr r(EC_POINT_new(p224()));
  if (!r || !EC_POINT_mul(p224(), r.get(), bk.get(), nullptr, nullptr, ctx.get()))
    throw Error("EC_POINT_mul failed");
  return from_point(r.get(), ctx.get());
}

GroupElement mul_combine(const Scalar& u, const GroupElement& p, const Scalar& v) {
  BnCtxPtr ctx(BN_CTX_new());
  auto point = to_point(p, ctx.get());
  auto bu = to_bn(u.bytes());
  auto bv = to_bn(v.bytes());
  PointPtr r(EC_POINT_new(p224()));
  // EC_POINT_mul computes generator*n + q*m.
  if (!r ||
      !EC_POINT_mul(p224(), r.get(), bv.get(), point.get(), bu.get(), ctx.get()))
    throw Error("EC_POINT_mul failed");
  return from_point(r.get(), ctx.get());
}

// ---------------------------------------------------------------------------
// SymmetricSecret / KDF

SymmetricSecret SymmetricSecret::from_bytes(ByteView b) {
  if (b.size() != kSecretBytes)
    throw InvalidArgument("symmetric secret must be 32 bytes");
  SymmetricSecret s;
  std::memcpy(s.bytes.data(), b.data(), kSecretBytes);
  return s;
}

SymmetricSecret SymmetricSecret::random(RandomSource& rng) {
  SymmetricSecret s;
  rng.fill(s.bytes);
  return s;
}

Bytes kdf(ByteView secret, std::string_view label, std::size_t out_len) {
  if (out_len == 0) throw InvalidArgument("kdf output length must be positive");
  if (out_len > 255 * kDigestBytes)
    throw InvalidArgument("kdf output length exceeds 255 hash blocks");
  Bytes out;
  out.reserve(out_len + kDigestBytes);
  std::uint32_t counter = 1;
  while (out.size() < out_len) {
    Bytes block;
    put_u32_be(block, counter++);
    block.insert(block.end(), secret.begin(), secret.end());
    block.insert(block.end(), label.begin(), label.end());
    Digest d = sha256(block);
    out.insert(out.end(), d.begin(), d.end());
  }
  out.resize(out_len);
  return out;
}

// ---------------------------------------------------------------------------
// ECIES

namespace {

struct CipherDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherDeleter>;

constexpr std::size_t kAesKeyBytes = 32;
constexpr std::size_t kGcmIvBytes = 12;

// Shared secret: big-endian x-coordinate of d*Q, 28 bytes.
std::optional<std::array<std::uint8_t, kScalarBytes>> ecdh_x_impl(
    const Scalar& priv, const GroupElement& pub) {
  if (pub.is_identity() || priv.is_zero()) return std::nullopt;
  BnCtxPtr ctx(BN_CTX_new());
  auto point = to_point(pub, ctx.get());
  auto k = to_bn(priv.bytes());
  PointPtr shared(EC_POINT_new(p224()));
  if (!shared ||
      !EC_POINT_mul(p224(), shared.get(), nullptr, point.get(), k.get(), ctx.get()))
    throw Error("EC_POINT_mul failed");
  if (EC_POINT_is_at_infinity(p224(), shared.get())) return std::nullopt;
  BnPtr x(BN_new());
  if (!x || !EC_POINT_get_affine_coordinates(p224(), shared.get(), x.get(), nullptr,
                                             ctx.get()))
    throw Error("get_affine_coordinates failed");
  std::array<std::uint8_t, kScalarBytes> out{};
  if (BN_bn2binpad(x.get(), out.data(), kScalarBytes) < 0)
    throw Error("x-coordinate does not fit 28 bytes");
  return out;
}

}  // namespace

Bytes Ciphertext::serialize() const {
  Bytes out;
  out.push_back(kCiphertextVersion);
  const auto& eph = ephemeral_public.bytes();
  out.insert(out.end(), eph.begin(), eph.end());
  put_u32_be(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

std::optional<Ciphertext> Ciphertext::parse(ByteView wire) {
  if (wire.size() < 1 + kPointBytes + 4 + 1 + kTagBytes) return std::nullopt;
  if (wire[0] != kCiphertextVersion) return std::nullopt;
  Ciphertext c;
  try {
    c.ephemeral_public = GroupElement::from_bytes(wire.subspan(1, kPointBytes));
  } catch (const InvalidKey&) {
    return std::nullopt;
  }
  std::uint32_t body_len = get_u32_be(wire.subspan(1 + kPointBytes));
  std::size_t expect = 1 + kPointBytes + 4 + std::size_t{body_len} + kTagBytes;
  if (body_len == 0 || wire.size() != expect) return std::nullopt;
  auto body = wire.subspan(1 + kPointBytes + 4, body_len);
  c.body.assign(body.begin(), body.end());
  std::memcpy(c.tag.data(), wire.data() + wire.size() - kTagBytes, kTagBytes);
  return c;
}

namespace {

// The tag covers the wire header (version + ephemeral key) as AAD. Without
// this, flipping the compressed-point parity bit negates the ephemeral
// point, and x-only ECDH would accept the negation silently.
Bytes header_aad(const GroupElement& ephemeral) {
  Bytes aad;
  aad.push_back(kCiphertextVersion);
  const auto& e = ephemeral.bytes();
  aad.insert(aad.end(), e.begin(), e.end());
  return aad;
}

}  // namespace

Ciphertext ecies_encrypt(ByteView plaintext, const GroupElement& pub,
                         RandomSource& rng) {
  if (pub.is_identity()) throw InvalidKey("cannot encrypt to the identity");
  if (plaintext.empty()) throw InvalidArgument("empty plaintext");

  Scalar eph = Scalar::random_nonzero(rng);
  GroupElement eph_pub = mul_generator(eph);
  auto shared = ecdh_x_impl(eph, pub);
  if (!shared) throw Error("ECDH produced the identity");  // unreachable on P-224

  Bytes keys = kdf(*shared, "ecies", kAesKeyBytes + kGcmIvBytes);

  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || !EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, keys.data(),
                                  keys.data() + kAesKeyBytes))
    throw Error("AES-GCM init failed");

  Ciphertext c;
  c.ephemeral_public = eph_pub;
  Bytes aad = header_aad(eph_pub);
  int len = 0;
  if (!EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                         static_cast<int>(aad.size())))
    throw Error("AES-GCM aad failed");
  c.body.resize(plaintext.size());
  if (!EVP_EncryptUpdate(ctx.get(), c.body.data(), &len, plaintext.data(),
                         static_cast<int>(plaintext.size())))
    throw Error("AES-GCM encrypt failed");
  int fin = 0;
  if (!EVP_EncryptFinal_ex(ctx.get(), c.body.data() + len, &fin))
    throw Error("AES-GCM finalize failed");
  c.body.resize(static_cast<std::size_t>(len + fin));
  if (!EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagBytes, c.tag.data()))
    throw Error("AES-GCM tag failed");
  return c;
}

std::optional<Bytes> ecies_decrypt(const Ciphertext& c, const Scalar& priv) {
  if (c.body.empty()) return std::nullopt;
  auto shared = ecdh_x_impl(priv, c.ephemeral_public);
  if (!shared) return std::nullopt;

  Bytes keys = kdf(*shared, "ecies", kAesKeyBytes + kGcmIvBytes);

  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || !EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, keys.data(),
                                  keys.data() + kAesKeyBytes))
    throw Error("AES-GCM init failed");

  Bytes aad = header_aad(c.ephemeral_public);
  int len = 0;
  if (!EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                         static_cast<int>(aad.size())))
    return std::nullopt;
  Bytes plain(c.body.size());
  if (!EVP_DecryptUpdate(ctx.get(), plain.data(), &len, c.body.data(),
                         static_cast<int>(c.body.size())))
    return std::nullopt;
  auto tag = c.tag;
  if (!EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagBytes, tag.data()))
    return std::nullopt;
  int fin = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &fin) != 1)
    return std::nullopt;
  plain.resize(static_cast<std::size_t>(len + fin));
  return plain;
}

std::optional<Bytes> ecies_decrypt(ByteView wire, const Scalar& priv) {
  auto c = Ciphertext::parse(wire);
  if (!c) return std::nullopt;
  return ecies_decrypt(*c, priv);
}

Digest hash_index(const GroupElement& p) {
  if (p.is_identity()) throw InvalidKey("identity has no server index");
  return sha256(p.bytes());
}

}  // namespace ofsim::crypto
