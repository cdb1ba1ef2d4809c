#include "ofsim/keychain.hpp"

#include <charconv>
#include <sstream>

namespace ofsim::keychain {

using crypto::Scalar;
using crypto::SymmetricSecret;

MasterKeyRecord MasterKeyRecord::generate(RandomSource& rng, SimTime created_at) {
  MasterKeyRecord rec;
  rec.d = Scalar::random_nonzero(rng);
  rec.P = crypto::mul_generator(rec.d);
  rec.sk0 = SymmetricSecret::random(rng);
  rec.created_at = created_at;
  return rec;
}

Bytes MasterKeyRecord::serialize() const {
  Bytes out;
  out.push_back(0x01);
  const auto& db = d.bytes();
  out.insert(out.end(), db.begin(), db.end());
  const auto& pb = P.bytes();
  out.insert(out.end(), pb.begin(), pb.end());
  out.insert(out.end(), sk0.bytes.begin(), sk0.bytes.end());
  put_u64_be(out, static_cast<std::uint64_t>(created_at));
  return out;
}

MasterKeyRecord MasterKeyRecord::deserialize(ByteView wire) {
  constexpr std::size_t kLen = 1 + 28 + 29 + 32 + 8;
  if (wire.size() != kLen) throw InvalidArgument("master record: wrong length");
  if (wire[0] != 0x01) throw InvalidArgument("master record: unknown version");
  MasterKeyRecord rec;
  rec.d = Scalar::from_bytes(wire.subspan(1, 28));
  try {
    rec.P = crypto::GroupElement::from_bytes(wire.subspan(29, 29));
  } catch (const InvalidKey& e) {
    throw InvalidArgument(std::string("master record: ") + e.what());
  }
  rec.sk0 = SymmetricSecret::from_bytes(wire.subspan(58, 32));
  rec.created_at = static_cast<SimTime>(get_u64_be(wire.subspan(90, 8)));
  if (rec.d.is_zero()) throw InvalidArgument("master record: zero private key");
  if (crypto::mul_generator(rec.d) != rec.P)
    throw InvalidArgument("master record: public key does not match d");
  return rec;
}

std::string MasterKeyRecord::to_text() const {
  std::ostringstream os;
  os << "d=" << to_hex(d.bytes()) << "\n";
  os << "P=" << to_hex(P.bytes()) << "\n";
  os << "sk0=" << to_hex(sk0.bytes) << "\n";
  os << "created_at=" << created_at << "\n";
  return os.str();
}

MasterKeyRecord MasterKeyRecord::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::string d_hex, p_hex, sk_hex;
  SimTime created = 0;
  bool have_created = false;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto key = line.substr(0, eq);
    auto val = line.substr(eq + 1);
    if (key == "d")
      d_hex = val;
    else if (key == "P")
      p_hex = val;
    else if (key == "sk0")
      sk_hex = val;
    else if (key == "created_at") {
      auto [ptr, ec] =
          std::from_chars(val.data(), val.data() + val.size(), created);
      if (ec != std::errc{}) throw InvalidArgument("master record: bad created_at");
      have_created = true;
    }
  }
  if (d_hex.empty() || p_hex.empty() || sk_hex.empty() || !have_created)
    throw InvalidArgument("master record: missing field");
  MasterKeyRecord rec;
  rec.d = Scalar::from_bytes(from_hex(d_hex));
  rec.P = crypto::GroupElement::from_bytes(from_hex(p_hex));
  rec.sk0 = SymmetricSecret::from_bytes(from_hex(sk_hex));
  rec.created_at = created;
  if (crypto::mul_generator(rec.d) != rec.P)
    throw InvalidArgument("master record: public key does not match d");
  return rec;
}

SymmetricSecret ratchet(const SymmetricSecret& sk_prev) {
  return SymmetricSecret::from_bytes(crypto::kdf(sk_prev.bytes, "update", 32));
}

std::pair<Scalar, Scalar> diversify(const SymmetricSecret& sk_i) {
  std::string label = "diversify";
  for (int attempt = 0;; ++attempt) {
    Bytes material = crypto::kdf(sk_i.bytes, label, 72);
    Scalar u = Scalar::reduce_wide(ByteView(material).subspan(0, 36));
    Scalar v = Scalar::reduce_wide(ByteView(material).subspan(36, 36));
    if (!u.is_zero()) return {u, v};
    label = "diversify-retry-" + std::to_string(attempt + 1);
  }
}

namespace {

EpochState make_epoch(const MasterKeyRecord& master, std::uint64_t i,
                      const SymmetricSecret& sk_i) {
  EpochState st;
  st.i = i;
  st.sk = sk_i;
  std::tie(st.u, st.v) = diversify(sk_i);
  st.d_i = st.u.mul_add(master.d, st.v);
  st.P_i = crypto::mul_combine(st.u, master.P, st.v);
  return st;
}

}  // namespace

EpochState derive_epoch(const MasterKeyRecord& master, std::uint64_t i) {
  SymmetricSecret sk = master.sk0;
  for (std::uint64_t k = 0; k < i; ++k) sk = ratchet(sk);
  return make_epoch(master, i, sk);
}

std::uint64_t epoch_index_at(const MasterKeyRecord& master, SimTime t) {
  if (t < master.created_at) throw InvalidTime("time precedes key creation");
  return static_cast<std::uint64_t>((t - master.created_at) / kEpochSeconds);
}

EpochState broadcast_key(const MasterKeyRecord& master, SimTime t) {
  return derive_epoch(master, epoch_index_at(master, t));
}

std::vector<crypto::Digest> owner_lookup_indices(const MasterKeyRecord& master,
                                                 SimTime t_from, SimTime t_to) {
  if (t_from > t_to) throw InvalidArgument("reversed lookup range");
  if (t_to < master.created_at) throw InvalidTime("range predates key creation");
  SimTime from = std::max(t_from, master.created_at);
  std::uint64_t first = epoch_index_at(master, from);
  std::uint64_t last = epoch_index_at(master, t_to);
  std::vector<crypto::Digest> indices;
  indices.reserve(last - first + 1);
  ChainWalker walker(master);
  for (std::uint64_t i = first; i <= last; ++i)
    indices.push_back(crypto::hash_index(walker.seek(i).P_i));
  return indices;
}

ChainWalker::ChainWalker(const MasterKeyRecord& master)
    : master_(master), sk_(master.sk0) {}

const EpochState& ChainWalker::seek(std::uint64_t i) {
  if (derived_ && state_.i == i) return state_;
  if (i < sk_index_) throw InvalidArgument("ChainWalker cannot seek backwards");
  while (sk_index_ < i) {
    sk_ = ratchet(sk_);
    ++sk_index_;
  }
  state_ = make_epoch(master_, i, sk_);
  derived_ = true;
  return state_;
}

}  // namespace ofsim::keychain
