#ifndef OFSIM_KEYCHAIN_HPP
#define OFSIM_KEYCHAIN_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "ofsim/group_crypto.hpp"

namespace ofsim::keychain {

/// Rotation period. "Approximately every 15 minutes" is made exact so runs
/// are reproducible.
inline constexpr SimTime kEpochSeconds = 900;

/// Long-lived key material: master pair (d, P), the symmetric chain seed
/// SK_0, and the creation instant epochs are counted from. Immutable after
/// construction.
struct MasterKeyRecord {
  crypto::Scalar d;
  crypto::GroupElement P;
  crypto::SymmetricSecret sk0;
  SimTime created_at = 0;

  static MasterKeyRecord generate(RandomSource& rng, SimTime created_at);

  /// Versioned binary form:
  /// [0x01][28-byte d][29-byte P][32-byte sk0][8-byte BE created_at].
  Bytes serialize() const;
  static MasterKeyRecord deserialize(ByteView wire);  // throws InvalidArgument

  /// Hex-field text form used for fixtures: "d=<hex>\nP=<hex>\nsk0=<hex>\ncreated_at=<int>\n".
  std::string to_text() const;
  static MasterKeyRecord from_text(const std::string& text);

  friend bool operator==(const MasterKeyRecord&, const MasterKeyRecord&) = default;
};

/// One rotation epoch: the ratcheted secret, the diversification scalars,
/// and the derived pair satisfying d_i = u_i*d + v_i and P_i = u_i*P + v_i*G.
struct EpochState {
  std::uint64_t i = 0;
  crypto::SymmetricSecret sk;
  crypto::Scalar u;
  crypto::Scalar v;
  crypto::Scalar d_i;
  crypto::GroupElement P_i;

  friend bool operator==(const EpochState&, const EpochState&) = default;
};

/// SK_i = KDF(SK_{i-1}, "update").
crypto::SymmetricSecret ratchet(const crypto::SymmetricSecret& sk_prev);

/// (u_i, v_i) = KDF(SK_i, "diversify"): 72 output bytes split into 36-byte
/// halves, each reduced mod the group order. A zero u_i re-derives with
/// label "diversify-retry-k" until nonzero, keeping the affine map invertible.
std::pair<crypto::Scalar, crypto::Scalar> diversify(const crypto::SymmetricSecret& sk_i);

/// Ratchets i times from sk0 (epoch 0 uses sk0 itself), diversifies, and
/// applies the affine maps. O(i); use ChainWalker for sequential scans.
EpochState derive_epoch(const MasterKeyRecord& master, std::uint64_t i);

/// Epoch state broadcast at simulated time t; throws InvalidTime before
/// the record's creation.
EpochState broadcast_key(const MasterKeyRecord& master, SimTime t);

std::uint64_t epoch_index_at(const MasterKeyRecord& master, SimTime t);

/// Server indices of every epoch whose 900 s window intersects
/// [t_from, t_to], in epoch order. Throws InvalidArgument on a reversed
/// range, InvalidTime if the whole range predates the record.
std::vector<crypto::Digest> owner_lookup_indices(const MasterKeyRecord& master,
                                                 SimTime t_from, SimTime t_to);

/// Incremental epoch derivation: keeps the current ratchet state so that
/// scanning epochs 0..N costs N ratchets instead of N^2/2.
class ChainWalker {
 public:
  explicit ChainWalker(const MasterKeyRecord& master);

  /// State for epoch i; i must be >= the last requested index.
  const EpochState& seek(std::uint64_t i);
  const EpochState& current() const { return state_; }

 private:
  MasterKeyRecord master_;
  crypto::SymmetricSecret sk_;  // secret for epoch sk_index_
  std::uint64_t sk_index_ = 0;
  EpochState state_;
  bool derived_ = false;
};

}  // namespace ofsim::keychain

#endif
