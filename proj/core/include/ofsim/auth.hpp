#ifndef OFSIM_AUTH_HPP
#define OFSIM_AUTH_HPP

#include <gmpxx.h>

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ofsim/contfrac.hpp"
#include "ofsim/group_crypto.hpp"
#include "ofsim/random.hpp"

namespace ofsim::auth {

using Label = std::string;

enum class Protocol { NS, NSL, CF };

std::string protocol_name(Protocol p);
std::optional<Protocol> protocol_from_name(const std::string& name);

/// 128-bit nonce, big-endian integer >= 2 (the FC derivation needs
/// log(N) > 0 and N = 1 is excluded too).
struct Nonce {
  std::array<std::uint8_t, 16> bytes{};

  static Nonce random(RandomSource& rng);
  static std::optional<Nonce> from_bytes(ByteView b);
  mpz_class to_integer() const;
  std::string hex() const { return to_hex(bytes); }

  friend bool operator==(const Nonce&, const Nonce&) = default;
  friend auto operator<=>(const Nonce&, const Nonce&) = default;
};

/// Observable connection habits the CF server matches instead of a wire
/// identity: typical connection minute, location label, typing rate.
struct BehaviorProfile {
  int minute_of_day = 0;  // 0..1439
  std::string location;
  int words_per_minute = 0;

  friend bool operator==(const BehaviorProfile&, const BehaviorProfile&) = default;
};

/// Exact matching rule: minute within +-30 (circular), equal location,
/// rate within +-5 wpm.
bool profile_matches(const BehaviorProfile& stored, const BehaviorProfile& observed);

struct Principal {
  Label id;
  crypto::Scalar priv;
  crypto::GroupElement pub;
  std::map<Label, crypto::GroupElement> directory;
  BehaviorProfile profile;

  static Principal generate(Label id, RandomSource& rng, BehaviorProfile profile = {});
};

/// Needham-Schroeder authentication server. Certificates are
/// MAC-authenticated records under the server secret; honest parties verify
/// with the same secret (standing in for signature verification) and the
/// intruder never holds it.
class AuthServer {
 public:
  explicit AuthServer(RandomSource& rng);

  void register_key(const Label& label, const crypto::GroupElement& key);
  bool is_registered(const Label& label) const;

  /// Record: fields(label, key) followed by a 32-byte HMAC. nullopt if the
  /// label is unknown.
  std::optional<Bytes> certificate_for(const Label& label) const;
  std::optional<std::pair<Label, crypto::GroupElement>> open_certificate(
      ByteView cert) const;

 private:
  crypto::SymmetricSecret mac_key_;
  std::map<Label, crypto::GroupElement> registry_;
};

struct ConnectionMetadata {
  int minute_of_day = 0;
  std::string location;
  int words_per_minute = 0;
};

/// One message on the wire. `sender`/`recipient` are harness routing
/// metadata, never part of the encrypted payload.
struct ProtocolMessage {
  std::string step;
  Label sender;
  Label recipient;
  Bytes payload;
  bool plaintext = false;  // AS requests / certificates travel in clear
  std::optional<ConnectionMetadata> metadata;
  SimTime observed_at = 0;
};

/// Transcript export: "<step> <sender> <payload-hex>" per line.
std::string transcript_to_text(const std::vector<ProtocolMessage>& transcript);

struct SessionVerdict {
  bool initiator_accepts = false;
  bool responder_accepts = false;
  std::optional<Label> initiator_peer_belief;
  std::optional<Label> responder_peer_belief;
  std::set<std::string> secrets_leaked;  // hex of nonces known to the intruder
  std::vector<Bytes> leaked_plaintexts;  // every plaintext the intruder read
  std::optional<std::string> abort_step;
  std::vector<ProtocolMessage> transcript;
  bool responder_deceived = false;
};

/// Ordered reliable queue; every posted message is appended to the
/// transcript in post order, which is what golden-trace tests compare.
class MessageChannel {
 public:
  void post(ProtocolMessage msg);
  std::optional<ProtocolMessage> pop();
  bool empty() const { return queue_.empty(); }
  const std::vector<ProtocolMessage>& transcript() const { return transcript_; }

 private:
  std::deque<ProtocolMessage> queue_;
  std::vector<ProtocolMessage> transcript_;
};

// ---------------------------------------------------------------------------
// Protocol state machines. Each consumes messages addressed to it and emits
// follow-ups; the runner owns delivery order. Tags are formatted from a
// prefix: numeric prefixes give the attack notation ("1.3"), otherwise
// "NS-3" style.

std::string step_tag(const std::string& prefix, int step);

class NsInitiator {
 public:
  NsInitiator(Principal self, Label peer, Protocol proto, const AuthServer* as,
              std::string tag_prefix, Nonce na);

  std::vector<ProtocolMessage> start(RandomSource& rng);
  std::vector<ProtocolMessage> on_message(const ProtocolMessage& msg,
                                          RandomSource& rng);

  bool accepted() const { return accepted_; }
  const std::optional<std::string>& abort_step() const { return abort_; }
  const Label& peer() const { return peer_; }
  const Nonce& na() const { return na_; }
  const std::optional<Nonce>& nb() const { return nb_; }
  bool done() const { return accepted_ || abort_.has_value(); }

 private:
  std::vector<ProtocolMessage> send_step3(RandomSource& rng);
  void abort(int step);

  Principal self_;
  Label peer_;
  Protocol proto_;
  const AuthServer* as_;
  std::string prefix_;
  Nonce na_;
  std::optional<Nonce> nb_;
  std::optional<crypto::GroupElement> peer_key_;
  int phase_ = 0;  // 0 idle, 1 awaiting cert, 2 awaiting step6, 3 done
  bool accepted_ = false;
  std::optional<std::string> abort_;
};

class NsResponder {
 public:
  NsResponder(Principal self, Protocol proto, const AuthServer* as,
              std::string tag_prefix, Nonce nb);

  std::vector<ProtocolMessage> on_message(const ProtocolMessage& msg,
                                          RandomSource& rng);

  bool accepted() const { return accepted_; }
  const std::optional<std::string>& abort_step() const { return abort_; }
  const std::optional<Label>& claimed_peer() const { return claimed_; }
  const std::optional<Nonce>& na() const { return na_; }
  const Nonce& nb() const { return nb_; }
  bool done() const { return accepted_ || abort_.has_value(); }

 private:
  std::vector<ProtocolMessage> send_step6(RandomSource& rng);
  void abort(int step);

  Principal self_;
  Protocol proto_;
  const AuthServer* as_;
  std::string prefix_;
  Nonce nb_;
  std::optional<Nonce> na_;
  std::optional<Label> claimed_;
  std::optional<crypto::GroupElement> claimed_key_;
  int phase_ = 0;
  bool accepted_ = false;
  std::optional<std::string> abort_;
};

/// Client half of the identity-free protocol: no label ever enters a
/// payload; the server is trusted to infer the caller from traffic shape.
class CfClient {
 public:
  CfClient(Principal self, Label server, crypto::GroupElement server_key,
           std::string tag_prefix, Nonce na);

  std::vector<ProtocolMessage> start(RandomSource& rng);
  std::vector<ProtocolMessage> on_message(const ProtocolMessage& msg,
                                          RandomSource& rng);

  bool accepted() const { return accepted_; }
  const std::optional<std::string>& abort_step() const { return abort_; }
  const Nonce& na() const { return na_; }
  const std::optional<Nonce>& nb() const { return nb_; }
  bool done() const { return accepted_ || abort_.has_value(); }

 private:
  void abort(int step, const std::string& reason);

  Principal self_;
  Label server_;
  crypto::GroupElement server_key_;
  std::string prefix_;
  Nonce na_;
  std::optional<Nonce> nb_;
  int phase_ = 0;
  bool accepted_ = false;
  std::optional<std::string> abort_;
};

class CfServer {
 public:
  struct ClientRecord {
    crypto::GroupElement key;
    BehaviorProfile profile;
  };

  CfServer(Principal self, std::map<Label, ClientRecord> clients,
           std::string tag_prefix, Nonce nb);

  std::vector<ProtocolMessage> on_message(const ProtocolMessage& msg,
                                          RandomSource& rng);

  bool accepted() const { return accepted_; }
  const std::optional<std::string>& abort_step() const { return abort_; }
  const std::optional<Label>& inferred_client() const { return inferred_; }
  const Nonce& nb() const { return nb_; }
  const std::optional<Nonce>& na() const { return na_; }
  bool done() const { return accepted_ || abort_.has_value(); }

 private:
  void abort(int step, const std::string& reason);

  Principal self_;
  std::map<Label, ClientRecord> clients_;
  std::string prefix_;
  Nonce nb_;
  std::optional<Nonce> na_;
  std::optional<Label> inferred_;
  int phase_ = 0;
  bool accepted_ = false;
  std::optional<std::string> abort_;
};

// ---------------------------------------------------------------------------
// Whole-protocol runs

/// Honest seven-step Needham-Schroeder run through the AS.
SessionVerdict run_ns(const Principal& a, const Principal& b, const AuthServer& as,
                      MessageChannel& network, RandomSource& rng);

/// Same with Lowe's fix (responder identity in message 6).
SessionVerdict run_nsl(const Principal& a, const Principal& b, const AuthServer& as,
                       MessageChannel& network, RandomSource& rng);

/// The Lowe interleaving 1.3, 2.3, 2.6, 1.6, 1.7, 2.7 with `ss` in the
/// middle. Against NS the responder ends up deceived; against NSL the
/// initiator's identity check stops the run. `proto` selects the target.
SessionVerdict run_lowe_attack(const Principal& a, const Principal& b,
                               const Principal& ss, Protocol proto,
                               MessageChannel& network, RandomSource& rng);

/// Honest run of the identity-free CF protocol. The server must hold a
/// behavior profile for the client.
SessionVerdict run_cf_auth(const Principal& client, const Principal& server,
                           MessageChannel& network, RandomSource& rng);

// ---------------------------------------------------------------------------
// Bounded intruder search (see intruder.hpp for the engine)

struct IntruderCapabilities {
  bool intercept = true;
  bool forward = true;
  bool redirect = true;
  bool replay = true;
  bool decrypt_with_own_key = true;
  bool encrypt_known_plaintext = true;
  bool backdoor_oracle = false;
};

/// Breadth-first search over intruder actions against one initiator
/// (willing to talk to the intruder or to the honest responder) and one
/// responder session. Returns every verdict in which the responder is
/// deceived or a nonce leaks outside its sanctioned recipients. max_depth
/// counts intruder actions and must be <= 10.
std::vector<SessionVerdict> intruder_search(Protocol protocol, int max_depth,
                                            const IntruderCapabilities& caps,
                                            std::uint64_t seed = 1);

}  // namespace ofsim::auth

#endif
