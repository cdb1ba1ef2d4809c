#include "ofsim/auth.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ofsim::auth {

namespace {

Bytes frame2(ByteView a, ByteView b) {
  Bytes out;
  append_field(out, a);
  append_field(out, b);
  return out;
}

Bytes frame1(ByteView a) {
  Bytes out;
  append_field(out, a);
  return out;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

ConnectionMetadata observed_metadata(const BehaviorProfile& p) {
  return ConnectionMetadata{p.minute_of_day, p.location, p.words_per_minute};
}

BehaviorProfile as_profile(const ConnectionMetadata& m) {
  return BehaviorProfile{m.minute_of_day, m.location, m.words_per_minute};
}

}  // namespace

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::NS:
      return "ns";
    case Protocol::NSL:
      return "nsl";
    case Protocol::CF:
      return "cf";
  }
  return "?";
}

std::optional<Protocol> protocol_from_name(const std::string& name) {
  if (name == "ns") return Protocol::NS;
  if (name == "nsl") return Protocol::NSL;
  if (name == "cf") return Protocol::CF;
  return std::nullopt;
}

std::string step_tag(const std::string& prefix, int step) {
  return prefix + (all_digits(prefix) ? "." : "-") + std::to_string(step);
}

// ---------------------------------------------------------------------------
// Nonce

Nonce Nonce::random(RandomSource& rng) {
  Nonce n;
  do {
    rng.fill(n.bytes);
  } while (n.to_integer() < 2);
  return n;
}

std::optional<Nonce> Nonce::from_bytes(ByteView b) {
  if (b.size() != 16) return std::nullopt;
  Nonce n;
  std::copy(b.begin(), b.end(), n.bytes.begin());
  return n;
}

mpz_class Nonce::to_integer() const {
  mpz_class v;
  mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return v;
}

bool profile_matches(const BehaviorProfile& stored, const BehaviorProfile& observed) {
  int d = std::abs(stored.minute_of_day - observed.minute_of_day);
  d = std::min(d, 1440 - d);
  return d <= 30 && stored.location == observed.location &&
         std::abs(stored.words_per_minute - observed.words_per_minute) <= 5;
}

Principal Principal::generate(Label id, RandomSource& rng, BehaviorProfile profile) {
  Principal p;
  p.id = std::move(id);
  p.priv = crypto::Scalar::random_nonzero(rng);
  p.pub = crypto::mul_generator(p.priv);
  p.profile = std::move(profile);
  return p;
}

// ---------------------------------------------------------------------------
// AuthServer

AuthServer::AuthServer(RandomSource& rng)
    : mac_key_(crypto::SymmetricSecret::random(rng)) {}

void AuthServer::register_key(const Label& label, const crypto::GroupElement& key) {
  registry_[label] = key;
}

bool AuthServer::is_registered(const Label& label) const {
  return registry_.contains(label);
}

std::optional<Bytes> AuthServer::certificate_for(const Label& label) const {
  auto it = registry_.find(label);
  if (it == registry_.end()) return std::nullopt;
  Bytes body = frame2(to_bytes(label), it->second.bytes());
  crypto::Digest mac = crypto::hmac_sha256(mac_key_.bytes, body);
  append_field(body, mac);
  return body;
}

std::optional<std::pair<Label, crypto::GroupElement>> AuthServer::open_certificate(
    ByteView cert) const {
  auto fields = split_fields(cert);
  if (fields.size() != 3 || fields[2].size() != crypto::kDigestBytes)
    return std::nullopt;
  Bytes body = frame2(fields[0], fields[1]);
  crypto::Digest mac = crypto::hmac_sha256(mac_key_.bytes, body);
  if (!std::equal(mac.begin(), mac.end(), fields[2].begin())) return std::nullopt;
  try {
    return std::make_pair(Label(fields[0].begin(), fields[0].end()),
                          crypto::GroupElement::from_bytes(fields[1]));
  } catch (const InvalidKey&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// MessageChannel

void MessageChannel::post(ProtocolMessage msg) {
  transcript_.push_back(msg);
  queue_.push_back(std::move(msg));
}

std::optional<ProtocolMessage> MessageChannel::pop() {
  if (queue_.empty()) return std::nullopt;
  ProtocolMessage m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

std::string transcript_to_text(const std::vector<ProtocolMessage>& transcript) {
  std::ostringstream os;
  for (const auto& m : transcript)
    os << m.step << " " << m.sender << " " << to_hex(m.payload) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// NsInitiator

NsInitiator::NsInitiator(Principal self, Label peer, Protocol proto,
                         const AuthServer* as, std::string tag_prefix, Nonce na)
    : self_(std::move(self)),
      peer_(std::move(peer)),
      proto_(proto),
      as_(as),
      prefix_(std::move(tag_prefix)),
      na_(na) {}

void NsInitiator::abort(int step) {
  abort_ = step_tag(prefix_, step);
  phase_ = 3;
}

std::vector<ProtocolMessage> NsInitiator::start(RandomSource& rng) {
  if (auto it = self_.directory.find(peer_); it != self_.directory.end()) {
    peer_key_ = it->second;
    return send_step3(rng);
  }
  if (as_ != nullptr) {
    ProtocolMessage req;
    req.step = step_tag(prefix_, 1);
    req.sender = self_.id;
    req.recipient = "AS";
    req.payload = frame2(to_bytes(self_.id), to_bytes(peer_));
    req.plaintext = true;
    phase_ = 1;
    return {std::move(req)};
  }
  abort(3);  // no way to learn the peer key
  return {};
}

std::vector<ProtocolMessage> NsInitiator::send_step3(RandomSource& rng) {
  ProtocolMessage m;
  m.step = step_tag(prefix_, 3);
  m.sender = self_.id;
  m.recipient = peer_;
  m.payload =
      crypto::ecies_encrypt(frame2(na_.bytes, to_bytes(self_.id)), *peer_key_, rng)
          .serialize();
  phase_ = 2;
  return {std::move(m)};
}

std::vector<ProtocolMessage> NsInitiator::on_message(const ProtocolMessage& msg,
                                                     RandomSource& rng) {
  if (phase_ == 1) {
    // Certificate reply (step 2). An empty payload is the server's
    // unknown-principal answer: the lookup itself failed.
    if (msg.payload.empty()) {
      abort(1);
      return {};
    }
    auto cert = as_ ? as_->open_certificate(msg.payload) : std::nullopt;
    if (!cert || cert->first != peer_) {
      abort(2);
      return {};
    }
    peer_key_ = cert->second;
    return send_step3(rng);
  }
  if (phase_ == 2) {
    auto plain = crypto::ecies_decrypt(msg.payload, self_.priv);
    if (!plain) {
      abort(6);
      return {};
    }
    auto fields = split_fields(*plain);
    std::optional<Nonce> nb;
    if (proto_ == Protocol::NSL) {
      if (fields.size() != 3 || Label(fields[0].begin(), fields[0].end()) != peer_) {
        abort(6);
        return {};
      }
      if (!std::ranges::equal(fields[1], na_.bytes)) {
        abort(6);
        return {};
      }
      nb = Nonce::from_bytes(fields[2]);
    } else {
      if (fields.size() != 2 || !std::ranges::equal(fields[0], na_.bytes)) {
        abort(6);
        return {};
      }
      nb = Nonce::from_bytes(fields[1]);
    }
    if (!nb) {
      abort(6);
      return {};
    }
    nb_ = *nb;
    ProtocolMessage m;
    m.step = step_tag(prefix_, 7);
    m.sender = self_.id;
    m.recipient = peer_;
    m.payload = crypto::ecies_encrypt(frame1(nb->bytes), *peer_key_, rng).serialize();
    accepted_ = true;
    phase_ = 3;
    return {std::move(m)};
  }
  return {};
}

// ---------------------------------------------------------------------------
// NsResponder

NsResponder::NsResponder(Principal self, Protocol proto, const AuthServer* as,
                         std::string tag_prefix, Nonce nb)
    : self_(std::move(self)),
      proto_(proto),
      as_(as),
      prefix_(std::move(tag_prefix)),
      nb_(nb) {}

void NsResponder::abort(int step) {
  abort_ = step_tag(prefix_, step);
  phase_ = 3;
}

std::vector<ProtocolMessage> NsResponder::send_step6(RandomSource& rng) {
  Bytes plain;
  if (proto_ == Protocol::NSL) append_field(plain, to_bytes(self_.id));
  append_field(plain, na_->bytes);
  append_field(plain, nb_.bytes);
  ProtocolMessage m;
  m.step = step_tag(prefix_, 6);
  m.sender = self_.id;
  m.recipient = *claimed_;
  m.payload = crypto::ecies_encrypt(plain, *claimed_key_, rng).serialize();
  phase_ = 2;
  return {std::move(m)};
}

std::vector<ProtocolMessage> NsResponder::on_message(const ProtocolMessage& msg,
                                                     RandomSource& rng) {
  if (phase_ == 0) {
    auto plain = crypto::ecies_decrypt(msg.payload, self_.priv);
    if (!plain) {
      abort(3);
      return {};
    }
    auto fields = split_fields(*plain);
    if (fields.size() != 2) {
      abort(3);
      return {};
    }
    auto na = Nonce::from_bytes(fields[0]);
    if (!na) {
      abort(3);
      return {};
    }
    na_ = *na;
    claimed_ = Label(fields[1].begin(), fields[1].end());
    if (auto it = self_.directory.find(*claimed_); it != self_.directory.end()) {
      claimed_key_ = it->second;
      return send_step6(rng);
    }
    if (as_ != nullptr) {
      ProtocolMessage req;
      req.step = step_tag(prefix_, 4);
      req.sender = self_.id;
      req.recipient = "AS";
      req.payload = frame2(to_bytes(self_.id), to_bytes(*claimed_));
      req.plaintext = true;
      phase_ = 1;
      return {std::move(req)};
    }
    abort(3);
    return {};
  }
  if (phase_ == 1) {
    if (msg.payload.empty()) {
      abort(4);
      return {};
    }
    auto cert = as_ ? as_->open_certificate(msg.payload) : std::nullopt;
    if (!cert || cert->first != *claimed_) {
      abort(5);
      return {};
    }
    claimed_key_ = cert->second;
    return send_step6(rng);
  }
  if (phase_ == 2) {
    auto plain = crypto::ecies_decrypt(msg.payload, self_.priv);
    if (!plain) {
      abort(7);
      return {};
    }
    auto fields = split_fields(*plain);
    if (fields.size() != 1 || !std::ranges::equal(fields[0], nb_.bytes)) {
      abort(7);
      return {};
    }
    accepted_ = true;
    phase_ = 3;
    return {};
  }
  return {};
}

// ---------------------------------------------------------------------------
// CfClient

CfClient::CfClient(Principal self, Label server, crypto::GroupElement server_key,
                   std::string tag_prefix, Nonce na)
    : self_(std::move(self)),
      server_(std::move(server)),
      server_key_(std::move(server_key)),
      prefix_(std::move(tag_prefix)),
      na_(na) {}

void CfClient::abort(int step, const std::string& reason) {
  abort_ = step_tag(prefix_, step) + (reason.empty() ? "" : ":" + reason);
  phase_ = 3;
}

std::vector<ProtocolMessage> CfClient::start(RandomSource& rng) {
  ProtocolMessage m;
  m.step = step_tag(prefix_, 1);
  m.sender = self_.id;
  m.recipient = server_;
  m.payload = crypto::ecies_encrypt(frame1(na_.bytes), server_key_, rng).serialize();
  m.metadata = observed_metadata(self_.profile);
  phase_ = 1;
  return {std::move(m)};
}

std::vector<ProtocolMessage> CfClient::on_message(const ProtocolMessage& msg,
                                                  RandomSource& rng) {
  if (phase_ != 1) return {};
  auto plain = crypto::ecies_decrypt(msg.payload, self_.priv);
  if (!plain) {
    abort(2, "decrypt-failure");
    return {};
  }
  auto fields = split_fields(*plain);
  if (fields.size() != 2 || fields[0].size() != 72) {
    abort(2, "malformed");
    return {};
  }
  auto expected =
      contfrac::derive_fc(na_.to_integer(), self_.pub, server_key_).encode();
  if (!std::ranges::equal(fields[0], expected)) {
    abort(2, "fc-mismatch");
    return {};
  }
  auto nb = Nonce::from_bytes(fields[1]);
  if (!nb) {
    abort(2, "malformed");
    return {};
  }
  nb_ = *nb;
  auto fc2 = contfrac::derive_fc(nb->to_integer(), server_key_, self_.pub).encode();
  ProtocolMessage m;
  m.step = step_tag(prefix_, 3);
  m.sender = self_.id;
  m.recipient = server_;
  m.payload = crypto::ecies_encrypt(frame1(fc2), server_key_, rng).serialize();
  accepted_ = true;
  phase_ = 3;
  return {std::move(m)};
}

// ---------------------------------------------------------------------------
// CfServer

CfServer::CfServer(Principal self, std::map<Label, ClientRecord> clients,
                   std::string tag_prefix, Nonce nb)
    : self_(std::move(self)),
      clients_(std::move(clients)),
      prefix_(std::move(tag_prefix)),
      nb_(nb) {}

void CfServer::abort(int step, const std::string& reason) {
  abort_ = step_tag(prefix_, step) + (reason.empty() ? "" : ":" + reason);
  phase_ = 3;
}

std::vector<ProtocolMessage> CfServer::on_message(const ProtocolMessage& msg,
                                                  RandomSource& rng) {
  if (phase_ == 0) {
    auto plain = crypto::ecies_decrypt(msg.payload, self_.priv);
    if (!plain) {
      abort(1, "decrypt-failure");
      return {};
    }
    auto fields = split_fields(*plain);
    auto na = fields.size() == 1 ? Nonce::from_bytes(fields[0]) : std::nullopt;
    if (!na) {
      abort(1, "malformed");
      return {};
    }
    if (!msg.metadata) {
      abort(1, "unrecognized-profile");
      return {};
    }
    // Behavior inference: the caller is whoever uniquely matches the
    // observed traffic shape. Zero or several matches is a failure.
    BehaviorProfile seen = as_profile(*msg.metadata);
    std::optional<Label> match;
    for (const auto& [label, rec] : clients_) {
      if (profile_matches(rec.profile, seen)) {
        if (match) {
          match.reset();
          break;
        }
        match = label;
      }
    }
    if (!match) {
      abort(1, "unrecognized-profile");
      return {};
    }
    na_ = *na;
    inferred_ = *match;
    const auto& rec = clients_.at(*match);
    auto fc1 = contfrac::derive_fc(na->to_integer(), rec.key, self_.pub).encode();
    ProtocolMessage m;
    m.step = step_tag(prefix_, 2);
    m.sender = self_.id;
    m.recipient = *match;
    m.payload =
        crypto::ecies_encrypt(frame2(fc1, nb_.bytes), rec.key, rng).serialize();
    phase_ = 1;
    return {std::move(m)};
  }
  if (phase_ == 1) {
    auto plain = crypto::ecies_decrypt(msg.payload, self_.priv);
    if (!plain) {
      abort(3, "decrypt-failure");
      return {};
    }
    auto fields = split_fields(*plain);
    if (fields.size() != 1 || fields[0].size() != 72) {
      abort(3, "malformed");
      return {};
    }
    auto expected =
        contfrac::derive_fc(nb_.to_integer(), self_.pub, clients_.at(*inferred_).key)
            .encode();
    if (!std::ranges::equal(fields[0], expected)) {
      abort(3, "fc-mismatch");
      return {};
    }
    accepted_ = true;
    phase_ = 3;
    return {};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Whole-protocol runs

namespace {

std::vector<ProtocolMessage> as_respond(const AuthServer& as,
                                        const ProtocolMessage& msg) {
  auto fields = split_fields(msg.payload);
  if (fields.size() != 2) return {};
  Label requester(fields[0].begin(), fields[0].end());
  Label subject(fields[1].begin(), fields[1].end());
  int step = 2;
  if (auto dash = msg.step.find_last_of("-."); dash != std::string::npos)
    step = std::stoi(msg.step.substr(dash + 1)) + 1;
  auto prefix_len = msg.step.find_last_of("-.");
  std::string prefix = msg.step.substr(0, prefix_len);

  ProtocolMessage reply;
  reply.step = step_tag(prefix, step);
  reply.sender = "AS";
  reply.recipient = requester;
  reply.plaintext = true;
  if (auto cert = as.certificate_for(subject)) reply.payload = *cert;
  return {std::move(reply)};
}

SessionVerdict run_ns_impl(Protocol proto, const Principal& a, const Principal& b,
                           const AuthServer& as, MessageChannel& net,
                           RandomSource& rng) {
  std::string prefix = proto == Protocol::NSL ? "NSL" : "NS";
  NsInitiator init(a, b.id, proto, &as, prefix, Nonce::random(rng));
  NsResponder resp(b, proto, &as, prefix, Nonce::random(rng));

  for (auto& m : init.start(rng)) net.post(std::move(m));
  while (auto msg = net.pop()) {
    std::vector<ProtocolMessage> out;
    if (msg->recipient == "AS")
      out = as_respond(as, *msg);
    else if (msg->recipient == a.id)
      out = init.on_message(*msg, rng);
    else if (msg->recipient == b.id)
      out = resp.on_message(*msg, rng);
    for (auto& m : out) net.post(std::move(m));
  }

  SessionVerdict v;
  v.initiator_accepts = init.accepted();
  v.responder_accepts = resp.accepted();
  if (init.accepted()) v.initiator_peer_belief = init.peer();
  if (resp.accepted()) v.responder_peer_belief = resp.claimed_peer();
  v.abort_step = init.abort_step() ? init.abort_step() : resp.abort_step();
  v.transcript = net.transcript();
  v.responder_deceived =
      resp.accepted() && resp.claimed_peer() == a.id &&
      !(init.accepted() && init.peer() == b.id && init.na() == resp.na() &&
        init.nb() == resp.nb());
  return v;
}

}  // namespace

SessionVerdict run_ns(const Principal& a, const Principal& b, const AuthServer& as,
                      MessageChannel& network, RandomSource& rng) {
  return run_ns_impl(Protocol::NS, a, b, as, network, rng);
}

SessionVerdict run_nsl(const Principal& a, const Principal& b, const AuthServer& as,
                       MessageChannel& network, RandomSource& rng) {
  return run_ns_impl(Protocol::NSL, a, b, as, network, rng);
}

SessionVerdict run_lowe_attack(const Principal& a, const Principal& b,
                               const Principal& ss, Protocol proto,
                               MessageChannel& net, RandomSource& rng) {
  SessionVerdict v;

  // Run 1: A willingly opens a session with SS. Keys come from directories;
  // the paper's attack ignores the AS exchange.
  NsInitiator init(a, ss.id, proto, nullptr, "1", Nonce::random(rng));
  NsResponder resp(b, proto, nullptr, "2", Nonce::random(rng));

  auto leak = [&](const Nonce& n) { v.secrets_leaked.insert(n.hex()); };

  auto outs = init.start(rng);
  if (init.abort_step()) {
    v.abort_step = init.abort_step();
    v.transcript = net.transcript();
    return v;
  }
  // 1.3 arrives at SS, who decrypts it with his own key.
  net.post(outs.at(0));
  auto plain13 = crypto::ecies_decrypt(outs.at(0).payload, ss.priv);
  if (!plain13) {
    v.abort_step = "1.3";
    v.transcript = net.transcript();
    return v;
  }
  v.leaked_plaintexts.push_back(*plain13);
  leak(init.na());

  // 2.3: SS re-encrypts (N_a || A) to B, impersonating A.
  ProtocolMessage m23;
  m23.step = "2.3";
  m23.sender = ss.id;
  m23.recipient = b.id;
  m23.payload =
      crypto::ecies_encrypt(*plain13, ss.directory.at(b.id), rng).serialize();
  net.post(m23);
  auto out_b = resp.on_message(m23, rng);

  if (!out_b.empty()) {
    // 2.6 is addressed to A but the network is the intruder's: he forwards
    // the ciphertext verbatim as 1.6 of his own session with A.
    net.post(out_b.at(0));
    ProtocolMessage m16 = out_b.at(0);
    m16.step = "1.6";
    m16.sender = ss.id;
    net.post(m16);
    auto out_a = init.on_message(m16, rng);

    if (!out_a.empty()) {
      // 1.7: A returns N_b encrypted for SS, who can read it.
      net.post(out_a.at(0));
      auto plain17 = crypto::ecies_decrypt(out_a.at(0).payload, ss.priv);
      if (plain17) {
        v.leaked_plaintexts.push_back(*plain17);
        auto fields = split_fields(*plain17);
        if (fields.size() == 1) {
          if (auto nb = Nonce::from_bytes(fields[0])) leak(*nb);
          // 2.7: SS closes B's run with the recovered N_b.
          ProtocolMessage m27;
          m27.step = "2.7";
          m27.sender = ss.id;
          m27.recipient = b.id;
          m27.payload =
              crypto::ecies_encrypt(frame1(fields[0]), ss.directory.at(b.id), rng)
                  .serialize();
          net.post(m27);
          resp.on_message(m27, rng);
        }
      }
    }
  }

  v.initiator_accepts = init.accepted();
  v.responder_accepts = resp.accepted();
  if (init.accepted()) v.initiator_peer_belief = init.peer();
  if (resp.accepted()) v.responder_peer_belief = resp.claimed_peer();
  if (init.abort_step())
    v.abort_step = init.abort_step();
  else if (resp.abort_step())
    v.abort_step = resp.abort_step();
  v.transcript = net.transcript();
  v.responder_deceived =
      resp.accepted() && resp.claimed_peer() == a.id &&
      !(init.accepted() && init.peer() == b.id && init.na() == resp.na() &&
        init.nb() == resp.nb());
  return v;
}

SessionVerdict run_cf_auth(const Principal& client, const Principal& server,
                           MessageChannel& net, RandomSource& rng) {
  auto it = client.directory.find(server.id);
  crypto::GroupElement server_key =
      it != client.directory.end() ? it->second : server.pub;
  CfClient c(client, server.id, server_key, "CF", Nonce::random(rng));

  std::map<Label, CfServer::ClientRecord> records;
  for (const auto& [label, key] : server.directory)
    records[label] = CfServer::ClientRecord{key, BehaviorProfile{}};
  // Profiles live beside the directory on the server side; the client's own
  // record carries its true profile, others stay unmatched defaults.
  records[client.id] = CfServer::ClientRecord{client.pub, client.profile};
  CfServer s(server, std::move(records), "CF", Nonce::random(rng));

  for (auto& m : c.start(rng)) net.post(std::move(m));
  while (auto msg = net.pop()) {
    std::vector<ProtocolMessage> out;
    if (msg->recipient == client.id)
      out = c.on_message(*msg, rng);
    else if (msg->recipient == server.id)
      out = s.on_message(*msg, rng);
    for (auto& m : out) net.post(std::move(m));
  }

  SessionVerdict v;
  v.initiator_accepts = c.accepted();
  v.responder_accepts = s.accepted();
  if (c.accepted()) v.initiator_peer_belief = server.id;
  if (s.accepted()) v.responder_peer_belief = s.inferred_client();
  v.abort_step = c.abort_step() ? c.abort_step() : s.abort_step();
  v.transcript = net.transcript();
  v.responder_deceived =
      s.accepted() && s.inferred_client() == client.id &&
      !(c.accepted() && c.na() == s.na() && c.nb() == s.nb());
  return v;
}

}  // namespace ofsim::auth
