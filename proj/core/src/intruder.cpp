// Bounded Dolev-Yao-style intruder search. The search runs over a semantic
// mirror of the protocol (field identities instead of ciphertext bytes),
// which keeps the state space finite; every finding is then replayed through
// the real state machines with real ECIES to produce the returned verdict.
// Deliveries an agent would reject only terminate that agent's session, so
// the search prunes them; this keeps the search exhaustive for deception and
// leak reachability within the modeled world: one initiator session (peer
// chosen by the intruder) and one responder session.

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "ofsim/auth.hpp"

namespace ofsim::auth {

namespace {

enum LabelId : int { LA = 0, LB = 1, LE = 2 };
enum NonceId : int { N_A = 0, N_B = 1, N_E = 2 };
constexpr int kNone = -1;

// Multi-byte labels so the byte-level anonymity scans cannot false-positive
// on single characters that occur in random ciphertext bytes.
const char* label_name(int id) {
  switch (id) {
    case LA:
      return "alice";
    case LB:
      return "bob";
    case LE:
      return "trudy";
  }
  return "?";
}

struct FcId {
  int nonce = kNone;
  int k1 = kNone;
  int k2 = kNone;
  auto operator<=>(const FcId&) const = default;
};

enum class Shape : int { NS3, NS6, NSL6, NS7, CF1, CF2, CF3 };

int shape_step(Shape s) {
  switch (s) {
    case Shape::NS3:
      return 3;
    case Shape::NS6:
    case Shape::NSL6:
      return 6;
    case Shape::NS7:
      return 7;
    case Shape::CF1:
      return 1;
    case Shape::CF2:
      return 2;
    case Shape::CF3:
      return 3;
  }
  return 0;
}

struct SemMessage {
  Shape shape = Shape::NS3;
  int target = kNone;  // owner of the key the payload is encrypted to
  int n1 = kNone;
  int n2 = kNone;
  int label = kNone;
  FcId fc;

  SemMessage() = default;
  SemMessage(Shape s, int t) : shape(s), target(t) {}
  auto operator<=>(const SemMessage&) const = default;
};

struct Action {
  enum class Kind { Start, Construct, Replay };
  Kind kind = Kind::Start;
  int start_peer = kNone;
  SemMessage msg;
  int replay_index = kNone;
  int metadata = kNone;  // CF1 observable profile, spoofable on any delivery
};

struct SemState {
  int a_phase = -1;  // -1 idle, 1 awaiting reply, 3 done
  int a_peer = kNone;
  int a_n2 = kNone;
  bool a_accept = false;

  int b_phase = 0;  // 0 awaiting first message, 1 awaiting closer, 3 done
  int b_claimed = kNone;
  int b_n1 = kNone;
  bool b_accept = false;

  std::set<int> known_nonces{N_E};
  std::set<FcId> known_fcs;
  std::vector<SemMessage> observed;
  std::set<int> leaked;

  std::vector<Action> history;

  bool deceived() const {
    return b_accept && b_claimed == LA &&
           !(a_accept && a_peer == LB && b_n1 == N_A && a_n2 == N_B);
  }

  std::string canon() const {
    std::ostringstream os;
    os << a_phase << '|' << a_peer << '|' << a_n2 << '|' << a_accept << '|'
       << b_phase << '|' << b_claimed << '|' << b_n1 << '|' << b_accept << '#';
    for (int n : known_nonces) os << n << ',';
    os << '#';
    for (const auto& f : known_fcs) os << f.nonce << '.' << f.k1 << '.' << f.k2 << ',';
    os << '#';
    for (const auto& m : observed)
      os << int(m.shape) << '.' << m.target << '.' << m.n1 << '.' << m.n2 << '.'
         << m.label << '.' << m.fc.nonce << '.' << m.fc.k1 << '.' << m.fc.k2 << ',';
    os << '#';
    for (int n : leaked) os << n << ',';
    return os.str();
  }
};

// Sanctioned recipient of a nonce: whoever its creator addressed it to.
int sanctioned_recipient(const SemState& s, int nonce) {
  if (nonce == N_A) return s.a_peer;
  if (nonce == N_B) return s.b_claimed;
  return LE;  // intruder's own nonce
}

void learn_nonce(SemState& s, int nonce) {
  if (nonce == kNone || s.known_nonces.count(nonce)) return;
  s.known_nonces.insert(nonce);
  if (nonce != N_E && sanctioned_recipient(s, nonce) != LE) s.leaked.insert(nonce);
}

void observe(SemState& s, const SemMessage& m, const IntruderCapabilities& caps) {
  if (!caps.intercept) return;
  s.observed.push_back(m);
  bool readable = caps.backdoor_oracle || (caps.decrypt_with_own_key && m.target == LE);
  if (!readable) return;
  learn_nonce(s, m.n1);
  learn_nonce(s, m.n2);
  if (m.fc.nonce != kNone) s.known_fcs.insert(m.fc);
}

bool fc_constructible(const SemState& s, const FcId& fc) {
  return s.known_nonces.count(fc.nonce) || s.known_fcs.count(fc);
}

// ---------------------------------------------------------------------------
// Honest-agent transitions on accepted deliveries.

std::optional<SemMessage> start_initiator(SemState& s, Protocol p, int peer) {
  s.a_phase = 1;
  s.a_peer = peer;
  if (p == Protocol::CF) {
    SemMessage m{Shape::CF1, peer};
    m.n1 = N_A;
    return m;
  }
  SemMessage m{Shape::NS3, peer};
  m.n1 = N_A;
  m.label = LA;
  return m;
}

std::optional<SemMessage> deliver_semantic(SemState& s, Protocol p,
                                           const SemMessage& m, int metadata) {
  if (p != Protocol::CF) {
    if (m.shape == Shape::NS3 && s.b_phase == 0) {
      s.b_claimed = m.label;
      s.b_n1 = m.n1;
      s.b_phase = 1;
      SemMessage out{p == Protocol::NSL ? Shape::NSL6 : Shape::NS6, m.label};
      out.n1 = m.n1;
      out.n2 = N_B;
      if (p == Protocol::NSL) out.label = LB;
      return out;
    }
    if ((m.shape == Shape::NS6 || m.shape == Shape::NSL6) && s.a_phase == 1) {
      s.a_n2 = m.n2;
      s.a_accept = true;
      s.a_phase = 3;
      SemMessage out{Shape::NS7, s.a_peer};
      out.n1 = m.n2;
      return out;
    }
    if (m.shape == Shape::NS7 && s.b_phase == 1) {
      s.b_accept = true;
      s.b_phase = 3;
      return std::nullopt;
    }
  } else {
    if (m.shape == Shape::CF1 && s.b_phase == 0) {
      s.b_claimed = metadata;  // unique behavior-profile match
      s.b_n1 = m.n1;
      s.b_phase = 1;
      SemMessage out{Shape::CF2, metadata};
      out.fc = FcId{m.n1, metadata, LB};
      out.n2 = N_B;
      return out;
    }
    if (m.shape == Shape::CF2 && s.a_phase == 1) {
      s.a_n2 = m.n2;
      s.a_accept = true;
      s.a_phase = 3;
      SemMessage out{Shape::CF3, s.a_peer};
      out.fc = FcId{m.n2, s.a_peer, LA};
      return out;
    }
    if (m.shape == Shape::CF3 && s.b_phase == 1) {
      s.b_accept = true;
      s.b_phase = 3;
      return std::nullopt;
    }
  }
  throw Error("delivery did not match the expected step");
}

// ---------------------------------------------------------------------------
// Action enumeration: only deliveries the target will accept.

std::vector<Action> enumerate_actions(const SemState& s, Protocol p,
                                      const IntruderCapabilities& caps) {
  std::vector<Action> acts;

  if (s.a_phase == -1) {
    for (int peer : {LB, LE}) {
      Action a;
      a.kind = Action::Kind::Start;
      a.start_peer = peer;
      acts.push_back(a);
    }
  }

  auto add_construct = [&](const SemMessage& m, int metadata = kNone) {
    if (!caps.encrypt_known_plaintext) return;
    Action a;
    a.kind = Action::Kind::Construct;
    a.msg = m;
    a.metadata = metadata;
    acts.push_back(a);
  };
  auto add_replays = [&](auto&& acceptable, int metadata = kNone) {
    if (!caps.replay && !caps.forward && !caps.redirect) return;
    for (std::size_t i = 0; i < s.observed.size(); ++i) {
      if (!acceptable(s.observed[i])) continue;
      Action a;
      a.kind = Action::Kind::Replay;
      a.replay_index = static_cast<int>(i);
      a.msg = s.observed[i];
      a.metadata = metadata;
      acts.push_back(a);
    }
  };

  if (p != Protocol::CF) {
    if (s.b_phase == 0) {
      for (int n : s.known_nonces)
        for (int l : {LA, LB, LE}) {
          SemMessage m{Shape::NS3, LB};
          m.n1 = n;
          m.label = l;
          add_construct(m);
        }
      add_replays([&](const SemMessage& o) {
        return o.shape == Shape::NS3 && o.target == LB;
      });
    }
    if (s.a_phase == 1) {
      Shape want = p == Protocol::NSL ? Shape::NSL6 : Shape::NS6;
      if (s.known_nonces.count(N_A)) {
        for (int n2 : s.known_nonces) {
          SemMessage m{want, LA};
          m.n1 = N_A;
          m.n2 = n2;
          if (p == Protocol::NSL) m.label = s.a_peer;
          add_construct(m);
        }
      }
      add_replays([&](const SemMessage& o) {
        if (o.shape != want || o.target != LA || o.n1 != N_A) return false;
        return p != Protocol::NSL || o.label == s.a_peer;
      });
    }
    if (s.b_phase == 1) {
      if (s.known_nonces.count(N_B)) {
        SemMessage m{Shape::NS7, LB};
        m.n1 = N_B;
        add_construct(m);
      }
      add_replays([&](const SemMessage& o) {
        return o.shape == Shape::NS7 && o.target == LB && o.n1 == N_B;
      });
    }
  } else {
    if (s.b_phase == 0) {
      for (int meta : {LA, LE}) {
        for (int n : s.known_nonces) {
          SemMessage m{Shape::CF1, LB};
          m.n1 = n;
          add_construct(m, meta);
        }
        add_replays(
            [&](const SemMessage& o) {
              return o.shape == Shape::CF1 && o.target == LB;
            },
            meta);
      }
    }
    if (s.a_phase == 1) {
      FcId need{N_A, LA, s.a_peer};
      if (fc_constructible(s, need)) {
        for (int n2 : s.known_nonces) {
          SemMessage m{Shape::CF2, LA};
          m.fc = need;
          m.n2 = n2;
          add_construct(m);
        }
      }
      add_replays([&](const SemMessage& o) {
        return o.shape == Shape::CF2 && o.target == LA && o.fc == need;
      });
    }
    if (s.b_phase == 1) {
      FcId need{N_B, LB, s.b_claimed};
      if (fc_constructible(s, need)) {
        SemMessage m{Shape::CF3, LB};
        m.fc = need;
        add_construct(m);
      }
      add_replays([&](const SemMessage& o) {
        return o.shape == Shape::CF3 && o.target == LB && o.fc == need;
      });
    }
  }
  return acts;
}

SemState apply_action(const SemState& s, Protocol p, const Action& act,
                      const IntruderCapabilities& caps) {
  SemState next = s;
  next.history.push_back(act);
  if (act.kind == Action::Kind::Start) {
    if (auto out = start_initiator(next, p, act.start_peer))
      observe(next, *out, caps);
    return next;
  }
  if (auto out = deliver_semantic(next, p, act.msg, act.metadata))
    observe(next, *out, caps);
  return next;
}

// ---------------------------------------------------------------------------
// Concrete replay of an action history.

struct ReplayWorld {
  Principal a, b, e;
  Nonce na, nb, ne;

  crypto::GroupElement key(int id) const {
    return id == LA ? a.pub : id == LB ? b.pub : e.pub;
  }
  const Nonce& nonce(int id) const { return id == N_A ? na : id == N_B ? nb : ne; }
  BehaviorProfile profile(int id) const { return id == LA ? a.profile : e.profile; }
  crypto::Scalar priv(int id) const {
    return id == LA ? a.priv : id == LB ? b.priv : e.priv;
  }

  Bytes fc_bytes(const FcId& fc) const {
    auto enc = contfrac::derive_fc(nonce(fc.nonce).to_integer(), key(fc.k1),
                                   key(fc.k2))
                   .encode();
    return Bytes(enc.begin(), enc.end());
  }
};

ReplayWorld make_world(RandomSource& rng) {
  ReplayWorld w;
  w.a = Principal::generate("alice", rng, BehaviorProfile{720, "downtown-dakar", 30});
  w.b = Principal::generate("bob", rng, BehaviorProfile{1020, "downtown-sevres", 40});
  w.e =
      Principal::generate("trudy", rng, BehaviorProfile{1080, "obelisque-square", 15});
  for (auto* p : {&w.a, &w.b, &w.e}) {
    p->directory["alice"] = w.a.pub;
    p->directory["bob"] = w.b.pub;
    p->directory["trudy"] = w.e.pub;
  }
  w.na = Nonce::random(rng);
  w.nb = Nonce::random(rng);
  w.ne = Nonce::random(rng);
  return w;
}

SessionVerdict replay_history(Protocol p, const std::vector<Action>& history,
                              const IntruderCapabilities& caps, std::uint64_t seed) {
  DeterministicRandom rng(seed);
  ReplayWorld w = make_world(rng);
  MessageChannel net;

  std::optional<NsInitiator> init;
  std::optional<NsResponder> resp;
  std::optional<CfClient> client;
  std::optional<CfServer> server;
  if (p == Protocol::CF) {
    std::map<Label, CfServer::ClientRecord> records;
    records["alice"] = {w.a.pub, w.a.profile};
    records["trudy"] = {w.e.pub, w.e.profile};
    server.emplace(w.b, std::move(records), "2", w.nb);
  } else {
    resp.emplace(w.b, p, nullptr, "2", w.nb);
  }

  SessionVerdict v;
  std::vector<Bytes> observed_wire;
  SemState shadow;  // leak bookkeeping mirrors the search exactly

  auto observe_concrete = [&](const ProtocolMessage& msg, const SemMessage& sem) {
    observed_wire.push_back(msg.payload);
    observe(shadow, sem, caps);
    bool readable =
        caps.backdoor_oracle || (caps.decrypt_with_own_key && sem.target == LE);
    if (readable && !msg.plaintext) {
      // Under the oracle the harness decrypts with the target's key,
      // modeling the global backdoor of the threat model.
      auto plain = crypto::ecies_decrypt(msg.payload, w.priv(sem.target));
      if (plain) v.leaked_plaintexts.push_back(*plain);
    }
  };

  auto post_outputs = [&](std::vector<ProtocolMessage> outs,
                          const std::optional<SemMessage>& sem) {
    for (auto& m : outs) {
      net.post(m);
      if (sem) observe_concrete(m, *sem);
    }
  };

  int a_peer = kNone;
  for (const Action& act : history) {
    if (act.kind == Action::Kind::Start) {
      a_peer = act.start_peer;
      auto sem = start_initiator(shadow, p, act.start_peer);
      if (p == Protocol::CF) {
        client.emplace(w.a, label_name(act.start_peer), w.key(act.start_peer), "1",
                       w.na);
        post_outputs(client->start(rng), sem);
      } else {
        init.emplace(w.a, label_name(act.start_peer), p, nullptr, "1", w.na);
        post_outputs(init->start(rng), sem);
      }
      continue;
    }

    // Build the concrete wire for the delivery.
    const SemMessage& m = act.msg;
    ProtocolMessage pm;
    pm.sender = "trudy";
    bool to_initiator = m.shape == Shape::NS6 || m.shape == Shape::NSL6 ||
                        m.shape == Shape::CF2;
    pm.recipient = to_initiator ? "alice" : "bob";
    pm.step = step_tag(to_initiator ? "1" : "2", shape_step(m.shape));
    if (act.kind == Action::Kind::Replay) {
      pm.payload = observed_wire.at(static_cast<std::size_t>(act.replay_index));
    } else {
      Bytes plain;
      switch (m.shape) {
        case Shape::NS3:
          append_field(plain, w.nonce(m.n1).bytes);
          append_field(plain, to_bytes(label_name(m.label)));
          break;
        case Shape::NS6:
          append_field(plain, w.nonce(m.n1).bytes);
          append_field(plain, w.nonce(m.n2).bytes);
          break;
        case Shape::NSL6:
          append_field(plain, to_bytes(label_name(m.label)));
          append_field(plain, w.nonce(m.n1).bytes);
          append_field(plain, w.nonce(m.n2).bytes);
          break;
        case Shape::NS7:
          append_field(plain, w.nonce(m.n1).bytes);
          break;
        case Shape::CF1:
          append_field(plain, w.nonce(m.n1).bytes);
          break;
        case Shape::CF2:
          append_field(plain, w.fc_bytes(m.fc));
          append_field(plain, w.nonce(m.n2).bytes);
          break;
        case Shape::CF3:
          append_field(plain, w.fc_bytes(m.fc));
          break;
      }
      pm.payload = crypto::ecies_encrypt(plain, w.key(m.target), rng).serialize();
    }
    if (m.shape == Shape::CF1 && act.metadata != kNone) {
      const auto prof = w.profile(act.metadata);
      pm.metadata =
          ConnectionMetadata{prof.minute_of_day, prof.location, prof.words_per_minute};
    }
    net.post(pm);

    auto sem_out = deliver_semantic(shadow, p, m, act.metadata);
    std::vector<ProtocolMessage> outs;
    if (to_initiator) {
      outs = p == Protocol::CF ? client->on_message(pm, rng)
                               : init->on_message(pm, rng);
    } else {
      outs = p == Protocol::CF ? server->on_message(pm, rng)
                               : resp->on_message(pm, rng);
    }
    post_outputs(std::move(outs), sem_out);
  }

  // Assemble the verdict from the concrete machines.
  bool ia = false, ra = false;
  std::optional<Label> belief;
  std::optional<std::string> abort;
  std::optional<Nonce> a_na, a_nb, b_na, b_nb;
  if (p == Protocol::CF) {
    if (client) {
      ia = client->accepted();
      a_na = client->na();
      a_nb = client->nb();
      if (client->abort_step()) abort = client->abort_step();
    }
    ra = server->accepted();
    if (ra) belief = server->inferred_client();
    b_na = server->na();
    b_nb = server->nb();
    if (!abort && server->abort_step()) abort = server->abort_step();
  } else {
    if (init) {
      ia = init->accepted();
      a_na = init->na();
      a_nb = init->nb();
      if (init->abort_step()) abort = init->abort_step();
    }
    ra = resp->accepted();
    if (ra) belief = resp->claimed_peer();
    b_na = resp->na();
    b_nb = resp->nb();
    if (!abort && resp->abort_step()) abort = resp->abort_step();
  }
  v.initiator_accepts = ia;
  v.responder_accepts = ra;
  if (ia && a_peer != kNone) v.initiator_peer_belief = label_name(a_peer);
  v.responder_peer_belief = belief;
  v.abort_step = abort;
  v.transcript = net.transcript();
  for (int n : shadow.known_nonces)
    if (n != N_E) v.secrets_leaked.insert(w.nonce(n).hex());
  v.responder_deceived =
      ra && belief && *belief == "alice" &&
      !(ia && a_peer == LB && a_na == b_na && a_nb && b_nb && *a_nb == *b_nb);
  return v;
}

}  // namespace

std::vector<SessionVerdict> intruder_search(Protocol protocol, int max_depth,
                                            const IntruderCapabilities& caps,
                                            std::uint64_t seed) {
  if (max_depth < 0 || max_depth > 10)
    throw InvalidArgument("intruder search depth must be in [0, 10]");

  std::vector<SessionVerdict> findings;
  std::set<std::string> visited;
  std::set<std::string> reported;
  std::deque<SemState> frontier;
  frontier.push_back(SemState{});
  visited.insert(frontier.front().canon());

  while (!frontier.empty()) {
    SemState s = std::move(frontier.front());
    frontier.pop_front();
    if (static_cast<int>(s.history.size()) >= max_depth) continue;

    for (const Action& act : enumerate_actions(s, protocol, caps)) {
      SemState next = apply_action(s, protocol, act, caps);
      if (!visited.insert(next.canon()).second) continue;

      bool worth_reporting = next.deceived() || next.leaked.size() > s.leaked.size();
      if (worth_reporting) {
        std::ostringstream sig;
        sig << next.deceived() << '|' << next.b_claimed << '|' << next.a_peer << '|';
        for (int n : next.leaked) sig << n << ',';
        if (reported.insert(sig.str()).second)
          findings.push_back(replay_history(protocol, next.history, caps, seed));
      }
      frontier.push_back(std::move(next));
    }
  }
  return findings;
}

}  // namespace ofsim::auth
