#include "ofsim/world.hpp"

#include <algorithm>
#include <cmath>

namespace ofsim::sim {

double distance(Vec2 a, Vec2 b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

namespace {

std::int64_t to_mm(double meters) {
  return static_cast<std::int64_t>(std::llround(meters * 1000.0));
}

void put_i64_be(Bytes& out, std::int64_t v) {
  put_u64_be(out, static_cast<std::uint64_t>(v));
}

std::int64_t get_i64_be(ByteView in) {
  return static_cast<std::int64_t>(get_u64_be(in));
}

}  // namespace

Bytes encode_position(Vec2 p) {
  Bytes out;
  put_i64_be(out, to_mm(p.x));
  put_i64_be(out, to_mm(p.y));
  return out;
}

std::optional<Vec2> decode_position(ByteView b) {
  if (b.size() != 16) return std::nullopt;
  Vec2 p;
  p.x = static_cast<double>(get_i64_be(b.subspan(0, 8))) / 1000.0;
  p.y = static_cast<double>(get_i64_be(b.subspan(8, 8))) / 1000.0;
  return p;
}

Bytes encode_appointment(Vec2 p, SimTime at) {
  Bytes out = encode_position(p);
  put_u64_be(out, static_cast<std::uint64_t>(at));
  return out;
}

std::optional<std::pair<Vec2, SimTime>> decode_appointment(ByteView b) {
  if (b.size() != 24) return std::nullopt;
  auto pos = decode_position(b.subspan(0, 16));
  if (!pos) return std::nullopt;
  return std::make_pair(*pos, static_cast<SimTime>(get_u64_be(b.subspan(16, 8))));
}

Bytes payload_bytes(const BroadcastPayload& p) {
  Bytes out;
  if (const auto* k = std::get_if<KeyBeacon>(&p)) {
    out.push_back(0x01);
    const auto& b = k->key.bytes();
    out.insert(out.end(), b.begin(), b.end());
  } else if (const auto* r = std::get_if<RelayBlob>(&p)) {
    out.push_back(0x02);
    out.insert(out.end(), r->index.begin(), r->index.end());
    out.insert(out.end(), r->ciphertext.begin(), r->ciphertext.end());
  } else if (const auto* d = std::get_if<DataBlob>(&p)) {
    out.push_back(0x03);
    append_field(out, to_bytes(d->kind));
    out.insert(out.end(), d->data.begin(), d->data.end());
  }
  return out;
}

void ReportStore::append(const crypto::Digest& index, StoredReport report) {
  entries_[index].push_back(std::move(report));
}

const std::vector<StoredReport>* ReportStore::find(const crypto::Digest& index) const {
  auto it = entries_.find(index);
  return it == entries_.end() ? nullptr : &it->second;
}

Bytes Device::knowledge_bytes() const {
  Bytes out;
  for (const auto& rb : inbox) {
    Bytes pb = payload_bytes(rb.payload);
    out.insert(out.end(), pb.begin(), pb.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// World

World::World(const WorldConfig& cfg, const std::string& scenario_id)
    : cfg_(cfg), rng_(cfg.seed) {
  trace_.manifest.scenario = scenario_id;
  trace_.manifest.seed = cfg.seed;
  trace_.manifest.config_path = "builtin";
  for (const auto& spec : cfg.devices) add_device(spec);
}

Device& World::add_device(DeviceSpec spec, RandomSource* master_rng) {
  if (by_id_.contains(spec.device_id))
    throw ConfigError("duplicate device id: " + spec.device_id);
  Device d;
  d.spec = std::move(spec);
  if (d.spec.has_master) {
    RandomSource& r = master_rng ? *master_rng : rng_;
    d.master = keychain::MasterKeyRecord::generate(r, 0);
  }
  by_id_[d.spec.device_id] = devices_.size();
  devices_.push_back(std::move(d));
  Device& ref = devices_.back();
  record_position(ref.spec.device_id, ref.spec.position);
  return ref;
}

std::size_t World::index_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw ConfigError("unknown device: " + id);
  return it->second;
}

Device& World::device(const std::string& id) { return devices_[index_of(id)]; }
const Device& World::device(const std::string& id) const {
  return devices_[index_of(id)];
}
bool World::has_device(const std::string& id) const { return by_id_.contains(id); }

std::vector<std::string> World::device_ids() const {
  std::vector<std::string> ids;
  ids.reserve(devices_.size());
  for (const auto& d : devices_)
    if (!d.removed) ids.push_back(d.spec.device_id);
  return ids;
}

void World::remove_device(const std::string& id) {
  Device& d = device(id);
  d.removed = true;
  note("remove", id, "device removed from world", d.spec.position);
}

void World::move_device(const std::string& id, Vec2 pos) {
  Device& d = device(id);
  d.spec.position = pos;
  record_position(id, pos);
}

void World::set_radios(const std::string& id, RadioState radios) {
  device(id).spec.radios = radios;
}

void World::queue_broadcast(const std::string& id, SimTime at,
                            BroadcastPayload payload) {
  queued_.push_back(QueuedBroadcast{at, id, std::move(payload)});
}

bool World::online(const Device& d) const {
  bool net = d.spec.radios.internet || d.spec.radios.cellular;
  if (cfg_.adversary.internet_cut && cfg_.adversary.internet_cut->contains(now_))
    net = false;
  return net;
}

double World::effective_range(const Device& sender) const {
  return sender.spec.indoor ? cfg_.range.indoor_m : cfg_.range.outdoor_m;
}

bool World::jammed(Vec2 pos, SimTime) const {
  for (const auto& z : cfg_.adversary.jam_zones)
    if (distance(z.center, pos) <= z.radius) return true;
  return false;
}

std::vector<std::string> World::devices_within(Vec2 pos, double radius) const {
  std::vector<std::string> ids;
  for (const auto& d : devices_)
    if (!d.removed && distance(d.spec.position, pos) <= radius)
      ids.push_back(d.spec.device_id);
  return ids;
}

Vec2 World::position_at(const std::string& id, SimTime t) const {
  std::optional<Vec2> first, last;
  for (const auto& fix : position_log_) {
    if (fix.device_id != id) continue;
    if (!first) first = fix.pos;
    if (fix.at <= t) last = fix.pos;
  }
  if (last) return *last;
  if (first) return *first;
  throw ConfigError("no position fix for " + id);
}

keychain::EpochState World::current_epoch(const std::string& id) {
  Device& d = device(id);
  if (!d.master) throw ConfigError("device has no key chain: " + id);
  auto [it, fresh] = walkers_.try_emplace(id, *d.master);
  return it->second.seek(keychain::epoch_index_at(*d.master, now_));
}

Bytes World::encrypt_for(ByteView plaintext, const crypto::GroupElement& key) {
  Bytes wire = crypto::ecies_encrypt(plaintext, key, rng_).serialize();
  expose_to_adversary(plaintext);
  return wire;
}

void World::expose_to_adversary(ByteView plaintext) {
  if (cfg_.adversary.backdoor_oracle)
    adversary_plaintexts_.emplace_back(plaintext.begin(), plaintext.end());
}

void World::store_upload(const crypto::Digest& index, Bytes ciphertext,
                         const std::string& uploader, Vec2 pos) {
  trace_.append(now_, "store-write", uploader, short_digest(index), pos.x, pos.y);
  store_.append(index, StoredReport{std::move(ciphertext), now_, uploader});
}

const std::vector<StoredReport>* World::store_read(const crypto::Digest& index,
                                                   const std::string& reader) {
  trace_.append(now_, "store-read", reader, short_digest(index));
  return store_.find(index);
}

void World::note(const std::string& kind, const std::string& actor,
                 const std::string& detail, Vec2 pos) {
  trace_.append(now_, kind, actor, detail, pos.x, pos.y);
}

void World::record_position(const std::string& id, Vec2 pos) {
  position_log_.push_back(PositionFix{now_, id, pos});
}

void World::run_until(SimTime t) {
  if (t < now_) throw InvalidTime("run_until cannot move backwards");
  while (next_tick_ <= t) {
    now_ = next_tick_;
    tick(next_tick_);
    next_tick_ += kBroadcastPeriod;
  }
  now_ = t;
}

void World::tick(SimTime t) {
  // Waypoint motion first, in device order.
  for (auto& d : devices_) {
    if (d.removed) continue;
    while (d.next_waypoint < d.spec.waypoints.size() &&
           d.spec.waypoints[d.next_waypoint].at <= t) {
      d.spec.position = d.spec.waypoints[d.next_waypoint].pos;
      record_position(d.spec.device_id, d.spec.position);
      ++d.next_waypoint;
    }
  }

  // Queued payloads due at this tick.
  std::deque<QueuedBroadcast> keep;
  std::vector<QueuedBroadcast> due;
  for (auto& q : queued_) {
    if (q.at <= t)
      due.push_back(std::move(q));
    else
      keep.push_back(std::move(q));
  }
  queued_ = std::move(keep);

  for (auto& q : due) {
    if (!has_device(q.device_id)) continue;
    Device& d = device(q.device_id);
    if (d.removed) continue;
    if (!d.spec.radios.bluetooth || online(d)) {
      // Not in a broadcastable state yet; retry next tick.
      queued_.push_back(std::move(q));
      continue;
    }
    std::string kind = std::holds_alternative<RelayBlob>(q.payload) ? "relay" : "data";
    emit_broadcast(d, t, q.payload, kind);
  }

  // Offline-finding beacons: offline + bluetooth + key chain.
  for (auto& d : devices_) {
    if (d.removed || !d.master) continue;
    if (!d.spec.radios.bluetooth || online(d)) continue;
    auto [it, fresh] = walkers_.try_emplace(d.spec.device_id, *d.master);
    auto epoch = it->second.seek(keychain::epoch_index_at(*d.master, t));
    emit_broadcast(d, t, KeyBeacon{epoch.P_i}, "beacon");
  }
}

void World::emit_broadcast(Device& sender, SimTime t, const BroadcastPayload& payload,
                           const std::string& kind) {
  Vec2 pos = sender.spec.position;
  if (jammed(pos, t)) {
    trace_.append(t, "jammed", sender.spec.device_id, kind, pos.x, pos.y);
    return;
  }
  double range = effective_range(sender);
  Bytes raw = payload_bytes(payload);
  std::string digest = short_digest(raw);
  trace_.append(t, "broadcast", sender.spec.device_id, kind + ":" + digest, pos.x,
                pos.y);
  broadcasts_.push_back(
      BroadcastRecord{t, sender.spec.device_id, pos, range, kind, digest});

  for (auto& r : devices_) {
    if (r.removed || &r == &sender) continue;
    if (!r.spec.radios.bluetooth) continue;
    if (distance(r.spec.position, pos) > range) continue;
    if (jammed(r.spec.position, t)) continue;

    // Inboxes keep one copy of each distinct payload; beacons repeat every
    // two seconds and would otherwise swamp them. last_heard still tracks
    // repeats so "currently audible" scans work.
    auto [it, first_time] = r.last_heard.try_emplace(digest, t);
    it->second = t;
    if (first_time)
      r.inbox.push_back(ReceivedBroadcast{t, sender.spec.device_id, digest, payload});

    // Finder relay duties need connectivity; each finder relays a given
    // payload once.
    if (r.spec.finder_enabled && online(r) &&
        r.relayed_payloads.insert(digest).second) {
      if (const auto* kb = std::get_if<KeyBeacon>(&payload)) {
        Bytes report = encrypt_for(encode_position(r.spec.position), kb->key);
        store_upload(crypto::hash_index(kb->key), std::move(report),
                     r.spec.device_id, r.spec.position);
      } else if (const auto* blob = std::get_if<RelayBlob>(&payload)) {
        store_upload(blob->index, blob->ciphertext, r.spec.device_id,
                     r.spec.position);
      }
    }
  }

  // Adversary sensors: watch zones, botnet devices, and the blanket
  // passive-sniff capability.
  const auto& adv = cfg_.adversary;
  auto record_obs = [&](const std::string& observer) {
    AdvObservation obs;
    obs.time = t;
    obs.observer = observer;
    obs.at = pos;
    obs.sender_id = sender.spec.device_id;
    if (const auto* kb = std::get_if<KeyBeacon>(&payload)) {
      const auto& kbytes = kb->key.bytes();
      obs.key_bytes = Bytes(kbytes.begin(), kbytes.end());
    }
    obs.payload = raw;
    observations_.push_back(std::move(obs));
    trace_.append(t, "adv-observe", observer, digest, pos.x, pos.y);
  };

  for (const auto& z : adv.watch_zones)
    if (distance(z.center, pos) <= z.radius) record_obs(z.label);
  for (const auto& bid : adv.botnet) {
    if (!has_device(bid)) continue;
    const Device& b = device(bid);
    if (!b.removed && bid != sender.spec.device_id &&
        distance(b.spec.position, pos) <= range)
      record_obs("botnet:" + bid);
  }
  if (adv.passive_sniff) record_obs("sniff");
}

}  // namespace ofsim::sim
