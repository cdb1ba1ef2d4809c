#include "ofsim/attacks.hpp"

#include <algorithm>
#include <cmath>

namespace ofsim::sim {

namespace {

Vec2 position_from_log(const ScenarioRun& run, const std::string& id, SimTime t) {
  std::optional<Vec2> first, last;
  for (const auto& fix : run.position_log) {
    if (fix.device_id != id) continue;
    if (!first) first = fix.pos;
    if (fix.at <= t) last = fix.pos;
  }
  if (last) return *last;
  if (first) return *first;
  return Vec2{1e9, 1e9};  // never placed: outside every radius
}

std::set<std::string> device_ids(const ScenarioRun& run) {
  std::set<std::string> ids;
  for (const auto& fix : run.position_log) ids.insert(fix.device_id);
  return ids;
}

}  // namespace

bool contains_bytes(ByteView haystack, ByteView needle) {
  if (needle.empty() || haystack.size() < needle.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

std::set<std::string> anonymity_set(const ScenarioRun& run,
                                    const BroadcastRecord& event) {
  std::set<std::string> out;
  for (const auto& id : device_ids(run))
    if (distance(position_from_log(run, id, event.time), event.pos) <= event.range)
      out.insert(id);
  return out;
}

std::optional<std::string> attack_key_correlation(const ScenarioRun& run,
                                                  const std::string& journalist) {
  // Keys sniffed at each watched home.
  std::map<std::string, std::set<Bytes>> home_keys;  // suspect label -> keys
  std::set<Bytes> journalist_keys;
  for (const auto& obs : run.observations) {
    if (!obs.key_bytes || !obs.observer.starts_with("home:")) continue;
    std::string who = obs.observer.substr(5);
    if (who == journalist)
      journalist_keys.insert(*obs.key_bytes);
    else
      home_keys[who].insert(*obs.key_bytes);
  }

  // City-wide botnet sightings, joined on proximity in space and time.
  constexpr double kProximityM = 75.0;
  constexpr SimTime kProximityS = 120;
  std::vector<const AdvObservation*> botnet_obs;
  for (const auto& obs : run.observations)
    if (obs.key_bytes && obs.observer.starts_with("botnet:"))
      botnet_obs.push_back(&obs);

  for (const auto& [suspect, keys] : home_keys) {
    for (const auto* a : botnet_obs) {
      if (!keys.count(*a->key_bytes)) continue;
      for (const auto* b : botnet_obs) {
        if (!journalist_keys.count(*b->key_bytes)) continue;
        if (distance(a->at, b->at) <= kProximityM &&
            std::abs(a->time - b->time) <= kProximityS)
          return suspect;
      }
    }
  }
  return std::nullopt;
}

std::vector<HarvestedSighting> attack_crowd_tracking(const ScenarioRun& run) {
  std::vector<HarvestedSighting> out;
  if (!run.distributed_key) return out;
  const auto& master = *run.distributed_key;

  // Poll every epoch index the run could have touched.
  SimTime t_max = 0;
  for (const auto& fix : run.position_log) t_max = std::max(t_max, fix.at);
  for (const auto& [idx, reports] : run.store_entries)
    for (const auto& rep : reports) t_max = std::max(t_max, rep.at);

  keychain::ChainWalker walker(master);
  std::uint64_t last = keychain::epoch_index_at(master, t_max);
  for (std::uint64_t i = 0; i <= last; ++i) {
    const auto& ep = walker.seek(i);
    auto it = run.store_entries.find(crypto::hash_index(ep.P_i));
    if (it == run.store_entries.end()) continue;
    for (const auto& rep : it->second) {
      auto plain = crypto::ecies_decrypt(ByteView(rep.ciphertext), ep.d_i);
      if (!plain) continue;
      auto fields = split_fields(*plain);
      if (fields.size() != 2) continue;
      auto appt = decode_appointment(fields[1]);
      if (!appt) continue;
      out.push_back(HarvestedSighting{
          std::string(fields[0].begin(), fields[0].end()), appt->first,
          appt->second});
    }
  }
  return out;
}

bool store_blindness_scan(const ScenarioRun& run) {
  // Collect byte patterns that must never appear in a stored entry: the
  // principal labels and every position the run serialized in plaintext.
  std::vector<Bytes> needles;
  for (const auto& label : run.principal_labels) needles.push_back(to_bytes(label));
  std::set<std::pair<long, long>> seen;
  for (const auto& fix : run.position_log) {
    auto key = std::make_pair(std::lround(fix.pos.x * 1000),
                              std::lround(fix.pos.y * 1000));
    if (seen.insert(key).second) needles.push_back(encode_position(fix.pos));
  }

  for (const auto& [idx, reports] : run.store_entries) {
    for (const auto& rep : reports) {
      for (const auto& needle : needles)
        if (contains_bytes(rep.ciphertext, needle)) return false;
    }
  }
  return true;
}

std::set<std::string> labels_in_corpus(const std::vector<Bytes>& corpus,
                                       const std::vector<std::string>& labels) {
  std::set<std::string> found;
  for (const auto& label : labels) {
    Bytes needle = to_bytes(label);
    for (const auto& blob : corpus) {
      if (contains_bytes(blob, needle)) {
        found.insert(label);
        break;
      }
    }
  }
  return found;
}

}  // namespace ofsim::sim
