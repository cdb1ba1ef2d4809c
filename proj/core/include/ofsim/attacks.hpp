#ifndef OFSIM_ATTACKS_HPP
#define OFSIM_ATTACKS_HPP

#include "ofsim/scenarios.hpp"

namespace ofsim::sim {

/// All devices whose position at the event time lies within the broadcast
/// radius of the observed transmission: the adversary's best origin estimate
/// under passive sniffing.
std::set<std::string> anonymity_set(const ScenarioRun& run,
                                    const BroadcastRecord& event);

/// §3 Model 1 join: keys sniffed in a suspect's home zone matched against
/// keys seen by the botnet next to the journalist's key elsewhere in the
/// city. Zones labeled "home:<label>"; `journalist` names the watched
/// journalist. Returns the identified suspect or nullopt.
std::optional<std::string> attack_key_correlation(const ScenarioRun& run,
                                                  const std::string& journalist);

struct HarvestedSighting {
  std::string target;
  Vec2 pos;
  SimTime time = 0;

  friend bool operator==(const HarvestedSighting&, const HarvestedSighting&) = default;
};

/// §3 Model 2 harvest: polls the store by the distributed key's indices and
/// decrypts every informer report.
std::vector<HarvestedSighting> attack_crowd_tracking(const ScenarioRun& run);

/// True when no stored ciphertext contains a principal label or a plaintext
/// position serialization that appears in the run.
bool store_blindness_scan(const ScenarioRun& run);

/// True when `needle` occurs as a byte substring of `haystack`.
bool contains_bytes(ByteView haystack, ByteView needle);

/// Scans a corpus of plaintexts for any of the run's principal labels;
/// returns the labels found.
std::set<std::string> labels_in_corpus(const std::vector<Bytes>& corpus,
                                       const std::vector<std::string>& labels);

}  // namespace ofsim::sim

#endif
