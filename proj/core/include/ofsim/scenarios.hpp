#ifndef OFSIM_SCENARIOS_HPP
#define OFSIM_SCENARIOS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>

#include "ofsim/world.hpp"

namespace ofsim::sim {

struct ScenarioVerdict {
  bool goal_met = false;
  bool delivered = false;
  std::optional<std::string> adversary_identification;
  int accepted_lures = 0;
  int rejected_lures = 0;
  /// Minimum anonymity-set size over the whistleblower's deliberate
  /// transmissions; 0 when there were none.
  std::size_t min_anonymity_set = 0;
  std::set<std::string> roles_decrypted;
  std::map<std::string, std::string> notes;

  std::string summary() const;
};

/// Everything a finished run leaves behind: the ordered trace, the verdict,
/// and the raw corpora the attack operations and acceptance scans work on.
struct ScenarioRun {
  SimTrace trace;
  ScenarioVerdict verdict;
  RangeModel range;
  AdversaryConfig adversary;

  std::map<crypto::Digest, std::vector<StoredReport>> store_entries;
  std::vector<AdvObservation> observations;
  std::vector<BroadcastRecord> broadcasts;
  std::vector<PositionFix> position_log;
  std::vector<Bytes> adversary_plaintexts;   // backdoor-oracle knowledge
  std::vector<Bytes> cf_payload_plaintexts;  // CF exchange payloads
  std::map<std::string, Bytes> device_knowledge;
  std::vector<std::string> principal_labels;
  std::string whistleblower;  // device id, empty if none

  /// §3 crowd tracking: the key record the SS distributed to informers.
  std::optional<keychain::MasterKeyRecord> distributed_key;
};

ScenarioRun run_model1(const WorldConfig& cfg);
ScenarioRun run_model2(const WorldConfig& cfg);
ScenarioRun run_model3(const WorldConfig& cfg);
ScenarioRun run_model4(const WorldConfig& cfg);
ScenarioRun run_missing_person(const WorldConfig& cfg);
ScenarioRun run_key_correlation(const WorldConfig& cfg);
ScenarioRun run_crowd_tracking(const WorldConfig& cfg);

/// Dispatch by name ("model1".."model4", "missing-person", "key-correlation",
/// "crowd-tracking"); throws ConfigError on anything else.
ScenarioRun run_scenario(const std::string& name, const WorldConfig& cfg);
std::vector<std::string> scenario_names();

}  // namespace ofsim::sim

#endif
