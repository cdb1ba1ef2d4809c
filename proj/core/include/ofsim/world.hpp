#ifndef OFSIM_WORLD_HPP
#define OFSIM_WORLD_HPP

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "ofsim/keychain.hpp"
#include "ofsim/random.hpp"
#include "ofsim/trace.hpp"

namespace ofsim::sim {

struct Vec2 {
  double x = 0;
  double y = 0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

/// Fixed-point position payload: two signed big-endian millimeter
/// coordinates (16 bytes). Appointment payloads append an 8-byte meet time.
Bytes encode_position(Vec2 p);
std::optional<Vec2> decode_position(ByteView b);
Bytes encode_appointment(Vec2 p, SimTime at);
std::optional<std::pair<Vec2, SimTime>> decode_appointment(ByteView b);

struct Waypoint {
  SimTime at = 0;
  Vec2 pos;
};

struct RadioState {
  bool bluetooth = true;
  bool internet = false;
  bool cellular = false;
};

struct DeviceSpec {
  std::string device_id;
  std::string owner;  // empty = anonymous
  Vec2 position;
  std::vector<Waypoint> waypoints;
  RadioState radios;
  bool finder_enabled = true;
  bool has_master = true;
  bool indoor = false;
};

struct RangeModel {
  double outdoor_m = 61.0;  // measured BLE ranges
  double indoor_m = 38.0;
};

/// The comparison profile: BLE advertised reach at its theoretical maximum.
inline constexpr RangeModel kMeasuredRange{61.0, 38.0};
inline constexpr RangeModel kMaxRange{1000.0, 400.0};

struct TimeWindow {
  SimTime from = 0;
  SimTime to = 0;
  bool contains(SimTime t) const { return t >= from && t < to; }
};

struct WatchZone {
  Vec2 center;
  double radius = 0;
  std::string label;
};

struct AdversaryConfig {
  bool passive_sniff = false;
  std::optional<TimeWindow> internet_cut;
  std::vector<std::string> botnet;  // device ids acting as roaming sensors
  bool backdoor_oracle = false;
  bool fake_appointments = false;
  bool camera_reports = false;
  std::vector<WatchZone> watch_zones;
  std::vector<WatchZone> jam_zones;  // Bluetooth scrambling areas
};

/// Scenario-level switches; every default is the paper-faithful honest run.
struct ScenarioOptions {
  bool trap_protection = true;  // Model 1/3 countermeasure
  std::size_t crowd_size = 25;
  std::size_t journalist_count = 3;
  std::size_t ss_count = 2;
  std::size_t helper_count = 2;
  std::size_t informer_count = 3;
  std::size_t sightings_per_informer = 2;
  bool shared_chain = true;       // key-correlation: one chain on both devices
  bool late_meeting = false;      // key-correlation: meet in a later epoch
  bool botnet_at_meeting = true;  // key-correlation coverage
  bool third_broadcaster = false; // Model 4 interference
  bool remove_relay = false;      // Model 2 arrest variant
};

struct WorldConfig {
  RangeModel range = kMeasuredRange;
  SimTime epoch_seconds = keychain::kEpochSeconds;
  AdversaryConfig adversary;
  ScenarioOptions scenario;
  std::uint64_t seed = 0;
  SimTime duration = 0;  // 0 = run to the scenario's natural end
  std::vector<DeviceSpec> devices;  // merged with the scenario's own actors
};

// ---------------------------------------------------------------------------
// Broadcast payloads

/// Normal offline-finding beacon: the device's current epoch key.
struct KeyBeacon {
  crypto::GroupElement key;
};

/// Crafted (index, ciphertext) pair; an online finder in range relays it to
/// the report store verbatim. This is the whistleblower's dead-drop vehicle.
struct RelayBlob {
  crypto::Digest index{};
  Bytes ciphertext;
};

/// Opaque application payload carried over broadcast Bluetooth.
struct DataBlob {
  std::string kind;  // "package", "secret", "chat", "key-flood", ...
  Bytes data;
};

using BroadcastPayload = std::variant<KeyBeacon, RelayBlob, DataBlob>;

Bytes payload_bytes(const BroadcastPayload& p);

struct ReceivedBroadcast {
  SimTime at = 0;  // first reception
  std::string from;  // harness ground truth; never part of device knowledge
  std::string digest;
  BroadcastPayload payload;
};

struct StoredReport {
  Bytes ciphertext;
  SimTime at = 0;
  std::string uploader;  // harness ground truth
};

/// Append-only index -> encrypted report map. Nothing in an entry is ever
/// plaintext; the blindness scan in the acceptance suite enforces that.
class ReportStore {
 public:
  void append(const crypto::Digest& index, StoredReport report);
  const std::vector<StoredReport>* find(const crypto::Digest& index) const;
  const std::map<crypto::Digest, std::vector<StoredReport>>& entries() const {
    return entries_;
  }

 private:
  std::map<crypto::Digest, std::vector<StoredReport>> entries_;
};

struct Device {
  DeviceSpec spec;
  std::optional<keychain::MasterKeyRecord> master;
  std::vector<ReceivedBroadcast> inbox;  // one entry per distinct payload
  std::map<std::string, SimTime> last_heard;  // digest -> most recent reception
  std::set<std::string> relayed_payloads;
  std::size_t next_waypoint = 0;
  bool removed = false;

  /// Everything an arrestor could extract: payload bytes and heard keys,
  /// without harness metadata.
  Bytes knowledge_bytes() const;
};

struct AdvObservation {
  SimTime time = 0;
  std::string observer;  // zone label or botnet device id
  Vec2 at;               // sender position
  std::string sender_id; // ground truth, not used by attack joins
  std::optional<Bytes> key_bytes;  // serialized key for beacons
  Bytes payload;                   // full payload bytes as sniffed
};

struct BroadcastRecord {
  SimTime time = 0;
  std::string device_id;
  Vec2 pos;
  double range = 0;
  std::string kind;  // "beacon", "relay", "data"
  std::string digest;
};

struct PositionFix {
  SimTime at = 0;
  std::string device_id;
  Vec2 pos;
};

// ---------------------------------------------------------------------------

/// Deterministic discrete-event world. Single-threaded; devices broadcast on
/// a 2-second cadence in insertion order, and every event is sequenced into
/// the trace. Identical (config, scenario, seed) runs are byte-identical.
class World {
 public:
  static constexpr SimTime kBroadcastPeriod = 2;

  World(const WorldConfig& cfg, const std::string& scenario_id);

  SimTime now() const { return now_; }
  void run_until(SimTime t);

  Device& device(const std::string& id);
  const Device& device(const std::string& id) const;
  bool has_device(const std::string& id) const;
  std::vector<std::string> device_ids() const;

  /// Adds a device mid-setup; position fix recorded. The returned reference
  /// is invalidated by the next add_device call.
  Device& add_device(DeviceSpec spec, RandomSource* master_rng = nullptr);
  void remove_device(const std::string& id);
  void move_device(const std::string& id, Vec2 pos);
  void set_radios(const std::string& id, RadioState radios);

  /// Queues a payload for broadcast at the first tick >= `at` where the
  /// device is offline with Bluetooth on.
  void queue_broadcast(const std::string& id, SimTime at, BroadcastPayload payload);

  bool online(const Device& d) const;  // internet/cellular minus any cut
  double effective_range(const Device& sender) const;
  bool jammed(Vec2 pos, SimTime t) const;
  std::vector<std::string> devices_within(Vec2 pos, double radius) const;
  Vec2 position_at(const std::string& id, SimTime t) const;

  keychain::EpochState current_epoch(const std::string& id);

  /// ECIES under the world RNG. When the backdoor oracle is on, the
  /// plaintext joins the adversary corpus (the oracle reads everything).
  Bytes encrypt_for(ByteView plaintext, const crypto::GroupElement& key);

  void store_upload(const crypto::Digest& index, Bytes ciphertext,
                    const std::string& uploader, Vec2 pos);
  const std::vector<StoredReport>* store_read(const crypto::Digest& index,
                                              const std::string& reader);

  ReportStore& store() { return store_; }
  SimTrace& trace() { return trace_; }
  RandomSource& rng() { return rng_; }
  const WorldConfig& config() const { return cfg_; }

  void note(const std::string& kind, const std::string& actor,
            const std::string& detail, Vec2 pos = {});

  const std::vector<AdvObservation>& observations() const { return observations_; }
  const std::vector<BroadcastRecord>& broadcasts() const { return broadcasts_; }
  const std::vector<PositionFix>& position_log() const { return position_log_; }
  const std::vector<Bytes>& adversary_plaintexts() const {
    return adversary_plaintexts_;
  }
  void expose_to_adversary(ByteView plaintext);

 private:
  struct QueuedBroadcast {
    SimTime at;
    std::string device_id;
    BroadcastPayload payload;
  };

  void tick(SimTime t);
  void emit_broadcast(Device& d, SimTime t, const BroadcastPayload& payload,
                      const std::string& kind);
  void record_position(const std::string& id, Vec2 pos);
  std::size_t index_of(const std::string& id) const;

  WorldConfig cfg_;
  DeterministicRandom rng_;
  SimTime now_ = 0;
  SimTime next_tick_ = kBroadcastPeriod;
  std::vector<Device> devices_;
  std::map<std::string, std::size_t> by_id_;
  std::deque<QueuedBroadcast> queued_;
  ReportStore store_;
  SimTrace trace_;
  std::vector<AdvObservation> observations_;
  std::vector<BroadcastRecord> broadcasts_;
  std::vector<PositionFix> position_log_;
  std::vector<Bytes> adversary_plaintexts_;
  std::map<std::string, keychain::ChainWalker> walkers_;
};

}  // namespace ofsim::sim

#endif
