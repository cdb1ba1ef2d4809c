#ifndef OFSIM_TRACE_HPP
#define OFSIM_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ofsim/group_crypto.hpp"

namespace ofsim::sim {

/// Run parameters echoed verbatim into the trace header so any trace can be
/// reproduced bit-for-bit.
struct RunManifest {
  std::string scenario;
  std::string config_path;  // "builtin" when no file was given
  std::uint64_t seed = 0;
  std::string out_path;
  std::string version = "0.1.0";
};

struct TraceEvent {
  SimTime time = 0;
  std::uint64_t seq = 0;
  std::string kind;
  std::string actor;
  std::string digest;  // payload digest or free-form detail
  double x = 0;
  double y = 0;
};

/// Ordered event log. One self-describing line per event with a stable
/// field order, so golden-file diffs and digest comparisons are meaningful.
class SimTrace {
 public:
  RunManifest manifest;

  void append(SimTime time, const std::string& kind, const std::string& actor,
              const std::string& digest, double x = 0, double y = 0);

  const std::vector<TraceEvent>& events() const { return events_; }

  std::string to_text() const;
  /// SHA-256 hex of to_text(); the determinism criterion compares these.
  std::string digest() const;

 private:
  std::vector<TraceEvent> events_;
  std::uint64_t next_seq_ = 0;
};

/// Digest shorthand used in event lines: first 8 bytes of SHA-256, hex.
std::string short_digest(ByteView data);

}  // namespace ofsim::sim

#endif
