#include "ofsim/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace ofsim::sim {

std::string short_digest(ByteView data) {
  auto d = crypto::sha256(data);
  return to_hex(ByteView(d).subspan(0, 8));
}

void SimTrace::append(SimTime time, const std::string& kind, const std::string& actor,
                      const std::string& digest, double x, double y) {
  events_.push_back(TraceEvent{time, next_seq_++, kind, actor, digest, x, y});
}

std::string SimTrace::to_text() const {
  std::ostringstream os;
  os << "# scenario=" << manifest.scenario << " seed=" << manifest.seed
     << " config=" << manifest.config_path << " version=" << manifest.version
     << "\n";
  char buf[64];
  for (const auto& e : events_) {
    std::snprintf(buf, sizeof buf, "%.1f,%.1f", e.x, e.y);
    os << "t=" << e.time << " seq=" << e.seq << " kind=" << e.kind
       << " actor=" << e.actor << " digest=" << e.digest << " pos=" << buf << "\n";
  }
  return os.str();
}

std::string SimTrace::digest() const {
  std::string text = to_text();
  auto d = crypto::sha256(to_bytes(text));
  return to_hex(d);
}

}  // namespace ofsim::sim
