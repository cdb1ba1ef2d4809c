#include "ofsim/scenario_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ofsim::sim {

namespace {

using nlohmann::json;

Vec2 parse_vec(const json& j) {
  return Vec2{j.value("x", 0.0), j.value("y", 0.0)};
}

WatchZone parse_zone(const json& j) {
  WatchZone z;
  z.center = parse_vec(j);
  z.radius = j.value("radius", 0.0);
  z.label = j.value("label", "");
  return z;
}

DeviceSpec parse_device(const json& j) {
  DeviceSpec d;
  d.device_id = j.at("id").get<std::string>();
  d.owner = j.value("owner", "");
  d.position = parse_vec(j);
  d.radios.bluetooth = j.value("bluetooth", true);
  d.radios.internet = j.value("internet", false);
  d.radios.cellular = j.value("cellular", false);
  d.finder_enabled = j.value("finder", true);
  d.has_master = j.value("master", true);
  d.indoor = j.value("indoor", false);
  if (j.contains("waypoints")) {
    for (const auto& wp : j.at("waypoints"))
      d.waypoints.push_back(
          Waypoint{wp.value("at", SimTime{0}), parse_vec(wp)});
  }
  return d;
}

}  // namespace

WorldConfig parse_world_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  try {
    WorldConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.duration = j.value("duration_s", SimTime{0});
    cfg.epoch_seconds = j.value("epoch_seconds", keychain::kEpochSeconds);

    std::string profile = j.value("range_profile", "measured");
    if (profile == "measured")
      cfg.range = kMeasuredRange;
    else if (profile == "max")
      cfg.range = kMaxRange;
    else
      throw ConfigError("unknown range_profile: " + profile);
    if (j.contains("range")) {
      cfg.range.outdoor_m = j["range"].value("outdoor_m", cfg.range.outdoor_m);
      cfg.range.indoor_m = j["range"].value("indoor_m", cfg.range.indoor_m);
    }
    if (cfg.range.outdoor_m <= 0 || cfg.range.indoor_m <= 0)
      throw ConfigError("ranges must be positive");

    if (j.contains("adversary")) {
      const auto& a = j["adversary"];
      for (const auto& cap : a.value("capabilities", std::vector<std::string>{})) {
        if (cap == "passive_sniff")
          cfg.adversary.passive_sniff = true;
        else if (cap == "backdoor_oracle")
          cfg.adversary.backdoor_oracle = true;
        else if (cap == "fake_appointments")
          cfg.adversary.fake_appointments = true;
        else if (cap == "camera_reports")
          cfg.adversary.camera_reports = true;
        else
          throw ConfigError("unknown adversary capability: " + cap);
      }
      if (a.contains("internet_cut")) {
        TimeWindow win;
        win.from = a["internet_cut"].value("from", SimTime{0});
        win.to = a["internet_cut"].value("to", SimTime{0});
        cfg.adversary.internet_cut = win;
      }
      cfg.adversary.botnet = a.value("botnet", std::vector<std::string>{});
      if (a.contains("watch_zones"))
        for (const auto& z : a["watch_zones"])
          cfg.adversary.watch_zones.push_back(parse_zone(z));
      if (a.contains("jam_zones"))
        for (const auto& z : a["jam_zones"])
          cfg.adversary.jam_zones.push_back(parse_zone(z));
    }

    if (j.contains("scenario")) {
      const auto& s = j["scenario"];
      auto& o = cfg.scenario;
      o.trap_protection = s.value("trap_protection", o.trap_protection);
      o.crowd_size = s.value("crowd_size", o.crowd_size);
      o.journalist_count = s.value("journalist_count", o.journalist_count);
      o.ss_count = s.value("ss_count", o.ss_count);
      o.helper_count = s.value("helper_count", o.helper_count);
      o.informer_count = s.value("informer_count", o.informer_count);
      o.sightings_per_informer =
          s.value("sightings_per_informer", o.sightings_per_informer);
      o.shared_chain = s.value("shared_chain", o.shared_chain);
      o.late_meeting = s.value("late_meeting", o.late_meeting);
      o.botnet_at_meeting = s.value("botnet_at_meeting", o.botnet_at_meeting);
      o.third_broadcaster = s.value("third_broadcaster", o.third_broadcaster);
      o.remove_relay = s.value("remove_relay", o.remove_relay);
    }

    if (j.contains("devices"))
      for (const auto& d : j["devices"]) cfg.devices.push_back(parse_device(d));

    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

WorldConfig load_world_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_world_config(buf.str());
}

std::string world_config_to_json(const WorldConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["duration_s"] = cfg.duration;
  j["epoch_seconds"] = cfg.epoch_seconds;
  j["range"] = {{"outdoor_m", cfg.range.outdoor_m}, {"indoor_m", cfg.range.indoor_m}};

  json adv;
  std::vector<std::string> caps;
  if (cfg.adversary.passive_sniff) caps.push_back("passive_sniff");
  if (cfg.adversary.backdoor_oracle) caps.push_back("backdoor_oracle");
  if (cfg.adversary.fake_appointments) caps.push_back("fake_appointments");
  if (cfg.adversary.camera_reports) caps.push_back("camera_reports");
  adv["capabilities"] = caps;
  if (cfg.adversary.internet_cut)
    adv["internet_cut"] = {{"from", cfg.adversary.internet_cut->from},
                           {"to", cfg.adversary.internet_cut->to}};
  adv["botnet"] = cfg.adversary.botnet;
  json zones = json::array();
  for (const auto& z : cfg.adversary.watch_zones)
    zones.push_back({{"x", z.center.x},
                     {"y", z.center.y},
                     {"radius", z.radius},
                     {"label", z.label}});
  adv["watch_zones"] = zones;
  json jams = json::array();
  for (const auto& z : cfg.adversary.jam_zones)
    jams.push_back({{"x", z.center.x},
                    {"y", z.center.y},
                    {"radius", z.radius},
                    {"label", z.label}});
  adv["jam_zones"] = jams;
  j["adversary"] = adv;

  const auto& o = cfg.scenario;
  j["scenario"] = {{"trap_protection", o.trap_protection},
                   {"crowd_size", o.crowd_size},
                   {"journalist_count", o.journalist_count},
                   {"ss_count", o.ss_count},
                   {"helper_count", o.helper_count},
                   {"informer_count", o.informer_count},
                   {"sightings_per_informer", o.sightings_per_informer},
                   {"shared_chain", o.shared_chain},
                   {"late_meeting", o.late_meeting},
                   {"botnet_at_meeting", o.botnet_at_meeting},
                   {"third_broadcaster", o.third_broadcaster},
                   {"remove_relay", o.remove_relay}};

  json devices = json::array();
  for (const auto& d : cfg.devices) {
    json dj;
    dj["id"] = d.device_id;
    dj["owner"] = d.owner;
    dj["x"] = d.position.x;
    dj["y"] = d.position.y;
    dj["bluetooth"] = d.radios.bluetooth;
    dj["internet"] = d.radios.internet;
    dj["cellular"] = d.radios.cellular;
    dj["finder"] = d.finder_enabled;
    dj["master"] = d.has_master;
    dj["indoor"] = d.indoor;
    if (!d.waypoints.empty()) {
      json wps = json::array();
      for (const auto& wp : d.waypoints)
        wps.push_back({{"at", wp.at}, {"x", wp.pos.x}, {"y", wp.pos.y}});
      dj["waypoints"] = wps;
    }
    devices.push_back(dj);
  }
  j["devices"] = devices;
  return j.dump(2) + "\n";
}

}  // namespace ofsim::sim
