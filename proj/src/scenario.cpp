#include "cobandit/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cobandit::sim {

using nlohmann::json;

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::cobandit: return "cobandit";
    case Algorithm::ewa: return "ewa";
    case Algorithm::exp3: return "exp3";
  }
  throw std::logic_error("unreachable");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "cobandit") return Algorithm::cobandit;
  if (s == "ewa") return Algorithm::ewa;
  if (s == "exp3") return Algorithm::exp3;
  throw std::invalid_argument("unknown algorithm: " + s);
}

namespace {

std::string event_type_name(EventSpec::Type t) {
  switch (t) {
    case EventSpec::Type::join: return "join";
    case EventSpec::Type::leave: return "leave";
    case EventSpec::Type::move: return "move";
    case EventSpec::Type::network_add: return "network_add";
    case EventSpec::Type::network_remove: return "network_remove";
  }
  throw std::logic_error("unreachable");
}

EventSpec::Type event_type_from_name(const std::string& s) {
  if (s == "join") return EventSpec::Type::join;
  if (s == "leave") return EventSpec::Type::leave;
  if (s == "move") return EventSpec::Type::move;
  if (s == "network_add") return EventSpec::Type::network_add;
  if (s == "network_remove") return EventSpec::Type::network_remove;
  throw std::invalid_argument("unknown event type: " + s);
}

std::string gain_mode_name(gossip::GainMode m) {
  return m == gossip::GainMode::reconstruct ? "reconstruct" : "literal";
}

gossip::GainMode gain_mode_from_name(const std::string& s) {
  if (s == "reconstruct") return gossip::GainMode::reconstruct;
  if (s == "literal") return gossip::GainMode::literal;
  throw std::invalid_argument("unknown gain mode: " + s);
}

}  // namespace

double ScenarioConfig::c_max() const {
  double top = 0.0;
  for (const auto& n : networks) top = std::max(top, n.capacity_mbps);
  return top;
}

int ScenarioConfig::network_index(int network_id) const {
  for (size_t i = 0; i < networks.size(); ++i) {
    if (networks[i].id == network_id) return static_cast<int>(i);
  }
  return -1;
}

const game::ServiceArea* ScenarioConfig::find_area(int area_id) const {
  for (const auto& a : areas) {
    if (a.id == area_id) return &a;
  }
  return nullptr;
}

std::vector<std::string> ScenarioConfig::validate() const {
  std::vector<std::string> errors;
  auto err = [&errors](const std::string& msg) { errors.push_back(msg); };

  if (networks.empty()) err("scenario has no networks");
  std::set<int> network_ids;
  for (const auto& n : networks) {
    if (n.capacity_mbps <= 0.0)
      err("network " + std::to_string(n.id) + " has non-positive capacity");
    if (!network_ids.insert(n.id).second)
      err("duplicate network id " + std::to_string(n.id));
  }

  if (areas.empty()) err("scenario has no service areas");
  std::set<int> area_ids;
  for (const auto& a : areas) {
    if (!area_ids.insert(a.id).second) err("duplicate area id " + std::to_string(a.id));
    if (a.networks.empty()) err("area " + std::to_string(a.id) + " has no visible networks");
    for (int nid : a.networks) {
      if (network_ids.count(nid) == 0)
        err("area " + std::to_string(a.id) + " references unknown network " +
            std::to_string(nid));
    }
  }

  if (devices.empty()) err("scenario has no devices");
  std::set<int> device_ids;
  for (const auto& d : devices) {
    if (!device_ids.insert(d.id).second) err("duplicate device id " + std::to_string(d.id));
    if (area_ids.count(d.area) == 0)
      err("device " + std::to_string(d.id) + " references unknown area " +
          std::to_string(d.area));
  }

  if (horizon < 1) err("horizon must be at least one slot");
  if (slot_duration_s <= 0.0) err("slot duration must be positive");
  if (params.eta <= 0.0) err("eta must be positive");
  if (params.p_t > 1.0) err("p_t must lie in [0,1] or be auto");
  if (params.p_l < 0.0 || params.p_l > 1.0) err("p_l must lie in [0,1]");
  if (params.d < 0) err("d must be >= 0");
  if (params.x < 1) err("x must be >= 1");
  if (params.reset_threshold <= 0.0 || params.reset_threshold > 1.0)
    err("reset threshold must lie in (0,1]");
  if (params.reset_margin < 0.0) err("reset margin must be >= 0");

  int last_slot = 0;
  for (const auto& e : events) {
    const std::string tag = "event " + event_type_name(e.type) + "@" + std::to_string(e.slot);
    if (e.slot < last_slot) err(tag + ": events must be sorted by slot");
    last_slot = std::max(last_slot, e.slot);
    if (e.slot < 1 || e.slot > horizon) err(tag + ": slot outside [1, horizon]");
    switch (e.type) {
      case EventSpec::Type::join:
      case EventSpec::Type::move:
        if (device_ids.count(e.device) == 0)
          err(tag + ": unknown device " + std::to_string(e.device));
        if (area_ids.count(e.area) == 0) err(tag + ": unknown area " + std::to_string(e.area));
        break;
      case EventSpec::Type::leave:
        if (device_ids.count(e.device) == 0)
          err(tag + ": unknown device " + std::to_string(e.device));
        break;
      case EventSpec::Type::network_add:
        if (network_ids.count(e.network) == 0)
          err(tag + ": unknown network " + std::to_string(e.network));
        for (int aid : e.areas) {
          if (area_ids.count(aid) == 0) err(tag + ": unknown area " + std::to_string(aid));
        }
        break;
      case EventSpec::Type::network_remove:
        if (network_ids.count(e.network) == 0)
          err(tag + ": unknown network " + std::to_string(e.network));
        break;
    }
  }
  return errors;
}

json ScenarioConfig::to_json() const {
  json j;
  j["networks"] = json::array();
  for (const auto& n : networks) {
    j["networks"].push_back({{"id", n.id},
                             {"capacity_mbps", n.capacity_mbps},
                             {"kind", game::to_string(n.kind)}});
  }
  j["areas"] = json::array();
  for (const auto& a : areas) {
    j["areas"].push_back({{"id", a.id}, {"networks", a.networks}});
  }
  j["devices"] = json::array();
  for (const auto& d : devices) {
    j["devices"].push_back({{"id", d.id},
                            {"area", d.area},
                            {"algorithm", to_string(d.algorithm)},
                            {"active", d.initially_active}});
  }
  j["horizon"] = horizon;
  j["slot_duration_s"] = slot_duration_s;
  j["seed"] = seed;
  json p;
  p["eta"] = params.eta;
  if (params.p_t < 0.0) {
    p["p_t"] = "auto";
  } else {
    p["p_t"] = params.p_t;
  }
  p["p_l"] = params.p_l;
  p["d"] = params.d;
  p["x"] = params.x;
  p["minimal_reset"] = params.minimal_reset;
  p["gain_mode"] = gain_mode_name(params.gain_mode);
  p["reset_threshold"] = params.reset_threshold;
  p["reset_margin"] = params.reset_margin;
  p["sharing_enabled"] = params.sharing_enabled;
  p["always_listen"] = params.always_listen;
  j["params"] = p;
  j["delay_model"] = {{"wifi",
                       {{"gamma", wifi_delay.gamma},
                        {"delta", wifi_delay.delta},
                        {"lambda", wifi_delay.lambda},
                        {"xi", wifi_delay.xi}}},
                      {"cellular",
                       {{"nu", cellular_delay.nu},
                        {"loc", cellular_delay.loc},
                        {"scale", cellular_delay.scale}}}};
  j["events"] = json::array();
  for (const auto& e : events) {
    json ev;
    ev["type"] = event_type_name(e.type);
    ev["slot"] = e.slot;
    switch (e.type) {
      case EventSpec::Type::join:
      case EventSpec::Type::move:
        ev["device"] = e.device;
        ev["area"] = e.area;
        break;
      case EventSpec::Type::leave:
        ev["device"] = e.device;
        break;
      case EventSpec::Type::network_add:
        ev["network"] = e.network;
        ev["areas"] = e.areas;
        break;
      case EventSpec::Type::network_remove:
        ev["network"] = e.network;
        break;
    }
    j["events"].push_back(ev);
  }
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  ScenarioConfig cfg;
  for (const auto& n : j.at("networks")) {
    game::NetworkSpec spec;
    spec.id = n.at("id").get<int>();
    spec.capacity_mbps = n.at("capacity_mbps").get<double>();
    spec.kind = game::network_kind_from_string(n.value("kind", "wifi"));
    cfg.networks.push_back(spec);
  }
  for (const auto& a : j.at("areas")) {
    game::ServiceArea area;
    area.id = a.at("id").get<int>();
    area.networks = a.at("networks").get<std::vector<int>>();
    std::sort(area.networks.begin(), area.networks.end());
    cfg.areas.push_back(area);
  }
  for (const auto& d : j.at("devices")) {
    DeviceSpec spec;
    spec.id = d.at("id").get<int>();
    spec.area = d.at("area").get<int>();
    spec.algorithm = algorithm_from_string(d.value("algorithm", "cobandit"));
    spec.initially_active = d.value("active", true);
    cfg.devices.push_back(spec);
  }
  cfg.horizon = j.value("horizon", 1200);
  cfg.slot_duration_s = j.value("slot_duration_s", 15.0);
  cfg.seed = j.value("seed", static_cast<uint64_t>(1));
  if (j.contains("params")) {
    const auto& p = j.at("params");
    cfg.params.eta = p.value("eta", 10.0);
    if (p.contains("p_t")) {
      if (p.at("p_t").is_string()) {
        if (p.at("p_t").get<std::string>() != "auto")
          throw std::invalid_argument("params.p_t must be a number or \"auto\"");
        cfg.params.p_t = -1.0;
      } else {
        cfg.params.p_t = p.at("p_t").get<double>();
      }
    }
    cfg.params.p_l = p.value("p_l", 1.0 / 3.0);
    cfg.params.d = p.value("d", 5);
    cfg.params.x = p.value("x", 32);
    cfg.params.minimal_reset = p.value("minimal_reset", false);
    cfg.params.gain_mode = gain_mode_from_name(p.value("gain_mode", "reconstruct"));
    cfg.params.reset_threshold = p.value("reset_threshold", 0.75);
    cfg.params.reset_margin = p.value("reset_margin", 0.025);
    cfg.params.sharing_enabled = p.value("sharing_enabled", true);
    cfg.params.always_listen = p.value("always_listen", false);
  }
  if (j.contains("delay_model")) {
    const auto& dm = j.at("delay_model");
    if (dm.contains("wifi")) {
      const auto& w = dm.at("wifi");
      cfg.wifi_delay.gamma = w.value("gamma", cfg.wifi_delay.gamma);
      cfg.wifi_delay.delta = w.value("delta", cfg.wifi_delay.delta);
      cfg.wifi_delay.lambda = w.value("lambda", cfg.wifi_delay.lambda);
      cfg.wifi_delay.xi = w.value("xi", cfg.wifi_delay.xi);
    }
    if (dm.contains("cellular")) {
      const auto& c = dm.at("cellular");
      cfg.cellular_delay.nu = c.value("nu", cfg.cellular_delay.nu);
      cfg.cellular_delay.loc = c.value("loc", cfg.cellular_delay.loc);
      cfg.cellular_delay.scale = c.value("scale", cfg.cellular_delay.scale);
    }
  }
  if (j.contains("events")) {
    for (const auto& e : j.at("events")) {
      EventSpec ev;
      ev.type = event_type_from_name(e.at("type").get<std::string>());
      ev.slot = e.at("slot").get<int>();
      ev.device = e.value("device", 0);
      ev.area = e.value("area", 0);
      ev.network = e.value("network", 0);
      if (e.contains("areas")) ev.areas = e.at("areas").get<std::vector<int>>();
      cfg.events.push_back(ev);
    }
    std::stable_sort(cfg.events.begin(), cfg.events.end(),
                     [](const EventSpec& a, const EventSpec& b) { return a.slot < b.slot; });
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  json j;
  in >> j;
  return from_json(j);
}

ScenarioConfig baseline_scenario() {
  ScenarioConfig cfg;
  cfg.networks = {{1, 18.0, game::NetworkKind::wifi},
                  {2, 8.0, game::NetworkKind::cellular},
                  {3, 13.0, game::NetworkKind::wifi},
                  {4, 16.0, game::NetworkKind::wifi},
                  {5, 10.0, game::NetworkKind::cellular}};
  cfg.areas = {{1, {1, 2, 3, 4, 5}}};
  for (int id = 1; id <= 20; ++id) {
    cfg.devices.push_back({id, 1, Algorithm::cobandit, true});
  }
  cfg.horizon = 1200;
  cfg.slot_duration_s = 15.0;
  cfg.seed = 1;
  return cfg;
}

}  // namespace cobandit::sim
