// Batch experiment runner for the cooperative network-selection simulator.
//
// Subcommands:
//   run       N seeded runs of one scenario, traces + summary + report
//   sweep     grid over one parameter, one run directory per value
//   theory    closed-form regret bound and hearing probabilities as JSON
//   validate  scenario lint; machine-readable error list on failure
//
// Exit codes: 0 ok, 1 validation failure, 2 I/O failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cobandit/engine.hpp"
#include "cobandit/metrics.hpp"
#include "cobandit/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cobandit;

namespace {

int log_level() {
  const char* env = std::getenv("COBANDIT_LOG");
  if (env == nullptr) return 1;
  const std::string v = env;
  if (v == "error" || v == "silent") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << msg << "\n";
}

json report_json(const metrics::Report& rep) {
  json j;
  j["runs"] = rep.runs;
  j["pct_stable"] = rep.pct_stable;
  j["pct_stable_at_nash"] = rep.pct_stable_at_nash;
  if (std::isnan(rep.median_stabilization_slot)) {
    j["median_stabilization_slot"] = nullptr;
  } else {
    j["median_stabilization_slot"] = rep.median_stabilization_slot;
  }
  j["median_download_gb"] = rep.median_download_gb;
  return j;
}

json summary_json(const std::vector<sim::RunSummary>& summaries,
                  const metrics::Report& rep) {
  json j = report_json(rep);
  j["per_run"] = json::array();
  for (const auto& s : summaries) {
    json r;
    r["seed"] = s.seed;
    r["stable"] = s.verdict.stable;
    r["at_nash"] = s.verdict.at_nash;
    if (s.verdict.stabilization_slot) {
      r["stabilization_slot"] = *s.verdict.stabilization_slot;
    } else {
      r["stabilization_slot"] = nullptr;
    }
    std::vector<double> downloads;
    downloads.reserve(s.download_bytes.size());
    for (const auto& [id, bytes] : s.download_bytes) downloads.push_back(bytes / 1e9);
    r["median_download_gb"] = metrics::median(downloads);
    r["devices_to_move"] = s.verdict.devices_to_move;
    int switches = 0;
    for (const auto& [id, c] : s.switch_count) switches += c;
    r["total_switches"] = switches;
    j["per_run"].push_back(r);
  }
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_distance_csv(const fs::path& path, const metrics::Report& rep) {
  std::ostringstream out;
  out << "slot,mean_distance,p10,p90\n";
  char buf[128];
  for (size_t i = 0; i < rep.mean_distance.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g\n", i + 1, rep.mean_distance[i],
                  rep.distance_p10[i], rep.distance_p90[i]);
    out << buf;
  }
  write_file(path, out.str());
}

struct MessageCsvSink : sim::MessageSink {
  std::ofstream out;
  explicit MessageCsvSink(const fs::path& path) : out(path, std::ios::binary) {
    out << "slot,sender,network,bitrate_mbps,client_count,available_networks,distribution\n";
  }
  void on_message(const gossip::FeedbackMessage& m) override {
    out << m.slot << ',' << m.sender << ',' << m.network << ',' << m.bitrate_mbps << ','
        << m.client_count << ',';
    for (size_t i = 0; i < m.available.size(); ++i)
      out << (i ? ";" : "") << m.available[i];
    out << ',';
    char buf[32];
    for (size_t i = 0; i < m.distribution.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.10g", m.distribution[i]);
      out << (i ? ";" : "") << buf;
    }
    out << '\n';
  }
};

struct RunFlags {
  std::string scenario;
  std::string algo = "cobandit";
  int runs = 100;
  uint64_t seed = 1;
  std::string out_dir;
  int parallel = 0;
  std::string minimal_reset;  // "", "true", "false"
  std::string gain_mode;      // "", "reconstruct", "literal"
  bool dump_messages = false;
};

sim::ScenarioConfig load_scenario_or_exit(const std::string& path) {
  try {
    return sim::ScenarioConfig::load_file(path);
  } catch (const std::exception& e) {
    json err;
    err["valid"] = false;
    err["errors"] = {std::string(e.what())};
    std::cout << err.dump(2) << "\n";
    std::exit(2);
  }
}

int validate_or_report(const sim::ScenarioConfig& cfg) {
  const auto errors = cfg.validate();
  if (errors.empty()) return 0;
  json err;
  err["valid"] = false;
  err["errors"] = errors;
  std::cout << err.dump(2) << "\n";
  return 1;
}

void apply_flag_overrides(sim::ScenarioConfig& cfg, const RunFlags& flags) {
  if (flags.minimal_reset == "true") cfg.params.minimal_reset = true;
  if (flags.minimal_reset == "false") cfg.params.minimal_reset = false;
  if (flags.gain_mode == "reconstruct") cfg.params.gain_mode = gossip::GainMode::reconstruct;
  if (flags.gain_mode == "literal") cfg.params.gain_mode = gossip::GainMode::literal;
}

int effective_parallelism(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// One experiment: N seeded runs into out_dir. Returns the aggregate report.
metrics::Report execute_experiment(const sim::ScenarioConfig& base, const RunFlags& flags,
                                   const fs::path& out_dir) {
  fs::create_directories(out_dir / "runs");
  const auto algo = sim::algorithm_from_string(flags.algo);

  sim::ScenarioConfig resolved = base;
  for (auto& d : resolved.devices) d.algorithm = algo;
  write_file(out_dir / "config.json", resolved.to_json().dump(2) + "\n");

  sim::RunHook hook = [&](int r, const sim::RunRecord& record,
                          const sim::ScenarioConfig& cfg) {
    std::ostringstream csv;
    csv << sim::slot_csv_header() << '\n';
    for (const auto& slot : record.slots) csv << sim::slot_csv_rows(slot);
    write_file(out_dir / "runs" / ("run_" + std::to_string(r) + ".csv"), csv.str());
    (void)cfg;
  };

  const auto summaries = sim::run_many(base, algo, flags.runs, flags.seed,
                                       effective_parallelism(flags.parallel), hook);
  const auto rep = metrics::aggregate(summaries);
  write_file(out_dir / "summary.json", summary_json(summaries, rep).dump(2) + "\n");
  write_distance_csv(out_dir / "distance.csv", rep);
  return rep;
}

int cmd_run(const RunFlags& flags) {
  auto cfg = load_scenario_or_exit(flags.scenario);
  apply_flag_overrides(cfg, flags);
  if (const int rc = validate_or_report(cfg); rc != 0) return rc;

  const fs::path out_dir = flags.out_dir;
  try {
    if (flags.dump_messages) {
      fs::create_directories(out_dir);
      // message trace of the first seed, streamed separately from the batch
      sim::ScenarioConfig first = cfg;
      first.seed = flags.seed;
      for (auto& d : first.devices)
        d.algorithm = sim::algorithm_from_string(flags.algo);
      MessageCsvSink sink(out_dir / "messages.csv");
      sim::run(first, &sink);
    }
    const auto rep = execute_experiment(cfg, flags, out_dir);
    write_file(out_dir / "report.json", report_json(rep).dump(2) + "\n");
    log_info("run: " + std::to_string(flags.runs) + " runs -> " + out_dir.string());
    std::cout << report_json(rep).dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

bool apply_sweep_value(sim::ScenarioConfig& cfg, const std::string& param,
                       const std::string& value) {
  try {
    if (param == "p_t") {
      cfg.params.p_t = value == "auto" ? -1.0 : std::stod(value);
    } else if (param == "p_l") {
      cfg.params.p_l = std::stod(value);
    } else if (param == "d") {
      cfg.params.d = std::stoi(value);
    } else if (param == "x") {
      cfg.params.x = std::stoi(value);
    } else if (param == "eta") {
      cfg.params.eta = std::stod(value);
    } else if (param == "minimal_reset") {
      cfg.params.minimal_reset = value == "true" || value == "1";
    } else {
      return false;
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

int cmd_sweep(const RunFlags& flags, const std::string& param,
              const std::vector<std::string>& values) {
  auto cfg = load_scenario_or_exit(flags.scenario);
  apply_flag_overrides(cfg, flags);
  if (const int rc = validate_or_report(cfg); rc != 0) return rc;

  const fs::path out_dir = flags.out_dir;
  json table = json::array();
  std::ostringstream csv;
  csv << "param,value,pct_stable,pct_stable_at_nash,median_stabilization_slot,"
         "median_download_gb\n";
  try {
    fs::create_directories(out_dir);
    for (const auto& value : values) {
      sim::ScenarioConfig point = cfg;
      if (!apply_sweep_value(point, param, value)) {
        json err;
        err["valid"] = false;
        err["errors"] = {"unknown sweep parameter or bad value: " + param + "=" + value};
        std::cout << err.dump(2) << "\n";
        return 1;
      }
      if (const int rc = validate_or_report(point); rc != 0) return rc;
      const fs::path point_dir = out_dir / (param + "=" + value);
      const auto rep = execute_experiment(point, flags, point_dir);
      json row = report_json(rep);
      row["param"] = param;
      row["value"] = value;
      table.push_back(row);
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s,%s,%.10g,%.10g,%.10g,%.10g\n", param.c_str(),
                    value.c_str(), rep.pct_stable, rep.pct_stable_at_nash,
                    rep.median_stabilization_slot, rep.median_download_gb);
      csv << buf;
      log_info("sweep " + param + "=" + value + " done");
    }
    json out;
    out["param"] = param;
    out["rows"] = table;
    write_file(out_dir / "sweep.json", out.dump(2) + "\n");
    write_file(out_dir / "sweep.csv", csv.str());
    std::cout << out.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_theory(int k, int d, long long T, double b0, int n, double eta, int delays) {
  theory::TheoryInputs in;
  in.k = k;
  in.d = d;
  in.T = T;
  in.b0 = b0;
  in.n = n;
  in.eta = eta;
  try {
    const auto out = theory::regret_bound(in);
    json j;
    j["inputs"] = {{"k", k}, {"d", d}, {"T", T}, {"b0", b0}, {"n", n}};
    j["eta_star"] = out.eta_star;
    j["bound"] = out.bound;
    j["hear_probability"] = json::array();
    const int table = delays >= 0 ? delays : d;
    for (int t = 0; t <= table; ++t) {
      j["hear_probability"].push_back(
          {{"delay", t}, {"b", theory::hear_probability(n, b0, t)}});
    }
    std::cout << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    json err;
    err["valid"] = false;
    err["errors"] = {std::string(e.what())};
    std::cout << err.dump(2) << "\n";
    return 1;
  }
  return 0;
}

int cmd_validate(const std::string& scenario) {
  const auto cfg = load_scenario_or_exit(scenario);
  if (const int rc = validate_or_report(cfg); rc != 0) return rc;
  json ok;
  ok["valid"] = true;
  std::cout << ok.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative bandit wireless network selection simulator"};
  app.require_subcommand(1);

  RunFlags flags;
  std::string param;
  std::string values_csv;

  auto add_common = [&](CLI::App* cmd, bool wants_out) {
    cmd->add_option("--scenario", flags.scenario, "Scenario JSON file")->required();
    cmd->add_option("--algo", flags.algo, "cobandit | ewa | exp3");
    cmd->add_option("--runs", flags.runs, "Number of seeded runs");
    cmd->add_option("--seed", flags.seed, "Base seed; run r uses seed+r");
    cmd->add_option("--parallel", flags.parallel, "Worker threads (0 = hardware)");
    cmd->add_option("--minimal-reset", flags.minimal_reset, "Override: true|false");
    cmd->add_option("--gain-mode", flags.gain_mode, "Override: reconstruct|literal");
    if (wants_out) cmd->add_option("--out", flags.out_dir, "Output directory")->required();
  };

  auto* run_cmd = app.add_subcommand("run", "Run one scenario with N seeds");
  add_common(run_cmd, true);
  run_cmd->add_flag("--dump-messages", flags.dump_messages,
                    "Also dump the first seed's feedback messages as CSV");

  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over one parameter");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--param", param, "p_t | p_l | d | x | eta | minimal_reset")
      ->required();
  sweep_cmd->add_option("--values", values_csv, "Comma-separated values")->required();

  int k = 5, d = 5, n = 20, delays = -1;
  long long T = 1200;
  double b0 = 0.05, eta = -1.0;
  auto* theory_cmd = app.add_subcommand("theory", "Closed-form quantities as JSON");
  theory_cmd->add_option("--k", k, "Networks");
  theory_cmd->add_option("--d", d, "Maximum feedback delay");
  theory_cmd->add_option("--T", T, "Horizon");
  theory_cmd->add_option("--b0", b0, "Direct-hearing probability");
  theory_cmd->add_option("--n", n, "Devices");
  theory_cmd->add_option("--eta", eta, "Learning rate (default: eta*)");
  theory_cmd->add_option("--delays", delays, "Hearing table up to this delay (default d)");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Lint a scenario file");
  validate_cmd->add_option("--scenario", validate_path, "Scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return cmd_run(flags);
  if (sweep_cmd->parsed()) {
    std::vector<std::string> values;
    std::stringstream ss(values_csv);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(item);
    return cmd_sweep(flags, param, values);
  }
  if (theory_cmd->parsed()) return cmd_theory(k, d, T, b0, n, eta, delays);
  if (validate_cmd->parsed()) return cmd_validate(validate_path);
  return 0;
}
