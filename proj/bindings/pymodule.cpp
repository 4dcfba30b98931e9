#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "cobandit/engine.hpp"
#include "cobandit/metrics.hpp"
#include "cobandit/theory.hpp"

namespace py = pybind11;
using namespace cobandit;
using nlohmann::json;

namespace {

sim::ScenarioConfig config_from_json_str(const std::string& config_json) {
  return sim::ScenarioConfig::from_json(json::parse(config_json));
}

py::dict verdict_dict(const sim::StabilityVerdict& v) {
  py::dict d;
  d["stable"] = v.stable;
  d["at_nash"] = v.at_nash;
  if (v.stabilization_slot) {
    d["stabilization_slot"] = *v.stabilization_slot;
  } else {
    d["stabilization_slot"] = py::none();
  }
  d["devices_to_move"] = v.devices_to_move;
  d["stable_networks"] = v.stable_networks;
  return d;
}

py::dict summary_dict(const sim::RunSummary& s) {
  py::dict d;
  d["seed"] = s.seed;
  d["verdict"] = verdict_dict(s.verdict);
  d["distance_series"] = s.distance_series;
  d["download_bytes"] = s.download_bytes;
  d["switch_count"] = s.switch_count;
  return d;
}

py::dict run_scenario(const std::string& config_json, const std::string& algorithm,
                      std::optional<uint64_t> seed) {
  auto cfg = config_from_json_str(config_json);
  if (seed) cfg.seed = *seed;
  std::optional<sim::Algorithm> algo;
  if (!algorithm.empty()) algo = sim::algorithm_from_string(algorithm);
  if (algo) {
    for (auto& dev : cfg.devices) dev.algorithm = *algo;
  }
  const auto record = sim::run(cfg);
  return summary_dict(sim::summarize(record, cfg));
}

py::dict run_experiment(const std::string& config_json, const std::string& algorithm,
                        int runs, uint64_t base_seed, int parallelism) {
  const auto cfg = config_from_json_str(config_json);
  std::optional<sim::Algorithm> algo;
  if (!algorithm.empty()) algo = sim::algorithm_from_string(algorithm);
  const auto summaries = sim::run_many(cfg, algo, runs, base_seed, parallelism);
  const auto rep = metrics::aggregate(summaries);
  py::dict d;
  d["runs"] = rep.runs;
  d["pct_stable"] = rep.pct_stable;
  d["pct_stable_at_nash"] = rep.pct_stable_at_nash;
  d["median_stabilization_slot"] = rep.median_stabilization_slot;
  d["median_download_gb"] = rep.median_download_gb;
  d["mean_distance"] = rep.mean_distance;
  d["distance_p10"] = rep.distance_p10;
  d["distance_p90"] = rep.distance_p90;
  py::list per_run;
  for (const auto& s : summaries) per_run.append(summary_dict(s));
  d["per_run"] = per_run;
  return d;
}

py::dict regret_bound(int k, int d, long long T, double b0, int n) {
  theory::TheoryInputs in;
  in.k = k;
  in.d = d;
  in.T = T;
  in.b0 = b0;
  in.n = n;
  const auto out = theory::regret_bound(in);
  py::dict result;
  result["eta_star"] = out.eta_star;
  result["bound"] = out.bound;
  return result;
}

}  // namespace

PYBIND11_MODULE(_cobandit, m) {
  m.doc() = "Cooperative bandit wireless network selection: game oracles, "
            "closed-form theory values, and the seeded simulator.";

  m.def(
      "raw_gain",
      [](double capacity_mbps, int n_clients) {
        return game::raw_gain({0, capacity_mbps, game::NetworkKind::wifi}, n_clients);
      },
      py::arg("capacity_mbps"), py::arg("n_clients"),
      "Equal-share bit rate in Mbps.");

  m.def(
      "scaled_gain",
      [](double capacity_mbps, int n_on_network, bool chosen, double c_max) {
        return game::scaled_gain({0, capacity_mbps, game::NetworkKind::wifi}, n_on_network,
                                 chosen, {c_max});
      },
      py::arg("capacity_mbps"), py::arg("n_on_network"), py::arg("chosen"),
      py::arg("c_max"),
      "Gain in [0,1]: realized share when chosen, joining share otherwise.");

  m.def(
      "perceived_loss",
      [](const std::vector<std::optional<double>>& gains) {
        return game::perceived_loss(gains);
      },
      py::arg("gains"),
      "Loss of each network against the best known gain; None means unknown.");

  m.def(
      "nash_allocation",
      [](const std::vector<double>& capacities, int n) {
        return game::nash_allocation(capacities, n).counts;
      },
      py::arg("capacities"), py::arg("n_devices"),
      "Equilibrium client counts via greedy best-response placement.");

  m.def(
      "is_nash",
      [](const std::vector<double>& capacities, const std::vector<int>& counts) {
        return game::is_nash(capacities, game::Allocation{counts});
      },
      py::arg("capacities"), py::arg("counts"));

  m.def(
      "distance_to_ne",
      [](const std::vector<int>& current, const std::vector<int>& ne,
         const std::vector<double>& capacities) {
        return game::distance_to_ne(game::Allocation{current}, game::Allocation{ne},
                                    capacities);
      },
      py::arg("current"), py::arg("ne"), py::arg("capacities"),
      "Maximum percentage higher gain any device would see at equilibrium.");

  m.def("regret_bound", &regret_bound, py::arg("k"), py::arg("d"), py::arg("T"),
        py::arg("b0"), py::arg("n") = 20,
        "Closed-form weak-regret upper bound and its optimizing eta.");

  m.def("hear_probability", &theory::hear_probability, py::arg("n"), py::arg("b0"),
        py::arg("delay"),
        "Probability of learning an observation within the given delay.");

  m.def("replicator_field", &theory::replicator_field, py::arg("p"), py::arg("losses"),
        py::arg("q"), "Replicator dynamics field (numeric diagnostic).");

  m.def("validate_scenario",
        [](const std::string& config_json) {
          return config_from_json_str(config_json).validate();
        },
        py::arg("config_json"), "List of validation errors; empty when valid.");

  m.def("baseline_scenario_json",
        []() { return sim::baseline_scenario().to_json().dump(2); },
        "The static 20-device, five-network setup as a JSON string.");

  m.def("run_scenario", &run_scenario, py::arg("config_json"), py::arg("algorithm") = "",
        py::arg("seed") = py::none(),
        "One seeded run; returns the verdict, distance series and downloads.");

  m.def("run_experiment", &run_experiment, py::arg("config_json"),
        py::arg("algorithm") = "", py::arg("runs") = 100, py::arg("base_seed") = 1,
        py::arg("parallelism") = 1,
        "Seeded batch (run r uses base_seed + r) with aggregate report.");
}
