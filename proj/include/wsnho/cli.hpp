#pragma once

#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsnho/error.hpp"
#include "wsnho/layer_stats.hpp"
#include "wsnho/scenario.hpp"
#include "wsnho/simulation.hpp"

namespace wsnho::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitScenarioError = 1;
inline constexpr int kExitUsage = 2;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::ValidationError, "cannot write '" + path + "'");
  out << text;
}

// "paper" names the built-in scenario; anything else is a file path.
inline Scenario resolve_scenario(const std::string& name) {
  if (name == "paper") return paper_scenario();
  return load_scenario(read_file(name));
}

inline std::string paper_scenario_text() {
  return "# Built-in handoff scene: 2 BS, 2 MS, 16 motes, 1 satellite, 1 MSC.\n"
         "# Each MS halts halfway towards the opposite BS.\n" +
         serialize_scenario(paper_scenario());
}

inline std::string comparison_table(const StatsLedger& baseline, const StatsLedger& with_wsn, const Classification& c) {
  std::size_t width = 8;
  for (const auto& k : baseline.keys()) width = std::max(width, k.size());
  std::ostringstream os;
  os << "# " << std::string("counter") << std::string(width - 5, ' ') << "baseline  with_wsn\n";
  for (std::size_t i = 0; i < baseline.keys().size(); ++i) {
    const std::string& k = baseline.keys()[i];
    std::string b = std::to_string(baseline.values()[i]);
    std::string w = std::to_string(with_wsn.values()[i]);
    os << "# " << k << std::string(width - k.size() + 2, ' ') << std::string(b.size() < 8 ? 8 - b.size() : 0, ' ') << b
       << "  " << std::string(w.size() < 8 ? 8 - w.size() : 0, ' ') << w << "\n";
  }
  os << render_classification(c);
  return os.str();
}

// Entry point shared by the executable and the tests.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"WSN-assisted handoff simulator"};
  app.require_subcommand(1);

  std::string scenario_arg;
  std::optional<std::uint64_t> seed;
  std::optional<double> until;
  std::string out_path;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its report");
  run_cmd->add_option("--scenario", scenario_arg, "Scenario file, or 'paper'")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--until", until, "Override the simulated duration (seconds)");
  run_cmd->add_option("--out", out_path, "Report output path")->required();

  std::string baseline_path, with_wsn_path, directions_path, cmp_scenario, cmp_out;
  bool auto_baseline = false;
  std::optional<std::uint64_t> epsilon;
  std::optional<std::uint64_t> cmp_seed;
  std::optional<double> cmp_until;
  auto* cmp_cmd = app.add_subcommand("compare", "Classify counter changes between a baseline and a WSN run");
  cmp_cmd->add_option("--baseline", baseline_path, "Baseline report (no motes)");
  cmp_cmd->add_option("--with-wsn", with_wsn_path, "Report of the run with motes");
  cmp_cmd->add_option("--scenario", cmp_scenario, "Scenario file, or 'paper'");
  cmp_cmd->add_flag("--auto-baseline", auto_baseline, "Run the scenario with and without motes");
  cmp_cmd->add_option("--epsilon", epsilon, "Largest |delta| treated as insignificant");
  cmp_cmd->add_option("--seed", cmp_seed, "Override the scenario seed (auto-baseline)");
  cmp_cmd->add_option("--until", cmp_until, "Override the simulated duration (auto-baseline)");
  cmp_cmd->add_option("--directions", directions_path, "Direction overrides, layer.name=good|bad|neutral");
  cmp_cmd->add_option("--out", cmp_out, "Write the classification here instead of stdout");

  std::string dump_name = "paper", dump_out;
  auto* scen_cmd = app.add_subcommand("scenario", "Write a built-in scenario in file form");
  scen_cmd->add_option("--name", dump_name, "Built-in scenario name")->check(CLI::IsMember({"paper"}));
  scen_cmd->add_option("--out", dump_out, "Output path (default stdout)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      Scenario s = resolve_scenario(scenario_arg);
      if (seed) s.params.seed = *seed;
      if (until) s.params.duration = *until;
      const RunReport r = run(s);
      const std::string text = serialize_report(r);
      write_file(out_path, text);
      out << "wrote " << out_path << " (" << r.links.size() << " links, digest " << detail::hex64(r.digest) << ")\n";
      return kExitOk;
    }

    if (cmp_cmd->parsed()) {
      const bool from_files = !baseline_path.empty() || !with_wsn_path.empty();
      const bool from_scenario = auto_baseline || !cmp_scenario.empty();
      if (from_files == from_scenario || (from_files && (baseline_path.empty() || with_wsn_path.empty())) ||
          (from_scenario && (!auto_baseline || cmp_scenario.empty()))) {
        err << "error: compare needs either --baseline and --with-wsn, or --scenario with --auto-baseline\n"
            << cmp_cmd->help();
        return kExitUsage;
      }
      const DirectionMap dirs = directions_path.empty() ? default_directions() : load_directions(read_file(directions_path));
      StatsLedger base, wsn;
      std::uint64_t eps = epsilon.value_or(0);
      if (from_files) {
        base = parse_report(read_file(baseline_path)).ledger;
        wsn = parse_report(read_file(with_wsn_path)).ledger;
      } else {
        Scenario s = resolve_scenario(cmp_scenario);
        if (cmp_seed) s.params.seed = *cmp_seed;
        if (cmp_until) s.params.duration = *cmp_until;
        if (!epsilon) eps = s.params.epsilon;
        const Scenario stripped = strip_wsn(s);
        auto base_run = std::async(std::launch::async, [&stripped] { return run(stripped); });
        const RunReport wsn_report = run(s);
        base = base_run.get().ledger;
        wsn = wsn_report.ledger;
      }
      const Classification c = classify(base, wsn, dirs, eps);
      const std::string text = comparison_table(base, wsn, c);
      if (cmp_out.empty()) {
        out << text;
      } else {
        write_file(cmp_out, text);
        out << qos_line(c) << "\n";
      }
      return kExitOk;
    }

    const std::string text = paper_scenario_text();
    if (dump_out.empty()) {
      out << text;
    } else {
      write_file(dump_out, text);
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitScenarioError;
  }
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, out, err);
}

}  // namespace wsnho::cli
