// pcs-tool: scenario runner for polarization coherent-state phases.
//
//   pcs-tool run <scenario.json>
//   pcs-tool sweep <scenario.json> --param theta0 --from 0.1 --to 3.0 --steps 30
//   pcs-tool qfunc <scenario.json>
//
// Exit codes: 0 success, 2 schema or I/O error, 3 numeric failure. Errors
// are also printed to stdout as {"error": {...}}.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pcs/log.hpp"
#include "pcs/scenario.hpp"

namespace {

int report_error(const std::string& code, const std::string& message, int exit_code) {
  nlohmann::json err;
  err["error"] = {{"code", code}, {"message", message}, {"exit_code", exit_code}};
  std::cout << err.dump(2) << std::endl;
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric phases and Q-functions of polarization coherent states"};
  app.require_subcommand(1);

  int threads = 1;
  bool verbose = false;
  app.add_option("--threads", threads, "Worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "Print diagnostic notes to stderr");

  std::string scenario_file;
  auto* run = app.add_subcommand("run", "Compute the geometric phase of a scenario");
  run->add_option("scenario", scenario_file, "Scenario JSON")->required();

  std::string param, out_file;
  double from = 0, to = 0;
  int steps = 1;
  auto* sweep = app.add_subcommand("sweep", "Repeat a scenario over a parameter range");
  sweep->add_option("scenario", scenario_file, "Scenario JSON")->required();
  sweep->add_option("--param", param, "theta0, p, or alpha.<j>.<plus|minus>.<abs|arg>")->required();
  sweep->add_option("--from", from, "First value")->required();
  sweep->add_option("--to", to, "Last value")->required();
  sweep->add_option("--steps", steps, "Number of values")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_file, "CSV file (default: stdout)");

  auto* qfunc = app.add_subcommand("qfunc", "Evaluate the Q-function of the scenario state on a sphere grid");
  qfunc->add_option("scenario", scenario_file, "Scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!verbose) pcs::set_log_sink({});

  try {
    const pcs::Scenario scenario = pcs::load_scenario(scenario_file);
    if (run->parsed()) {
      const auto outcome = pcs::run_scenario(scenario, threads);
      std::cout << outcome.summary.dump(2) << std::endl;
    } else if (sweep->parsed()) {
      const auto rows = pcs::sweep_scenario(scenario, param, from, to, steps, threads);
      std::ostringstream csv;
      pcs::write_sweep_csv(csv, param, rows);
      if (out_file.empty()) {
        std::cout << csv.str();
      } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw pcs::Error(pcs::ErrorCode::io, "cannot write " + out_file);
        out << csv.str();
      }
    } else if (qfunc->parsed()) {
      const auto outcome = pcs::qfunc_scenario(scenario, threads);
      std::cout << outcome.summary.dump(2) << std::endl;
    }
  } catch (const pcs::Error& e) {
    return report_error(pcs::to_string(e.code()), e.what(), pcs::is_numeric_failure(e.code()) ? 3 : 2);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 3);
  }
  return 0;
}
