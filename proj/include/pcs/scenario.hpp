#pragma once

// Declarative scenario files for the command-line runner.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pcs/phase.hpp"
#include "pcs/quasiprob.hpp"

namespace pcs {

inline constexpr const char* kScenarioSchema = "pcs-scenario/1";
inline constexpr const char* kToolVersion = "1.0.0";

enum class PathType { latitude, geodesic_polygon, linear, segments };

struct PathSpec {
  PathType type = PathType::latitude;
  double theta0 = kPi / 2;
  int winding = 1;
  int samples = 0;  // 0: default for the path type
  std::vector<SpherePoint> points;
  bool closed = true;
  std::vector<Segment> segments;

  SpherePath build() const;
};

struct QGridSpec {
  bool uniform = false;  // plotting grid with poles instead of Gauss-Legendre
  int n_theta = 0;  // 0: default grid for the reference's quasispin
  int n_phi = 0;
  std::optional<std::pair<double, double>> rho_rotation;
};

struct OutputSpec {
  std::string summary_json;
  std::string samples_csv;
  std::string qgrid_csv;
};

struct Scenario {
  std::optional<ModeConfig> modes;
  ReferenceSpec state;
  PathSpec path;
  std::vector<PhaseMethod> methods;
  PhaseOptions numerics;
  double atol_phase = 1e-6;
  double hannay_theta0 = 0;
  double hannay_phi0 = 0;
  QGridSpec qgrid;
  OutputSpec outputs;
  std::filesystem::path base_dir;  // relative output paths resolve here
};

/// Validates against the schema; throws Error(schema) on unknown keys,
/// missing fields or wrong types.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& file);

struct RunOutcome {
  nlohmann::json summary;
  GeometricPhaseResult result;
};

/// Computes every requested method and writes the declared outputs.
RunOutcome run_scenario(const Scenario& s, int threads = 1, bool write_outputs = true);

/// Parameter names: theta0, p, alpha.<j>.<plus|minus>.<abs|arg>.
Scenario with_parameter(const Scenario& s, const std::string& param, double value);

struct SweepRow {
  double value = 0;
  RunOutcome outcome;
};

std::vector<SweepRow> sweep_scenario(const Scenario& s, const std::string& param, double from, double to,
                                     int steps, int threads = 1);

/// Columns: step,value,omega,gamma_closed,gamma_connection,gamma_overlap,gamma0,gamma1,gamma2
void write_sweep_csv(std::ostream& out, const std::string& param, const std::vector<SweepRow>& rows);

struct QFuncOutcome {
  nlohmann::json summary;
  SphereGrid grid;
  std::vector<double> q;
};

QFuncOutcome qfunc_scenario(const Scenario& s, int threads = 1, bool write_outputs = true);

void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& samples);

}  // namespace pcs
