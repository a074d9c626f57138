#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "pcs/scenario.hpp"

using namespace pcs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_doc() {
  return json::parse(R"({
    "schema": "pcs-scenario/1",
    "state": {"kind": "fock_m1", "p": 0.5, "helicity": "+"},
    "path": {"type": "latitude", "theta0": 1.5707963267948966, "samples": 400}
  })");
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::io;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pcs_test_" + std::to_string(::getpid()) + "_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
    return path / name;
  }
};

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct ToolRun {
  int status = -1;
  std::string out;
};

ToolRun run_tool(const std::string& args, const TempDir& dir) {
  const fs::path out = dir.path / "stdout.txt";
  const std::string cmd = std::string("\"") + PCS_TOOL_PATH + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  ToolRun r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read(out);
  return r;
}

}  // namespace

TEST_CASE("minimal scenario runs every method by default") {
  const Scenario s = parse_scenario(base_doc());
  CHECK(s.methods.size() == 3);
  CHECK_FALSE(s.modes);
  const json sum = run_scenario(s, 1, false).summary;
  CHECK(sum["result"]["gamma_closed"].get<double>() == doctest::Approx(kPi));
  CHECK(std::abs(sum["result"]["gamma_connection"].get<double>() - kPi) < 1e-6);
  CHECK(std::abs(sum["result"]["gamma_overlap"].get<double>() - kPi) < 1e-6);
  CHECK(sum["result"]["gamma_closed_mod_2pi"].get<double>() == doctest::Approx(kPi));
  CHECK(sum["result"]["agreement"]["within_atol_phase"].get<bool>());
  CHECK(sum["solid_angle"].get<double>() == doctest::Approx(2 * kPi));
  CHECK(sum["config"]["basis_dim"].get<int>() == 3);
  CHECK(sum["versions"]["schema"] == kScenarioSchema);
  CHECK(sum["path"]["winding"].get<int>() == 1);
  CHECK(sum["stokes"]["p0"].get<double>() == doctest::Approx(0.5));
  for (const char* key : {"contour_integrals", "hannay", "diagnostics", "settings"}) CHECK(sum.contains(key));
}

TEST_CASE("degree keys are equivalent to radians") {
  json rad = base_doc(), deg = base_doc();
  rad["path"] = json::parse(R"({"type": "geodesic_polygon", "samples": 200, "vertices": [
      {"theta": 0, "phi": 0}, {"theta": 1.5707963267948966, "phi": 0},
      {"theta": 1.5707963267948966, "phi": 1.5707963267948966}]})");
  deg["path"] = json::parse(R"({"type": "geodesic_polygon", "samples": 200, "vertices": [
      {"theta_deg": 0, "phi_deg": 0}, {"theta_deg": 90, "phi_deg": 0}, {"theta_deg": 90, "phi_deg": 90}]})");
  const json a = run_scenario(parse_scenario(rad), 1, false).summary;
  const json b = run_scenario(parse_scenario(deg), 1, false).summary;
  CHECK(a["result"]["gamma_closed"].get<double>() == doctest::Approx(kPi / 4));
  CHECK(a["result"] == b["result"]);
  json both = base_doc();
  both["path"]["theta0_deg"] = 90;
  CHECK(code_of([&] { parse_scenario(both); }) == ErrorCode::schema);
}

TEST_CASE("schema violations") {
  auto rejects = [](const std::function<void(json&)>& edit) {
    json d = base_doc();
    edit(d);
    return code_of([&] { parse_scenario(d); }) == ErrorCode::schema;
  };
  CHECK(rejects([](json& d) { d["extra"] = 1; }));
  CHECK(rejects([](json& d) { d["state"]["colour"] = "red"; }));
  CHECK(rejects([](json& d) { d["schema"] = "pcs-scenario/0"; }));
  CHECK(rejects([](json& d) { d.erase("state"); }));
  CHECK(rejects([](json& d) { d["state"]["p"] = "half"; }));
  CHECK(rejects([](json& d) { d["state"]["p"] = 0.3; }));
  CHECK(rejects([](json& d) { d["state"]["kind"] = "squeezed"; }));
  CHECK(rejects([](json& d) { d["state"]["n"] = 2; }));
  CHECK(rejects([](json& d) { d["path"]["type"] = "spiral"; }));
  CHECK(rejects([](json& d) { d["path"]["samples"] = 0; }));
  CHECK(rejects([](json& d) { d["methods"] = json::array({"connection", "connection"}); }));
  CHECK(rejects([](json& d) { d["methods"] = json::array({"guess"}); }));
  CHECK(rejects([](json& d) { d["numerics"] = {{"fd_step", -1}}; }));
  CHECK(rejects([](json& d) { d["modes"] = {{"m", 0}, {"n_max", 3}}; }));
  CHECK(rejects([](json& d) { d["qgrid"] = {{"n_theta", 4}}; }));
  CHECK(rejects([](json& d) { d["outputs"] = {{"plot_png", "x.png"}}; }));
}

TEST_CASE("explicit modes must hold the reference") {
  json d = base_doc();
  d["modes"] = {{"m", 2}, {"n_max", 3}};
  const json sum = run_scenario(parse_scenario(d), 1, false).summary;
  CHECK(sum["config"]["basis_dim"].get<int>() == 35);
  CHECK(sum["result"]["gamma_closed"].get<double>() == doctest::Approx(kPi));
  d["state"]["p"] = 2;
  CHECK(code_of([&] { run_scenario(parse_scenario(d), 1, false); }) == ErrorCode::cutoff_too_small);
}

TEST_CASE("Glauber scenario reports components") {
  json d = base_doc();
  d["state"] = json::parse(R"({"kind": "glauber", "alphas": [{"plus": 0.5, "minus": [0, 0.2]}]})");
  d["path"] = json::parse(R"({"type": "latitude", "theta0_deg": 60, "samples": 400})");
  const json sum = run_scenario(parse_scenario(d), 1, false).summary;
  const json& c = sum["result"]["components"];
  CHECK(c["gamma0"].get<double>() + c["gamma1"].get<double>() + c["gamma2"].get<double>() ==
        doctest::Approx(sum["result"]["gamma_closed"].get<double>()));
  CHECK(sum["hannay"]["numeric"].is_null());
  CHECK(sum["stokes"]["p2"].get<double>() == doctest::Approx(0.1));
}

TEST_CASE("open paths are numeric failures") {
  json d = base_doc();
  d["path"] = json::parse(R"({"type": "linear", "points": [{"theta": 0.5, "phi": 0}, {"theta": 1, "phi": 1}]})");
  CHECK(code_of([&] { run_scenario(parse_scenario(d), 1, false); }) == ErrorCode::path_not_closed);
}

TEST_CASE("results do not depend on the thread count") {
  json d = base_doc();
  d["state"] = json::parse(R"({"kind": "two_mode", "p": 1, "n": 4, "t": 0})");
  d["path"] = json::parse(R"({"type": "geodesic_polygon", "samples": 100, "vertices": [
      {"theta": 0.4, "phi": 0.1}, {"theta": 1.2, "phi": 0.3}, {"theta": 0.9, "phi": 1.4}]})");
  const Scenario s = parse_scenario(d);
  CHECK(run_scenario(s, 1, false).summary.dump() == run_scenario(s, 4, false).summary.dump());
}

TEST_CASE("outputs resolve against the scenario directory") {
  TempDir dir;
  json d = base_doc();
  d["outputs"] = {{"summary_json", "out/summary.json"}, {"samples_csv", "samples.csv"}};
  fs::create_directories(dir.path / "out");
  const fs::path file = dir.write("scenario.json", d.dump());
  const auto outcome = run_scenario(load_scenario(file));
  CHECK(json::parse(read(dir.path / "out" / "summary.json")) == outcome.summary);
  const std::string csv = read(dir.path / "samples.csv");
  CHECK(csv.rfind("s,theta,phi,A_s,running_gamma\r\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 402);

  d["methods"] = json::array({"closed_form"});
  CHECK(code_of([&] { run_scenario(parse_scenario(d, dir.path)); }) == ErrorCode::schema);
}

TEST_CASE("theta0 sweep follows the closed form") {
  const Scenario s = parse_scenario(base_doc());
  const auto rows = sweep_scenario(s, "theta0", 0.2, 2.8, 5, 2);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    const double expected = 2 * 0.5 * kPi * (1 - std::cos(r.value));
    CHECK(*r.outcome.result.gamma_closed == doctest::Approx(expected));
    CHECK(std::abs(*r.outcome.result.gamma_connection - expected) < 1e-6);
  }
  const auto one = sweep_scenario(s, "theta0", kPi / 2, 3.0, 1);
  CHECK(json(*one[0].outcome.result.gamma_connection) == run_scenario(s, 1, false).summary["result"]["gamma_connection"]);
  std::ostringstream csv;
  write_sweep_csv(csv, "theta0", rows);
  const std::string text = csv.str();
  CHECK(text.rfind("step,theta0,omega,gamma_closed,gamma_connection,gamma_overlap,gamma0,gamma1,gamma2\r\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}

TEST_CASE("p sweep is linear in p") {
  json d = base_doc();
  d["methods"] = json::array({"closed_form", "connection"});
  const auto rows = sweep_scenario(parse_scenario(d), "p", 0.5, 2.5, 5);
  for (const auto& r : rows) {
    CHECK(*r.outcome.result.gamma_closed == doctest::Approx(2 * r.value * kPi));
    CHECK(std::abs(*r.outcome.result.gamma_connection - 2 * r.value * kPi) < 1e-6);
  }
  CHECK(code_of([&] { sweep_scenario(parse_scenario(d), "p", 0.5, 1.0, 3); }) == ErrorCode::schema);
  CHECK(code_of([&] { sweep_scenario(parse_scenario(d), "alpha.1.plus.abs", 0.5, 1.0, 2); }) == ErrorCode::schema);
  CHECK(code_of([&] { sweep_scenario(parse_scenario(d), "tilt", 0.5, 1.0, 2); }) == ErrorCode::schema);
}

TEST_CASE("alpha sweep edits one amplitude") {
  json d = base_doc();
  d["state"] = json::parse(R"({"kind": "glauber", "alphas": [{"plus": 0.5, "minus": 0}]})");
  d["methods"] = json::array({"closed_form"});
  const auto rows = sweep_scenario(parse_scenario(d), "alpha.1.plus.abs", 0.0, 1.0, 3);
  for (const auto& r : rows) {
    CHECK(*r.outcome.result.gamma_closed == doctest::Approx(r.value * r.value * kPi));
  }
  CHECK(code_of([&] { sweep_scenario(parse_scenario(d), "alpha.2.plus.abs", 0.0, 1.0, 2); }) == ErrorCode::schema);
}

TEST_CASE("Q-function scenario") {
  json d = base_doc();
  d["state"]["p"] = 1.5;
  auto q = qfunc_scenario(parse_scenario(d), 1, false);
  CHECK(q.summary["normalization"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.summary["grid"]["kind"] == "gauss_legendre");
  d["qgrid"] = {{"kind", "uniform"}, {"n_theta", 19}, {"n_phi", 36}};
  q = qfunc_scenario(parse_scenario(d), 1, false);
  CHECK(q.summary["q_max"].get<double>() == doctest::Approx(1.0));
  CHECK(q.summary["q_max_at"]["theta"].get<double>() == 0.0);
  d["qgrid"]["rho_rotation"] = {{"theta_deg", 90}, {"phi_deg", 90}};
  q = qfunc_scenario(parse_scenario(d), 1, false);
  CHECK(q.summary["q_max"].get<double>() == doctest::Approx(1.0));
  CHECK(q.summary["q_max_at"]["theta"].get<double>() == doctest::Approx(kPi / 2));
  CHECK(q.summary["q_max_at"]["phi"].get<double>() == doctest::Approx(kPi / 2));
}

TEST_CASE("command-line exit codes") {
  TempDir dir;
  const fs::path good = dir.write("good.json", base_doc().dump());
  ToolRun r = run_tool("run \"" + good.string() + "\"", dir);
  CHECK(r.status == 0);
  CHECK(json::parse(r.out)["result"]["gamma_closed"].get<double>() == doctest::Approx(kPi));

  const ToolRun threaded = run_tool("--threads 3 run \"" + good.string() + "\"", dir);
  CHECK(threaded.out == r.out);

  r = run_tool("sweep \"" + good.string() + "\" --param theta0 --from 0.5 --to 1.5 --steps 3", dir);
  CHECK(r.status == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);

  r = run_tool("qfunc \"" + good.string() + "\"", dir);
  CHECK(r.status == 0);

  const fs::path broken = dir.write("broken.json", "{ not json");
  r = run_tool("run \"" + broken.string() + "\"", dir);
  CHECK(r.status == 2);
  CHECK(json::parse(r.out)["error"]["code"] == "schema");

  json extra = base_doc();
  extra["surprise"] = true;
  r = run_tool("run \"" + dir.write("extra.json", extra.dump()).string() + "\"", dir);
  CHECK(r.status == 2);

  r = run_tool("run \"" + (dir.path / "missing.json").string() + "\"", dir);
  CHECK(r.status == 2);
  CHECK(json::parse(r.out)["error"]["code"] == "io");

  json open = base_doc();
  open["path"] = json::parse(R"({"type": "linear", "points": [{"theta": 0.5, "phi": 0}, {"theta": 1, "phi": 1}]})");
  r = run_tool("run \"" + dir.write("open.json", open.dump()).string() + "\"", dir);
  CHECK(r.status == 3);
  CHECK(json::parse(r.out)["error"]["code"] == "path_not_closed");

  CHECK(run_tool("", dir).status == 2);
  CHECK(run_tool("sweep \"" + good.string() + "\" --param theta0", dir).status == 2);
}
