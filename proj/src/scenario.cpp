#include "pcs/scenario.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pcs/csv.hpp"
#include "pcs/log.hpp"
#include "pcs/parallel.hpp"

namespace pcs {

using nlohmann::json;

namespace {

constexpr double kDegree = kPi / 180.0;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::schema, where + ": " + what);
}

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) schema_error(where, "unknown key \"" + item.key() + "\"");
  }
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(where, "expected a finite number");
  return d;
}

int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) schema_error(where, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) schema_error(where, "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) schema_error(where, "expected a string");
  return v.get<std::string>();
}

/// Angle stored under `key` (radians) or `key_deg` (degrees).
std::optional<double> get_angle(const json& obj, const std::string& where, const std::string& key) {
  const bool rad = obj.contains(key);
  const bool deg = obj.contains(key + "_deg");
  if (rad && deg) schema_error(where, "both \"" + key + "\" and \"" + key + "_deg\" given");
  if (rad) return get_number(obj.at(key), where + "." + key);
  if (deg) return get_number(obj.at(key + "_deg"), where + "." + key + "_deg") * kDegree;
  return std::nullopt;
}

double require_angle(const json& obj, const std::string& where, const std::string& key) {
  auto a = get_angle(obj, where, key);
  if (!a) schema_error(where, "missing \"" + key + "\" (or \"" + key + "_deg\")");
  return *a;
}

cplx get_complex(const json& v, const std::string& where) {
  if (v.is_number()) return get_number(v, where);
  if (v.is_array() && v.size() == 2) return {get_number(v[0], where + "[0]"), get_number(v[1], where + "[1]")};
  schema_error(where, "expected a number or a [re, im] pair");
}

SpherePoint get_point(const json& v, const std::string& where) {
  allow_keys(v, where, {"theta", "theta_deg", "phi", "phi_deg"});
  return {require_angle(v, where, "theta"), require_angle(v, where, "phi")};
}

Helicity get_helicity(const json& v, const std::string& where) {
  const std::string h = get_string(v, where);
  if (h == "+" || h == "plus") return Helicity::plus;
  if (h == "-" || h == "minus") return Helicity::minus;
  schema_error(where, "helicity must be \"+\" or \"-\"");
}

ReferenceSpec parse_state(const json& obj) {
  const std::string where = "state";
  allow_keys(obj, where, {"kind", "helicity", "p", "n", "t", "n_list", "alphas"});
  if (!obj.contains("kind")) schema_error(where, "missing \"kind\"");
  ReferenceSpec spec;
  const std::string kind = get_string(obj.at("kind"), where + ".kind");
  auto need = [&](const char* key) -> const json& {
    if (!obj.contains(key)) schema_error(where, std::string("missing \"") + key + "\" for kind " + kind);
    return obj.at(key);
  };
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (obj.contains(k)) schema_error(where, std::string("\"") + k + "\" does not apply to kind " + kind);
    }
  };
  if (obj.contains("helicity")) spec.helicity = get_helicity(obj.at("helicity"), where + ".helicity");
  if (kind == "fock_m1") {
    spec.kind = ReferenceKind::fock_m1;
    spec.p = get_number(need("p"), where + ".p");
    forbid({"n", "t", "n_list", "alphas"});
  } else if (kind == "two_mode") {
    spec.kind = ReferenceKind::two_mode;
    spec.p = get_number(need("p"), where + ".p");
    spec.n = get_int(need("n"), where + ".n");
    spec.t = obj.contains("t") ? get_number(obj.at("t"), where + ".t") : spec.p;
    forbid({"n_list", "alphas"});
  } else if (kind == "independent") {
    spec.kind = ReferenceKind::independent;
    const json& list = need("n_list");
    if (!list.is_array() || list.empty()) schema_error(where + ".n_list", "expected a non-empty array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      spec.n_list.push_back(get_int(list[k], where + ".n_list[" + std::to_string(k) + "]"));
    }
    forbid({"p", "n", "t", "alphas"});
  } else if (kind == "glauber") {
    spec.kind = ReferenceKind::glauber;
    const json& list = need("alphas");
    if (!list.is_array() || list.empty()) schema_error(where + ".alphas", "expected a non-empty array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string w = where + ".alphas[" + std::to_string(k) + "]";
      allow_keys(list[k], w, {"plus", "minus"});
      ModeAmplitudes a{0.0, 0.0};
      if (list[k].contains("plus")) a.plus = get_complex(list[k].at("plus"), w + ".plus");
      if (list[k].contains("minus")) a.minus = get_complex(list[k].at("minus"), w + ".minus");
      spec.alphas.push_back(a);
    }
    forbid({"p", "n", "t", "n_list", "helicity"});
  } else {
    schema_error(where + ".kind", "unknown kind \"" + kind + "\" (fock_m1, two_mode, independent, glauber)");
  }
  try {
    spec.validate(spec.natural_modes());
  } catch (const Error& e) {
    schema_error(where, e.what());
  }
  return spec;
}

Segment parse_segment(const json& obj, const std::string& where) {
  allow_keys(obj, where, {"kind", "start", "end", "samples"});
  Segment seg;
  const std::string kind = obj.contains("kind") ? get_string(obj.at("kind"), where + ".kind") : "geodesic";
  if (kind == "latitude") seg.kind = SegmentKind::latitude;
  else if (kind == "geodesic") seg.kind = SegmentKind::geodesic;
  else if (kind == "linear") seg.kind = SegmentKind::linear_in_angles;
  else schema_error(where + ".kind", "unknown segment kind \"" + kind + "\"");
  if (!obj.contains("start") || !obj.contains("end")) schema_error(where, "segments need \"start\" and \"end\"");
  seg.start = get_point(obj.at("start"), where + ".start");
  seg.end = get_point(obj.at("end"), where + ".end");
  if (seg.kind == SegmentKind::latitude && seg.start.theta != seg.end.theta) {
    schema_error(where, "latitude segment needs equal start and end theta");
  }
  seg.samples = obj.contains("samples") ? get_int(obj.at("samples"), where + ".samples") : 0;
  return seg;
}

PathSpec parse_path(const json& obj) {
  const std::string where = "path";
  allow_keys(obj, where, {"type", "theta0", "theta0_deg", "winding", "samples", "vertices", "points", "closed",
                          "segments"});
  if (!obj.contains("type")) schema_error(where, "missing \"type\"");
  PathSpec spec;
  const std::string type = get_string(obj.at("type"), where + ".type");
  if (obj.contains("samples")) {
    spec.samples = get_int(obj.at("samples"), where + ".samples");
    if (spec.samples < 1) schema_error(where + ".samples", "must be positive");
  }
  auto points = [&](const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_array()) schema_error(where, std::string("missing array \"") + key + "\"");
    std::vector<SpherePoint> out;
    for (std::size_t k = 0; k < obj.at(key).size(); ++k) {
      out.push_back(get_point(obj.at(key)[k], where + "." + key + "[" + std::to_string(k) + "]"));
    }
    return out;
  };
  if (type == "latitude") {
    spec.type = PathType::latitude;
    spec.theta0 = require_angle(obj, where, "theta0");
    if (obj.contains("winding")) spec.winding = get_int(obj.at("winding"), where + ".winding");
  } else if (type == "geodesic_polygon") {
    spec.type = PathType::geodesic_polygon;
    spec.points = points("vertices");
  } else if (type == "linear") {
    spec.type = PathType::linear;
    spec.points = points("points");
    spec.closed = obj.contains("closed") ? get_bool(obj.at("closed"), where + ".closed") : false;
  } else if (type == "segments") {
    spec.type = PathType::segments;
    if (!obj.contains("segments") || !obj.at("segments").is_array()) schema_error(where, "missing array \"segments\"");
    for (std::size_t k = 0; k < obj.at("segments").size(); ++k) {
      spec.segments.push_back(parse_segment(obj.at("segments")[k], where + ".segments[" + std::to_string(k) + "]"));
    }
    spec.closed = obj.contains("closed") ? get_bool(obj.at("closed"), where + ".closed") : true;
  } else {
    schema_error(where + ".type", "unknown path type \"" + type + "\" (latitude, geodesic_polygon, linear, segments)");
  }
  return spec;
}

PhaseMethod parse_method(const json& v, const std::string& where) {
  const std::string m = get_string(v, where);
  if (m == "connection") return PhaseMethod::connection;
  if (m == "overlaps") return PhaseMethod::overlaps;
  if (m == "closed_form") return PhaseMethod::closed_form;
  schema_error(where, "unknown method \"" + m + "\" (connection, overlaps, closed_form)");
}

const char* method_name(PhaseMethod m) {
  switch (m) {
    case PhaseMethod::connection: return "connection";
    case PhaseMethod::overlaps: return "overlaps";
    case PhaseMethod::closed_form: return "closed_form";
  }
  return "";
}

const char* kind_name(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::fock_m1: return "fock_m1";
    case ReferenceKind::two_mode: return "two_mode";
    case ReferenceKind::independent: return "independent";
    case ReferenceKind::glauber: return "glauber";
  }
  return "";
}

const char* path_type_name(PathType t) {
  switch (t) {
    case PathType::latitude: return "latitude";
    case PathType::geodesic_polygon: return "geodesic_polygon";
    case PathType::linear: return "linear";
    case PathType::segments: return "segments";
  }
  return "";
}

json state_json(const ReferenceSpec& s) {
  json j;
  j["kind"] = kind_name(s.kind);
  switch (s.kind) {
    case ReferenceKind::fock_m1:
      j["p"] = s.p;
      j["helicity"] = s.helicity == Helicity::plus ? "+" : "-";
      break;
    case ReferenceKind::two_mode:
      j["p"] = s.p;
      j["n"] = s.n;
      j["t"] = s.t;
      j["helicity"] = s.helicity == Helicity::plus ? "+" : "-";
      break;
    case ReferenceKind::independent:
      j["n_list"] = s.n_list;
      j["helicity"] = s.helicity == Helicity::plus ? "+" : "-";
      break;
    case ReferenceKind::glauber: {
      json list = json::array();
      for (const auto& a : s.alphas) {
        list.push_back({{"plus", {a.plus.real(), a.plus.imag()}}, {"minus", {a.minus.real(), a.minus.imag()}}});
      }
      j["alphas"] = list;
      break;
    }
  }
  return j;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::filesystem::path resolve(const Scenario& s, const std::string& file) {
  const std::filesystem::path p(file);
  return p.is_absolute() || s.base_dir.empty() ? p : s.base_dir / p;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

BasisPtr basis_for(const Scenario& s) {
  ModeConfig natural = s.state.natural_config();
  if (!s.modes) return enumerate_basis(natural);
  ModeConfig config = *s.modes;
  config.validate();
  s.state.validate(config.modes);
  if (config.n_max < natural.n_max) {
    throw Error(ErrorCode::cutoff_too_small, "n_max = " + std::to_string(config.n_max) +
                                                 " is below the " + std::to_string(natural.n_max) +
                                                 " photons the reference needs");
  }
  return enumerate_basis(config);
}

/// Quasispin label used for normalizations and the photon-number derivative.
std::optional<double> quasispin_label(const ReferenceSpec& s) {
  switch (s.kind) {
    case ReferenceKind::fock_m1:
    case ReferenceKind::two_mode: return s.p;
    case ReferenceKind::independent: {
      int total = 0;
      for (int k : s.n_list) total += k;
      return total / 2.0;
    }
    case ReferenceKind::glauber: return std::nullopt;
  }
  return std::nullopt;
}

json versions_json() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return {{"tool", kToolVersion}, {"schema", kScenarioSchema}, {"eigen", eigen.str()}};
}

json settings_json(const Scenario& s, const SpherePath& path) {
  return {{"fd_step", s.numerics.fd_step},
          {"richardson", s.numerics.richardson},
          {"pole_guard", s.numerics.pole_guard},
          {"min_overlap", s.numerics.min_overlap},
          {"atol_phase", s.atol_phase},
          {"total_samples", path.total_samples()},
          {"segment_samples", [&] {
             json a = json::array();
             for (const auto& seg : path.segments) a.push_back(seg.samples);
             return a;
           }()}};
}

}  // namespace

SpherePath PathSpec::build() const {
  switch (type) {
    case PathType::latitude:
      return latitude_loop(theta0, winding, samples > 0 ? samples : 2000);
    case PathType::geodesic_polygon:
      return geodesic_polygon(points, samples > 0 ? samples : 1000);
    case PathType::linear:
      return linear_path(points, closed, samples > 0 ? samples : 1000);
    case PathType::segments: {
      if (segments.empty()) throw Error(ErrorCode::invalid_path, "empty path");
      SpherePath p;
      p.closed = closed;
      for (Segment seg : segments) {
        if (seg.samples <= 0) seg.samples = samples > 0 ? samples : default_samples(seg.length(), 1000);
        p.segments.push_back(seg);
      }
      return p;
    }
  }
  return {};
}

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  allow_keys(doc, "scenario",
             {"schema", "modes", "state", "path", "methods", "numerics", "hannay", "qgrid", "outputs"});
  if (!doc.contains("schema")) schema_error("scenario", "missing \"schema\"");
  const std::string schema = get_string(doc.at("schema"), "schema");
  if (schema != kScenarioSchema) schema_error("schema", "expected \"" + std::string(kScenarioSchema) + "\"");

  Scenario s;
  s.base_dir = base_dir;
  if (doc.contains("modes")) {
    const json& m = doc.at("modes");
    allow_keys(m, "modes", {"m", "n_max"});
    if (!m.contains("m") || !m.contains("n_max")) schema_error("modes", "needs \"m\" and \"n_max\"");
    ModeConfig c;
    c.modes = get_int(m.at("m"), "modes.m");
    c.n_max = get_int(m.at("n_max"), "modes.n_max");
    try {
      c.validate();
    } catch (const Error& e) {
      schema_error("modes", e.what());
    }
    s.modes = c;
  }
  if (!doc.contains("state")) schema_error("scenario", "missing \"state\"");
  s.state = parse_state(doc.at("state"));
  if (!doc.contains("path")) schema_error("scenario", "missing \"path\"");
  s.path = parse_path(doc.at("path"));

  if (doc.contains("methods")) {
    const json& m = doc.at("methods");
    if (!m.is_array() || m.empty()) schema_error("methods", "expected a non-empty array");
    for (std::size_t k = 0; k < m.size(); ++k) {
      const PhaseMethod pm = parse_method(m[k], "methods[" + std::to_string(k) + "]");
      if (std::find(s.methods.begin(), s.methods.end(), pm) != s.methods.end()) {
        schema_error("methods", "duplicate method");
      }
      s.methods.push_back(pm);
    }
  } else {
    s.methods = {PhaseMethod::connection, PhaseMethod::overlaps, PhaseMethod::closed_form};
  }

  if (doc.contains("numerics")) {
    const json& n = doc.at("numerics");
    allow_keys(n, "numerics", {"fd_step", "richardson", "pole_guard", "min_overlap", "atol_phase"});
    if (n.contains("fd_step")) s.numerics.fd_step = get_number(n.at("fd_step"), "numerics.fd_step");
    if (n.contains("richardson")) s.numerics.richardson = get_bool(n.at("richardson"), "numerics.richardson");
    if (n.contains("pole_guard")) s.numerics.pole_guard = get_number(n.at("pole_guard"), "numerics.pole_guard");
    if (n.contains("min_overlap")) s.numerics.min_overlap = get_number(n.at("min_overlap"), "numerics.min_overlap");
    if (n.contains("atol_phase")) s.atol_phase = get_number(n.at("atol_phase"), "numerics.atol_phase");
    if (!(s.numerics.fd_step > 0) || !(s.numerics.pole_guard >= 0) || !(s.numerics.min_overlap >= 0) ||
        !(s.atol_phase > 0)) {
      schema_error("numerics", "steps and tolerances must be positive");
    }
  }
  if (doc.contains("hannay")) {
    const json& h = doc.at("hannay");
    allow_keys(h, "hannay", {"theta0", "theta0_deg", "phi0", "phi0_deg"});
    s.hannay_theta0 = get_angle(h, "hannay", "theta0").value_or(0.0);
    s.hannay_phi0 = get_angle(h, "hannay", "phi0").value_or(0.0);
  }
  if (doc.contains("qgrid")) {
    const json& q = doc.at("qgrid");
    allow_keys(q, "qgrid", {"kind", "n_theta", "n_phi", "rho_rotation"});
    if (q.contains("kind")) {
      const std::string kind = get_string(q.at("kind"), "qgrid.kind");
      if (kind == "uniform") s.qgrid.uniform = true;
      else if (kind != "gauss_legendre") schema_error("qgrid.kind", "expected \"gauss_legendre\" or \"uniform\"");
    }
    if (q.contains("n_theta")) s.qgrid.n_theta = get_int(q.at("n_theta"), "qgrid.n_theta");
    if (q.contains("n_phi")) s.qgrid.n_phi = get_int(q.at("n_phi"), "qgrid.n_phi");
    if (s.qgrid.n_theta < 0 || s.qgrid.n_phi < 0 || (s.qgrid.n_theta == 0) != (s.qgrid.n_phi == 0)) {
      schema_error("qgrid", "give both n_theta and n_phi as positive integers, or neither");
    }
    if (s.qgrid.uniform && s.qgrid.n_theta == 0) schema_error("qgrid", "uniform grids need n_theta and n_phi");
    if (q.contains("rho_rotation")) {
      const SpherePoint r = get_point(q.at("rho_rotation"), "qgrid.rho_rotation");
      s.qgrid.rho_rotation = std::pair{r.theta, r.phi};
    }
  }
  if (doc.contains("outputs")) {
    const json& o = doc.at("outputs");
    allow_keys(o, "outputs", {"summary_json", "samples_csv", "qgrid_csv"});
    if (o.contains("summary_json")) s.outputs.summary_json = get_string(o.at("summary_json"), "outputs.summary_json");
    if (o.contains("samples_csv")) s.outputs.samples_csv = get_string(o.at("samples_csv"), "outputs.samples_csv");
    if (o.contains("qgrid_csv")) s.outputs.qgrid_csv = get_string(o.at("qgrid_csv"), "outputs.qgrid_csv");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::io, "cannot read " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(doc, file.parent_path());
}

void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& samples) {
  out << "s,theta,phi,A_s,running_gamma";
  csv_end_row(out);
  for (const auto& r : samples) {
    out << format_number(r.s) << ',' << format_number(r.theta) << ',' << format_number(r.phi) << ','
        << format_number(r.a_s) << ',' << format_number(r.running_gamma);
    csv_end_row(out);
  }
}

RunOutcome run_scenario(const Scenario& s, int threads, bool write_outputs) {
  const BasisPtr basis = basis_for(s);
  const SpherePath path = s.path.build();
  path.require_closed();
  const StateFamily family = rotation_family(s.state, basis);
  PhaseOptions opts = s.numerics;
  opts.threads = threads;

  RunOutcome out;
  out.result = compute_geometric_phase(family, path, s.methods, opts);
  const GeometricPhaseResult& r = out.result;

  const QuasispinExpectation stokes = s.state.kind == ReferenceKind::glauber
                                          ? glauber_stokes(s.state.alphas)
                                          : stokes_vector(family.reference(), NormPolicy::normalize);
  const ContourIntegrals integrals = contour_integrals(path);

  json result;
  result["gamma_connection"] = optional_number(r.gamma_connection);
  result["gamma_overlap"] = optional_number(r.gamma_overlap);
  result["gamma_closed"] = optional_number(r.gamma_closed);
  auto wrapped = [](const std::optional<double>& v) {
    return v ? json(wrap_phase(*v)) : json(nullptr);
  };
  result["gamma_connection_mod_2pi"] = wrapped(r.gamma_connection);
  result["gamma_overlap_mod_2pi"] = wrapped(r.gamma_overlap);
  result["gamma_closed_mod_2pi"] = wrapped(r.gamma_closed);
  if (r.components) {
    result["components"] = {{"gamma0", r.components->gamma0},
                            {"gamma1", r.components->gamma1},
                            {"gamma2", r.components->gamma2}};
  } else {
    result["components"] = nullptr;
  }
  result["per_segment"] = r.per_segment;

  json agreement = json::object();
  bool agree = true;
  if (r.gamma_closed) {
    if (r.gamma_connection) {
      const double d = std::abs(*r.gamma_connection - *r.gamma_closed);
      agreement["connection_vs_closed"] = d;
      agree = agree && d < s.atol_phase;
    }
    if (r.gamma_overlap) {
      const double d = std::abs(*r.gamma_overlap - *r.gamma_closed);
      agreement["overlaps_vs_closed"] = d;
      agree = agree && d < s.atol_phase;
    }
  }
  if (r.gamma_connection && r.gamma_overlap) {
    agreement["overlaps_vs_connection"] = std::abs(*r.gamma_overlap - *r.gamma_connection);
  }
  agreement["within_atol_phase"] = agree;
  result["agreement"] = agreement;

  json hannay;
  hannay["theta0"] = s.hannay_theta0;
  hannay["phi0"] = s.hannay_phi0;
  hannay["closed"] = hannay_closed(path, s.hannay_theta0, s.hannay_phi0);
  const auto label = quasispin_label(s.state);
  if (label && *label >= 0.5) {
    const HannayReport h = hannay_report(path, *label, s.hannay_theta0, s.hannay_phi0);
    hannay["numeric"] = h.numeric;
    hannay["discrepancy"] = h.discrepancy;
    hannay["diagnostic"] = h.note;
  } else {
    hannay["numeric"] = nullptr;
    hannay["discrepancy"] = nullptr;
    hannay["diagnostic"] = "photon-number derivative needs a reference with a quasispin label p >= 1/2";
  }

  json methods = json::array();
  for (PhaseMethod m : s.methods) methods.push_back(method_name(m));

  json summary;
  summary["versions"] = versions_json();
  summary["config"] = {{"modes", basis->modes()},
                       {"n_max", basis->n_max()},
                       {"basis_dim", basis->dim()},
                       {"reference_leakage", family.reference().leakage},
                       {"state", state_json(s.state)},
                       {"methods", methods}};
  summary["stokes"] = {{"p0", stokes.p0}, {"p1", stokes.p1}, {"p2", stokes.p2}, {"radius", stokes.radius}};
  summary["path"] = {{"type", path_type_name(s.path.type)},
                     {"segments", path.segments.size()},
                     {"length", path.length()},
                     {"winding", path.winding()}};
  summary["solid_angle"] = r.omega;
  summary["contour_integrals"] = {{"half_cap", integrals.half_cap}, {"c1", integrals.c1}, {"c2", integrals.c2}};
  summary["result"] = result;
  summary["hannay"] = hannay;
  summary["diagnostics"] = {{"fd_step", r.diagnostics.fd_step},
                            {"richardson", r.diagnostics.richardson},
                            {"samples", r.diagnostics.samples},
                            {"max_abs_connection", r.diagnostics.max_abs_connection},
                            {"min_abs_overlap", r.diagnostics.min_abs_overlap}};
  summary["settings"] = settings_json(s, path);
  out.summary = summary;

  if (write_outputs) {
    if (!s.outputs.summary_json.empty()) write_file(resolve(s, s.outputs.summary_json), summary.dump(2) + "\n");
    if (!s.outputs.samples_csv.empty()) {
      if (!r.gamma_connection) {
        throw Error(ErrorCode::schema, "samples_csv needs the connection method");
      }
      std::ostringstream csv;
      write_samples_csv(csv, r.samples);
      write_file(resolve(s, s.outputs.samples_csv), csv.str());
    }
  }
  return out;
}

Scenario with_parameter(const Scenario& s, const std::string& param, double value) {
  Scenario out = s;
  if (param == "theta0") {
    if (s.path.type != PathType::latitude) throw Error(ErrorCode::schema, "theta0 sweeps need a latitude path");
    out.path.theta0 = value;
    return out;
  }
  if (param == "p") {
    if (s.state.kind != ReferenceKind::fock_m1 && s.state.kind != ReferenceKind::two_mode) {
      throw Error(ErrorCode::schema, "p sweeps need a fock_m1 or two_mode state");
    }
    out.state.p = value;
    if (s.state.kind == ReferenceKind::two_mode) {
      // Keep the reference at its highest weight with the fewest photons.
      out.state.n = static_cast<int>(std::lround(2 * value));
      out.state.t = value;
    }
    try {
      out.state.validate(out.state.natural_modes());
    } catch (const Error& e) {
      throw Error(ErrorCode::schema, std::string("sweep value: ") + e.what());
    }
    return out;
  }
  if (param.rfind("alpha.", 0) == 0) {
    if (s.state.kind != ReferenceKind::glauber) throw Error(ErrorCode::schema, "alpha sweeps need a glauber state");
    std::istringstream parts(param.substr(6));
    std::string index, helicity, component;
    std::getline(parts, index, '.');
    std::getline(parts, helicity, '.');
    std::getline(parts, component, '.');
    int j = 0;
    try {
      j = std::stoi(index);
    } catch (...) {
      throw Error(ErrorCode::schema, "alpha parameter needs a mode index: alpha.<j>.<plus|minus>.<abs|arg>");
    }
    if (j < 1 || j > static_cast<int>(s.state.alphas.size())) throw Error(ErrorCode::schema, "alpha mode index out of range");
    if ((helicity != "plus" && helicity != "minus") || (component != "abs" && component != "arg")) {
      throw Error(ErrorCode::schema, "alpha parameter must be alpha.<j>.<plus|minus>.<abs|arg>");
    }
    cplx& a = helicity == "plus" ? out.state.alphas[j - 1].plus : out.state.alphas[j - 1].minus;
    a = component == "abs" ? std::polar(value, std::arg(a)) : std::polar(std::abs(a), value);
    return out;
  }
  throw Error(ErrorCode::schema, "unknown sweep parameter \"" + param + "\" (theta0, p, alpha.<j>.<plus|minus>.<abs|arg>)");
}

std::vector<SweepRow> sweep_scenario(const Scenario& s, const std::string& param, double from, double to, int steps,
                                     int threads) {
  if (steps < 1) throw Error(ErrorCode::schema, "steps must be >= 1");
  std::vector<Scenario> variants;
  std::vector<double> values;
  for (int k = 0; k < steps; ++k) {
    const double v = steps == 1 ? from : from + (to - from) * k / (steps - 1);
    values.push_back(v);
    variants.push_back(with_parameter(s, param, v));
  }
  std::vector<SweepRow> rows(steps);
  // Parallel over sweep values; each run is sequential inside.
  parallel_for(static_cast<std::size_t>(steps), threads, [&](std::size_t k) {
    rows[k].value = values[k];
    rows[k].outcome = run_scenario(variants[k], 1, false);
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::string& param, const std::vector<SweepRow>& rows) {
  out << "step," << csv_field(param) << ",omega,gamma_closed,gamma_connection,gamma_overlap,gamma0,gamma1,gamma2";
  csv_end_row(out);
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const GeometricPhaseResult& r = rows[k].outcome.result;
    out << k << ',' << format_number(rows[k].value) << ',' << format_number(r.omega) << ',' << cell(r.gamma_closed)
        << ',' << cell(r.gamma_connection) << ',' << cell(r.gamma_overlap);
    if (r.components) {
      out << ',' << format_number(r.components->gamma0) << ',' << format_number(r.components->gamma1) << ','
          << format_number(r.components->gamma2);
    } else {
      out << ",,,";
    }
    csv_end_row(out);
  }
}

QFuncOutcome qfunc_scenario(const Scenario& s, int threads, bool write_outputs) {
  const BasisPtr basis = basis_for(s);
  const StateFamily family = rotation_family(s.state, basis);
  const auto label = quasispin_label(s.state);

  QFuncOutcome out;
  if (s.qgrid.uniform) {
    out.grid = SphereGrid::uniform(s.qgrid.n_theta, s.qgrid.n_phi);
  } else if (s.qgrid.n_theta > 0) {
    out.grid = SphereGrid::gauss_legendre(s.qgrid.n_theta, s.qgrid.n_phi);
  } else {
    out.grid = SphereGrid::for_spin(label.value_or(8.0));
  }

  StateVector psi = family.reference();
  if (s.qgrid.rho_rotation) psi = family({s.qgrid.rho_rotation->first, s.qgrid.rho_rotation->second});
  const DensityMatrix rho = DensityMatrix::pure(psi);
  out.q = q_function(rho, family, out.grid, threads);

  std::size_t best = 0;
  double min_q = out.q.empty() ? 0 : out.q.front();
  for (std::size_t i = 0; i < out.q.size(); ++i) {
    if (out.q[i] > out.q[best]) best = i;
    min_q = std::min(min_q, out.q[i]);
  }

  json summary;
  summary["versions"] = versions_json();
  summary["config"] = {{"modes", basis->modes()},
                       {"n_max", basis->n_max()},
                       {"basis_dim", basis->dim()},
                       {"state", state_json(s.state)}};
  summary["grid"] = {{"kind", out.grid.exact ? "gauss_legendre" : "uniform"},
                     {"n_theta", out.grid.n_theta}, {"n_phi", out.grid.n_phi}, {"total_weight", out.grid.total_weight()}};
  summary["q_max"] = out.q.empty() ? json(nullptr) : json(out.q[best]);
  summary["q_max_at"] = out.q.empty() ? json(nullptr)
                                      : json({{"theta", out.grid.nodes[best].theta}, {"phi", out.grid.nodes[best].phi}});
  summary["q_min"] = min_q;
  summary["normalization"] = label ? json(q_normalization(out.q, out.grid, *label)) : json(nullptr);
  out.summary = summary;

  if (write_outputs) {
    if (!s.outputs.summary_json.empty()) write_file(resolve(s, s.outputs.summary_json), summary.dump(2) + "\n");
    if (!s.outputs.qgrid_csv.empty()) {
      std::ostringstream csv;
      write_q_csv(csv, out.grid, out.q);
      write_file(resolve(s, s.outputs.qgrid_csv), csv.str());
    }
  }
  return out;
}

}  // namespace pcs
