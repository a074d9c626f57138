#include "pcs/phase.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "pcs/parallel.hpp"

namespace pcs {

namespace {

void check_family_point(const SpherePoint& at, const PhaseOptions& opts) {
  if (!std::isfinite(at.theta) || !std::isfinite(at.phi)) {
    throw Error(ErrorCode::invalid_path, "non-finite sphere point");
  }
  // Only the south pole is singular for a rotation family.
  if (at.theta > kPi - opts.pole_guard) {
    std::ostringstream msg;
    msg << "pole contact: theta = " << at.theta << " is within " << opts.pole_guard << " of pi";
    throw Error(ErrorCode::pole_contact, msg.str());
  }
}

StateVector checked_eval(const StateFamily& family, const SpherePoint& at) {
  StateVector psi = family(at);
  const double norm = psi.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "family produced an unnormalized state (norm " << norm << ")";
    throw Error(ErrorCode::unnormalized_state, msg.str());
  }
  return psi;
}

double connection_at_step(const StateFamily& family, const StateVector& psi, const SpherePoint& at,
                          std::array<double, 2> tangent, double h) {
  double a = 0;
  if (tangent[0] != 0.0) {
    const StateVector fwd = family({at.theta + h, at.phi});
    const StateVector bwd = family({at.theta - h, at.phi});
    a -= inner(psi, fwd - bwd).imag() / (2 * h) * tangent[0];
  }
  if (tangent[1] != 0.0) {
    const StateVector fwd = family({at.theta, at.phi + h});
    const StateVector bwd = family({at.theta, at.phi - h});
    a -= inner(psi, fwd - bwd).imag() / (2 * h) * tangent[1];
  }
  return a;
}

double connection_with(const StateFamily& family, const StateVector& psi, const SpherePoint& at,
                       std::array<double, 2> tangent, const PhaseOptions& opts) {
  const double coarse = connection_at_step(family, psi, at, tangent, opts.fd_step);
  if (!opts.richardson) return coarse;
  const double fine = connection_at_step(family, psi, at, tangent, opts.fd_step / 2);
  return (4 * fine - coarse) / 3;
}

int evaluations_per_node(std::array<double, 2> tangent, const PhaseOptions& opts) {
  const int dirs = (tangent[0] != 0.0) + (tangent[1] != 0.0);
  return 1 + 2 * dirs * (opts.richardson ? 2 : 1);
}

double sample_speed(const PathSample& n) {
  const double s = std::sin(n.theta);
  return std::sqrt(n.dtheta * n.dtheta + s * s * n.dphi * n.dphi);
}

void validate_twice_p(double p) {
  const int twice = twice_half_integer(p, "p");
  if (twice < 1) throw Error(ErrorCode::invalid_argument, "p must be >= 1/2");
}

}  // namespace

StateFamily::StateFamily(ReferenceSpec spec, StateVector reference, Evaluator evaluator)
    : spec_(std::move(spec)), reference_(std::move(reference)), evaluator_(std::move(evaluator)) {
  if (!evaluator_) throw Error(ErrorCode::invalid_argument, "state family needs an evaluator");
}

StateFamily rotation_family(const ReferenceSpec& spec, BasisPtr basis) {
  if (!basis) basis = enumerate_basis(spec.natural_config());
  StateVector reference = make_reference(spec, basis);
  auto rotator = std::make_shared<const Rotator>(basis->n_max());
  StateVector ref_copy = reference;
  return StateFamily(spec, std::move(reference), [rotator, ref_copy](const SpherePoint& at) {
    return rotator->apply_collective(ref_copy, at.theta, at.phi);
  });
}

double berry_connection(const StateFamily& family, const SpherePoint& at, std::array<double, 2> tangent,
                        const PhaseOptions& opts) {
  check_family_point(at, opts);
  if (tangent[0] == 0.0 && tangent[1] == 0.0) return 0.0;
  const StateVector psi = checked_eval(family, at);
  return connection_with(family, psi, at, tangent, opts);
}

ConnectionPhase phase_by_connection(const StateFamily& family, const SpherePath& path,
                                    const PhaseOptions& opts) {
  path.require_closed();
  const auto segments = path.sample();

  std::vector<const PathSample*> nodes;
  for (const auto& seg : segments) {
    for (const auto& n : seg) nodes.push_back(&n);
  }
  for (const PathSample* n : nodes) check_family_point({n->theta, n->phi}, opts);

  std::vector<double> values(nodes.size());
  parallel_for(nodes.size(), opts.threads, [&](std::size_t i) {
    const PathSample& n = *nodes[i];
    const SpherePoint at{n.theta, n.phi};
    const std::array<double, 2> tangent{n.dtheta, n.dphi};
    if (tangent[0] == 0.0 && tangent[1] == 0.0) {
      values[i] = 0.0;
      return;
    }
    const StateVector psi = checked_eval(family, at);
    values[i] = connection_with(family, psi, at, tangent, opts);
  });

  ConnectionPhase out;
  std::size_t idx = 0;
  double running = 0;
  for (const auto& seg : segments) {
    const double h = 1.0 / static_cast<double>(seg.size() - 1);
    double seg_gamma = 0;
    for (std::size_t k = 0; k < seg.size(); ++k, ++idx) {
      const double a_u = values[idx];
      if (k > 0) {
        const double step = -0.5 * h * (values[idx - 1] + a_u);
        seg_gamma += step;
        running += step;
      }
      const double speed = sample_speed(seg[k]);
      const double a_s = speed > 0 ? a_u / speed : 0.0;
      out.max_abs_connection = std::max(out.max_abs_connection, std::abs(a_s));
      out.samples.push_back({seg[k].arc, seg[k].theta, seg[k].phi, a_s, running});
      if (seg[k].dtheta != 0.0 || seg[k].dphi != 0.0) {
        out.evaluations += evaluations_per_node({seg[k].dtheta, seg[k].dphi}, opts);
      }
    }
    out.per_segment.push_back(seg_gamma);
    out.gamma += seg_gamma;
  }
  return out;
}

OverlapPhase phase_by_overlaps(const StateFamily& family, const SpherePath& path, const PhaseOptions& opts) {
  path.require_closed();
  const auto segments = path.sample();

  // Segment end nodes repeat the next segment's start, so drop them.
  std::vector<SpherePoint> points;
  std::vector<int> owner;
  for (const auto& seg : segments) {
    for (std::size_t k = 0; k + 1 < seg.size(); ++k) {
      points.push_back({seg[k].theta, seg[k].phi});
      owner.push_back(seg[k].segment);
    }
  }
  for (const auto& p : points) check_family_point(p, opts);

  std::vector<StateVector> states(points.size());
  parallel_for(points.size(), opts.threads,
               [&](std::size_t i) { states[i] = checked_eval(family, points[i]); });

  OverlapPhase out;
  out.per_segment.assign(segments.size(), 0.0);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const cplx ov = inner(states[k], states[(k + 1) % states.size()]);
    const double mag = std::abs(ov);
    out.min_abs_overlap = std::min(out.min_abs_overlap, mag);
    if (mag < opts.min_overlap) {
      std::ostringstream msg;
      msg << "under-sampled loop: successive overlap " << mag << " below " << opts.min_overlap
          << " near theta = " << points[k].theta << ", phi = " << points[k].phi;
      throw Error(ErrorCode::under_sampled, msg.str());
    }
    const double step = std::arg(ov);
    out.per_segment[owner[k]] += step;
  }
  for (double g : out.per_segment) out.gamma += g;
  return out;
}

cplx overlap_pcs_closed(double theta, double phi, double u, double v, double p, Helicity h) {
  const int twice = twice_half_integer(p, "p");
  if (twice < 0) throw Error(ErrorCode::invalid_argument, "p must be >= 0");
  const cplx phase = std::polar(1.0, -helicity_sign(h) * phi * (v - 1));
  const cplx base = std::cos(theta / 2) * std::cos(u * theta / 2) +
                    std::sin(theta / 2) * std::sin(u * theta / 2) * phase;
  cplx out = 1.0;
  for (int k = 0; k < twice; ++k) out *= base;
  return out;
}

cplx overlap_glauber_closed(const std::vector<ModeAmplitudes>& alphas, double theta, double phi, double u,
                            double v) {
  const auto a = transform_glauber_params(alphas, theta, phi);
  const auto b = transform_glauber_params(alphas, u * theta, v * phi);
  double gauss = 0;
  cplx cross = 0;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    gauss += std::norm(a[j].plus) + std::norm(a[j].minus) + std::norm(b[j].plus) + std::norm(b[j].minus);
    cross += a[j].plus * std::conj(b[j].plus) + a[j].minus * std::conj(b[j].minus);
  }
  return std::exp(-0.5 * gauss + cross);
}

double phase_closed_pcs(const SpherePath& path, double p, Helicity h) {
  if (twice_half_integer(p, "p") < 0) throw Error(ErrorCode::invalid_argument, "p must be >= 0");
  return helicity_sign(h) * 2 * p * contour_integrals(path).half_cap;
}

PhaseComponents phase_closed_stokes(const SpherePath& path, const QuasispinExpectation& stokes) {
  PhaseComponents out;
  out.stokes = stokes;
  out.integrals = contour_integrals(path);
  out.gamma0 = 2 * stokes.p0 * out.integrals.half_cap;
  out.gamma1 = stokes.p1 * out.integrals.c1;
  out.gamma2 = stokes.p2 * out.integrals.c2;
  out.total = out.gamma0 + out.gamma1 + out.gamma2;
  return out;
}

QuasispinExpectation glauber_stokes(const std::vector<ModeAmplitudes>& alphas) {
  double twice_p0 = 0;
  cplx z = 0;
  for (const auto& a : alphas) {
    twice_p0 += std::norm(a.plus) - std::norm(a.minus);
    z += a.minus * std::conj(a.plus);
  }
  QuasispinExpectation e;
  e.p0 = twice_p0 / 2;
  e.p1 = z.real();
  e.p2 = z.imag();
  e.radius = std::sqrt(e.p0 * e.p0 + e.p1 * e.p1 + e.p2 * e.p2);
  return e;
}

PhaseComponents phase_closed_glauber(const SpherePath& path, const std::vector<ModeAmplitudes>& alphas) {
  return phase_closed_stokes(path, glauber_stokes(alphas));
}

double glauber_gauge_potential(const std::vector<ModeAmplitudes>& alphas, const SpherePoint& at,
                               std::array<double, 2> tangent) {
  double helicity = 0;
  cplx z = 0;
  for (const auto& a : alphas) {
    helicity += std::norm(a.plus) - std::norm(a.minus);
    z += a.minus * std::conj(a.plus);
  }
  const double sh = std::sin(at.theta / 2);
  const double a1 = -tangent[1] * sh * sh * helicity;
  const cplx w = cplx(std::sin(at.theta) * tangent[1], tangent[0]) * std::polar(1.0, -at.phi);
  const double a2 = -(w * z).real();
  return a1 + a2;
}

double hannay_numeric(const SpherePath& path, double p, int delta_n) {
  validate_twice_p(p);
  if (delta_n < 1) throw Error(ErrorCode::invalid_argument, "delta_n must be >= 1");
  const double n = 2 * p;
  const double lo = phase_closed_pcs(path, p, Helicity::plus);
  const double hi = phase_closed_pcs(path, (n + delta_n) / 2, Helicity::plus);
  return -(hi - lo) / delta_n;
}

double hannay_closed(const SpherePath& path, double theta0, double phi0) {
  const ContourIntegrals c = contour_integrals(path);
  return 2 * std::cos(theta0) * c.half_cap - std::sin(theta0) * std::cos(phi0) * c.c1 +
         std::sin(theta0) * std::sin(phi0) * c.c2;
}

HannayReport hannay_report(const SpherePath& path, double p, double theta0, double phi0) {
  HannayReport r;
  r.numeric = hannay_numeric(path, p);
  r.closed = hannay_closed(path, theta0, phi0);
  r.discrepancy = r.closed - r.numeric;
  std::ostringstream note;
  note.precision(17);
  note << "hannay_closed - hannay_numeric = " << r.discrepancy
       << "; the photon-number derivative gives -Omega/2 while the closed expression at theta0 = 0 gives "
          "+Omega, so the two definitions differ in sign and factor; both are reported unchanged";
  r.note = note.str();
  return r;
}

double wrap_phase(double gamma) {
  double w = std::remainder(gamma, 2 * kPi);
  if (w <= -kPi) w += 2 * kPi;
  return w;
}

PhaseComponents closed_form_for(const StateFamily& family, const SpherePath& path) {
  const ReferenceSpec& spec = family.spec();
  switch (spec.kind) {
    case ReferenceKind::fock_m1:
    case ReferenceKind::two_mode: {
      PhaseComponents c = phase_closed_stokes(path, stokes_vector(family.reference(), NormPolicy::normalize));
      c.total = phase_closed_pcs(path, spec.p, spec.helicity);
      return c;
    }
    case ReferenceKind::independent:
      return phase_closed_stokes(path, stokes_vector(family.reference(), NormPolicy::normalize));
    case ReferenceKind::glauber:
      return phase_closed_glauber(path, spec.alphas);
  }
  return {};
}

GeometricPhaseResult compute_geometric_phase(const StateFamily& family, const SpherePath& path,
                                             const std::vector<PhaseMethod>& methods,
                                             const PhaseOptions& opts) {
  if (methods.empty()) throw Error(ErrorCode::invalid_argument, "no phase method requested");
  path.require_closed();
  auto wants = [&](PhaseMethod m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

  GeometricPhaseResult r;
  r.omega = solid_angle(path);
  r.diagnostics.fd_step = opts.fd_step;
  r.diagnostics.richardson = opts.richardson;
  r.diagnostics.samples = path.total_samples();
  r.diagnostics.basis_dim = static_cast<int>(family.basis()->dim());
  r.diagnostics.n_max = family.basis()->n_max();
  r.diagnostics.leakage = family.reference().leakage;

  if (wants(PhaseMethod::closed_form)) {
    PhaseComponents c = closed_form_for(family, path);
    r.gamma_closed = c.total;
    r.components = c;
  }
  if (wants(PhaseMethod::overlaps)) {
    OverlapPhase o = phase_by_overlaps(family, path, opts);
    r.gamma_overlap = o.gamma;
    r.diagnostics.min_abs_overlap = o.min_abs_overlap;
    r.per_segment = o.per_segment;
  }
  if (wants(PhaseMethod::connection)) {
    ConnectionPhase c = phase_by_connection(family, path, opts);
    r.gamma_connection = c.gamma;
    r.diagnostics.max_abs_connection = c.max_abs_connection;
    r.per_segment = c.per_segment;
    r.samples = std::move(c.samples);
  }
  if (r.per_segment.empty() && r.components) {
    for (const auto& seg : r.components->integrals.per_segment) {
      const auto& s = r.components->stokes;
      r.per_segment.push_back(2 * s.p0 * seg[0] + s.p1 * seg[1] + s.p2 * seg[2]);
    }
  }
  return r;
}

}  // namespace pcs
