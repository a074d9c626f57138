#pragma once

// Geometric phase of rotated-reference families along closed loops on the
// Poincare sphere: finite-difference connection, discrete overlap product,
// and closed forms.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcs/quasispin.hpp"
#include "pcs/sphere.hpp"
#include "pcs/states.hpp"

namespace pcs {

struct PhaseOptions {
  double fd_step = 1e-5;
  bool richardson = false;  // combine steps h and h/2
  int threads = 1;
  double pole_guard = kPoleGuard;
  double min_overlap = 0.1;  // smallest |<psi_k|psi_k+1>| before declaring under-sampling
};

/// theta -> |theta, phi; psi0> = D(theta, phi) |psi0>. Single-valued at the
/// north pole (D = 1 there for every phi) and multivalued at the south pole.
class StateFamily {
 public:
  using Evaluator = std::function<StateVector(const SpherePoint&)>;

  StateFamily(ReferenceSpec spec, StateVector reference, Evaluator evaluator);

  const ReferenceSpec& spec() const { return spec_; }
  const StateVector& reference() const { return reference_; }
  const BasisPtr& basis() const { return reference_.basis; }
  StateVector operator()(const SpherePoint& at) const { return evaluator_(at); }

 private:
  ReferenceSpec spec_;
  StateVector reference_;
  Evaluator evaluator_;
};

/// Family of collective rotations of `spec`'s reference. A null basis means
/// spec.natural_config().
StateFamily rotation_family(const ReferenceSpec& spec, BasisPtr basis = nullptr);

/// Gauge potential along a tangent (dtheta, dphi), with the sign fixed so
/// that gamma = -oint A ds is +Omega/2 for the single-photon + family:
/// A = -Im<psi|d psi>, derivatives by central differences.
double berry_connection(const StateFamily& family, const SpherePoint& at,
                        std::array<double, 2> tangent, const PhaseOptions& opts = {});

struct SampleRecord {
  double s = 0;  // arc length
  double theta = 0;
  double phi = 0;
  double a_s = 0;  // connection per unit arc length
  double running_gamma = 0;
};

struct ConnectionPhase {
  double gamma = 0;
  std::vector<double> per_segment;
  std::vector<SampleRecord> samples;
  double max_abs_connection = 0;
  int evaluations = 0;
};

ConnectionPhase phase_by_connection(const StateFamily& family, const SpherePath& path,
                                    const PhaseOptions& opts = {});

struct OverlapPhase {
  double gamma = 0;
  std::vector<double> per_segment;
  double min_abs_overlap = 1;
};

/// Discrete Pancharatnam product sum_k arg<psi_k|psi_k+1> over the cyclic
/// list of sampled states.
OverlapPhase phase_by_overlaps(const StateFamily& family, const SpherePath& path,
                               const PhaseOptions& opts = {});

/// [cos(theta/2) cos(u theta/2) + sin(theta/2) sin(u theta/2) e^{-+i phi (v-1)}]^{2p}
cplx overlap_pcs_closed(double theta, double phi, double u, double v, double p, Helicity h);

/// Gaussian overlap of two rotated multimode Glauber states.
cplx overlap_glauber_closed(const std::vector<ModeAmplitudes>& alphas, double theta, double phi,
                            double u, double v);

/// +-2p oint sin^2(theta/2) dphi.
double phase_closed_pcs(const SpherePath& path, double p, Helicity h);

struct PhaseComponents {
  double gamma0 = 0;
  double gamma1 = 0;
  double gamma2 = 0;
  double total = 0;
  QuasispinExpectation stokes;  // reference-state expectations used as weights
  ContourIntegrals integrals;
};

/// gamma = 2<P0> oint sin^2(theta/2) dphi + <P1> c1 + <P2> c2 for a
/// reference with quasispin expectations `stokes`.
PhaseComponents phase_closed_stokes(const SpherePath& path, const QuasispinExpectation& stokes);

/// Stokes expectations of a multimode Glauber state read off its amplitudes:
/// 2<P0> = sum |a+|^2 - |a-|^2, <P1> + i<P2> = sum a-(a+)^*.
QuasispinExpectation glauber_stokes(const std::vector<ModeAmplitudes>& alphas);

PhaseComponents phase_closed_glauber(const SpherePath& path, const std::vector<ModeAmplitudes>& alphas);

/// Pointwise Glauber gauge potential:
///   A = -dphi sin^2(theta/2) sum(|a+|^2 - |a-|^2)
///       - Re[(sin(theta) dphi + i dtheta) e^{-i phi} sum a-(a+)^*]
double glauber_gauge_potential(const std::vector<ModeAmplitudes>& alphas, const SpherePoint& at,
                               std::array<double, 2> tangent);

/// -[gamma(n + dn) - gamma(n)] / dn with gamma(n) = n oint sin^2(theta/2) dphi,
/// n = 2p.
double hannay_numeric(const SpherePath& path, double p, int delta_n = 1);

/// 2 cos(t0) oint sin^2(theta/2) dphi - sin(t0) cos(f0) c1 + sin(t0) sin(f0) c2
double hannay_closed(const SpherePath& path, double theta0, double phi0);

struct HannayReport {
  double numeric = 0;
  double closed = 0;
  double discrepancy = 0;  // closed - numeric
  std::string note;
};

HannayReport hannay_report(const SpherePath& path, double p, double theta0, double phi0);

enum class PhaseMethod { connection, overlaps, closed_form };

struct PhaseDiagnostics {
  double fd_step = 0;
  bool richardson = false;
  int samples = 0;
  double max_abs_connection = 0;
  double min_abs_overlap = 1;
  int basis_dim = 0;
  int n_max = 0;
  double leakage = 0;
};

struct GeometricPhaseResult {
  std::optional<double> gamma_connection;
  std::optional<double> gamma_overlap;
  std::optional<double> gamma_closed;
  std::optional<PhaseComponents> components;
  double omega = 0;
  std::vector<double> per_segment;
  std::vector<SampleRecord> samples;
  PhaseDiagnostics diagnostics;
};

/// Wraps into (-pi, pi].
double wrap_phase(double gamma);

/// Closed-form phase of the family's reference kind (Fock kinds by the
/// 2p multiple of half the solid angle, the rest by the Stokes weights).
PhaseComponents closed_form_for(const StateFamily& family, const SpherePath& path);

GeometricPhaseResult compute_geometric_phase(const StateFamily& family, const SpherePath& path,
                                             const std::vector<PhaseMethod>& methods,
                                             const PhaseOptions& opts = {});

}  // namespace pcs
