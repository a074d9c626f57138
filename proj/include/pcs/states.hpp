#pragma once

// Polarization coherent states: reference vectors and the SU(2) rotation
// family built on them, with two independent constructions of every rotated
// state (displacement operator vs. rotated creation operators).

#include <optional>
#include <utility>
#include <vector>

#include "pcs/fock.hpp"

namespace pcs {

enum class ReferenceKind {
  fock_m1,      // (a+-^dag(1))^{2p} |0> / sqrt((2p)!)
  two_mode,     // |p, +-p; n, t> built from a+-^dag(1), a+-^dag(2) and X+_12
  independent,  // prod_j (a+-^dag(j))^{n_j} |0> / sqrt(n_j!)
  glauber,      // multimode Glauber coherent state
};

struct ModeAmplitudes {
  cplx plus;
  cplx minus;
};

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::fock_m1;
  Helicity helicity = Helicity::plus;
  double p = 0.5;                     // half-integer quasispin
  int n = 1;                          // total photons (two_mode)
  double t = 0.0;                     // half the photon-number difference of modes 1 and 2
  std::vector<int> n_list;            // independent
  std::vector<ModeAmplitudes> alphas; // glauber

  void validate(int modes) const;
  /// Photons needed in the basis (Fock kinds); the tail-bounded cutoff for
  /// the Glauber kind.
  int required_photons() const;
  /// Smallest mode count the reference lives in.
  int natural_modes() const;
  /// Basis configuration just large enough for the reference.
  ModeConfig natural_config() const;
};

struct RotationSpec {
  double theta = 0;
  double phi = 0;
  std::optional<std::vector<std::pair<double, double>>> per_mode;
};

/// exp(xi P+ - xi* P-) blocks for the two-mode (single spatiotemporal mode)
/// space of N photons, N = 0..n_max, from a cached spectral decomposition of
/// P+ - P-. Applies the rotation mode by mode, since the collective
/// generator is a sum of commuting single-mode generators.
class Rotator {
 public:
  explicit Rotator(int n_max);

  int n_max() const { return static_cast<int>(eigvecs_.size()) - 1; }

  /// (N+1)x(N+1) rotation block in the basis n+ = N, N-1, ..., 0.
  CMatrix block(int photons, double theta, double phi) const;

  StateVector apply_mode(const StateVector& s, int mode, double theta, double phi) const;
  StateVector apply_collective(const StateVector& s, double theta, double phi) const;

 private:
  std::vector<CMatrix> blocks(int n_max, double theta, double phi) const;
  static StateVector apply_blocks(const StateVector& s, int mode, const std::vector<CMatrix>& blocks);

  std::vector<CMatrix> eigvecs_;
  std::vector<Eigen::VectorXd> eigvals_;
};

int twice_half_integer(double value, const char* what);

StateVector make_reference(const ReferenceSpec& spec, const BasisPtr& basis);

/// Smallest cutoff whose Poisson tail above it, for total mean photon
/// number sum_j (|a+_j|^2 + |a-_j|^2), is below `tail`.
int glauber_cutoff(const std::vector<ModeAmplitudes>& alphas, double tail = 1e-12);

/// xi P+ - xi* P- with xi = -(theta/2) exp(-i phi).
OperatorMatrix rotation_generator(const BasisPtr& basis, double theta, double phi);

StateVector rotate_state(const StateVector& s, const RotationSpec& rot);

/// a+^dag(j; theta, phi) = a+^dag cos(theta/2) + a-^dag e^{+i phi} sin(theta/2)
/// a-^dag(j; theta, phi) = a-^dag cos(theta/2) - a+^dag e^{-i phi} sin(theta/2)
OperatorMatrix rotated_creation(const BasisPtr& basis, int mode, Helicity h, double theta, double phi);

/// Rotated reference by the displacement operator.
StateVector make_pcs(const ReferenceSpec& spec, const RotationSpec& rot, const BasisPtr& basis);

/// The same state assembled from rotated creation operators acting on the
/// vacuum (Fock kinds) or from transformed amplitudes (Glauber kind).
StateVector make_pcs_rotated_operators(const ReferenceSpec& spec, const RotationSpec& rot,
                                       const BasisPtr& basis);

std::vector<ModeAmplitudes> transform_glauber_params(const std::vector<ModeAmplitudes>& alphas,
                                                     double theta, double phi);

}  // namespace pcs
