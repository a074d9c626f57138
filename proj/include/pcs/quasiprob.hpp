#pragma once

// Polarization Q-functions over a coherent-state family and the
// resolution of the identity on an irrep.

#include <iosfwd>
#include <vector>

#include "pcs/phase.hpp"
#include "pcs/quadrature.hpp"

namespace pcs {

struct DensityMatrix {
  BasisPtr basis;
  CMatrix rho;

  static DensityMatrix pure(const StateVector& s);
  /// sum_k w_k |s_k><s_k| with w_k >= 0 summing to 1.
  static DensityMatrix mixture(const std::vector<StateVector>& states, const std::vector<double>& weights);

  /// Throws invalid_density unless Hermitian, unit trace and positive
  /// semidefinite within atol.
  void validate(double atol = 1e-12) const;
};

inline constexpr std::size_t kMaxDenseDimension = 4096;

struct GridNode {
  double theta = 0;
  double phi = 0;
  double weight = 0;
};

/// Product rule: Gauss-Legendre in cos(theta) times uniform phi. Exact for
/// polynomials in cos(theta) up to degree 2 n_theta - 1 times Fourier modes
/// |k| < n_phi.
struct SphereGrid {
  bool exact = true;  // false for plotting grids
  int n_theta = 0;
  int n_phi = 0;
  std::vector<GridNode> nodes;

  static SphereGrid gauss_legendre(int n_theta, int n_phi);
  /// Default grid for quasispin p: 2p + 2 nodes in cos(theta), 4p + 4 in phi.
  static SphereGrid for_spin(double p);
  /// Equally spaced theta in [0, pi] (poles included) for plotting;
  /// trapezoid weights, so integrals are only approximate.
  static SphereGrid uniform(int n_theta, int n_phi);

  double total_weight() const;
  /// Throws insufficient_grid unless 2 n_theta - 1 >= 2p + 1 and n_phi >= 4p + 1.
  void require_degree(double p) const;
};

std::vector<double> q_function(const DensityMatrix& rho, const StateFamily& family, const SphereGrid& grid,
                               int threads = 1);

/// (2p + 1)/(4 pi) sum_grid w Q.
double q_normalization(const std::vector<double>& q, const SphereGrid& grid, double p);

/// (2p + 1)/(4 pi) sum_grid w |theta, phi><theta, phi|.
OperatorMatrix identity_resolution(const StateFamily& family, double p, const SphereGrid& grid,
                                   int threads = 1);

struct ReducedQTerm {
  DensityMatrix rho;
  StateFamily family;
  double p = 0;
  double weight = 1;
};

struct ReducedQ {
  std::vector<double> values;  // sum_k weight_k Q_k
  double normalization = 0;    // sum_k weight_k (2p_k + 1)/(4 pi) int Q_k
};

ReducedQ reduced_q(const std::vector<ReducedQTerm>& terms, const SphereGrid& grid, int threads = 1);

/// theta,phi,Q rows.
void write_q_csv(std::ostream& out, const SphereGrid& grid, const std::vector<double>& q);

}  // namespace pcs
