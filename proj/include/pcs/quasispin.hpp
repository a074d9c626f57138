#pragma once

#include <array>

#include "pcs/fock.hpp"

namespace pcs {

/// Collective polarization quasispin on a Fock basis:
///   P+ = sum_j a+^dag(j) a-(j),  P- = P+^dag,
///   P0 = 1/2 sum_j [n+(j) - n-(j)],  N = sum_j [n+(j) + n-(j)],
///   P1 = (P+ + P-)/2,  P2 = (P+ - P-)/(2i),
///   P^2 = (P+ P- + P- P+)/2 + P0^2.
struct QuasispinSet {
  OperatorMatrix plus;
  OperatorMatrix minus;
  OperatorMatrix p0;
  OperatorMatrix p1;
  OperatorMatrix p2;
  OperatorMatrix casimir;
  OperatorMatrix number;
};

QuasispinSet build_quasispin(const BasisPtr& basis);

/// Single-mode quasispin components P+(j), P-(j), P0(j).
struct ModeQuasispin {
  OperatorMatrix plus;
  OperatorMatrix minus;
  OperatorMatrix p0;
};
ModeQuasispin build_mode_quasispin(const BasisPtr& basis, int mode);

/// SU(2)-invariant biphoton cluster creation operator
/// X+_ij = a+^dag(i) a-^dag(j) - a-^dag(i) a+^dag(j), 1 <= i < j <= m.
OperatorMatrix cluster_op(const BasisPtr& basis, int i, int j);

/// Quantum Stokes vector (<P0>, <P1>, <P2>) and its length.
struct QuasispinExpectation {
  double p0 = 0;
  double p1 = 0;
  double p2 = 0;
  double radius = 0;

  std::array<double, 3> triple() const { return {p0, p1, p2}; }
};

enum class NormPolicy { reject, normalize };

QuasispinExpectation stokes_vector(const StateVector& s, NormPolicy policy = NormPolicy::reject);
QuasispinExpectation stokes_vector(const QuasispinSet& q, const StateVector& s,
                                   NormPolicy policy = NormPolicy::reject);

using Rotation3 = std::array<std::array<double, 3>, 3>;

/// Rotation R acting on (P0, P1, P2) expectation triples so that
/// stokes(D(theta, phi) psi) = R * stokes(psi) for the displacement
/// D = exp(xi P+ - xi* P-), xi = -(theta/2) exp(-i phi). Obtained by
/// conjugating the quasispin inside the single-photon block.
Rotation3 wigner_d1(double theta, double phi);

std::array<double, 3> rotate(const Rotation3& r, const std::array<double, 3>& v);

}  // namespace pcs
