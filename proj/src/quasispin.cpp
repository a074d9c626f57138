#include "pcs/quasispin.hpp"

#include <cmath>
#include <string>

namespace pcs {

namespace {

OperatorMatrix create(const BasisPtr& b, int j, Helicity h) {
  return ladder(b, j, h, LadderKind::create);
}
OperatorMatrix annihilate(const BasisPtr& b, int j, Helicity h) {
  return ladder(b, j, h, LadderKind::annihilate);
}

}  // namespace

ModeQuasispin build_mode_quasispin(const BasisPtr& basis, int mode) {
  const auto ap = create(basis, mode, Helicity::plus);
  const auto am = create(basis, mode, Helicity::minus);
  const auto bp = annihilate(basis, mode, Helicity::plus);
  const auto bm = annihilate(basis, mode, Helicity::minus);
  ModeQuasispin q{ap * bm, am * bp, 0.5 * (ap * bp - am * bm)};
  return q;
}

QuasispinSet build_quasispin(const BasisPtr& basis) {
  auto plus = OperatorMatrix::zero(basis);
  auto minus = OperatorMatrix::zero(basis);
  auto p0 = OperatorMatrix::zero(basis);
  for (int j = 1; j <= basis->modes(); ++j) {
    const auto mq = build_mode_quasispin(basis, j);
    plus = plus + mq.plus;
    minus = minus + mq.minus;
    p0 = p0 + mq.p0;
  }
  const cplx half_over_i(0.0, -0.5);  // 1/(2i)
  auto p1 = 0.5 * (plus + minus);
  auto p2 = half_over_i * (plus - minus);
  auto casimir = 0.5 * (plus * minus + minus * plus) + p0 * p0;
  return QuasispinSet{plus, minus, p0, p1, p2, casimir, number_operator(basis)};
}

OperatorMatrix cluster_op(const BasisPtr& basis, int i, int j) {
  if (i >= j || i < 1 || j > basis->modes()) {
    throw Error(ErrorCode::invalid_argument,
                "cluster operator needs 1 <= i < j <= m, got i=" + std::to_string(i) +
                    " j=" + std::to_string(j));
  }
  return create(basis, i, Helicity::plus) * create(basis, j, Helicity::minus) -
         create(basis, i, Helicity::minus) * create(basis, j, Helicity::plus);
}

QuasispinExpectation stokes_vector(const QuasispinSet& q, const StateVector& s, NormPolicy policy) {
  const double atol = s.basis->config().tol.atol_linalg;
  StateVector psi = s;
  const double norm = s.norm();
  if (std::abs(norm - 1.0) > atol) {
    if (policy == NormPolicy::reject) {
      throw Error(ErrorCode::unnormalized_state,
                  "stokes_vector needs a normalized state (norm = " + std::to_string(norm) + ")");
    }
    psi = s.normalized();
  }
  auto expect = [&](const OperatorMatrix& op) {
    const cplx v = inner(psi, apply(op, psi));
    if (std::abs(v.imag()) > 1e3 * atol * std::max(1.0, std::abs(v.real()))) {
      throw Error(ErrorCode::invalid_argument, "non-real quasispin expectation");
    }
    return v.real();
  };
  QuasispinExpectation e;
  e.p0 = expect(q.p0);
  e.p1 = expect(q.p1);
  e.p2 = expect(q.p2);
  e.radius = std::sqrt(e.p0 * e.p0 + e.p1 * e.p1 + e.p2 * e.p2);
  return e;
}

QuasispinExpectation stokes_vector(const StateVector& s, NormPolicy policy) {
  return stokes_vector(build_quasispin(s.basis), s, policy);
}

Rotation3 wigner_d1(double theta, double phi) {
  // Displacement restricted to span{a+^dag|0>, a-^dag|0>}.
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const cplx e(std::cos(phi), std::sin(phi));
  Eigen::Matrix2cd d;
  d << c, -std::conj(e) * s, e * s, c;

  Eigen::Matrix2cd pauli[3];
  pauli[0] << 0.5, 0, 0, -0.5;                        // P0
  pauli[1] << 0, 0.5, 0.5, 0;                         // P1
  pauli[2] << 0, cplx(0, -0.5), cplx(0, 0.5), 0;      // P2
  Rotation3 r{};
  for (int a = 0; a < 3; ++a) {
    const Eigen::Matrix2cd conj = d.adjoint() * pauli[a] * d;
    for (int b = 0; b < 3; ++b) r[a][b] = 2.0 * (conj * pauli[b]).trace().real();
  }
  return r;
}

std::array<double, 3> rotate(const Rotation3& r, const std::array<double, 3>& v) {
  std::array<double, 3> out{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out[a] += r[a][b] * v[b];
  }
  return out;
}

}  // namespace pcs
