#include "pcs/quasiprob.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pcs/csv.hpp"
#include "pcs/parallel.hpp"
#include "pcs/quadrature.hpp"

namespace pcs {

namespace {

void check_dense_dim(const FockBasis& b) {
  if (b.dim() > kMaxDenseDimension) {
    throw Error(ErrorCode::dimension_overflow, "density matrices are dense; basis dimension " +
                                                   std::to_string(b.dim()) + " is too large");
  }
}

std::vector<StateVector> family_states(const StateFamily& family, const SphereGrid& grid, int threads) {
  std::vector<StateVector> states(grid.nodes.size());
  parallel_for(grid.nodes.size(), threads, [&](std::size_t i) {
    states[i] = family({grid.nodes[i].theta, grid.nodes[i].phi});
  });
  return states;
}

}  // namespace

DensityMatrix DensityMatrix::pure(const StateVector& s) {
  check_dense_dim(*s.basis);
  const StateVector n = s.normalized();
  return {s.basis, n.amp * n.amp.adjoint()};
}

DensityMatrix DensityMatrix::mixture(const std::vector<StateVector>& states, const std::vector<double>& weights) {
  if (states.empty() || states.size() != weights.size()) {
    throw Error(ErrorCode::invalid_density, "mixture needs one weight per state");
  }
  check_dense_dim(*states.front().basis);
  DensityMatrix d{states.front().basis, CMatrix::Zero(states.front().amp.size(), states.front().amp.size())};
  for (std::size_t k = 0; k < states.size(); ++k) {
    require_same_basis(*d.basis, *states[k].basis);
    if (!(weights[k] >= 0)) throw Error(ErrorCode::invalid_density, "mixture weights must be >= 0");
    const StateVector n = states[k].normalized();
    d.rho += weights[k] * (n.amp * n.amp.adjoint());
  }
  return d;
}

void DensityMatrix::validate(double atol) const {
  if (!basis || rho.rows() != static_cast<Eigen::Index>(basis->dim()) || rho.cols() != rho.rows()) {
    throw Error(ErrorCode::invalid_density, "density matrix shape does not match its basis");
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > atol) {
    throw Error(ErrorCode::invalid_density, "density matrix is not Hermitian");
  }
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > atol * std::max<double>(1.0, static_cast<double>(rho.rows()))) {
    std::ostringstream msg;
    msg << "density matrix trace " << tr.real() << " differs from 1";
    throw Error(ErrorCode::invalid_density, msg.str());
  }
  const CMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -atol * std::max<double>(1.0, static_cast<double>(rho.rows()))) {
    throw Error(ErrorCode::invalid_density, "density matrix has a negative eigenvalue");
  }
}

SphereGrid SphereGrid::gauss_legendre(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw Error(ErrorCode::insufficient_grid, "grid needs positive node counts");
  std::vector<double> x, w;
  gauss_legendre_rule(n_theta, x, w);
  SphereGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  g.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  const double dphi = 2 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::acos(x[i]);
    for (int j = 0; j < n_phi; ++j) g.nodes.push_back({theta, j * dphi, w[i] * dphi});
  }
  return g;
}

SphereGrid SphereGrid::for_spin(double p) {
  const int twice = twice_half_integer(p, "p");
  if (twice < 0) throw Error(ErrorCode::invalid_argument, "p must be >= 0");
  return gauss_legendre(twice + 2, 2 * twice + 4);
}

SphereGrid SphereGrid::uniform(int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 1) throw Error(ErrorCode::insufficient_grid, "uniform grid needs n_theta >= 2, n_phi >= 1");
  SphereGrid g;
  g.exact = false;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  const double dtheta = kPi / (n_theta - 1), dphi = 2 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double theta = i * dtheta;
    const double w = (i == 0 || i == n_theta - 1 ? 0.5 : 1.0) * dtheta * std::sin(theta) * dphi;
    for (int j = 0; j < n_phi; ++j) g.nodes.push_back({theta, j * dphi, w});
  }
  return g;
}

double SphereGrid::total_weight() const {
  double total = 0;
  for (const auto& n : nodes) total += n.weight;
  return total;
}

void SphereGrid::require_degree(double p) const {
  const int twice = twice_half_integer(p, "p");
  if (!exact) throw Error(ErrorCode::insufficient_grid, "plotting grids are not exact quadrature rules");
  if (2 * n_theta - 1 < twice + 1 || n_phi < 2 * twice + 1) {
    std::ostringstream msg;
    msg << "grid " << n_theta << "x" << n_phi << " is too coarse for p = " << p << " (needs 2*n_theta-1 >= "
        << twice + 1 << " and n_phi >= " << 2 * twice + 1 << ")";
    throw Error(ErrorCode::insufficient_grid, msg.str());
  }
}

std::vector<double> q_function(const DensityMatrix& rho, const StateFamily& family, const SphereGrid& grid,
                               int threads) {
  require_same_basis(*rho.basis, *family.basis());
  rho.validate(family.basis()->config().tol.atol_linalg * 1e2);
  std::vector<double> q(grid.nodes.size());
  parallel_for(grid.nodes.size(), threads, [&](std::size_t i) {
    const StateVector psi = family({grid.nodes[i].theta, grid.nodes[i].phi});
    const cplx v = psi.amp.dot(rho.rho * psi.amp);
    q[i] = v.real();
  });
  return q;
}

double q_normalization(const std::vector<double>& q, const SphereGrid& grid, double p) {
  if (q.size() != grid.nodes.size()) throw Error(ErrorCode::invalid_argument, "field does not match grid");
  double total = 0;
  for (std::size_t i = 0; i < q.size(); ++i) total += grid.nodes[i].weight * q[i];
  return (2 * p + 1) / (4 * kPi) * total;
}

OperatorMatrix identity_resolution(const StateFamily& family, double p, const SphereGrid& grid, int threads) {
  grid.require_degree(p);
  check_dense_dim(*family.basis());
  const auto states = family_states(family, grid, threads);
  const Eigen::Index dim = static_cast<Eigen::Index>(family.basis()->dim());
  CMatrix acc = CMatrix::Zero(dim, dim);
  const double scale = (2 * p + 1) / (4 * kPi);
  for (std::size_t i = 0; i < states.size(); ++i) {
    acc.noalias() += (scale * grid.nodes[i].weight) * (states[i].amp * states[i].amp.adjoint());
  }
  OperatorMatrix out{family.basis(), acc.sparseView(1.0, 1e-15), std::nullopt};
  out.mat.makeCompressed();
  return out;
}

ReducedQ reduced_q(const std::vector<ReducedQTerm>& terms, const SphereGrid& grid, int threads) {
  if (terms.empty()) throw Error(ErrorCode::invalid_argument, "reduced Q-function needs at least one term");
  ReducedQ out;
  out.values.assign(grid.nodes.size(), 0.0);
  for (const auto& t : terms) {
    const auto q = q_function(t.rho, t.family, grid, threads);
    for (std::size_t i = 0; i < q.size(); ++i) out.values[i] += t.weight * q[i];
    out.normalization += t.weight * q_normalization(q, grid, t.p);
  }
  return out;
}

void write_q_csv(std::ostream& out, const SphereGrid& grid, const std::vector<double>& q) {
  if (q.size() != grid.nodes.size()) throw Error(ErrorCode::invalid_argument, "field does not match grid");
  out << "theta,phi,Q";
  csv_end_row(out);
  for (std::size_t i = 0; i < q.size(); ++i) {
    out << format_number(grid.nodes[i].theta) << ',' << format_number(grid.nodes[i].phi) << ','
        << format_number(q[i]);
    csv_end_row(out);
  }
}

}  // namespace pcs
