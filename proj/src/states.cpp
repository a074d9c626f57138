#include "pcs/states.hpp"

#include <cmath>
#include <string>

#include "pcs/log.hpp"
#include "pcs/quasispin.hpp"

namespace pcs {

namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

cplx int_pow(cplx z, int k) {
  cplx out = 1.0;
  for (int i = 0; i < k; ++i) out *= z;
  return out;
}

double poisson_tail_above(int n, double mu) {
  if (mu <= 0) return 0.0;
  double tail = 0;
  double log_term = -mu + (n + 1) * std::log(mu) - log_factorial(n + 1);
  for (int k = n + 1;; ++k) {
    const double term = std::exp(log_term);
    tail += term;
    if (k > mu && term < 1e-18 * tail) break;
    if (k > n + 10000) break;
    log_term += std::log(mu) - std::log(static_cast<double>(k + 1));
  }
  return tail;
}

double total_intensity(const std::vector<ModeAmplitudes>& alphas) {
  double mu = 0;
  for (const auto& a : alphas) mu += std::norm(a.plus) + std::norm(a.minus);
  return mu;
}

StateVector apply_power(const OperatorMatrix& op, StateVector s, int power) {
  for (int i = 0; i < power; ++i) s = apply(op, s);
  return s;
}

// Prefactor of the two-mode reference, squared inverse:
// (n/2+p+1)! (n/2-p)! (p+t)! (p-t)! / (2p+1)!
double two_mode_log_norm_sq(int n, int twice_p, int twice_t) {
  const int half_n_plus_p = (n + twice_p) / 2;
  const int half_n_minus_p = (n - twice_p) / 2;
  const int p_plus_t = (twice_p + twice_t) / 2;
  const int p_minus_t = (twice_p - twice_t) / 2;
  return log_factorial(half_n_plus_p + 1) + log_factorial(half_n_minus_p) + log_factorial(p_plus_t) +
         log_factorial(p_minus_t) - log_factorial(twice_p + 1);
}

}  // namespace

int twice_half_integer(double value, const char* what) {
  const double twice = 2.0 * value;
  const double rounded = std::round(twice);
  if (std::abs(twice - rounded) > 1e-9) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must be a half-integer");
  }
  return static_cast<int>(rounded);
}

void ReferenceSpec::validate(int modes) const {
  switch (kind) {
    case ReferenceKind::fock_m1: {
      if (twice_half_integer(p, "p") < 0) throw Error(ErrorCode::invalid_argument, "p must be >= 0");
      break;
    }
    case ReferenceKind::two_mode: {
      const int tp = twice_half_integer(p, "p");
      const int tt = twice_half_integer(t, "t");
      if (modes < 2) throw Error(ErrorCode::invalid_argument, "two-mode reference needs m >= 2");
      if (tp < 0) throw Error(ErrorCode::invalid_argument, "p must be >= 0");
      if (n < tp || (n - tp) % 2 != 0) {
        throw Error(ErrorCode::invalid_argument, "n/2 - p must be a non-negative integer");
      }
      if (std::abs(tt) > tp || (tp + tt) % 2 != 0) {
        throw Error(ErrorCode::invalid_argument, "t must satisfy |t| <= p with p + t integer");
      }
      break;
    }
    case ReferenceKind::independent: {
      if (static_cast<int>(n_list.size()) != modes) {
        throw Error(ErrorCode::invalid_argument, "n_list must have one entry per mode");
      }
      for (int k : n_list) {
        if (k < 0) throw Error(ErrorCode::invalid_argument, "n_list entries must be >= 0");
      }
      break;
    }
    case ReferenceKind::glauber: {
      if (static_cast<int>(alphas.size()) != modes) {
        throw Error(ErrorCode::invalid_argument, "alphas must have one pair per mode");
      }
      for (const auto& a : alphas) {
        if (!std::isfinite(a.plus.real()) || !std::isfinite(a.plus.imag()) ||
            !std::isfinite(a.minus.real()) || !std::isfinite(a.minus.imag())) {
          throw Error(ErrorCode::invalid_argument, "alphas must be finite");
        }
      }
      break;
    }
  }
}

int ReferenceSpec::required_photons() const {
  switch (kind) {
    case ReferenceKind::fock_m1: return twice_half_integer(p, "p");
    case ReferenceKind::two_mode: return n;
    case ReferenceKind::independent: {
      int total = 0;
      for (int k : n_list) total += k;
      return total;
    }
    case ReferenceKind::glauber: return glauber_cutoff(alphas);
  }
  return 0;
}

int ReferenceSpec::natural_modes() const {
  switch (kind) {
    case ReferenceKind::fock_m1: return 1;
    case ReferenceKind::two_mode: return 2;
    case ReferenceKind::independent: return static_cast<int>(n_list.size());
    case ReferenceKind::glauber: return static_cast<int>(alphas.size());
  }
  return 1;
}

ModeConfig ReferenceSpec::natural_config() const {
  ModeConfig config;
  config.modes = natural_modes();
  validate(config.modes);
  config.n_max = required_photons();
  return config;
}

int glauber_cutoff(const std::vector<ModeAmplitudes>& alphas, double tail) {
  const double mu = total_intensity(alphas);
  int n = 0;
  while (poisson_tail_above(n, mu) >= tail) ++n;
  return n;
}

// --------------------------------------------------------------- Rotator

Rotator::Rotator(int n_max) {
  eigvecs_.reserve(n_max + 1);
  eigvals_.reserve(n_max + 1);
  for (int photons = 0; photons <= n_max; ++photons) {
    const int size = photons + 1;
    // i (P+ - P-) in the basis indexed by k = n- (n+ = N - k).
    CMatrix h = CMatrix::Zero(size, size);
    for (int k = 1; k <= photons; ++k) {
      const double amp = std::sqrt(static_cast<double>((photons - k + 1) * k));
      h(k - 1, k) = cplx(0, amp);   // P+ : k -> k-1
      h(k, k - 1) = cplx(0, -amp);  // -P-: k-1 -> k
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    eigvecs_.push_back(solver.eigenvectors());
    eigvals_.push_back(solver.eigenvalues());
  }
}

CMatrix Rotator::block(int photons, double theta, double phi) const {
  if (photons < 0 || photons > n_max()) {
    throw Error(ErrorCode::invalid_argument, "rotator has no block for " + std::to_string(photons) + " photons");
  }
  // exp(xi P+ - xi* P-) = V exp(-(theta/2)(P+ - P-)) V^dag,  V = exp(-i phi P0)
  const CMatrix& u = eigvecs_[photons];
  const Eigen::VectorXd& lambda = eigvals_[photons];
  const int size = photons + 1;
  Eigen::VectorXcd spectral(size);
  for (int i = 0; i < size; ++i) spectral[i] = std::polar(1.0, 0.5 * theta * lambda[i]);
  CMatrix w = u * spectral.asDiagonal() * u.adjoint();
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      // V_rr V_cc^* = exp(-i phi (P0(r) - P0(c))), P0(k) = (N - 2k)/2
      w(r, c) *= std::polar(1.0, -phi * static_cast<double>(c - r));
    }
  }
  return w;
}

std::vector<CMatrix> Rotator::blocks(int n_max, double theta, double phi) const {
  if (n_max > this->n_max()) throw Error(ErrorCode::invalid_argument, "rotator built for a smaller cutoff");
  std::vector<CMatrix> out;
  out.reserve(n_max + 1);
  for (int photons = 0; photons <= n_max; ++photons) out.push_back(block(photons, theta, phi));
  return out;
}

StateVector Rotator::apply_blocks(const StateVector& s, int mode, const std::vector<CMatrix>& blocks) {
  const auto& groups = s.basis->mode_groups(mode);
  StateVector out{s.basis, CVector::Zero(s.amp.size()), s.leakage};
  Eigen::VectorXcd x, y;
  for (std::size_t g = 0; g + 1 < groups.offsets.size(); ++g) {
    const std::size_t lo = groups.offsets[g];
    const int size = groups.mode_photons[g] + 1;
    x.resize(size);
    bool any = false;
    for (int k = 0; k < size; ++k) {
      x[k] = s.amp[static_cast<Eigen::Index>(groups.members[lo + k])];
      any = any || x[k] != cplx(0.0);
    }
    if (!any) continue;
    y.noalias() = blocks[groups.mode_photons[g]] * x;
    for (int k = 0; k < size; ++k) out.amp[static_cast<Eigen::Index>(groups.members[lo + k])] = y[k];
  }
  return out;
}

StateVector Rotator::apply_mode(const StateVector& s, int mode, double theta, double phi) const {
  if (mode < 1 || mode > s.basis->modes()) throw Error(ErrorCode::invalid_argument, "mode index out of range");
  return apply_blocks(s, mode, blocks(s.basis->n_max(), theta, phi));
}

StateVector Rotator::apply_collective(const StateVector& s, double theta, double phi) const {
  const auto bl = blocks(s.basis->n_max(), theta, phi);
  StateVector out = s;
  for (int j = 1; j <= s.basis->modes(); ++j) out = apply_blocks(out, j, bl);
  return out;
}

// ------------------------------------------------------------ references

StateVector make_reference(const ReferenceSpec& spec, const BasisPtr& basis) {
  spec.validate(basis->modes());
  const int n_max = basis->n_max();
  auto need = [&](int photons) {
    if (photons > n_max) {
      throw Error(ErrorCode::cutoff_too_small, "reference needs " + std::to_string(photons) +
                                                   " photons but the cutoff is " + std::to_string(n_max));
    }
  };
  const Helicity h = spec.helicity;
  switch (spec.kind) {
    case ReferenceKind::fock_m1: {
      const int photons = twice_half_integer(spec.p, "p");
      need(photons);
      std::vector<int> occ(basis->slots(), 0);
      occ[basis->slot(1, h)] = photons;
      return StateVector::basis_state(basis, occ);
    }
    case ReferenceKind::independent: {
      need(spec.required_photons());
      std::vector<int> occ(basis->slots(), 0);
      for (int j = 1; j <= basis->modes(); ++j) occ[basis->slot(j, h)] = spec.n_list[j - 1];
      return StateVector::basis_state(basis, occ);
    }
    case ReferenceKind::two_mode: {
      need(spec.n);
      const int tp = twice_half_integer(spec.p, "p");
      const int tt = twice_half_integer(spec.t, "t");
      StateVector s = StateVector::vacuum(basis);
      s = apply_power(cluster_op(basis, 1, 2), s, (spec.n - tp) / 2);
      s = apply_power(ladder(basis, 2, h, LadderKind::create), s, (tp - tt) / 2);
      s = apply_power(ladder(basis, 1, h, LadderKind::create), s, (tp + tt) / 2);
      s.amp *= std::exp(-0.5 * two_mode_log_norm_sq(spec.n, tp, tt));
      const double norm = s.norm();
      if (std::abs(norm - 1.0) > 1e-9) {
        log_note("two-mode reference prefactor leaves norm " + std::to_string(norm) + "; renormalized");
      }
      return s.normalized();
    }
    case ReferenceKind::glauber: {
      const double mu = total_intensity(spec.alphas);
      const double deficiency = poisson_tail_above(n_max, mu);
      if (deficiency >= 1e-12) {
        throw Error(ErrorCode::cutoff_too_small,
                    "Glauber tail above the cutoff is " + std::to_string(deficiency) + " (needs n_max >= " +
                        std::to_string(glauber_cutoff(spec.alphas)) + ")");
      }
      StateVector s = StateVector::zero(basis);
      const double log_vac = -0.5 * mu;
      for (std::size_t i = 0; i < basis->dim(); ++i) {
        auto occ = basis->occupation(i);
        cplx amp = std::exp(log_vac);
        double log_fact = 0;
        for (int j = 0; j < basis->modes(); ++j) {
          amp *= int_pow(spec.alphas[j].plus, occ[2 * j]) * int_pow(spec.alphas[j].minus, occ[2 * j + 1]);
          log_fact += log_factorial(occ[2 * j]) + log_factorial(occ[2 * j + 1]);
        }
        s.amp[static_cast<Eigen::Index>(i)] = amp * std::exp(-0.5 * log_fact);
      }
      StateVector out = s.normalized();
      out.leakage = std::sqrt(deficiency);
      return out;
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown reference kind");
}

// -------------------------------------------------------------- rotations

OperatorMatrix rotation_generator(const BasisPtr& basis, double theta, double phi) {
  const cplx xi = -0.5 * theta * std::polar(1.0, -phi);
  auto plus = OperatorMatrix::zero(basis);
  for (int j = 1; j <= basis->modes(); ++j) {
    plus = plus + ladder(basis, j, Helicity::plus, LadderKind::create) *
                      ladder(basis, j, Helicity::minus, LadderKind::annihilate);
  }
  const auto minus = plus.adjoint();
  auto gen = xi * plus - std::conj(xi) * minus;
  gen.spill = CSparse(static_cast<Eigen::Index>(basis->shell_dim()), static_cast<Eigen::Index>(basis->dim()));
  return gen;
}

StateVector rotate_state(const StateVector& s, const RotationSpec& rot) {
  const Rotator rotator(s.basis->n_max());
  if (rot.per_mode) {
    if (static_cast<int>(rot.per_mode->size()) != s.basis->modes()) {
      throw Error(ErrorCode::invalid_argument, "per-mode rotation needs one angle pair per mode");
    }
    StateVector out = s;
    for (int j = 1; j <= s.basis->modes(); ++j) {
      const auto [theta, phi] = (*rot.per_mode)[j - 1];
      out = rotator.apply_mode(out, j, theta, phi);
    }
    return out;
  }
  return rotator.apply_collective(s, rot.theta, rot.phi);
}

OperatorMatrix rotated_creation(const BasisPtr& basis, int mode, Helicity h, double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const auto ap = ladder(basis, mode, Helicity::plus, LadderKind::create);
  const auto am = ladder(basis, mode, Helicity::minus, LadderKind::create);
  if (h == Helicity::plus) return cplx(c) * ap + std::polar(s, phi) * am;
  return cplx(c) * am - std::polar(s, -phi) * ap;
}

StateVector make_pcs(const ReferenceSpec& spec, const RotationSpec& rot, const BasisPtr& basis) {
  if (spec.kind == ReferenceKind::independent && !rot.per_mode) {
    throw Error(ErrorCode::invalid_argument, "independent-mode states need per-mode rotation angles");
  }
  return rotate_state(make_reference(spec, basis), rot);
}

StateVector make_pcs_rotated_operators(const ReferenceSpec& spec, const RotationSpec& rot,
                                       const BasisPtr& basis) {
  spec.validate(basis->modes());
  const Helicity h = spec.helicity;
  auto angles = [&](int j) -> std::pair<double, double> {
    if (rot.per_mode) return (*rot.per_mode).at(j - 1);
    return {rot.theta, rot.phi};
  };
  switch (spec.kind) {
    case ReferenceKind::fock_m1: {
      const int photons = twice_half_integer(spec.p, "p");
      if (photons > basis->n_max()) throw Error(ErrorCode::cutoff_too_small, "cutoff below 2p");
      const auto [theta, phi] = angles(1);
      StateVector s = apply_power(rotated_creation(basis, 1, h, theta, phi), StateVector::vacuum(basis), photons);
      s.amp *= std::exp(-0.5 * log_factorial(photons));
      return s;
    }
    case ReferenceKind::independent: {
      if (!rot.per_mode) {
        throw Error(ErrorCode::invalid_argument, "independent-mode states need per-mode rotation angles");
      }
      if (spec.required_photons() > basis->n_max()) throw Error(ErrorCode::cutoff_too_small, "cutoff below sum n_j");
      StateVector s = StateVector::vacuum(basis);
      for (int j = 1; j <= basis->modes(); ++j) {
        const auto [theta, phi] = angles(j);
        s = apply_power(rotated_creation(basis, j, h, theta, phi), s, spec.n_list[j - 1]);
        s.amp *= std::exp(-0.5 * log_factorial(spec.n_list[j - 1]));
      }
      return s;
    }
    case ReferenceKind::two_mode: {
      if (spec.n > basis->n_max()) throw Error(ErrorCode::cutoff_too_small, "cutoff below n");
      const int tp = twice_half_integer(spec.p, "p");
      const int tt = twice_half_integer(spec.t, "t");
      const auto [theta1, phi1] = angles(1);
      const auto [theta2, phi2] = angles(2);
      StateVector s = StateVector::vacuum(basis);
      s = apply_power(cluster_op(basis, 1, 2), s, (spec.n - tp) / 2);
      s = apply_power(rotated_creation(basis, 2, h, theta2, phi2), s, (tp - tt) / 2);
      s = apply_power(rotated_creation(basis, 1, h, theta1, phi1), s, (tp + tt) / 2);
      s.amp *= std::exp(-0.5 * two_mode_log_norm_sq(spec.n, tp, tt));
      return s.normalized();
    }
    case ReferenceKind::glauber: {
      if (rot.per_mode) {
        std::vector<ModeAmplitudes> rotated;
        for (int j = 1; j <= basis->modes(); ++j) {
          const auto [theta, phi] = angles(j);
          rotated.push_back(transform_glauber_params({spec.alphas[j - 1]}, theta, phi)[0]);
        }
        ReferenceSpec r = spec;
        r.alphas = rotated;
        return make_reference(r, basis);
      }
      ReferenceSpec r = spec;
      r.alphas = transform_glauber_params(spec.alphas, rot.theta, rot.phi);
      return make_reference(r, basis);
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown reference kind");
}

std::vector<ModeAmplitudes> transform_glauber_params(const std::vector<ModeAmplitudes>& alphas,
                                                     double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  std::vector<ModeAmplitudes> out;
  out.reserve(alphas.size());
  for (const auto& a : alphas) {
    out.push_back({a.plus * c - std::polar(s, -phi) * a.minus, a.minus * c + std::polar(s, phi) * a.plus});
  }
  return out;
}

}  // namespace pcs
