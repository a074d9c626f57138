#include "pcs/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace pcs {

void ModeConfig::validate() const {
  if (modes < 1) throw Error(ErrorCode::invalid_argument, "mode count m must be >= 1");
  if (n_max < 0) throw Error(ErrorCode::invalid_argument, "photon cutoff n_max must be >= 0");
  if (!(tol.atol_linalg > 0) || !(tol.atol_phase > 0) || !(tol.fd_step > 0) ||
      tol.segments_per_unit <= 0) {
    throw Error(ErrorCode::invalid_argument, "all tolerances must be positive");
  }
}

std::size_t fock_dimension(int modes, int n_max) {
  // C(n_max + k, k) with k = 2m, built incrementally so every partial
  // product is itself a binomial coefficient.
  const int k = 2 * modes;
  long double value = 1;
  std::size_t exact = 1;
  for (int i = 1; i <= k; ++i) {
    value = value * (n_max + i) / i;
    if (value > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
      return std::numeric_limits<std::size_t>::max();
    }
    exact = exact * static_cast<std::size_t>(n_max + i) / static_cast<std::size_t>(i);
  }
  return exact;
}

namespace {

// Compositions of `total` into `parts` non-negative integers, first slot
// descending, i.e. lexicographically descending order.
void compositions(int total, int parts, std::vector<int>& prefix,
                  std::vector<int>& out) {
  if (parts == 1) {
    prefix.push_back(total);
    out.insert(out.end(), prefix.begin(), prefix.end());
    prefix.pop_back();
    return;
  }
  for (int first = total; first >= 0; --first) {
    prefix.push_back(first);
    compositions(total - first, parts - 1, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::size_t FockBasis::OccHash::operator()(const std::vector<int>& v) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int x : v) {
    h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

FockBasis::FockBasis(const ModeConfig& config, std::size_t max_dimension) : config_(config) {
  config_.validate();
  const std::size_t expected = fock_dimension(config_.modes, config_.n_max);
  if (expected > max_dimension) {
    throw Error(ErrorCode::dimension_overflow,
                "basis dimension " + std::to_string(expected) + " exceeds the configured maximum " +
                    std::to_string(max_dimension));
  }
  const int k = slots();
  occ_.reserve(expected * k);
  totals_.reserve(expected);
  block_offsets_.push_back(0);
  std::vector<int> prefix;
  for (int n = 0; n <= config_.n_max; ++n) {
    std::vector<int> block;
    compositions(n, k, prefix, block);
    const std::size_t count = block.size() / k;
    occ_.insert(occ_.end(), block.begin(), block.end());
    totals_.insert(totals_.end(), count, n);
    block_offsets_.push_back(totals_.size());
  }
  index_.reserve(totals_.size());
  for (std::size_t i = 0; i < totals_.size(); ++i) {
    auto o = occupation(i);
    index_.emplace(std::vector<int>(o.begin(), o.end()), i);
  }

  std::vector<int> shell;
  compositions(config_.n_max + 1, k, prefix, shell);
  shell_totals_count_ = shell.size() / k;
  for (std::size_t i = 0; i < shell_totals_count_; ++i) {
    shell_index_.emplace(std::vector<int>(shell.begin() + i * k, shell.begin() + (i + 1) * k), i);
  }

  groups_.resize(config_.modes);
  std::vector<int> probe(k);
  for (int j = 0; j < config_.modes; ++j) {
    ModeGroups& g = groups_[j];
    g.offsets.push_back(0);
    for (std::size_t i = 0; i < dim(); ++i) {
      auto o = occupation(i);
      if (o[2 * j + 1] != 0) continue;  // canonical member has n-_j = 0
      const int nj = o[2 * j];
      std::copy(o.begin(), o.end(), probe.begin());
      for (int minus = 0; minus <= nj; ++minus) {
        probe[2 * j] = nj - minus;
        probe[2 * j + 1] = minus;
        g.members.push_back(index_.at(probe));
      }
      g.offsets.push_back(g.members.size());
      g.mode_photons.push_back(nj);
    }
  }
}

std::optional<std::size_t> FockBasis::index_of(std::span<const int> occ) const {
  if (static_cast<int>(occ.size()) != slots()) return std::nullopt;
  auto it = index_.find(std::vector<int>(occ.begin(), occ.end()));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FockBasis::shell_index_of(std::span<const int> occ) const {
  if (static_cast<int>(occ.size()) != slots()) return std::nullopt;
  auto it = shell_index_.find(std::vector<int>(occ.begin(), occ.end()));
  if (it == shell_index_.end()) return std::nullopt;
  return it->second;
}

int FockBasis::slot(int mode, Helicity h) const {
  if (mode < 1 || mode > config_.modes) {
    throw Error(ErrorCode::invalid_argument,
                "mode index " + std::to_string(mode) + " outside 1.." + std::to_string(config_.modes));
  }
  return 2 * (mode - 1) + (h == Helicity::plus ? 0 : 1);
}

BasisPtr enumerate_basis(const ModeConfig& config, std::size_t max_dimension) {
  return std::make_shared<const FockBasis>(config, max_dimension);
}

void require_same_basis(const FockBasis& a, const FockBasis& b) {
  if (!(a == b)) throw Error(ErrorCode::basis_mismatch, "operands live on different Fock bases");
}

// ---------------------------------------------------------------- states

StateVector StateVector::zero(BasisPtr basis) {
  StateVector s;
  s.amp = CVector::Zero(static_cast<Eigen::Index>(basis->dim()));
  s.basis = std::move(basis);
  return s;
}

StateVector StateVector::basis_state(BasisPtr basis, std::span<const int> occ) {
  auto idx = basis->index_of(occ);
  if (!idx) throw Error(ErrorCode::cutoff_too_small, "occupation not representable under the cutoff");
  StateVector s = zero(std::move(basis));
  s.amp[static_cast<Eigen::Index>(*idx)] = 1.0;
  return s;
}

StateVector StateVector::vacuum(BasisPtr basis) {
  std::vector<int> occ(basis->slots(), 0);
  return basis_state(std::move(basis), occ);
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (!(n > 0)) throw Error(ErrorCode::unnormalized_state, "cannot normalize a zero vector");
  StateVector s = *this;
  s.amp /= n;
  return s;
}

StateVector operator+(const StateVector& a, const StateVector& b) {
  require_same_basis(*a.basis, *b.basis);
  StateVector s{a.basis, a.amp + b.amp, std::hypot(a.leakage, b.leakage)};
  return s;
}

StateVector operator-(const StateVector& a, const StateVector& b) {
  require_same_basis(*a.basis, *b.basis);
  return StateVector{a.basis, a.amp - b.amp, std::hypot(a.leakage, b.leakage)};
}

StateVector operator*(cplx s, const StateVector& a) {
  return StateVector{a.basis, s * a.amp, std::abs(s) * a.leakage};
}

cplx inner(const StateVector& a, const StateVector& b) {
  require_same_basis(*a.basis, *b.basis);
  return a.amp.dot(b.amp);  // Eigen's dot conjugates the left operand
}

// ------------------------------------------------------------- operators

namespace {

CSparse empty_spill(const FockBasis& b) {
  return CSparse(static_cast<Eigen::Index>(b.shell_dim()), static_cast<Eigen::Index>(b.dim()));
}

std::optional<CSparse> combine_spill(const OperatorMatrix& a, const OperatorMatrix& b, double sign) {
  if (!a.spill || !b.spill) return std::nullopt;
  CSparse out = *a.spill;
  out += sign * (*b.spill);
  return out;
}

}  // namespace

OperatorMatrix OperatorMatrix::zero(BasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->dim());
  OperatorMatrix op{basis, CSparse(n, n), empty_spill(*basis)};
  return op;
}

OperatorMatrix OperatorMatrix::identity(BasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->dim());
  CSparse m(n, n);
  m.setIdentity();
  return OperatorMatrix{basis, m, empty_spill(*basis)};
}

OperatorMatrix OperatorMatrix::adjoint() const {
  CSparse m = mat.adjoint();
  // Truncated lowering out of the shell is not tracked.
  return OperatorMatrix{basis, m, std::nullopt};
}

CMatrix OperatorMatrix::interior(int max_total) const {
  const int top = std::min(max_total, basis->n_max());
  const auto n = static_cast<Eigen::Index>(top < 0 ? 0 : basis->block_end(top));
  return CMatrix(mat).topLeftCorner(n, n);
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(*a.basis, *b.basis);
  CSparse m = a.mat + b.mat;
  return OperatorMatrix{a.basis, m, combine_spill(a, b, 1.0)};
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(*a.basis, *b.basis);
  CSparse m = a.mat - b.mat;
  return OperatorMatrix{a.basis, m, combine_spill(a, b, -1.0)};
}

OperatorMatrix operator*(cplx s, const OperatorMatrix& a) {
  CSparse m = s * a.mat;
  std::optional<CSparse> spill;
  if (a.spill) spill = CSparse(s * (*a.spill));
  return OperatorMatrix{a.basis, m, spill};
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(*a.basis, *b.basis);
  CSparse m = CSparse(a.mat * b.mat).pruned();
  // The product keeps exact spill bookkeeping only when b never leaves the
  // basis; otherwise a could act on amplitude that truncation already lost.
  std::optional<CSparse> spill;
  if (a.spill && b.spill && b.spill->nonZeros() == 0) spill = CSparse((*a.spill) * b.mat).pruned();
  return OperatorMatrix{a.basis, m, spill};
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b - b * a;
}

OperatorMatrix ladder(const BasisPtr& basis, int mode, Helicity h, LadderKind kind) {
  const int slot = basis->slot(mode, h);
  const auto n = static_cast<Eigen::Index>(basis->dim());
  std::vector<Eigen::Triplet<cplx>> entries;
  std::vector<Eigen::Triplet<cplx>> dropped;
  std::vector<int> target(basis->slots());
  for (std::size_t col = 0; col < basis->dim(); ++col) {
    auto occ = basis->occupation(col);
    std::copy(occ.begin(), occ.end(), target.begin());
    const int count = occ[slot];
    if (kind == LadderKind::create) {
      target[slot] = count + 1;
      const double value = std::sqrt(static_cast<double>(count + 1));
      if (auto row = basis->index_of(target)) {
        entries.emplace_back(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col), value);
      } else if (auto srow = basis->shell_index_of(target)) {
        dropped.emplace_back(static_cast<Eigen::Index>(*srow), static_cast<Eigen::Index>(col), value);
      }
    } else {
      if (count == 0) continue;
      target[slot] = count - 1;
      const auto row = basis->index_of(target);
      entries.emplace_back(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col),
                           std::sqrt(static_cast<double>(count)));
    }
  }
  CSparse m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  CSparse spill = empty_spill(*basis);
  spill.setFromTriplets(dropped.begin(), dropped.end());
  return OperatorMatrix{basis, m, spill};
}

OperatorMatrix number_operator(const BasisPtr& basis) {
  const auto n = static_cast<Eigen::Index>(basis->dim());
  std::vector<Eigen::Triplet<cplx>> entries;
  for (std::size_t i = 0; i < basis->dim(); ++i) {
    if (basis->total(i) != 0) {
      entries.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i),
                           static_cast<double>(basis->total(i)));
    }
  }
  CSparse m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return OperatorMatrix{basis, m, empty_spill(*basis)};
}

StateVector apply(const OperatorMatrix& op, const StateVector& s) {
  require_same_basis(*op.basis, *s.basis);
  StateVector out{s.basis, op.mat * s.amp, s.leakage};
  if (op.spill && op.spill->nonZeros() > 0) {
    const CVector lost = (*op.spill) * s.amp;
    out.leakage = std::hypot(s.leakage, lost.norm());
  }
  return out;
}

// -------------------------------------------------------- exponentials

namespace {

void check_generator(const OperatorMatrix& gen) {
  const FockBasis& b = *gen.basis;
  const double atol = b.config().tol.atol_linalg;
  for (Eigen::Index r = 0; r < gen.mat.outerSize(); ++r) {
    for (CSparse::InnerIterator it(gen.mat, r); it; ++it) {
      if (b.total(static_cast<std::size_t>(it.row())) != b.total(static_cast<std::size_t>(it.col()))) {
        if (std::abs(it.value()) > 0) {
          throw Error(ErrorCode::not_block_diagonal,
                      "generator connects blocks of different total photon number");
        }
      }
    }
  }
  CSparse herm = gen.mat + CSparse(gen.mat.adjoint());
  double worst = 0;
  for (Eigen::Index r = 0; r < herm.outerSize(); ++r) {
    for (CSparse::InnerIterator it(herm, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  if (worst > atol) {
    throw Error(ErrorCode::not_antihermitian,
                "generator is not anti-Hermitian (|G + G^+| = " + std::to_string(worst) + ")");
  }
}

CMatrix block_exponential(const OperatorMatrix& gen, int n) {
  const FockBasis& b = *gen.basis;
  const auto lo = static_cast<Eigen::Index>(b.block_begin(n));
  const auto size = static_cast<Eigen::Index>(b.block_end(n)) - lo;
  CMatrix g = CMatrix(gen.mat.middleRows(lo, size)).middleCols(lo, size);
  if (g.cwiseAbs().maxCoeff() == 0.0) return CMatrix::Identity(size, size);
  return g.exp();
}

}  // namespace

StateVector exp_antihermitian_apply(const OperatorMatrix& gen, const StateVector& s) {
  require_same_basis(*gen.basis, *s.basis);
  check_generator(gen);
  const FockBasis& b = *gen.basis;
  StateVector out{s.basis, CVector::Zero(s.amp.size()), s.leakage};
  for (int n = 0; n <= b.n_max(); ++n) {
    const auto lo = static_cast<Eigen::Index>(b.block_begin(n));
    const auto size = static_cast<Eigen::Index>(b.block_end(n)) - lo;
    const auto seg = s.amp.segment(lo, size);
    if (seg.squaredNorm() == 0.0) continue;
    out.amp.segment(lo, size) = block_exponential(gen, n) * seg;
  }
  return out;
}

CMatrix exp_antihermitian_dense(const OperatorMatrix& gen) {
  check_generator(gen);
  const FockBasis& b = *gen.basis;
  const auto dim = static_cast<Eigen::Index>(b.dim());
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int n = 0; n <= b.n_max(); ++n) {
    const auto lo = static_cast<Eigen::Index>(b.block_begin(n));
    const auto size = static_cast<Eigen::Index>(b.block_end(n)) - lo;
    out.block(lo, lo, size, size) = block_exponential(gen, n);
  }
  return out;
}

}  // namespace pcs
