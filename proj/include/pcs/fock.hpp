#pragma once

// Truncated 2m-mode bosonic Fock space with two helicity modes per
// spatiotemporal mode. Basis states are grouped into blocks of constant
// total photon number N (N = 0..n_max), lexicographically descending within
// a block, so every number-conserving operator is block diagonal.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pcs/error.hpp"

namespace pcs {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using CSparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct Tolerances {
  double atol_linalg = 1e-12;
  double atol_phase = 1e-6;
  double fd_step = 1e-5;     // radians
  int segments_per_unit = 1000;
};

struct ModeConfig {
  int modes = 1;   // m, spatiotemporal modes
  int n_max = 0;   // total photon cutoff
  Tolerances tol{};

  void validate() const;
};

enum class Helicity { plus, minus };

inline double helicity_sign(Helicity h) { return h == Helicity::plus ? 1.0 : -1.0; }

/// C(n_max + 2m, 2m); saturates at SIZE_MAX.
std::size_t fock_dimension(int modes, int n_max);

inline constexpr std::size_t kDefaultMaxDimension = 4'000'000;

class FockBasis {
 public:
  explicit FockBasis(const ModeConfig& config,
                     std::size_t max_dimension = kDefaultMaxDimension);

  const ModeConfig& config() const { return config_; }
  int modes() const { return config_.modes; }
  int slots() const { return 2 * config_.modes; }
  int n_max() const { return config_.n_max; }
  std::size_t dim() const { return totals_.size(); }

  /// Occupations (n+_1, n-_1, ..., n+_m, n-_m) of basis state `index`.
  std::span<const int> occupation(std::size_t index) const {
    return {occ_.data() + index * slots(), static_cast<std::size_t>(slots())};
  }
  int total(std::size_t index) const { return totals_[index]; }
  std::optional<std::size_t> index_of(std::span<const int> occ) const;

  /// Half-open index range of the constant-N block.
  std::size_t block_begin(int n) const { return block_offsets_[n]; }
  std::size_t block_end(int n) const { return block_offsets_[n + 1]; }

  /// Occupation slot of (mode j in 1..m, helicity).
  int slot(int mode, Helicity h) const;

  /// States with total photon number n_max + 1: where truncated creation
  /// operators would have sent amplitude.
  std::size_t shell_dim() const { return shell_totals_count_; }
  std::optional<std::size_t> shell_index_of(std::span<const int> occ) const;

  /// Basis indices grouped for a single-mode SU(2) action: for mode j each
  /// group holds the N_j + 1 states that differ only in how N_j photons of
  /// mode j split between helicities, ordered by n+_j descending.
  struct ModeGroups {
    std::vector<std::size_t> members;  // concatenated groups
    std::vector<std::size_t> offsets;  // group g = members[offsets[g], offsets[g+1])
    std::vector<int> mode_photons;     // N_j per group
  };
  const ModeGroups& mode_groups(int mode) const { return groups_[mode - 1]; }

  bool operator==(const FockBasis& other) const {
    return config_.modes == other.config_.modes && config_.n_max == other.config_.n_max;
  }

 private:
  struct OccHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept;
  };

  ModeConfig config_;
  std::vector<int> occ_;
  std::vector<int> totals_;
  std::vector<std::size_t> block_offsets_;
  std::unordered_map<std::vector<int>, std::size_t, OccHash> index_;
  std::unordered_map<std::vector<int>, std::size_t, OccHash> shell_index_;
  std::size_t shell_totals_count_ = 0;
  std::vector<ModeGroups> groups_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr enumerate_basis(const ModeConfig& config,
                         std::size_t max_dimension = kDefaultMaxDimension);

struct StateVector {
  BasisPtr basis;
  CVector amp;
  double leakage = 0.0;  // norm lost to truncation while building the state

  static StateVector zero(BasisPtr basis);
  static StateVector basis_state(BasisPtr basis, std::span<const int> occ);
  static StateVector vacuum(BasisPtr basis);

  double norm() const { return amp.norm(); }
  StateVector normalized() const;
};

/// Sparse operator on a FockBasis. `spill`, when tracked, holds the matrix
/// elements that truncation dropped (rows index the N = n_max + 1 shell).
struct OperatorMatrix {
  BasisPtr basis;
  CSparse mat;
  std::optional<CSparse> spill;

  static OperatorMatrix zero(BasisPtr basis);
  static OperatorMatrix identity(BasisPtr basis);

  OperatorMatrix adjoint() const;
  /// Dense copy restricted to rows and columns with total photons <= n.
  CMatrix interior(int max_total) const;
};

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator*(cplx s, const OperatorMatrix& a);
OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

enum class LadderKind { create, annihilate };

OperatorMatrix ladder(const BasisPtr& basis, int mode, Helicity h, LadderKind kind);
OperatorMatrix number_operator(const BasisPtr& basis);

StateVector apply(const OperatorMatrix& op, const StateVector& s);
cplx inner(const StateVector& a, const StateVector& b);

StateVector operator+(const StateVector& a, const StateVector& b);
StateVector operator-(const StateVector& a, const StateVector& b);
StateVector operator*(cplx s, const StateVector& a);

/// exp(gen) s, evaluated by dense matrix exponentials of each constant-N
/// block of an anti-Hermitian, number-conserving generator.
StateVector exp_antihermitian_apply(const OperatorMatrix& gen, const StateVector& s);

/// Dense block-diagonal exp(gen) over the whole basis (small bases only).
CMatrix exp_antihermitian_dense(const OperatorMatrix& gen);

void require_same_basis(const FockBasis& a, const FockBasis& b);

}  // namespace pcs
