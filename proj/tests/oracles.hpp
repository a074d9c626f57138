#pragma once

// Reference computations that share no code with the library: brute-force
// Fock enumeration, Taylor-series matrix exponential, vector-geometry solid
// angles and closed-form coherent-state amplitudes.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pcs/fock.hpp"
#include "pcs/sphere.hpp"

namespace oracle {

using pcs::cplx;
using Occ = std::vector<int>;

inline void enumerate_rec(int slots, int left, Occ& cur, std::vector<Occ>& out) {
  if (static_cast<int>(cur.size()) == slots) {
    out.push_back(cur);
    return;
  }
  for (int k = 0; k <= left; ++k) {
    cur.push_back(k);
    enumerate_rec(slots, left - k, cur, out);
    cur.pop_back();
  }
}

/// Every occupation tuple of 2m slots with at most n_max photons.
inline std::vector<Occ> all_occupations(int modes, int n_max) {
  std::vector<Occ> out;
  Occ cur;
  enumerate_rec(2 * modes, n_max, cur, out);
  return out;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

/// Dense single-slot ladder operator in the ordering of `basis`, built from
/// the occupation numbers alone.
inline Eigen::MatrixXcd dense_ladder(const pcs::FockBasis& basis, int slot, bool create) {
  const auto n = static_cast<Eigen::Index>(basis.dim());
  std::map<Occ, Eigen::Index> index;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto o = basis.occupation(static_cast<std::size_t>(i));
    index[Occ(o.begin(), o.end())] = i;
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [occ, col] : index) {
    Occ to = occ;
    double amp = 0;
    if (create) {
      amp = std::sqrt(to[slot] + 1.0);
      to[slot] += 1;
    } else {
      if (to[slot] == 0) continue;
      amp = std::sqrt(static_cast<double>(to[slot]));
      to[slot] -= 1;
    }
    auto it = index.find(to);
    if (it != index.end()) m(it->second, col) = amp;
  }
  return m;
}

/// exp(a) by scaling and squaring of a truncated Taylor series.
inline Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const Eigen::MatrixXcd x = a / std::pow(2.0, squarings);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline std::array<double, 3> unit(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

/// Signed solid angle of the geodesic triangle (a, b, c),
/// tan(omega/2) = a.(b x c) / (1 + a.b + b.c + c.a).
inline double triangle_solid_angle(const std::array<double, 3>& a, const std::array<double, 3>& b,
                                   const std::array<double, 3>& c) {
  const double triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                        a[2] * (b[0] * c[1] - b[1] * c[0]);
  auto dot = [](const std::array<double, 3>& x, const std::array<double, 3>& y) {
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
  };
  const double denom = 1 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2 * std::atan2(triple, denom);
}

/// Signed solid angle of a geodesic polygon by fanning from its first vertex.
inline double polygon_solid_angle(const std::vector<pcs::SpherePoint>& v) {
  double total = 0;
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    total += triangle_solid_angle(unit(v[0].theta, v[0].phi), unit(v[k].theta, v[k].phi),
                                  unit(v[k + 1].theta, v[k + 1].phi));
  }
  return total;
}

/// Rotated single-mode reference (a+-^dag)^{2p}|0>/sqrt((2p)!) on a one-mode
/// basis, from the binomial expansion of the rotated creation operator.
inline Eigen::VectorXcd spin_coherent(const pcs::FockBasis& basis, int twice_p, bool plus, double theta,
                                      double phi) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dim()));
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  for (int k = 0; k <= twice_p; ++k) {
    // k photons moved to the opposite helicity
    cplx other = plus ? std::polar(s, phi) : -std::polar(s, -phi);
    const cplx amp = std::sqrt(binomial(twice_p, k)) * std::pow(c, twice_p - k) * std::pow(other, k);
    const Occ occ = plus ? Occ{twice_p - k, k} : Occ{k, twice_p - k};
    out[static_cast<Eigen::Index>(*basis.index_of(occ))] = amp;
  }
  return out;
}

/// Coherent-state amplitude prod_slots e^{-|a|^2/2} a^n / sqrt(n!).
inline cplx coherent_amplitude(const std::vector<cplx>& alpha, const Occ& occ) {
  cplx amp = 1.0;
  for (std::size_t k = 0; k < occ.size(); ++k) {
    amp *= std::exp(-0.5 * std::norm(alpha[k])) * std::pow(alpha[k], occ[k]) /
           std::sqrt(std::tgamma(occ[k] + 1.0));
  }
  return amp;
}

/// Projector onto span{v, L v, L^2 v, ...} by Gram-Schmidt.
inline Eigen::MatrixXcd orbit_projector(const Eigen::VectorXcd& top, const Eigen::MatrixXcd& lower) {
  std::vector<Eigen::VectorXcd> basis;
  Eigen::VectorXcd v = top;
  for (int step = 0; step < top.size() + 1; ++step) {
    Eigen::VectorXcd w = v;
    for (const auto& b : basis) w -= b.dot(w) * b;
    if (w.norm() < 1e-10) break;
    basis.push_back(w.normalized());
    v = lower * v;
  }
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(top.size(), top.size());
  for (const auto& b : basis) p += b * b.adjoint();
  return p;
}

inline Eigen::VectorXcd random_state(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx(g(rng), g(rng));
  return v.normalized();
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace oracle
