#include "pcs/quadrature.hpp"

#include <cmath>
#include <utility>

#include "pcs/error.hpp"
#include "pcs/sphere.hpp"

namespace pcs {

void gauss_legendre_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw Error(ErrorCode::insufficient_grid, "Gauss-Legendre rule needs at least one node");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const unsigned un = static_cast<unsigned>(n);
  // P_n(z) and P_n'(z) from the standard-library Legendre polynomials.
  auto legendre_with_derivative = [&](double z) {
    const double pn = std::legendre(un, z);
    const double pn1 = n > 1 ? std::legendre(un - 1, z) : 1.0;
    return std::pair<double, double>{pn, n * (z * pn - pn1) / (z * z - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi's initial guess, refined by Newton's method.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, dpn] = legendre_with_derivative(z);
      const double dz = pn / dpn;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double dp = legendre_with_derivative(z).second;
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = weight;
    w[n - 1 - i] = weight;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

}  // namespace pcs
