#pragma once

#include <vector>

namespace pcs {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], nodes
/// in descending order.
void gauss_legendre_rule(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace pcs
