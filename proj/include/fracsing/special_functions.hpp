#pragma once

#include <utility>
#include <vector>

namespace fracsing {

/// Euler beta function B(a,b), a,b > 0.
double beta_fn(double a, double b);

/// Regularized incomplete beta function I_x(a,b) for x in [0,1],
/// evaluated by the standard Lentz continued fraction to ~1e-13.
double ibeta_reg(double a, double b, double x);

/// Gauss-Legendre nodes and weights on [-1,1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

}  // namespace fracsing
