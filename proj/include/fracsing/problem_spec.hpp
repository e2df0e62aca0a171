#pragma once

#include <string>

#include "fracsing/nonlinearity.hpp"

namespace fracsing {

/// Full instance description of the singular problem on (-1,1):
/// (-Laplace)^s u = lambda f(u)/u^q, u > 0 inside, u = 0 outside.
/// In dimension one the operator constraint n > 2s forces s in (0, 1/2).
struct ProblemSpec {
  double s = 0.25;
  double q = 1.0 / 3.0;
  double lambda = 1.0;
  double alpha = 2.0;   // exemplar nonlinearity parameter, > 4q
  double sigma1 = 0.6;  // monotonicity interval for f/u^q
  double sigma2 = 7.0;
  double alpha_f5 = 0.0;  // threshold for (f5); 0 = derive from the exemplar
  double tol_residual = 1e-8;
  double tol_order = 1e-6;
  double eps_min = 1e-8;
  int n = 256;
  std::string grading = "chebyshev";

  /// Throws ConfigError naming the violated invariant. Also samples the
  /// (f4) monotonicity of f/u^q on (sigma1, sigma2).
  void validate() const;

  /// Exemplar nonlinearity bound to (alpha, q, lambda).
  Nonlinearity nonlinearity() const;

  /// (f5) threshold: alpha_f5 if set, else the upper endpoint of the
  /// exemplar's f0-monotonicity interval.
  double f5_threshold() const;

  ProblemSpec with_lambda(double lam) const {
    ProblemSpec c = *this;
    c.lambda = lam;
    return c;
  }

  /// Flat key=value config file round-trip.
  static ProblemSpec from_file(const std::string& path);
  void to_file(const std::string& path) const;
  static ProblemSpec from_string(const std::string& text);
  std::string to_string() const;
};

}  // namespace fracsing
