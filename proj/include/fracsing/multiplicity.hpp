#pragma once

#include "fracsing/barriers.hpp"

namespace fracsing {

struct FixedPointRun {
  enum class Direction { Upward, Downward };
  Vector start;
  std::vector<double> iterates_sup;
  Vector result;
  Direction direction = Direction::Upward;
  double residual = 0.0;  // residual_P of the result
  Vector lower, upper;    // the order interval
  int steps = 0;
};

/// Monotone iteration of T from the lower (minimal) or upper (maximal)
/// endpoint of the order interval [y1, y2]. Endpoint certificates
/// T(y1) >= y1 - tol and T(y2) <= y2 + tol are verified first. Internally the
/// iteration uses the (h1)-shifted map (same fixed points, unconditionally
/// monotone); monotonicity of the iterates is asserted at every step within
/// tol_order.
FixedPointRun minimal_fixed_point(const TContext& ctx, const Vector& y1, const Vector& y2);
FixedPointRun maximal_fixed_point(const TContext& ctx, const Vector& y1, const Vector& y2);

struct SolutionSet {
  double lambda = 0.0;
  Vector u1, u2;
  std::optional<Vector> u3;
  double res1 = 0.0, res2 = 0.0, res3 = 0.0;
  double sep12 = 0.0, sep13 = 0.0, sep23 = 0.0;
  double sigma1 = 0.0, a = 0.0;
  std::string u3_note;  // when absent: why the search came back empty
};

/// The three-solution driver on X = [zeta1, theta1], X1 = [zeta1, theta2],
/// X2 = [zeta2, theta1]: u1 = maximal fixed point in X1, u2 = minimal fixed
/// point in X2, u3 searched by deflation between them. Requires lambda inside
/// the nonempty window. u3 absence is a reported outcome, not an error.
SolutionSet three_solutions(const TContext& ctx, double R = 0.5);

/// Deflated Newton on u -> u - K(lambda f(u)/u^q) with the multiplicative
/// factor prod_k (1/||u-u_k||_inf^2 + 1); multistart from convex combinations
/// of the known solutions and from perturbations of extra_starts. Returns the
/// first certified solution separated from every known one by
/// >= 10 tol_residual, or nullopt.
std::optional<Vector> deflated_search(const TContext& ctx, const std::vector<Vector>& known,
                                      const std::vector<Vector>& extra_starts = {});

/// cone_inf(T(u2) - T(u1), phi_{1,s}) for an ordered distinct pair; strong
/// increasingness predicts a strictly positive value.
double strong_increasing_gap(const TContext& ctx, const Vector& u1, const Vector& u2);

}  // namespace fracsing
