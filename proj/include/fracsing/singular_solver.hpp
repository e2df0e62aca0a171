#pragma once

#include <optional>
#include <vector>

#include "fracsing/green_operator.hpp"
#include "fracsing/problem_spec.hpp"

namespace fracsing {

struct RegularizedSolve {
  Vector z;
  double eps = 0.0;
  double energy = 0.0;
  int newton_iters = 0;
  double grad_norm = 0.0;  // sup norm of the energy gradient at the minimizer
  double residual = 0.0;   // ||z - resolvent(c (z+eps)^{-q} + g)||_inf
};

struct SolveOptions {
  double tol = 1e-12;
  int max_newton = 200;
};

/// Minimize the strictly convex discrete energy
///   E_eps(z) = 1/2 <A z, z> + shift/2 <z, z>_w
///              - c_sing/(1-q) sum_i w_i (z_i+eps)^{1-q} - sum_i w_i g_i z_i
/// over positive grid functions by line-searched Newton with a
/// fraction-to-boundary positivity rule. The unique minimizer solves
///   z = (A + shift W)^{-1} W (c_sing (z+eps)^{-q} + g),
/// i.e. the regularized integral equation. eps = 0 is admitted when z0 > 0.
RegularizedSolve solve_regularized(const GreenOperator& op, const Vector& g, double c_sing,
                                   double q, double eps, const Vector& z0, double shift = 0.0,
                                   const SolveOptions& opts = {});

/// The discrete E_eps and its analytic gradient (exposed for the
/// finite-difference consistency checks).
double energy_regularized(const GreenOperator& op, const Vector& g, double c_sing, double q,
                          double eps, double shift, const Vector& z);
Vector energy_regularized_gradient(const GreenOperator& op, const Vector& g, double c_sing,
                                   double q, double eps, double shift, const Vector& z);

struct SingularSolve {
  Vector z;
  std::vector<std::pair<double, double>> eps_trace;  // (eps, sup norm), eps decreasing
  double residual = 0.0;
};

/// eps-continuation for the singular equation z = K(c z^{-q} + g) (+ optional
/// zeroth-order shift): eps_k = eps0 / 2^k down to eps_min, each solve warm
/// started from the previous, then a final polish at eps = 0. The iterates are
/// nodewise nondecreasing as eps decreases.
SingularSolve solve_singular(const GreenOperator& op, const Vector& g, double c_sing, double q,
                             double eps0, double eps_min, double tol_residual,
                             const Vector* warm = nullptr, double shift = 0.0);

/// Pure singular profile: w with (-Laplace)^s w = c / w^q, w > 0, by the same
/// continuation. Scales like c^{1/(1+q)}.
Vector solve_pure_singular(const GreenOperator& op, double q, double c);

/// Certification number used everywhere downstream:
/// || u - K(lambda f(u)/u^q) ||_inf. Requires u > 0 at all interior nodes.
double residual_P(const GreenOperator& op, const ProblemSpec& spec, const Vector& u);

struct TResult {
  Vector z;
  std::vector<std::pair<double, double>> eps_trace;
  double residual = 0.0;    // sup norm of z - K(lambda f(0) z^{-q} + ftilde(u))
  double cone_lower = 0.0;  // cone_inf(z, phi_1s) > 0
  double m_lower = 0.0;     // certified barrier m phi_1s <= z
  double M_upper = 0.0;     // certified barrier z <= M w
};

/// Shared context for repeated applications of the map T at a fixed spec:
/// caches the pure singular profile w and the principal eigenfunction.
class TContext {
 public:
  TContext(const GreenOperator& op, const ProblemSpec& spec);

  /// T(u) = z solving (-Laplace)^s z - lambda f(0) z^{-q} = ftilde(u),
  /// with the certified barriers m phi_{1,s} <= z <= M w.
  TResult apply(const Vector& u) const;

  /// Lean path for inner fixed-point loops: single eps = 0 solve warm started
  /// from `warm`; `shift` adds the (h1) zeroth-order term k (z - u) that keeps
  /// the iteration monotone without moving the fixed points.
  Vector apply_fast(const Vector& u, const Vector& warm, double shift = 0.0) const;

  const GreenOperator& op() const { return op_; }
  const ProblemSpec& spec() const { return spec_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const Vector& pure_singular() const { return w_; }  // solution of w = K(w^{-q})
  const Vector& phi1() const { return op_.principal().vector; }
  double lambda1() const { return op_.principal().value; }

  TContext with_lambda(double lam) const { return TContext(op_, spec_.with_lambda(lam), w_); }

 private:
  TContext(const GreenOperator& op, const ProblemSpec& spec, Vector w);

  const GreenOperator& op_;
  ProblemSpec spec_;
  Nonlinearity nl_;
  Vector w_;
};

/// One-shot version of TContext::apply.
TResult apply_T(const GreenOperator& op, const ProblemSpec& spec, const Vector& u);

}  // namespace fracsing
