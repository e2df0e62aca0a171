#pragma once

#include "fracsing/green_operator.hpp"
#include "fracsing/problem_spec.hpp"

namespace fracsing {

/// Parameters of the companion semipositone problem
/// (-Laplace)^s v = v^p - theta / v^gamma, v > 0 inside, v = 0 outside,
/// with p in (0,1) and gamma in (q,1).
struct SemipositoneSpec {
  double p = 0.5;
  double gamma = 2.0 / 3.0;
  double theta_max = 0.05;
  int steps = 20;
  double cone_floor_rel = 0.01;  // branch stops when cone_inf drops below this
                                 // fraction of its theta = 0 value

  void validate(double q) const;
};

/// Global minimizer of E_0(v) = 1/2 <A v, v> - 1/(p+1) sum w |v|^{p+1}:
/// the unique positive solution of v = K(v^p). Scaled-torsion initialization,
/// sublinear fixed-point warmup, Newton polish. Restarts from a larger
/// initialization if the iterate collapses toward zero.
Vector solve_I0(const GreenOperator& op, double p);

/// Discrete E_0 and its gradient (for the gradient checks).
double energy_I0(const GreenOperator& op, double p, const Vector& v);
Vector energy_I0_gradient(const GreenOperator& op, double p, const Vector& v);

/// Lambda = inf (<A u, u> - p sum w v0^{p-1} u^2) / (sum w u^2): delegates to
/// linearized_eigenvalue and asserts Lambda > 0 with a sign-constant
/// eigenfunction in the cone of phi_{1,s}.
EigenPair verify_Lambda(const GreenOperator& op, const Vector& v0, double p);

struct BranchPoint {
  double theta = 0.0;
  Vector v;
  double residual = 0.0;
  double cone_inf = 0.0;
};

struct SemiBranch {
  std::vector<BranchPoint> points;  // starts at theta = 0 with v0
  bool exited_cone = false;
  bool reached_theta_max = false;
};

/// Predictor-corrector continuation of (I_theta) in theta from v0, step
/// theta_max/steps, halving on corrector failure, stopping at theta_max or
/// when the branch leaves the cone of phi_{1,s}.
SemiBranch continue_theta(const GreenOperator& op, const SemipositoneSpec& sp, const Vector& v0);

struct SiBarrier {
  Vector v;
  double eta = 0.0;     // widest boundary strip on which the sign condition holds
  int strip_nodes = 0;  // nodes inside the strip
  bool found = false;
};

/// Strong-increasingness diagnostic: largest eta such that
/// v^p - theta v^{-gamma} + k v / delta^{s(q+1)} <= 0 at every node with
/// delta < eta. found = false when no positive strip exists at this
/// resolution.
SiBarrier si_barrier(const GreenOperator& op, const ProblemSpec& spec, const SemipositoneSpec& sp,
                     const Vector& v_theta, double theta, double k);

}  // namespace fracsing
