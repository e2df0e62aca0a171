#pragma once

#include <Eigen/Cholesky>

#include "fracsing/grid.hpp"

namespace fracsing {

/// Closed-form Green function of (-Laplace)^s on (-1,1) with zero exterior
/// condition:
///   G_s(x,y) = kappa_{1,s} |x-y|^{2s-1} B(s,1/2-s) I_{r0/(1+r0)}(s, 1/2-s),
///   r0 = (1-x^2)(1-y^2)/|x-y|^2,  kappa_{1,s} = 1/(4^s Gamma(s)^2).
/// Nonnegative and symmetric; throws on x == y (the diagonal is handled only
/// through product integration).
double green_kernel(double x, double y, double s);

/// kappa_{1,s} * B(s, 1/2-s): the coefficient of the |x-y|^{2s-1} diagonal
/// singularity (limit of G_s |x-y|^{1-2s} as y -> x).
double kernel_diagonal_strength(double s);

struct EigenPair {
  double value = 0.0;
  Vector vector;
  double residual = 0.0;
};

struct AssembleOptions {
  int gauss_points = 10;
  double torsion_check_bound = 0.05;  // assembly fails above this relative error
  bool compute_eigenpair = true;
};

/// Dense discretization of K(g) = int G_s(.,y) g(y) dy by row-wise product
/// integration: piecewise-linear interpolation of g between nodes (constant
/// extension on the two boundary cells), exact moments of |x-y|^{2s-1} against
/// the singular basis {1, t^{1-2s}} on the cells adjacent to the row node,
/// Gauss-Legendre elsewhere. The weight-stripped kernel core is symmetrized
/// once post-assembly; its inverse is the SPD stiffness form A.
class GreenOperator {
 public:
  GreenOperator(Grid grid, double s, Matrix core, Vector masses, double torsion_error);

  const Grid& grid() const { return grid_; }
  double s() const { return s_; }
  int size() const { return grid_.n; }

  /// K applied to nodal values: core * (masses .* g). Linear and monotone.
  Vector apply(const Vector& g) const;

  /// Symmetric nonnegative kernel core C (K = C * diag(masses)).
  const Matrix& kernel_core() const { return core_; }
  /// Stiffness form A = C^{-1}, symmetric positive definite.
  const Matrix& stiffness() const { return stiffness_; }
  /// Integral masses of the product-integration scheme (boundary-profile
  /// weighted hat masses).
  const Vector& masses() const { return masses_; }

  /// z' A z.
  double quad_form(const Vector& z) const { return z.dot(stiffness_ * z); }

  /// Relative sup error of K(1) against the closed-form torsion function
  /// (1-x^2)^s / Gamma(1+2s), recorded at assembly.
  double torsion_error() const { return torsion_error_; }
  Vector torsion() const { return apply(Vector::Ones(grid_.n)); }

  const EigenPair& principal() const;
  void set_principal(EigenPair p) { phi1_ = std::move(p); }

 private:
  Grid grid_;
  double s_;
  Matrix core_;
  Matrix stiffness_;
  Vector masses_;
  double torsion_error_;
  EigenPair phi1_;
};

GreenOperator assemble(const Grid& grid, double s, const AssembleOptions& opts = {});

/// Constants of the barrier construction, computed from the assembled rows:
///   M2 = (min over nodes in [-R,R] of K(chi_R))^{-1}
///   M3 = (max over nodes of K(1))^{-1}
///   C1 = max over nodes of K(chi_R)  (uniform bound diagnostic)
struct OperatorConstants {
  double M2 = 0.0;
  double M3 = 0.0;
  double C1 = 0.0;
  double R = 0.0;
  double Rhat = 1.0;
};

OperatorConstants constants(const GreenOperator& op, double R);

/// Indicator of [-R,R] as nodal values.
Vector indicator_ball(const Grid& grid, double R);

/// Principal eigenpair of (-Laplace)^s via power iteration on K: the largest
/// eigenvalue mu of K gives lambda_{1,s} = 1/mu. Eigenfunction positive,
/// normalized to sup norm 1, residual ||K phi - mu phi||_inf <= 1e-10.
EigenPair principal_eigenpair(const GreenOperator& op);

/// Smallest eigenvalue Lambda of the pencil (A - p diag-weighted v0^{p-1},
/// mass) by shifted inverse iteration; eigenfunction sign-normalized positive.
EigenPair linearized_eigenvalue(const GreenOperator& op, const Vector& v0, double p);

}  // namespace fracsing
