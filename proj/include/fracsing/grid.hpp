#pragma once

#include <Eigen/Core>
#include <string>

namespace fracsing {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Graded 1-D mesh on (-1,1). Nodes are Chebyshev points of the first kind
/// (clustered at the endpoints), weights are the Fejer-1 quadrature weights
/// (positive, sum to 2, exact for low-degree polynomials), delta holds the
/// boundary distance 1-|x| per node. Immutable after construction.
struct Grid {
  int n = 0;
  Vector nodes;    // strictly increasing, symmetric about 0
  Vector weights;  // positive, sum = 2
  Vector delta;    // 1 - |x_i| > 0
  std::string grading;
};

Grid make_grid(int n, const std::string& grading = "chebyshev");

/// Evaluate the delta^s-weighted piecewise-linear interpolant of nodal
/// values at x in [-1,1]: the ratio values/delta^s is interpolated linearly
/// and multiplied back, which tracks the boundary profile of functions that
/// vanish like dist(x,boundary)^s. weight_exponent = 0 gives plain linear
/// interpolation with zero boundary values.
double interpolate(const Grid& grid, const Vector& values, double x, double weight_exponent);

/// Nodewise comparison verdict for grid functions.
enum class Ordering { Equal, LessEqual, GreaterEqual, Incomparable };

Ordering order_compare(const Vector& u, const Vector& v, double tol);

/// max_i |u_i / phi_i|; phi must be positive at all nodes.
double cone_norm(const Vector& u, const Vector& phi);
/// min_i u_i / phi_i; positive iff u lies in the open cone of phi.
double cone_inf(const Vector& u, const Vector& phi);

inline double sup_norm(const Vector& u) { return u.cwiseAbs().maxCoeff(); }
inline double sup_dist(const Vector& u, const Vector& v) { return (u - v).cwiseAbs().maxCoeff(); }

}  // namespace fracsing
