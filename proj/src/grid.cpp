#include "fracsing/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace fracsing {

Grid make_grid(int n, const std::string& grading) {
  if (n < 8) {
    throw ConfigError("make_grid: need at least 8 nodes, got " + std::to_string(n));
  }
  if (grading != "chebyshev") {
    throw ConfigError("make_grid: unknown grading '" + grading + "' (supported: chebyshev)");
  }
  Grid g;
  g.n = n;
  g.grading = grading;
  g.nodes.resize(n);
  g.weights.resize(n);
  g.delta.resize(n);

  std::vector<double> theta(n);
  for (int j = 0; j < n; ++j) {
    theta[j] = (2.0 * j + 1.0) * M_PI / (2.0 * n);
    g.nodes[j] = -std::cos(theta[j]);
  }
  // Fejer-1 weights
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int m = 1; m <= n / 2; ++m) {
      acc += std::cos(2.0 * m * theta[j]) / (4.0 * m * m - 1.0);
    }
    g.weights[j] = (2.0 / n) * (1.0 - 2.0 * acc);
  }
  // enforce exact symmetry (kills rounding drift, keeps runs bit-reproducible)
  for (int j = 0; j < n / 2; ++j) {
    const int k = n - 1 - j;
    const double x = 0.5 * (g.nodes[j] - g.nodes[k]);
    g.nodes[j] = x;
    g.nodes[k] = -x;
    const double w = 0.5 * (g.weights[j] + g.weights[k]);
    g.weights[j] = w;
    g.weights[k] = w;
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  for (int j = 0; j < n; ++j) {
    g.delta[j] = 1.0 - std::fabs(g.nodes[j]);
  }
  return g;
}

double interpolate(const Grid& grid, const Vector& values, double x, double weight_exponent) {
  if (values.size() != grid.n) {
    throw std::invalid_argument("interpolate: values length does not match grid");
  }
  if (x <= -1.0 || x >= 1.0) return 0.0;
  const auto profile = [&](double y) {
    return weight_exponent == 0.0 ? 1.0 : std::pow(1.0 - y * y, weight_exponent);
  };
  const int n = grid.n;
  // locate the surrounding nodes
  int hi = 0;
  while (hi < n && grid.nodes[hi] < x) ++hi;
  double rl, rh, xl, xh;
  if (hi == 0) {
    // boundary cell [-1, x_0]: ratio extended as constant
    rl = rh = values[0] / profile(grid.nodes[0]);
    xl = -1.0;
    xh = grid.nodes[0];
  } else if (hi == n) {
    rl = rh = values[n - 1] / profile(grid.nodes[n - 1]);
    xl = grid.nodes[n - 1];
    xh = 1.0;
  } else {
    xl = grid.nodes[hi - 1];
    xh = grid.nodes[hi];
    rl = values[hi - 1] / profile(xl);
    rh = values[hi] / profile(xh);
  }
  const double t = (xh > xl) ? (x - xl) / (xh - xl) : 0.0;
  return ((1.0 - t) * rl + t * rh) * profile(x);
}

Ordering order_compare(const Vector& u, const Vector& v, double tol) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("order_compare: grid mismatch");
  }
  const double above = (u - v).maxCoeff();
  const double below = (u - v).minCoeff();
  const bool le = above <= tol;
  const bool ge = below >= -tol;
  if (le && ge) return Ordering::Equal;
  if (le) return Ordering::LessEqual;
  if (ge) return Ordering::GreaterEqual;
  return Ordering::Incomparable;
}

double cone_norm(const Vector& u, const Vector& phi) {
  if (u.size() != phi.size()) throw std::invalid_argument("cone_norm: grid mismatch");
  if (phi.minCoeff() <= 0.0) throw std::domain_error("cone_norm: phi must be positive at all nodes");
  return (u.array() / phi.array()).abs().maxCoeff();
}

double cone_inf(const Vector& u, const Vector& phi) {
  if (u.size() != phi.size()) throw std::invalid_argument("cone_inf: grid mismatch");
  if (phi.minCoeff() <= 0.0) throw std::domain_error("cone_inf: phi must be positive at all nodes");
  return (u.array() / phi.array()).minCoeff();
}

}  // namespace fracsing
