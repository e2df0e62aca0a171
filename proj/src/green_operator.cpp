#include "fracsing/green_operator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "fracsing/special_functions.hpp"

namespace fracsing {

namespace {

double kappa_1s(double s) { return 1.0 / (std::pow(4.0, s) * std::pow(std::tgamma(s), 2)); }

// G_s(x,y) |x-y|^{1-2s}: the smooth-in-the-limit factor, equal to
// kernel_diagonal_strength(s) at y = x.
double kernel_factor(double x, double y, double s, double S0) {
  const double d2 = (x - y) * (x - y);
  const double r0 = (1.0 - x * x) * (1.0 - y * y) / d2;
  const double x0 = r0 / (1.0 + r0);
  return S0 * ibeta_reg(s, 0.5 - s, x0);
}

}  // namespace

double kernel_diagonal_strength(double s) { return kappa_1s(s) * beta_fn(s, 0.5 - s); }

double green_kernel(double x, double y, double s) {
  if (!(s > 0.0 && s < 0.5)) throw std::invalid_argument("green_kernel: s must lie in (0,1/2)");
  if (!(x > -1.0 && x < 1.0 && y > -1.0 && y < 1.0)) {
    throw std::domain_error("green_kernel: points must lie in (-1,1)");
  }
  if (x == y) {
    throw std::domain_error("green_kernel: diagonal x == y is handled only via product integration");
  }
  const double S0 = kernel_diagonal_strength(s);
  return std::pow(std::fabs(x - y), 2.0 * s - 1.0) * kernel_factor(x, y, s, S0);
}

GreenOperator::GreenOperator(Grid grid, double s, Matrix core, Vector masses, double torsion_error)
    : grid_(std::move(grid)),
      s_(s),
      core_(std::move(core)),
      masses_(std::move(masses)),
      torsion_error_(torsion_error) {
  Eigen::LLT<Matrix> llt(core_);
  if (llt.info() != Eigen::Success) {
    throw SolverError("GreenOperator: kernel core is not positive definite");
  }
  stiffness_ = llt.solve(Matrix::Identity(core_.rows(), core_.cols()));
  stiffness_ = 0.5 * (stiffness_ + stiffness_.transpose()).eval();
}

Vector GreenOperator::apply(const Vector& g) const {
  if (g.size() != grid_.n) throw std::invalid_argument("apply: size mismatch");
  return core_ * masses_.cwiseProduct(g);
}

const EigenPair& GreenOperator::principal() const {
  if (phi1_.vector.size() == 0) {
    throw SolverError("GreenOperator: principal eigenpair was not computed at assembly");
  }
  return phi1_;
}

GreenOperator assemble(const Grid& grid, double s, const AssembleOptions& opts) {
  if (!(s > 0.0 && s < 0.5)) throw ConfigError("assemble: s must lie in (0,1/2)");
  const int n = grid.n;
  const double S0 = kernel_diagonal_strength(s);
  const auto [gx, gw] = gauss_legendre(opts.gauss_points);
  const int ng = opts.gauss_points;

  // interpolation breakpoints: cells [bp_k, bp_{k+1}], k = 0..n
  Vector bp(n + 2);
  bp[0] = -1.0;
  for (int j = 0; j < n; ++j) bp[j + 1] = grid.nodes[j];
  bp[n + 1] = 1.0;

  Matrix K = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double xi = grid.nodes[i];
    for (int k = 0; k <= n; ++k) {
      const double a = bp[k];
      const double b = bp[k + 1];
      const double h = b - a;
      if (k == i || k == i + 1) {
        // cell with xi as an endpoint: integrate t^{2s-1} (S0 + dS (t/h)^{1-2s})
        // against the linear shape functions, t = |y - xi|
        const double far_y = (k == i) ? a : b;
        const double dS = kernel_factor(xi, far_y, s, S0) - S0;
        const double h2s = std::pow(h, 2.0 * s);
        const auto mom = [&](int j, int l) {
          return h2s / (2.0 * s + j + (1.0 - 2.0 * s) * l);
        };
        const auto wt = [&](double shape_at_xi, double shape_at_far) {
          const double c0 = shape_at_xi;
          const double c1 = shape_at_far - shape_at_xi;
          return S0 * (c0 * mom(0, 0) + c1 * mom(1, 0)) + dS * (c0 * mom(0, 1) + c1 * mom(1, 1));
        };
        if (k == 0) {
          K(i, 0) += wt(1.0, 1.0);  // constant extension on the boundary cell
        } else if (k == n) {
          K(i, n - 1) += wt(1.0, 1.0);
        } else if (k == i) {
          K(i, i) += wt(1.0, 0.0);
          K(i, k - 1) += wt(0.0, 1.0);
        } else {
          K(i, i) += wt(1.0, 0.0);
          K(i, k) += wt(0.0, 1.0);
        }
      } else {
        for (int m = 0; m < ng; ++m) {
          const double y = 0.5 * (a + b) + 0.5 * h * gx[m];
          const double wq = 0.5 * h * gw[m];
          const double g = std::pow(std::fabs(xi - y), 2.0 * s - 1.0) * kernel_factor(xi, y, s, S0);
          if (k == 0) {
            K(i, 0) += g * wq;
          } else if (k == n) {
            K(i, n - 1) += g * wq;
          } else {
            const double lam = (y - a) / h;
            K(i, k - 1) += g * (1.0 - lam) * wq;
            K(i, k) += g * lam * wq;
          }
        }
      }
    }
  }

  // column masses: hat masses weighted by the boundary profile (1-y^2)^s,
  // normalized at the node. This keeps the weight-stripped core symmetric up
  // to discretization error even in the boundary columns where the kernel
  // itself vanishes like delta^s.
  Vector eta = Vector::Zero(n);
  for (int k = 0; k <= n; ++k) {
    const double a = bp[k];
    const double b = bp[k + 1];
    const double h = b - a;
    for (int m = 0; m < ng; ++m) {
      const double y = 0.5 * (a + b) + 0.5 * h * gx[m];
      const double wq = 0.5 * h * gw[m];
      const double pv = std::pow(1.0 - y * y, s);
      if (k == 0) {
        eta[0] += pv * wq;
      } else if (k == n) {
        eta[n - 1] += pv * wq;
      } else {
        const double lam = (y - a) / h;
        eta[k - 1] += pv * (1.0 - lam) * wq;
        eta[k] += pv * lam * wq;
      }
    }
  }
  for (int j = 0; j < n; ++j) eta[j] /= std::pow(1.0 - grid.nodes[j] * grid.nodes[j], s);

  Matrix core = K * eta.cwiseInverse().asDiagonal();
  core = 0.5 * (core + core.transpose()).eval();
  if (core.minCoeff() < 0.0) {
    throw SolverError("assemble: kernel core has a negative entry");
  }

  // torsion self-check against the closed form (1-x^2)^s / Gamma(1+2s)
  const Vector k1 = core * eta;
  double emax = 0.0, tmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = std::pow(1.0 - grid.nodes[i] * grid.nodes[i], s) / std::tgamma(1.0 + 2.0 * s);
    emax = std::max(emax, std::fabs(k1[i] - t));
    tmax = std::max(tmax, t);
  }
  const double torsion_error = emax / tmax;
  if (torsion_error > opts.torsion_check_bound) {
    throw SolverError("assemble: torsion self-check failed, relative error " +
                      std::to_string(torsion_error) + " exceeds bound " +
                      std::to_string(opts.torsion_check_bound));
  }

  GreenOperator op(grid, s, std::move(core), std::move(eta), torsion_error);
  if (opts.compute_eigenpair) op.set_principal(principal_eigenpair(op));
  return op;
}

Vector indicator_ball(const Grid& grid, double R) {
  Vector chi(grid.n);
  for (int i = 0; i < grid.n; ++i) chi[i] = std::fabs(grid.nodes[i]) <= R ? 1.0 : 0.0;
  return chi;
}

OperatorConstants constants(const GreenOperator& op, double R) {
  if (!(R > 0.0 && R < 1.0)) throw ConfigError("constants: need 0 < R < Rhat = 1");
  const Grid& grid = op.grid();
  const Vector chi = indicator_ball(grid, R);
  if (chi.maxCoeff() <= 0.0) throw ConfigError("constants: no grid node inside [-R,R]");
  const Vector kchi = op.apply(chi);
  double min_in_ball = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.n; ++i) {
    if (chi[i] > 0.0) min_in_ball = std::min(min_in_ball, kchi[i]);
  }
  OperatorConstants c;
  c.R = R;
  c.Rhat = 1.0;
  c.M2 = 1.0 / min_in_ball;
  c.M3 = 1.0 / op.torsion().maxCoeff();
  c.C1 = kchi.maxCoeff();
  return c;
}

EigenPair principal_eigenpair(const GreenOperator& op) {
  const Vector sqw = op.masses().cwiseSqrt();
  const Matrix B = sqw.asDiagonal() * op.kernel_core() * sqw.asDiagonal();
  Vector v = sqw.cwiseProduct(op.torsion());
  v /= v.norm();
  double mu = 0.0;
  bool ok = false;
  for (int it = 0; it < 20000; ++it) {
    Vector bv = B * v;
    mu = v.dot(bv);
    const double res = (bv - mu * v).norm();
    v = bv / bv.norm();
    if (res <= 1e-13 * mu) {
      ok = true;
      break;
    }
  }
  if (!ok) throw SolverError("principal_eigenpair: power iteration did not converge");
  Vector phi = v.cwiseQuotient(sqw);
  Eigen::Index imax;
  phi.cwiseAbs().maxCoeff(&imax);
  phi /= phi[imax];  // sup norm 1, sign positive
  EigenPair p;
  p.value = 1.0 / mu;
  p.vector = phi;
  p.residual = (op.apply(phi) - mu * phi).cwiseAbs().maxCoeff();
  if (p.residual > 1e-10) {
    throw SolverError("principal_eigenpair: residual " + std::to_string(p.residual) +
                      " above 1e-10");
  }
  if (phi.minCoeff() <= 0.0) {
    throw SolverError("principal_eigenpair: eigenfunction not positive at all interior nodes");
  }
  return p;
}

EigenPair linearized_eigenvalue(const GreenOperator& op, const Vector& v0, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("linearized_eigenvalue: p in (0,1)");
  if (v0.minCoeff() <= 0.0) {
    throw std::domain_error("linearized_eigenvalue: v0 must be positive at interior nodes");
  }
  const int n = op.size();
  const Vector isqw = op.masses().cwiseSqrt().cwiseInverse();
  Matrix M = isqw.asDiagonal() * op.stiffness() * isqw.asDiagonal();
  for (int i = 0; i < n; ++i) M(i, i) -= p * std::pow(v0[i], p - 1.0);
  M = 0.5 * (M + M.transpose()).eval();

  // crude upper bound c so that cI - M is PSD, then power iteration on it
  double c = 0.0;
  for (int i = 0; i < n; ++i) c = std::max(c, M.row(i).cwiseAbs().sum());
  Vector v = Vector::Ones(n);
  v /= v.norm();
  for (int it = 0; it < 400; ++it) {
    v = (c * v - M * v).normalized();
  }
  double lam = v.dot(M * v);
  // Rayleigh-shift inverse iteration polish
  for (int it = 0; it < 40; ++it) {
    Eigen::PartialPivLU<Matrix> lu(M - (lam - 1e-12 * std::fabs(c)) * Matrix::Identity(n, n));
    Vector w = lu.solve(v);
    const double nw = w.norm();
    if (!std::isfinite(nw) || nw == 0.0) break;
    v = w / nw;
    const double lam_new = v.dot(M * v);
    const double res = (M * v - lam_new * v).norm();
    lam = lam_new;
    if (res <= 1e-11 * std::max(1.0, std::fabs(lam))) break;
  }
  const double res = (M * v - lam * v).norm();
  if (!(res <= 1e-8 * std::max(1.0, std::fabs(lam)))) {
    throw SolverError("linearized_eigenvalue: inverse iteration stalled, residual " +
                      std::to_string(res));
  }
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
  EigenPair out;
  out.value = lam;
  out.vector = v.cwiseProduct(isqw);  // back to nodal values
  out.residual = res;
  return out;
}

}  // namespace fracsing
