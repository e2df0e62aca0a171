#include "fracsing/semipositone.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace fracsing {

void SemipositoneSpec::validate(double q) const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("semipositone: p must lie in (0,1)");
  if (!(gamma > q && gamma < 1.0)) throw ConfigError("semipositone: gamma must lie in (q,1)");
  if (!(theta_max > 0.0)) throw ConfigError("semipositone: theta_max must be positive");
  if (steps < 1) throw ConfigError("semipositone: steps must be positive");
}

double energy_I0(const GreenOperator& op, double p, const Vector& v) {
  double e = 0.5 * op.quad_form(v);
  const Vector& w = op.masses();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    e -= w[i] / (p + 1.0) * std::pow(std::fabs(v[i]), p + 1.0);
  }
  return e;
}

Vector energy_I0_gradient(const GreenOperator& op, double p, const Vector& v) {
  Vector g = op.stiffness() * v;
  const Vector& w = op.masses();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::fabs(v[i]);
    g[i] -= w[i] * (a == 0.0 ? 0.0 : std::pow(a, p - 1.0) * v[i]);
  }
  return g;
}

namespace {

Vector i0_residual(const GreenOperator& op, double p, const Vector& v) {
  return v - op.apply(v.cwiseMax(0.0).array().pow(p).matrix());
}

}  // namespace

Vector solve_I0(const GreenOperator& op, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("solve_I0: p must lie in (0,1)");
  const int n = op.size();
  const Vector tors = op.torsion();

  double init_scale = 1.0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    // amplitude A with A T = K((A T)^p) matched at the sup:
    const double amp =
        std::pow(op.apply(tors.array().pow(p).matrix()).maxCoeff() / tors.maxCoeff(),
                 1.0 / (1.0 - p));
    Vector v = init_scale * amp * tors;
    // sublinear fixed point contracts logarithmic error by factor p
    for (int it = 0; it < 80; ++it) v = op.apply(v.array().pow(p).matrix());
    // Newton polish on the residual map
    for (int it = 0; it < 40; ++it) {
      const Vector R = i0_residual(op, p, v);
      if (R.cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, v.maxCoeff())) break;
      Matrix J = Matrix::Identity(n, n);
      Vector dphi = p * v.array().pow(p - 1.0);
      J -= op.kernel_core() * op.masses().cwiseProduct(dphi).asDiagonal();
      Vector d = Eigen::PartialPivLU<Matrix>(J).solve(-R);
      double t = 1.0;
      for (int i = 0; i < n; ++i) {
        if (d[i] < 0.0) t = std::min(t, -0.95 * v[i] / d[i]);
      }
      v += t * d;
    }
    if (v.maxCoeff() > 1e-8 * amp && v.minCoeff() > 0.0) {
      const double res = i0_residual(op, p, v).cwiseAbs().maxCoeff();
      if (res > 1e-10 * std::max(1.0, v.maxCoeff())) {
        throw SolverError("solve_I0: residual " + std::to_string(res) + " did not converge");
      }
      return v;
    }
    init_scale *= 4.0;  // collapsed toward the trivial critical point
  }
  throw SolverError("solve_I0: converged to zero from three initializations");
}

EigenPair verify_Lambda(const GreenOperator& op, const Vector& v0, double p) {
  EigenPair lam = linearized_eigenvalue(op, v0, p);
  if (!(lam.value > 0.0)) {
    throw SolverError("verify_Lambda: Lambda = " + std::to_string(lam.value) +
                      " <= 0 at a converged discretization");
  }
  const Vector& psi = lam.vector;
  if (psi.minCoeff() <= 0.0) {
    throw SolverError("verify_Lambda: eigenfunction changes sign at interior nodes");
  }
  if (cone_inf(psi, op.principal().vector) <= 0.0) {
    throw SolverError("verify_Lambda: eigenfunction not in the cone of phi_1s");
  }
  return lam;
}

namespace {

bool corrector(const GreenOperator& op, const SemipositoneSpec& sp, double theta, Vector& v) {
  const int n = op.size();
  for (int it = 0; it < 60; ++it) {
    Vector rhs(n);
    for (int i = 0; i < n; ++i) {
      rhs[i] = std::pow(v[i], sp.p) - theta * std::pow(v[i], -sp.gamma);
    }
    const Vector R = v - op.apply(rhs);
    if (R.cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, v.maxCoeff())) return true;
    Matrix J = Matrix::Identity(n, n);
    Vector dphi(n);
    for (int i = 0; i < n; ++i) {
      dphi[i] = sp.p * std::pow(v[i], sp.p - 1.0) + theta * sp.gamma * std::pow(v[i], -sp.gamma - 1.0);
    }
    J -= op.kernel_core() * op.masses().cwiseProduct(dphi).asDiagonal();
    Vector d = Eigen::PartialPivLU<Matrix>(J).solve(-R);
    if (!d.allFinite()) return false;
    double t = 1.0;
    for (int i = 0; i < n; ++i) {
      if (d[i] < 0.0) t = std::min(t, -0.95 * v[i] / d[i]);
    }
    v += t * d;
    if (v.minCoeff() <= 0.0) return false;
  }
  return false;
}

}  // namespace

SemiBranch continue_theta(const GreenOperator& op, const SemipositoneSpec& sp, const Vector& v0) {
  const EigenPair lam = verify_Lambda(op, v0, sp.p);
  (void)lam;  // invertibility of the linearization at theta = 0
  const Vector& phi = op.principal().vector;
  const double cone_floor = sp.cone_floor_rel * cone_inf(v0, phi);

  SemiBranch branch;
  {
    BranchPoint p0;
    p0.theta = 0.0;
    p0.v = v0;
    p0.residual = i0_residual(op, sp.p, v0).cwiseAbs().maxCoeff();
    p0.cone_inf = cone_inf(v0, phi);
    branch.points.push_back(std::move(p0));
  }

  const double dtheta_full = sp.theta_max / sp.steps;
  const double dtheta_min = dtheta_full / 1024.0;
  double theta = 0.0;
  double dtheta = dtheta_full;
  Vector v = v0;
  while (theta < sp.theta_max * (1.0 - 1e-12)) {
    const double theta_try = std::min(theta + dtheta, sp.theta_max);
    Vector v_try = v;
    if (!corrector(op, sp, theta_try, v_try)) {
      dtheta *= 0.5;
      if (dtheta < dtheta_min) {
        if (branch.points.size() == 1) {
          throw SolverError("continue_theta: corrector failed at the first step");
        }
        return branch;  // early stop, reported outcome
      }
      continue;
    }
    Vector rhs(v_try.size());
    for (Eigen::Index i = 0; i < v_try.size(); ++i) {
      rhs[i] = std::pow(v_try[i], sp.p) - theta_try * std::pow(v_try[i], -sp.gamma);
    }
    BranchPoint bp;
    bp.theta = theta_try;
    bp.residual = (v_try - op.apply(rhs)).cwiseAbs().maxCoeff();
    bp.cone_inf = cone_inf(v_try, phi);
    bp.v = v_try;
    if (bp.cone_inf < cone_floor) {
      branch.exited_cone = true;
      return branch;  // end of the admissible theta range at this resolution
    }
    branch.points.push_back(std::move(bp));
    v = v_try;
    theta = theta_try;
    dtheta = std::min(dtheta * 2.0, dtheta_full);
  }
  branch.reached_theta_max = true;
  return branch;
}

SiBarrier si_barrier(const GreenOperator& op, const ProblemSpec& spec, const SemipositoneSpec& sp,
                     const Vector& v_theta, double theta, double k) {
  if (!(theta >= 0.0)) throw std::invalid_argument("si_barrier: theta must be nonnegative");
  if (v_theta.minCoeff() <= 0.0) {
    throw std::domain_error("si_barrier: branch point must be positive");
  }
  const Grid& grid = op.grid();
  const int n = grid.n;
  const double expn = spec.s * (spec.q + 1.0);

  // sign condition per node
  std::vector<char> holds(n);
  for (int i = 0; i < n; ++i) {
    const double v = v_theta[i];
    const double xi = std::pow(v, sp.p) - theta * std::pow(v, -sp.gamma) +
                      k * v / std::pow(grid.delta[i], expn);
    holds[i] = xi <= 0.0 ? 1 : 0;
  }
  // scan nodes by increasing boundary distance; eta = delta of first violator
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return grid.delta[a] < grid.delta[b]; });
  SiBarrier out;
  out.v = v_theta;
  for (const int i : idx) {
    if (!holds[i]) {
      out.found = out.strip_nodes > 0;
      out.eta = out.found ? grid.delta[i] : 0.0;
      return out;
    }
    ++out.strip_nodes;
  }
  out.eta = 1.0;
  out.found = true;
  return out;
}

}  // namespace fracsing
