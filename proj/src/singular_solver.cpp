#include "fracsing/singular_solver.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace fracsing {

namespace {

double energy_value(const Matrix& A, const Vector& w, const Vector& g, double c, double q,
                    double eps, double shift, const Vector& z) {
  double e = 0.5 * z.dot(A * z);
  if (shift != 0.0) e += 0.5 * shift * z.dot(w.cwiseProduct(z));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    e -= w[i] * (c / (1.0 - q) * std::pow(z[i] + eps, 1.0 - q) + g[i] * z[i]);
  }
  return e;
}

}  // namespace

double energy_regularized(const GreenOperator& op, const Vector& g, double c_sing, double q,
                          double eps, double shift, const Vector& z) {
  return energy_value(op.stiffness(), op.masses(), g, c_sing, q, eps, shift, z);
}

Vector energy_regularized_gradient(const GreenOperator& op, const Vector& g, double c_sing,
                                   double q, double eps, double shift, const Vector& z) {
  const Vector& w = op.masses();
  Vector grad = op.stiffness() * z -
                w.cwiseProduct(c_sing * (z.array() + eps).pow(-q).matrix() + g);
  if (shift != 0.0) grad += shift * w.cwiseProduct(z);
  return grad;
}

RegularizedSolve solve_regularized(const GreenOperator& op, const Vector& g, double c_sing,
                                   double q, double eps, const Vector& z0, double shift,
                                   const SolveOptions& opts) {
  const int n = op.size();
  if (g.size() != n || z0.size() != n) throw std::invalid_argument("solve_regularized: size mismatch");
  if (!(c_sing > 0.0)) throw std::invalid_argument("solve_regularized: c_sing must be positive");
  if (g.minCoeff() < 0.0) throw std::invalid_argument("solve_regularized: g must be nonnegative");
  if (eps < 0.0 || (eps == 0.0 && z0.minCoeff() <= 0.0)) {
    throw std::invalid_argument("solve_regularized: eps > 0, or eps = 0 with positive z0");
  }
  const Matrix& A = op.stiffness();
  const Vector& w = op.masses();

  Vector z = z0.cwiseMax(1e-300);
  RegularizedSolve out;
  out.eps = eps;

  int restarts = 0;
  const double zscale_floor = 1.0;
  for (int it = 0; it < opts.max_newton; ++it) {
    Vector sing = (z.array() + eps).pow(-q).matrix();
    Vector grad = A * z - w.cwiseProduct(c_sing * sing + g);
    if (shift != 0.0) grad += shift * w.cwiseProduct(z);

    Matrix H = A;
    for (int i = 0; i < n; ++i) {
      H(i, i) += w[i] * (shift + c_sing * q * std::pow(z[i] + eps, -q - 1.0));
    }
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success) {
      throw SolverError("solve_regularized: Newton Hessian lost positive definiteness");
    }
    Vector d = llt.solve(-grad);
    const double zscale = std::max(1.0, z.cwiseAbs().maxCoeff());
    const double dn = d.cwiseAbs().maxCoeff();
    if (dn <= opts.tol * zscale) break;

    // fraction-to-boundary: keep z + t d > 0
    double tmax = 1.0;
    for (int i = 0; i < n; ++i) {
      if (d[i] < 0.0) tmax = std::min(tmax, -0.95 * z[i] / d[i]);
    }
    double t = std::min(1.0, tmax);
    if (dn <= 1e-6 * zscale) {
      // quadratic tail: energy differences are at roundoff, take the full step
      z += t * d;
      out.newton_iters = it + 1;
      continue;
    }
    const double e0 = energy_value(A, w, g, c_sing, q, eps, shift, z);
    const double gd = grad.dot(d);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vector zt = z + t * d;
      if (zt.minCoeff() > 0.0 &&
          energy_value(A, w, g, c_sing, q, eps, shift, zt) <= e0 + 1e-4 * t * gd) {
        z = zt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (++restarts > 2) throw SolverError("solve_regularized: line search failed repeatedly");
      z = z.cwiseMax(1e-8 * std::max(zscale_floor, z.maxCoeff()));  // damped restart
      continue;
    }
    out.newton_iters = it + 1;
  }

  Vector sing = (z.array() + eps).pow(-q).matrix();
  Vector grad = A * z - w.cwiseProduct(c_sing * sing + g);
  if (shift != 0.0) grad += shift * w.cwiseProduct(z);
  out.grad_norm = grad.cwiseAbs().maxCoeff();
  // residual in resolvent form
  Vector rhs = w.cwiseProduct(c_sing * sing + g);
  Vector zr;
  if (shift == 0.0) {
    zr = op.kernel_core() * rhs;
  } else {
    Matrix H = A;
    H.diagonal() += shift * w;
    zr = Eigen::LLT<Matrix>(H).solve(rhs);
  }
  out.residual = (z - zr).cwiseAbs().maxCoeff();
  out.energy = energy_value(A, w, g, c_sing, q, eps, shift, z);
  out.z = std::move(z);
  return out;
}

SingularSolve solve_singular(const GreenOperator& op, const Vector& g, double c_sing, double q,
                             double eps0, double eps_min, double tol_residual, const Vector* warm,
                             double shift) {
  SingularSolve out;
  Vector z = warm != nullptr && warm->size() == op.size() && warm->minCoeff() > 0.0
                 ? *warm
                 : Vector(op.apply((c_sing + g.array()).matrix()).cwiseMax(1e-12));
  double eps = eps0;
  Vector zprev = z;
  while (true) {
    RegularizedSolve r = solve_regularized(op, g, c_sing, q, eps, z, shift);
    z = r.z;
    out.eps_trace.emplace_back(eps, z.cwiseAbs().maxCoeff());
    if (eps <= eps_min) break;
    if (out.eps_trace.size() > 1 && sup_dist(z, zprev) < tol_residual / 10.0) break;
    zprev = z;
    eps = std::max(eps * 0.5, eps_min);
  }
  // final polish at eps = 0 so the certified residual is the unregularized one
  RegularizedSolve r = solve_regularized(op, g, c_sing, q, 0.0, z, shift);
  z = r.z;
  out.eps_trace.emplace_back(0.0, z.cwiseAbs().maxCoeff());
  out.residual = r.residual;
  if (out.residual > tol_residual) {
    throw SolverError("solve_singular: residual " + std::to_string(out.residual) +
                      " above tol_residual; refine the grid or loosen the tolerance");
  }
  out.z = std::move(z);
  return out;
}

Vector solve_pure_singular(const GreenOperator& op, double q, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("solve_pure_singular: c must be positive");
  const Vector g = Vector::Zero(op.size());
  SingularSolve r = solve_singular(op, g, c, q, 1.0, 1e-10, 1e-9);
  return r.z;
}

double residual_P(const GreenOperator& op, const ProblemSpec& spec, const Vector& u) {
  if (u.size() != op.size()) throw std::invalid_argument("residual_P: size mismatch");
  if (u.minCoeff() <= 0.0) {
    throw std::domain_error("residual_P: u must be positive at all interior nodes");
  }
  const Nonlinearity nl = spec.nonlinearity();
  Vector rhs(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    rhs[i] = spec.lambda * nl.f(u[i]) / std::pow(u[i], spec.q);
  }
  return (u - op.apply(rhs)).cwiseAbs().maxCoeff();
}

TContext::TContext(const GreenOperator& op, const ProblemSpec& spec)
    : op_(op), spec_(spec), nl_(spec.nonlinearity()), w_(solve_pure_singular(op, spec.q, 1.0)) {
  spec_.validate();
}

TContext::TContext(const GreenOperator& op, const ProblemSpec& spec, Vector w)
    : op_(op), spec_(spec), nl_(spec.nonlinearity()), w_(std::move(w)) {}

TResult TContext::apply(const Vector& u) const {
  const double c = spec_.lambda * nl_.f_at_zero();
  const Vector g = nl_.ftilde(u);
  SingularSolve r = solve_singular(op_, g, c, spec_.q, 1.0, spec_.eps_min, spec_.tol_residual);

  TResult out;
  out.eps_trace = std::move(r.eps_trace);
  out.residual = r.residual;
  out.cone_lower = cone_inf(r.z, phi1());
  if (!(out.cone_lower > 0.0)) {
    throw SolverError("apply_T: result left the positive cone of phi_1s");
  }

  // barrier m phi <= z: bisect m on the subsolution inequality (wd1)
  const double lam1 = lambda1();
  const Vector& phi = phi1();
  double m = 1.0;
  const auto m_ok = [&](double mv) {
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      if (mv * lam1 * phi[i] > g[i] + c / std::pow(mv * phi[i] + 1.0, spec_.q)) return false;
    }
    return true;
  };
  while (!m_ok(m) && m > 1e-12) m *= 0.5;
  if (m <= 1e-12) throw SolverError("apply_T: no admissible lower barrier constant");
  out.m_lower = m;

  // barrier z <= M w: smallest dyadic-bisected M with
  // M (1/w^q - lambda f(0)/(M w)^q) > ftilde(u), i.e.
  // M - c M^{1-q} > max(ftilde(u) w^q)
  double beta = 0.0;
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    beta = std::max(beta, g[i] * std::pow(w_[i], spec_.q));
  }
  const auto M_ok = [&](double M) { return M - c * std::pow(M, 1.0 - spec_.q) > beta; };
  double Mhi = 1.0;
  while (!M_ok(Mhi)) {
    Mhi *= 2.0;
    if (Mhi > std::ldexp(1.0, 60)) throw SolverError("apply_T: upper barrier search overflow");
  }
  double Mlo = Mhi * 0.5;
  for (int i = 0; i < 60 && Mhi > 1.0; ++i) {
    const double mid = 0.5 * (Mlo + Mhi);
    (M_ok(mid) ? Mhi : Mlo) = mid;
  }
  out.M_upper = Mhi;

  const double tol = spec_.tol_order;
  if ((out.m_lower * phi - r.z).maxCoeff() > tol) {
    throw SolverError("apply_T: lower barrier m phi_1s <= z violated");
  }
  if ((r.z - out.M_upper * w_).maxCoeff() > tol * std::max(1.0, out.M_upper)) {
    throw SolverError("apply_T: upper barrier z <= M w violated");
  }
  out.z = std::move(r.z);
  return out;
}

Vector TContext::apply_fast(const Vector& u, const Vector& warm, double shift) const {
  const double c = spec_.lambda * nl_.f_at_zero();
  Vector g = nl_.ftilde(u);
  if (shift != 0.0) g += shift * u.cwiseMax(0.0);
  RegularizedSolve r = solve_regularized(op_, g, c, spec_.q, 0.0, warm, shift);
  if (r.residual > spec_.tol_residual) {
    // cold continuation fallback
    SingularSolve rs = solve_singular(op_, g, c, spec_.q, 1.0, spec_.eps_min, spec_.tol_residual,
                                      nullptr, shift);
    return rs.z;
  }
  return r.z;
}

TResult apply_T(const GreenOperator& op, const ProblemSpec& spec, const Vector& u) {
  return TContext(op, spec).apply(u);
}

}  // namespace fracsing
