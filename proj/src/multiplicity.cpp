#include "fracsing/multiplicity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace fracsing {

namespace {

constexpr int kIterationCap = 500;

FixedPointRun monotone_run(const TContext& ctx, const Vector& y1, const Vector& y2,
                           FixedPointRun::Direction dir) {
  const ProblemSpec& spec = ctx.spec();
  const double tol = spec.tol_order;
  if ((y1 - y2).maxCoeff() > tol) {
    throw std::invalid_argument("fixed_point: interval endpoints not ordered");
  }
  const double shift = ctx.nonlinearity().k_tilde();
  // endpoint certificates
  {
    const Vector Ty1 = ctx.apply_fast(y1, y1.cwiseMax(1e-10), shift);
    if ((y1 - Ty1).maxCoeff() > tol) {
      throw SolverError("fixed_point: lower endpoint is not a discrete subsolution, margin " +
                        std::to_string((y1 - Ty1).maxCoeff()));
    }
    const Vector Ty2 = ctx.apply_fast(y2, y2, shift);
    if ((Ty2 - y2).maxCoeff() > tol) {
      throw SolverError("fixed_point: upper endpoint is not a discrete supersolution, margin " +
                        std::to_string((Ty2 - y2).maxCoeff()));
    }
  }

  FixedPointRun run;
  run.direction = dir;
  run.lower = y1;
  run.upper = y2;
  run.start = dir == FixedPointRun::Direction::Upward ? y1 : y2;

  Vector u = run.start;
  run.iterates_sup.push_back(sup_norm(u));
  double stagnation_ref = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  for (int k = 0; k < kIterationCap; ++k) {
    const Vector un = ctx.apply_fast(u, u.cwiseMax(1e-12), shift);
    const double viol = dir == FixedPointRun::Direction::Upward ? (u - un).maxCoeff()
                                                                : (un - u).maxCoeff();
    if (viol > tol) {
      std::ostringstream os;
      os << "fixed_point: iterate monotonicity violated by " << viol
         << " (discretization too coarse for this lambda?)";
      throw SolverError(os.str());
    }
    const double step = sup_dist(un, u);
    u = un;
    run.iterates_sup.push_back(sup_norm(u));
    run.steps = k + 1;
    if (step < spec.tol_residual / 10.0) break;
    if (step > stagnation_ref * (1.0 - 1e-14)) {
      if (++stagnant >= 10) break;
    } else {
      stagnant = 0;
    }
    stagnation_ref = step;
    if (k + 1 == kIterationCap) {
      throw SolverError("fixed_point: iteration cap reached without convergence");
    }
  }
  // interval membership within tol_order
  if ((y1 - u).maxCoeff() > tol || (u - y2).maxCoeff() > tol) {
    throw SolverError("fixed_point: result left the order interval");
  }
  run.residual = residual_P(ctx.op(), spec, u);
  run.result = std::move(u);
  return run;
}

double dist_to_known(const Vector& u, const std::vector<Vector>& known) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& k : known) d = std::min(d, sup_dist(u, k));
  return d;
}

}  // namespace

FixedPointRun minimal_fixed_point(const TContext& ctx, const Vector& y1, const Vector& y2) {
  return monotone_run(ctx, y1, y2, FixedPointRun::Direction::Upward);
}

FixedPointRun maximal_fixed_point(const TContext& ctx, const Vector& y1, const Vector& y2) {
  return monotone_run(ctx, y1, y2, FixedPointRun::Direction::Downward);
}

std::optional<Vector> deflated_search(const TContext& ctx, const std::vector<Vector>& known,
                                      const std::vector<Vector>& extra_starts) {
  if (known.size() < 2) {
    throw std::invalid_argument("deflated_search: needs at least 2 known solutions");
  }
  const GreenOperator& op = ctx.op();
  const ProblemSpec& spec = ctx.spec();
  const Nonlinearity& nl = ctx.nonlinearity();
  const int n = op.size();
  const double sep_tol = 10.0 * spec.tol_residual;

  const auto residual_map = [&](const Vector& u) -> Vector {
    Vector rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = spec.lambda * nl.f(u[i]) / std::pow(u[i], spec.q);
    return u - op.apply(rhs);
  };
  const auto deflation = [&](const Vector& u) {
    double M = 1.0;
    for (const auto& k : known) {
      const double d2 = std::pow(sup_dist(u, k), 2);
      M *= 1.0 / std::max(d2, 1e-300) + 1.0;
    }
    return M;
  };

  std::vector<Vector> starts;
  for (const double t : {0.25, 0.5, 0.75}) {
    starts.push_back(t * known[0] + (1.0 - t) * known[1]);
  }
  for (const auto& e : extra_starts) {
    starts.push_back(e);
    starts.push_back(0.9 * e);
    starts.push_back(1.1 * e);
  }

  for (const auto& start : starts) {
    Vector u = start.cwiseMax(1e-12);
    bool converged = false;
    for (int it = 0; it < 120; ++it) {
      const Vector R = residual_map(u);
      if (R.cwiseAbs().maxCoeff() <= 0.1 * spec.tol_residual) {
        converged = true;
        break;
      }
      Matrix J = Matrix::Identity(n, n);
      {
        Vector dphi(n);
        for (int i = 0; i < n; ++i) {
          dphi[i] = spec.lambda * (nl.fprime(u[i]) / std::pow(u[i], spec.q) -
                                   spec.q * nl.f(u[i]) / std::pow(u[i], spec.q + 1.0));
        }
        J -= op.kernel_core() * op.masses().cwiseProduct(dphi).asDiagonal();
      }
      Vector d = Eigen::PartialPivLU<Matrix>(J).solve(-R);
      if (!d.allFinite()) break;
      // deflation rescale: Newton step of M(u) R(u) is d / (1 - grad M . d / M)
      const double M = deflation(u);
      double gdotd = 0.0;
      for (const auto& k : known) {
        const Vector diff = u - k;
        Eigen::Index jmax;
        diff.cwiseAbs().maxCoeff(&jmax);
        const double nrm2 = diff[jmax] * diff[jmax];
        const double pk = 1.0 / std::max(nrm2, 1e-300) + 1.0;
        gdotd += (M / pk) * (-2.0 / std::max(nrm2 * nrm2, 1e-300)) * diff[jmax] * d[jmax];
      }
      const double tau = gdotd / M;
      double scale = std::fabs(1.0 - tau) > 0.05 ? 1.0 / (1.0 - tau) : 20.0;
      scale = std::clamp(scale, -20.0, 20.0);
      d *= scale;

      double t = 1.0;
      for (int i = 0; i < n; ++i) {
        if (d[i] < 0.0) t = std::min(t, -0.95 * u[i] / d[i]);
      }
      // backtrack on the deflated merit
      const double merit0 = deflation(u) * R.cwiseAbs().maxCoeff();
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        const Vector ut = u + t * d;
        if (ut.minCoeff() > 0.0) {
          const double merit = deflation(ut) * residual_map(ut).cwiseAbs().maxCoeff();
          if (merit < merit0 || ls >= 20) {
            u = ut;
            moved = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
    if (!converged) continue;
    if (u.minCoeff() <= 0.0) continue;
    if (dist_to_known(u, known) < sep_tol) continue;
    if (residual_P(op, spec, u) > spec.tol_residual) continue;
    return u;
  }
  return std::nullopt;
}

SolutionSet three_solutions(const TContext& ctx, double R) {
  const GreenOperator& op = ctx.op();
  const ProblemSpec& spec = ctx.spec();
  const Nonlinearity& nl = ctx.nonlinearity();
  const TruncationH h = build_h(nl, spec);
  const BarrierSet bs = build_barriers(op, spec, h, ctx.pure_singular(), op.principal(), R);

  SolutionSet out;
  out.lambda = spec.lambda;
  out.sigma1 = spec.sigma1;
  out.a = bs.a;

  const FixedPointRun run1 = maximal_fixed_point(ctx, bs.zeta1, bs.theta2);
  out.u1 = run1.result;
  out.res1 = run1.residual;
  const FixedPointRun run2 = minimal_fixed_point(ctx, bs.zeta2, bs.theta1);
  out.u2 = run2.result;
  out.res2 = run2.residual;
  out.sep12 = sup_dist(out.u1, out.u2);

  if (out.res1 > spec.tol_residual || out.res2 > spec.tol_residual) {
    throw SolverError("three_solutions: fixed point certification failed");
  }

  std::vector<Vector> extra = {bs.zeta2.cwiseMin(bs.theta2)};
  auto u3 = deflated_search(ctx, {out.u1, out.u2}, extra);
  if (u3) {
    out.res3 = residual_P(op, spec, *u3);
    out.sep13 = sup_dist(out.u1, *u3);
    out.sep23 = sup_dist(out.u2, *u3);
    out.u3 = std::move(u3);
  } else {
    out.u3_note = "deflated search found no third solution at this resolution";
  }
  return out;
}

double strong_increasing_gap(const TContext& ctx, const Vector& u1, const Vector& u2) {
  const double tol = ctx.spec().tol_order;
  if ((u1 - u2).maxCoeff() > tol) {
    throw std::invalid_argument("strong_increasing_gap: pair not ordered u1 <= u2");
  }
  if (sup_dist(u1, u2) <= 0.0) {
    throw std::invalid_argument("strong_increasing_gap: pair must be distinct");
  }
  const Vector t1 = ctx.apply(u1).z;
  const Vector t2 = ctx.apply(u2).z;
  return cone_inf(t2 - t1, ctx.phi1());
}

}  // namespace fracsing
