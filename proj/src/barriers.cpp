#include "fracsing/barriers.hpp"

#include <cmath>
#include <sstream>

namespace fracsing {

namespace {

// golden-section minimization of a unimodal function on [a,b]
double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

Vector rhs_P(const ProblemSpec& spec, const Nonlinearity& nl, const Vector& v) {
  Vector r(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    r[i] = spec.lambda * nl.f(v[i]) / std::pow(v[i], spec.q);
  }
  return r;
}

}  // namespace

TruncationH::TruncationH(const Nonlinearity& nl, double sigma1, double sigma2)
    : nl_(nl), sigma1_(sigma1), sigma2_(sigma2) {
  // coarse sample of f0 on (0, sigma1], then golden-section refinement
  const int ns = 2048;
  const double floor = sigma1 * 1e-9;
  double best_t = sigma1, best_v = nl_.f0(sigma1);
  for (int i = 0; i < ns; ++i) {
    const double t = floor + (sigma1 - floor) * (i + 0.5) / ns;
    const double v = nl_.f0(t);
    if (v < best_v) {
      best_v = v;
      best_t = t;
    }
  }
  const double half = (sigma1 - floor) / ns;
  const double lo = std::max(floor, best_t - half);
  const double hi = std::min(sigma1, best_t + half);
  sigma_ = golden_min([&](double t) { return nl_.f0(t); }, lo, hi, 1e-14);
  fstar_ = nl_.f0(sigma_);

  // validation: h nondecreasing on (0, sigma2], h <= f0, on dense samples
  const int nv = 10000;
  double prev = fstar_;
  for (int i = 1; i <= nv; ++i) {
    const double u = sigma2 * i / nv;
    const double hu = (*this)(u);
    if (hu < prev - 1e-10 * std::max(1.0, std::fabs(prev))) {
      throw ConfigError("build_h: truncation not nondecreasing near u=" + std::to_string(u) +
                        " (f/u^q not unimodal on (0, sigma1]?)");
    }
    if (hu > nl_.f0(u) + 1e-10 * std::fabs(hu)) {
      throw ConfigError("build_h: domination h <= f/u^q fails near u=" + std::to_string(u));
    }
    prev = hu;
  }
}

double TruncationH::operator()(double u) const {
  if (u <= sigma_) return fstar_;
  if (u >= sigma1_) return nl_.f0(u);
  return nl_.f0(u);  // running min equals f0 on [sigma, sigma1] for unimodal f0
}

Vector TruncationH::apply(const Vector& u) const {
  Vector r(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) r[i] = (*this)(u[i]);
  return r;
}

TruncationH build_h(const Nonlinearity& nl, const ProblemSpec& spec) {
  return TruncationH(nl, spec.sigma1, spec.sigma2);
}

double subsolution_margin(const GreenOperator& op, const ProblemSpec& spec, const Vector& v) {
  const Nonlinearity nl = spec.nonlinearity();
  return (v - op.apply(rhs_P(spec, nl, v))).maxCoeff();
}

double supersolution_margin(const GreenOperator& op, const ProblemSpec& spec, const Vector& v) {
  const Nonlinearity nl = spec.nonlinearity();
  return (op.apply(rhs_P(spec, nl, v)) - v).maxCoeff();
}

FirstPair first_pair(const GreenOperator& op, const ProblemSpec& spec, const Vector& w,
                     const EigenPair& eig) {
  (void)op;
  const Nonlinearity nl = spec.nonlinearity();
  const double q = spec.q;
  const double lam = spec.lambda;
  const double wsup = w.maxCoeff();

  // smallest M >= 1 with M^{1+q} >= lambda f(M ||w||)
  const auto M_ok = [&](double M) { return std::pow(M, 1.0 + q) >= lam * nl.f(M * wsup); };
  double M = 1.0;
  if (!M_ok(M)) {
    double Mhi = 2.0;
    while (!M_ok(Mhi)) {
      Mhi *= 2.0;
      if (Mhi > std::ldexp(1.0, 60)) throw SolverError("first_pair: M_lambda bracket overflow");
    }
    double Mlo = Mhi * 0.5;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (Mlo + Mhi);
      (M_ok(mid) ? Mhi : Mlo) = mid;
    }
    M = Mhi;
  }

  FirstPair out;
  out.M_lambda = M;
  out.theta1 = M * w;

  // largest dyadic m with lambda_1s m phi <= lambda f(m phi)/(m phi)^q and m phi <= theta1
  const Vector& phi = eig.vector;
  const auto m_ok = [&](double m) {
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      const double mp = m * phi[i];
      if (eig.value * mp > lam * nl.f(mp) / std::pow(mp, q)) return false;
      if (mp > out.theta1[i]) return false;
    }
    return true;
  };
  double m = 1.0;
  while (!m_ok(m)) {
    m *= 0.5;
    if (m < 1e-12) throw SolverError("first_pair: no admissible m_lambda above 1e-12");
  }
  out.m_lambda = m;
  out.zeta1 = m * phi;
  return out;
}

Vector second_supersolution(const GreenOperator& op, const ProblemSpec& spec, const Vector& w) {
  (void)op;
  const Nonlinearity nl = spec.nonlinearity();
  const double wsup = w.maxCoeff();
  const double bound = std::pow(spec.sigma1, spec.q + 1.0) /
                       (nl.f(spec.sigma1) * std::pow(wsup, spec.q + 1.0));
  if (spec.lambda > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "second_supersolution: lambda = " << spec.lambda
       << " violates lambda <= sigma1^{q+1}/(f(sigma1) ||w||^{q+1}) = " << bound;
    throw ConfigError(os.str());
  }
  return (spec.sigma1 / wsup) * w;
}

Vector second_subsolution(const GreenOperator& op, const ProblemSpec& spec, const TruncationH& h,
                          double R, double a) {
  if (!(a > spec.sigma1 && a <= spec.sigma2)) {
    throw ConfigError("second_subsolution: a must lie in (sigma1, sigma2]");
  }
  const OperatorConstants oc = constants(op, R);
  const double ha = h(a);
  const double lam_lo = oc.M2 * a / ha;
  const double lam_hi = oc.M3 * spec.sigma2 / ha;
  const double slack = 1e-12 * std::max(1.0, lam_hi);
  if (spec.lambda < lam_lo - slack || spec.lambda > lam_hi + slack) {
    std::ostringstream os;
    os << "second_subsolution: lambda = " << spec.lambda << " outside [M2 a/h(a), M3 sigma2/h(a)] = ["
       << lam_lo << ", " << lam_hi << "]";
    throw ConfigError(os.str());
  }
  const Vector chi = indicator_ball(op.grid(), R);
  const Vector v = a * chi;
  const Vector v1 = spec.lambda * op.apply(h.apply(v));

  double min_in_ball = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v1.size(); ++i) {
    if (chi[i] > 0.0) min_in_ball = std::min(min_in_ball, v1[i]);
  }
  const double tol = spec.tol_order;
  if (min_in_ball < a - tol * std::max(1.0, a)) {
    std::ostringstream os;
    os << "second_subsolution: v1 >= a fails on [-R,R], min v1 = " << min_in_ball << " < a = " << a
       << " (margin " << a - min_in_ball << ")";
    throw SolverError(os.str());
  }
  if (v1.maxCoeff() > spec.sigma2 + tol * std::max(1.0, spec.sigma2)) {
    std::ostringstream os;
    os << "second_subsolution: v1 <= sigma2 fails, max v1 = " << v1.maxCoeff()
       << " > sigma2 = " << spec.sigma2;
    throw SolverError(os.str());
  }
  if (v1.minCoeff() <= 0.0) {
    throw SolverError("second_subsolution: v1 not positive at all interior nodes");
  }
  return v1;
}

WindowReport lambda_window(const GreenOperator& op, const ProblemSpec& spec, const TruncationH& h,
                           const Vector& w, double R) {
  const Nonlinearity nl = spec.nonlinearity();
  const OperatorConstants oc = constants(op, R);
  WindowReport rep;
  rep.M2 = oc.M2;
  rep.M3 = oc.M3;
  rep.C1 = oc.C1;
  rep.R = R;
  rep.w_sup = w.maxCoeff();
  const double lam2a =
      std::pow(spec.sigma1, spec.q + 1.0) / (nl.f(spec.sigma1) * std::pow(rep.w_sup, spec.q + 1.0));

  const int ns = 4000;
  const auto eval_at = [&](double a) {
    const double ha = h(a);
    const double l1 = oc.M2 * a / ha;
    const double l2b = oc.M3 * spec.sigma2 / ha;
    return std::make_tuple(l1, std::min(lam2a, l2b), l2b);
  };
  // a_star = argmin a/h(a) on a dense grid of (sigma1, sigma2]
  double a_star = spec.sigma2, best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= ns; ++i) {
    const double a = spec.sigma1 + (spec.sigma2 - spec.sigma1) * i / ns;
    const double v = a / h(a);
    if (v < best) {
      best = v;
      a_star = a;
    }
  }
  {
    auto [l1, l2, l2b] = eval_at(a_star);
    (void)l2b;
    rep.a_star = a_star;
    rep.lambda1 = l1;
    rep.lambda2 = l2;
    rep.empty = !(l1 <= l2);
  }
  if (rep.empty) {
    // fallback: widest window over the same grid, if any a admits one
    double best_width = 0.0;
    for (int i = 1; i <= ns; ++i) {
      const double a = spec.sigma1 + (spec.sigma2 - spec.sigma1) * i / ns;
      auto [c1, c2, c2b] = eval_at(a);
      (void)c2b;
      if (c1 <= c2 && c2 - c1 > best_width) {
        best_width = c2 - c1;
        rep.a_star = a;
        rep.lambda1 = c1;
        rep.lambda2 = c2;
        rep.empty = false;
        rep.fallback_used = true;
      }
    }
  }
  {
    auto [c1, c2, c2b] = eval_at(rep.a_star);
    (void)c1;
    (void)c2;
    rep.binding = lam2a <= c2b ? "sigma1^{q+1}/(f(sigma1) ||w||^{q+1})" : "M3 sigma2/h(a)";
  }
  return rep;
}

BarrierSet build_barriers(const GreenOperator& op, const ProblemSpec& spec, const TruncationH& h,
                          const Vector& w, const EigenPair& eig, double R) {
  const WindowReport win = lambda_window(op, spec, h, w, R);
  if (win.empty) {
    throw ConfigError("build_barriers: the admissible window [lambda1, lambda2] is empty");
  }
  if (spec.lambda < win.lambda1 - 1e-12 || spec.lambda > win.lambda2 + 1e-12) {
    std::ostringstream os;
    os << "build_barriers: lambda = " << spec.lambda << " outside the window [" << win.lambda1
       << ", " << win.lambda2 << "]";
    throw ConfigError(os.str());
  }
  const Nonlinearity nl = spec.nonlinearity();
  BarrierSet bs;
  bs.a = win.a_star;
  bs.lambda1 = win.lambda1;
  bs.lambda2 = win.lambda2;
  bs.w_sup = win.w_sup;
  bs.theta2 = second_supersolution(op, spec, w);
  bs.zeta2 = second_subsolution(op, spec, h, R, win.a_star);

  FirstPair fp = first_pair(op, spec, w, eig);
  bs.M_lambda = fp.M_lambda;
  bs.theta1 = fp.theta1;

  // enlarge M_lambda until zeta2 <= theta1: the admissible set of
  // M^{1+q} >= lambda f(M||w||) need not be an interval (f climbs before it
  // saturates), so scan geometrically from the needed ratio for the next
  // admissible value
  const auto M_ok = [&](double M) {
    return std::pow(M, 1.0 + spec.q) >= spec.lambda * nl.f(M * bs.w_sup);
  };
  const double M_needed = std::max(bs.M_lambda, cone_norm(bs.zeta2, w));
  double M = M_needed;
  int guard = 0;
  while (!M_ok(M)) {
    M *= 1.05;
    if (++guard > 4000) {
      throw SolverError("build_barriers: could not raise M_lambda above zeta2 "
                        "while keeping the supersolution inequality");
    }
  }
  bs.M_lambda = M;
  bs.theta1 = bs.M_lambda * w;

  // shrink m_lambda until zeta1 <= min(zeta2, theta2); the subsolution
  // inequality is rechecked at each halving
  const Vector cap = bs.zeta2.cwiseMin(bs.theta2);
  const Vector& phi = eig.vector;
  double m = fp.m_lambda;
  const auto m_ok = [&](double mv) {
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      const double mp = mv * phi[i];
      if (eig.value * mp > spec.lambda * nl.f(mp) / std::pow(mp, spec.q)) return false;
      if (mp > cap[i]) return false;
    }
    return true;
  };
  while (!m_ok(m)) {
    m *= 0.5;
    if (m < 1e-12) throw SolverError("build_barriers: m_lambda underflow enforcing the lattice");
  }
  bs.m_lambda = m;
  bs.zeta1 = m * phi;
  return bs;
}

}  // namespace fracsing
