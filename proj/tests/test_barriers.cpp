#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracsing/barriers.hpp"

using namespace fracsing;

namespace {

// exemplar with a nonempty admissible window (checked below)
ProblemSpec window_spec() {
  ProblemSpec spec;
  spec.alpha = 10.0;
  spec.sigma1 = 1.0;
  spec.sigma2 = 140.0;
  spec.n = 128;
  return spec;
}

struct Shared {
  Grid grid = make_grid(128);
  GreenOperator op = assemble(grid, 0.25);
  Vector w;
  Shared() : w(solve_pure_singular(op, 1.0 / 3.0, 1.0)) {}
};

const Shared& shared() {
  static Shared s;
  return s;
}

}  // namespace

TEST_CASE("truncation h: endpoint values, monotonicity, domination") {
  ProblemSpec spec = window_spec();
  spec.validate();
  const Nonlinearity nl = spec.nonlinearity();
  const TruncationH h = build_h(nl, spec);

  // h(sigma1) continues f/u^q
  CHECK(h(spec.sigma1) == doctest::Approx(nl.f0(spec.sigma1)).epsilon(1e-12));

  // h(0+) = fstar = min of f/t^q over (0, sigma1], attained at an interior argmin
  CHECK(h(0.0) == h.fstar());
  CHECK(h(1e-9) == h.fstar());
  CHECK(h.sigma() > 0.0);
  CHECK(h.sigma() < spec.sigma1);
  double dense_min = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 200000; ++i) {
    dense_min = std::min(dense_min, nl.f0(spec.sigma1 * i / 200000.0));
  }
  CHECK(h.fstar() == doctest::Approx(dense_min).epsilon(1e-8));

  // nondecreasing and dominated on a dense sample of (0, sigma2]
  double prev = h.fstar();
  for (int i = 1; i <= 10000; ++i) {
    const double u = spec.sigma2 * i / 10000.0;
    const double hu = h(u);
    CHECK(hu >= prev - 1e-12 * std::fabs(prev));
    CHECK(hu <= nl.f0(u) * (1.0 + 1e-12));
    prev = hu;
  }
}

TEST_CASE("truncation h on the default exemplar") {
  ProblemSpec spec;  // alpha = 2, sigma1 = 0.6
  const Nonlinearity nl = spec.nonlinearity();
  const TruncationH h = build_h(nl, spec);
  // argmin of f0 on (0, 0.6] is the lower root 4 - 2 sqrt(3) of the
  // monotonicity quadratic
  CHECK(h.sigma() == doctest::Approx(4.0 - 2.0 * std::sqrt(3.0)).epsilon(1e-6));
  CHECK(h.fstar() == doctest::Approx(nl.f0(4.0 - 2.0 * std::sqrt(3.0))).epsilon(1e-10));
}

TEST_CASE("first pair: one-sided residuals and ordering") {
  const Shared& sh = shared();
  ProblemSpec spec = window_spec();
  spec.lambda = 0.08;
  const FirstPair fp = first_pair(sh.op, spec, sh.w, sh.op.principal());

  CHECK(subsolution_margin(sh.op, spec, fp.zeta1) <= spec.tol_order);
  CHECK(supersolution_margin(sh.op, spec, fp.theta1) <= spec.tol_order);
  CHECK((fp.zeta1 - fp.theta1).maxCoeff() <= 0.0);
  CHECK(fp.m_lambda > 0.0);
  CHECK(fp.M_lambda >= 1.0);

  // doubling lambda does not decrease M_lambda
  const FirstPair fp2 = first_pair(sh.op, spec.with_lambda(2.0 * spec.lambda), sh.w,
                                   sh.op.principal());
  CHECK(fp2.M_lambda >= fp.M_lambda);
}

TEST_CASE("second supersolution") {
  const Shared& sh = shared();
  ProblemSpec spec = window_spec();
  const Nonlinearity nl = spec.nonlinearity();
  const double wsup = sh.w.maxCoeff();
  const double bound =
      std::pow(spec.sigma1, spec.q + 1.0) / (nl.f(spec.sigma1) * std::pow(wsup, spec.q + 1.0));

  spec.lambda = 0.5 * bound;
  const Vector th2 = second_supersolution(sh.op, spec, sh.w);
  CHECK(th2.maxCoeff() == doctest::Approx(spec.sigma1).epsilon(1e-14));
  CHECK(supersolution_margin(sh.op, spec, th2) <= spec.tol_order);

  // boundary case passes exactly
  spec.lambda = bound;
  CHECK_NOTHROW(second_supersolution(sh.op, spec, sh.w));
  spec.lambda = bound * (1.0 + 1e-6);
  CHECK_THROWS_AS(second_supersolution(sh.op, spec, sh.w), ConfigError);
}

TEST_CASE("second subsolution claims") {
  const Shared& sh = shared();
  ProblemSpec spec = window_spec();
  const TruncationH h = build_h(spec.nonlinearity(), spec);
  const OperatorConstants oc = constants(sh.op, 0.5);
  const double a = 50.0;
  const double lam_lo = oc.M2 * a / h(a);
  const double lam_hi = oc.M3 * spec.sigma2 / h(a);
  REQUIRE(lam_lo < lam_hi);

  spec.lambda = 0.5 * (lam_lo + lam_hi);
  const Vector z2 = second_subsolution(sh.op, spec, h, 0.5, a);
  double min_in_ball = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sh.grid.n; ++i) {
    if (std::fabs(sh.grid.nodes[i]) <= 0.5) min_in_ball = std::min(min_in_ball, z2[i]);
  }
  CHECK(min_in_ball >= a - spec.tol_order * a);
  CHECK(z2.maxCoeff() <= spec.sigma2 * (1.0 + spec.tol_order));
  CHECK(z2.minCoeff() > 0.0);
  CHECK(subsolution_margin(sh.op, spec, z2) <= spec.tol_order);

  // lambda outside the bracket is rejected with the violated inequality named
  spec.lambda = lam_lo * 0.5;
  CHECK_THROWS_WITH_AS(second_subsolution(sh.op, spec, h, 0.5, a),
                       doctest::Contains("outside [M2 a/h(a), M3 sigma2/h(a)]"), ConfigError);
  spec.lambda = 1.0;
  CHECK_THROWS_AS(second_subsolution(sh.op, spec, h, 0.5, 0.5), ConfigError);  // a <= sigma1
}

TEST_CASE("lambda window: formulas, emptiness, monotone dependence") {
  const Shared& sh = shared();

  SUBCASE("nonempty window for the engineered exemplar") {
    ProblemSpec spec = window_spec();
    const TruncationH h = build_h(spec.nonlinearity(), spec);
    const WindowReport rep = lambda_window(sh.op, spec, h, sh.w);
    CHECK(!rep.empty);
    CHECK(!rep.fallback_used);
    CHECK(rep.lambda1 <= rep.lambda2);
    // the formula at a_star holds to machine precision
    CHECK(rep.lambda1 == doctest::Approx(rep.M2 * rep.a_star / h(rep.a_star)).epsilon(1e-14));
    CHECK(rep.a_star > spec.sigma1);
    CHECK(rep.a_star < spec.sigma2);
    CHECK(rep.M2 >= rep.M3);

    // window consistency: the three constructions succeed across the window
    for (const double t : {0.1, 0.5, 0.9}) {
      ProblemSpec ps = spec.with_lambda(rep.lambda1 + t * (rep.lambda2 - rep.lambda1));
      CHECK_NOTHROW(first_pair(sh.op, ps, sh.w, sh.op.principal()));
      CHECK_NOTHROW(second_supersolution(sh.op, ps, sh.w));
      CHECK_NOTHROW(second_subsolution(sh.op, ps, h, 0.5, rep.a_star));
    }
  }
  SUBCASE("default exemplar: emptiness reported, not thrown") {
    ProblemSpec spec;  // alpha = 2, (sigma1, sigma2) = (0.6, 7)
    const TruncationH h = build_h(spec.nonlinearity(), spec);
    const WindowReport rep = lambda_window(sh.op, spec, h, sh.w);
    CHECK(rep.empty);
    CHECK(rep.lambda1 > rep.lambda2);
  }
  SUBCASE("engineered tiny sigma2 - sigma1 is empty") {
    ProblemSpec spec;
    spec.sigma2 = 0.7;
    const TruncationH h = build_h(spec.nonlinearity(), spec);
    const WindowReport rep = lambda_window(sh.op, spec, h, sh.w);
    CHECK(rep.empty);
  }
  SUBCASE("second argument of lambda2 is nondecreasing in sigma2") {
    ProblemSpec s1 = window_spec();
    ProblemSpec s2 = window_spec();
    s2.sigma2 = 200.0;
    const TruncationH h1 = build_h(s1.nonlinearity(), s1);
    const TruncationH h2 = build_h(s2.nonlinearity(), s2);
    const OperatorConstants oc = constants(sh.op, 0.5);
    const double a = 50.0;  // same a for both
    CHECK(oc.M3 * s2.sigma2 / h2(a) >= oc.M3 * s1.sigma2 / h1(a));
  }
}

TEST_CASE("barrier set: lattice and separation") {
  const Shared& sh = shared();
  ProblemSpec spec = window_spec();
  const TruncationH h = build_h(spec.nonlinearity(), spec);
  const WindowReport rep = lambda_window(sh.op, spec, h, sh.w);
  REQUIRE(!rep.empty);
  spec.lambda = 0.5 * (rep.lambda1 + rep.lambda2);

  const BarrierSet bs = build_barriers(sh.op, spec, h, sh.w, sh.op.principal());
  const double tol = spec.tol_order;

  // ordering lattice
  CHECK((bs.zeta1 - bs.zeta2).maxCoeff() <= tol);
  CHECK((bs.zeta1 - bs.theta2).maxCoeff() <= tol);
  CHECK((bs.zeta2 - bs.theta1).maxCoeff() <= tol);
  CHECK((bs.theta2 - bs.theta1).maxCoeff() <= tol);
  // zeta2 not below theta2: sup-norm separation
  CHECK(order_compare(bs.zeta2, bs.theta2, tol) != Ordering::LessEqual);
  CHECK(order_compare(bs.zeta2, bs.theta2, tol) != Ordering::Equal);
  CHECK(bs.theta2.maxCoeff() == doctest::Approx(spec.sigma1).epsilon(1e-14));
  CHECK(bs.zeta2.maxCoeff() >= bs.a - tol);
  CHECK(bs.a > spec.sigma1);

  // all four one-sided residual certificates
  CHECK(subsolution_margin(sh.op, spec, bs.zeta1) <= tol);
  CHECK(subsolution_margin(sh.op, spec, bs.zeta2) <= tol);
  CHECK(supersolution_margin(sh.op, spec, bs.theta1) <= tol);
  CHECK(supersolution_margin(sh.op, spec, bs.theta2) <= tol);

  // lambda outside the window is rejected
  CHECK_THROWS_AS(
      build_barriers(sh.op, spec.with_lambda(10.0 * rep.lambda2), h, sh.w, sh.op.principal()),
      ConfigError);
}
