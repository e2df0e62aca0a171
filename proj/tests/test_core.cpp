#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fracsing/grid.hpp"
#include "fracsing/nonlinearity.hpp"
#include "fracsing/problem_spec.hpp"

using namespace fracsing;

TEST_CASE("make_grid: symmetry and partition of unity") {
  const Grid g = make_grid(8);
  CHECK(g.n == 8);
  for (int j = 0; j < 4; ++j) {
    CHECK(g.nodes[j] == -g.nodes[7 - j]);
  }
  CHECK(std::fabs(g.weights.sum() - 2.0) < 1e-12);
  CHECK(g.weights.minCoeff() > 0.0);
  CHECK(g.delta.minCoeff() > 0.0);
  for (int j = 1; j < 8; ++j) CHECK(g.nodes[j] > g.nodes[j - 1]);
}

TEST_CASE("make_grid: N too small rejected") {
  CHECK_THROWS_AS(make_grid(7), ConfigError);
  CHECK_THROWS_AS(make_grid(16, "uniform"), ConfigError);
}

TEST_CASE("grid weights reproduce low-degree polynomial integrals") {
  for (const int n : {8, 33, 128}) {
    const Grid g = make_grid(n);
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;
    for (int j = 0; j < n; ++j) {
      i0 += g.weights[j];
      i1 += g.weights[j] * g.nodes[j];
      i2 += g.weights[j] * g.nodes[j] * g.nodes[j];
    }
    CHECK(std::fabs(i0 - 2.0) < 1e-10);
    CHECK(std::fabs(i1) < 1e-10);
    CHECK(std::fabs(i2 - 2.0 / 3.0) < 1e-10);
  }
}

TEST_CASE("interpolation resolves the boundary profile at N=512") {
  const double s = 0.25;
  const Grid g = make_grid(512);
  Vector prof(g.n);
  for (int i = 0; i < g.n; ++i) prof[i] = std::pow(1.0 - g.nodes[i] * g.nodes[i], s);
  double err = 0.0;
  for (int k = 0; k <= 20000; ++k) {
    const double x = -1.0 + 2.0 * k / 20000.0;
    const double exact = x <= -1.0 || x >= 1.0 ? 0.0 : std::pow(1.0 - x * x, s);
    err = std::max(err, std::fabs(interpolate(g, prof, x, s) - exact));
  }
  CHECK(err < 1e-3);
}

TEST_CASE("exemplar nonlinearity values") {
  const Nonlinearity nl = Nonlinearity::exemplar(2.0, 1.0 / 3.0, 1.0);
  const NonlinearityValues v0 = nl.eval(0.0);
  CHECK(v0.f == 1.0);
  CHECK(v0.ftilde == 0.0);
  CHECK(nl.f(-1.0) == 1.0);     // extension rule
  CHECK(nl.ftilde(-1.0) == 0.0);
  // all four values finite for t > 0
  const NonlinearityValues v = nl.eval(0.7);
  CHECK(std::isfinite(v.f));
  CHECK(std::isfinite(v.fprime));
  CHECK(std::isfinite(v.f0));
  CHECK(std::isfinite(v.ftilde));
}

TEST_CASE("exemplar f0 monotone interval: roots of u^2 - 8u + 4") {
  const auto [lo, hi] = exemplar_f0_monotone_interval(2.0, 1.0 / 3.0);
  CHECK(lo == doctest::Approx(4.0 - 2.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(hi == doctest::Approx(4.0 + 2.0 * std::sqrt(3.0)).epsilon(1e-12));
  // f0 indeed increasing inside, decreasing outside (sampled)
  const Nonlinearity nl = Nonlinearity::exemplar(2.0, 1.0 / 3.0, 1.0);
  CHECK(nl.f0(1.0) < nl.f0(2.0));
  CHECK(nl.f0(0.2) > nl.f0(0.4));
  CHECK(nl.f0(8.0) > nl.f0(9.0));
}

TEST_CASE("exemplar satisfies (f1)-(f3), boundedness, and ftilde sign") {
  const double alpha = 2.0;
  const Nonlinearity nl = Nonlinearity::exemplar(alpha, 1.0 / 3.0, 1.5);
  CHECK(nl.f_at_zero() > 0.0);
  const double cap = std::exp(alpha);
  for (int i = 0; i <= 2000; ++i) {
    const double t = 50.0 * i / 2000.0;
    CHECK(nl.fprime(t) >= 0.0);
    CHECK(nl.f(t) <= cap + 1e-12);
    CHECK(nl.ftilde(t) >= 0.0);
  }
  CHECK(nl.ftilde(-3.0) == 0.0);
}

TEST_CASE("(h1) constant keeps ftilde + kt increasing") {
  const Nonlinearity nl = Nonlinearity::exemplar(2.0, 1.0 / 3.0, 2.0);
  const double k = nl.k_tilde();
  CHECK(k > 0.0);
  double prev = -1e300;
  for (int i = 1; i <= 5000; ++i) {
    const double t = 100.0 * i / 5000.0;
    const double v = nl.ftilde(t) + k * t;
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
}

TEST_CASE("custom nonlinearity validation") {
  // violates (f1)
  CHECK_THROWS_AS(Nonlinearity::custom(
                      "bad", [](double) { return 0.0; }, [](double) { return 0.0; }, 0.5, 1.0),
                  ConfigError);
  // violates (f3)
  CHECK_THROWS_AS(Nonlinearity::custom(
                      "dec", [](double t) { return 2.0 - t; }, [](double) { return -1.0; }, 0.5, 1.0),
                  ConfigError);
  // violates (f2): grows like t^2 >> t^{q+1}
  CHECK_THROWS_AS(Nonlinearity::custom(
                      "fast", [](double t) { return 1.0 + t * t; }, [](double t) { return 2.0 * t; },
                      0.5, 1.0),
                  ConfigError);
  // a valid bounded one passes
  const Nonlinearity ok = Nonlinearity::custom(
      "atan", [](double t) { return 1.0 + std::atan(t); },
      [](double t) { return 1.0 / (1.0 + t * t); }, 0.5, 1.0);
  CHECK(ok.f_at_zero() == 1.0);
}

TEST_CASE("cone norms") {
  const Grid g = make_grid(16);
  Vector phi(g.n);
  for (int i = 0; i < g.n; ++i) phi[i] = std::pow(g.delta[i], 0.25);
  SUBCASE("constant ratio") {
    const Vector u = 2.0 * phi;
    CHECK(cone_norm(u, phi) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(cone_inf(u, phi) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("zero function") { CHECK(cone_norm(Vector::Zero(g.n), phi) == 0.0); }
  SUBCASE("one node negated") {
    Vector u = phi;
    u[3] = -phi[3];
    CHECK(cone_inf(u, phi) == doctest::Approx(-1.0).epsilon(1e-14));
  }
  SUBCASE("nonpositive phi rejected") {
    Vector bad = phi;
    bad[0] = 0.0;
    CHECK_THROWS_AS(cone_norm(phi, bad), std::domain_error);
  }
}

TEST_CASE("order_compare") {
  const int n = 12;
  Vector u = Vector::LinSpaced(n, 0.0, 1.0);
  CHECK(order_compare(u, u, 1e-12) == Ordering::Equal);
  CHECK(order_compare(u + Vector::Ones(n), u, 1e-12) == Ordering::GreaterEqual);
  CHECK(order_compare(u, u + Vector::Ones(n), 1e-12) == Ordering::LessEqual);
  Vector v = u;
  v[0] += 1.0;
  v[n - 1] -= 1.0;
  CHECK(order_compare(u, v, 1e-12) == Ordering::Incomparable);
  CHECK_THROWS_AS(order_compare(u, Vector::Zero(5), 1e-12), std::invalid_argument);
}

TEST_CASE("problem spec validation and config round trip") {
  ProblemSpec spec;
  spec.validate();  // defaults are consistent

  ProblemSpec bad = spec;
  bad.s = 0.75;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.alpha = 1.0;  // alpha <= 4q
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.sigma2 = 12.0;  // outside the exemplar monotonicity interval for alpha=2
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  spec.lambda = 0.125;
  spec.n = 64;
  const std::string path = (std::filesystem::temp_directory_path() / "fracsing_spec.cfg").string();
  spec.to_file(path);
  const ProblemSpec back = ProblemSpec::from_file(path);
  CHECK(back.s == spec.s);
  CHECK(back.q == spec.q);
  CHECK(back.lambda == spec.lambda);
  CHECK(back.alpha == spec.alpha);
  CHECK(back.sigma1 == spec.sigma1);
  CHECK(back.sigma2 == spec.sigma2);
  CHECK(back.n == spec.n);
  CHECK(back.grading == spec.grading);
  CHECK(back.tol_residual == spec.tol_residual);
  CHECK(back.tol_order == spec.tol_order);
  CHECK(back.eps_min == spec.eps_min);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(ProblemSpec::from_string("nonsense=1"), ConfigError);
  CHECK_THROWS_AS(ProblemSpec::from_string("s"), ConfigError);
}
