#include "fracsing/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

namespace fracsing {

std::pair<double, double> exemplar_f0_monotone_interval(double alpha, double q) {
  // f0' >= 0  <=>  q t^2 + (2 alpha q - alpha^2) t + q alpha^2 <= 0
  const double b = 2.0 * alpha * q - alpha * alpha;
  const double disc = b * b - 4.0 * q * q * alpha * alpha;
  if (disc <= 0.0) {
    throw ConfigError("exemplar_f0_monotone_interval: needs alpha > 4q");
  }
  const double sq = std::sqrt(disc);
  return {(-b - sq) / (2.0 * q), (-b + sq) / (2.0 * q)};
}

Nonlinearity Nonlinearity::exemplar(double alpha, double q, double lambda) {
  Nonlinearity nl;
  nl.name_ = "exemplar";
  nl.exemplar_ = true;
  nl.alpha_ = alpha;
  nl.q_ = q;
  nl.lambda_ = lambda;
  nl.f_fn_ = [alpha](double t) { return std::exp(alpha * t / (alpha + t)); };
  nl.fp_fn_ = [alpha](double t) {
    const double r = alpha / (alpha + t);
    return std::exp(alpha * t / (alpha + t)) * r * r;
  };
  nl.validate_and_profile();
  return nl;
}

Nonlinearity Nonlinearity::custom(std::string name, std::function<double(double)> f,
                                  std::function<double(double)> fprime, double q, double lambda) {
  Nonlinearity nl;
  nl.name_ = std::move(name);
  nl.exemplar_ = false;
  nl.alpha_ = 0.0;
  nl.q_ = q;
  nl.lambda_ = lambda;
  nl.f_fn_ = std::move(f);
  nl.fp_fn_ = std::move(fprime);
  nl.validate_and_profile();
  return nl;
}

void Nonlinearity::validate_and_profile() {
  if (!(q_ > 0.0 && q_ < 1.0)) throw ConfigError("nonlinearity: q must lie in (0,1)");
  if (!(lambda_ > 0.0)) throw ConfigError("nonlinearity: lambda must be positive");
  f0_ = f_fn_(0.0);
  if (!(f0_ > 0.0)) throw ConfigError("nonlinearity: (f1) fails, f(0) <= 0");

  // sampling validator for (f3) and (f2)
  sample_hi_ = exemplar_ ? std::max(100.0, 40.0 * alpha_) : 1e4;
  const int ns = 4000;
  double prev = f0_;
  for (int i = 1; i <= ns; ++i) {
    const double t = sample_hi_ * i / ns;
    const double ft = f_fn_(t);
    if (!std::isfinite(ft)) throw ConfigError("nonlinearity: f not finite at t=" + std::to_string(t));
    if (ft < prev - 1e-12 * std::fabs(prev)) {
      throw ConfigError("nonlinearity: (f3) fails, f decreasing near t=" + std::to_string(t));
    }
    prev = ft;
  }
  // (f2): f(t)/t^{q+1} decaying across the largest samples
  const double g1 = f_fn_(sample_hi_ / 4) / std::pow(sample_hi_ / 4, q_ + 1.0);
  const double g2 = f_fn_(sample_hi_ / 2) / std::pow(sample_hi_ / 2, q_ + 1.0);
  const double g3 = f_fn_(sample_hi_) / std::pow(sample_hi_, q_ + 1.0);
  if (!(g3 < g2 && g2 < g1)) {
    throw ConfigError("nonlinearity: (f2) fails, f(t)/t^{q+1} not vanishing at large t");
  }

  // k_tilde for (h1) and the sampled monotone range of ftilde
  double min_slope = 0.0;
  double mono_hi = sample_hi_;
  bool mono_broken = false;
  double prev_ft = 0.0;
  for (int i = 1; i <= ns; ++i) {
    const double t = sample_hi_ * i / ns;
    const double ft = ftilde(t);
    const double dt = sample_hi_ / ns;
    const double slope = (ft - prev_ft) / dt;
    min_slope = std::min(min_slope, slope);
    if (!mono_broken && slope < -1e-12) {
      mono_hi = t - dt;
      mono_broken = true;
    }
    prev_ft = ft;
  }
  k_tilde_ = std::max(0.0, -min_slope) + 1.0;
  ftilde_mono_hi_ = mono_hi;
  // verify the (h1) certificate on the same sample
  prev_ft = 0.0;
  for (int i = 1; i <= ns; ++i) {
    const double t = sample_hi_ * i / ns;
    const double v = ftilde(t) + k_tilde_ * t;
    if (v < prev_ft - 1e-9 * std::max(1.0, std::fabs(prev_ft))) {
      throw ConfigError("nonlinearity: (h1) certificate failed for computed k_tilde");
    }
    prev_ft = v;
  }
}

double Nonlinearity::f(double t) const { return t <= 0.0 ? f0_ : f_fn_(t); }

double Nonlinearity::fprime(double t) const { return t <= 0.0 ? 0.0 : fp_fn_(t); }

double Nonlinearity::f0(double t) const {
  if (!(t > 0.0)) throw std::domain_error("f0: requires t > 0");
  return f_fn_(t) / std::pow(t, q_);
}

double Nonlinearity::ftilde(double t) const {
  if (t <= 0.0) return 0.0;
  return lambda_ * (f_fn_(t) - f0_) / std::pow(t, q_);
}

NonlinearityValues Nonlinearity::eval(double t) const {
  NonlinearityValues v;
  v.f = f(t);
  v.fprime = fprime(t);
  v.f0 = t > 0.0 ? f0(t) : std::numeric_limits<double>::infinity();
  v.ftilde = ftilde(t);
  return v;
}

Vector Nonlinearity::ftilde(const Vector& u) const {
  Vector g(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) g[i] = ftilde(u[i]);
  return g;
}

Nonlinearity Nonlinearity::with_lambda(double lambda) const {
  Nonlinearity nl = *this;
  nl.lambda_ = lambda;
  nl.validate_and_profile();
  return nl;
}

bool Nonlinearity::satisfies_f5(double threshold) const {
  if (!(threshold > 0.0)) return false;
  const double hi = std::max(sample_hi_, 4.0 * threshold);
  const int ns = 2000;
  double prev = f_fn_(threshold) / std::pow(threshold, q_);
  for (int i = 1; i <= ns; ++i) {
    const double t = threshold + (hi - threshold) * i / ns;
    const double v = f_fn_(t) / std::pow(t, q_);
    if (v > prev + 1e-12 * std::fabs(prev)) return false;
    prev = v;
  }
  return true;
}

}  // namespace fracsing
