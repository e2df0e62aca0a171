#pragma once

#include <functional>
#include <string>

#include "fracsing/grid.hpp"

namespace fracsing {

struct NonlinearityValues {
  double f;       // f(t)
  double fprime;  // f'(t)
  double f0;      // f(t)/t^q
  double ftilde;  // lambda (f(t)-f(0))/t^q, 0 for t <= 0
};

/// Nonlinearity f with its derived quantities, bound to (q, lambda).
///
/// The built-in exemplar is f(t) = exp(alpha t / (alpha + t)) with alpha > 4q.
/// Custom nonlinearities must pass the sampling validator at construction:
/// f(0) > 0, f nondecreasing on a dense positive sample, f(t)/t^{q+1} -> 0 at
/// large samples. For t <= 0 the extension rule f(t) = f(0), ftilde(t) = 0
/// applies.
class Nonlinearity {
 public:
  static Nonlinearity exemplar(double alpha, double q, double lambda);
  static Nonlinearity custom(std::string name, std::function<double(double)> f,
                             std::function<double(double)> fprime, double q, double lambda);

  double f(double t) const;
  double fprime(double t) const;
  double f0(double t) const;      // f(t)/t^q, requires t > 0
  double ftilde(double t) const;  // 0 for t <= 0
  NonlinearityValues eval(double t) const;
  Vector ftilde(const Vector& u) const;

  double q() const { return q_; }
  double lambda() const { return lambda_; }
  double f_at_zero() const { return f0_; }
  const std::string& name() const { return name_; }
  bool is_exemplar() const { return exemplar_; }
  double alpha() const { return alpha_; }

  /// Same nonlinearity rebound to a different lambda.
  Nonlinearity with_lambda(double lambda) const;

  /// (h1) constant: k with ftilde(t) + k t increasing on the sampled range,
  /// computed as max(0, -min sampled ftilde') + 1.
  double k_tilde() const { return k_tilde_; }
  /// Largest sampled T such that ftilde is nondecreasing on [0, T].
  double ftilde_monotone_up_to() const { return ftilde_mono_hi_; }
  /// (f5) check by sampling: f0 decreasing for t > threshold.
  bool satisfies_f5(double threshold) const;

 private:
  Nonlinearity() = default;
  void validate_and_profile();

  std::string name_;
  bool exemplar_ = true;
  double alpha_ = 2.0;
  double q_ = 1.0 / 3.0;
  double lambda_ = 1.0;
  double f0_ = 1.0;  // f(0)
  std::function<double(double)> f_fn_, fp_fn_;
  double k_tilde_ = 0.0;
  double ftilde_mono_hi_ = 0.0;
  double sample_hi_ = 0.0;
};

/// Interval (t-, t+) on which f0 = f/t^q is nondecreasing for the exemplar;
/// the roots of q t^2 + (2 alpha q - alpha^2) t + q alpha^2 = 0. Requires
/// alpha > 4q for real roots.
std::pair<double, double> exemplar_f0_monotone_interval(double alpha, double q);

}  // namespace fracsing
