#pragma once

#include "fracsing/singular_solver.hpp"

namespace fracsing {

/// Truncation h of f(u)/u^q: constant fstar = min_{0<t<=sigma1} f(t)/t^q below
/// the interior argmin sigma, the running minimum (= f/t^q itself when f/t^q
/// is unimodal on (0,sigma1]) in between, and f(u)/u^q above sigma1.
/// Nondecreasing on (0, sigma2] and dominated by f(u)/u^q; both properties are
/// validated on a dense sample at construction.
class TruncationH {
 public:
  TruncationH(const Nonlinearity& nl, double sigma1, double sigma2);

  double operator()(double u) const;
  double fstar() const { return fstar_; }
  double sigma() const { return sigma_; }  // argmin of f/t^q on (0, sigma1]
  double sigma1() const { return sigma1_; }

  Vector apply(const Vector& u) const;

 private:
  Nonlinearity nl_;
  double sigma1_, sigma2_;
  double sigma_, fstar_;
};

TruncationH build_h(const Nonlinearity& nl, const ProblemSpec& spec);

/// max_i [ v - K(lambda f(v)/v^q) ]_i : nonpositive (up to tol) iff v is a
/// discrete subsolution. Mirrored for supersolutions.
double subsolution_margin(const GreenOperator& op, const ProblemSpec& spec, const Vector& v);
double supersolution_margin(const GreenOperator& op, const ProblemSpec& spec, const Vector& v);

struct FirstPair {
  Vector zeta1, theta1;
  double m_lambda = 0.0, M_lambda = 0.0;
};

/// theta1 = M_lambda w with the smallest M >= 1 satisfying
/// M^{q+1} >= lambda f(M ||w||_inf); zeta1 = m_lambda phi_{1,s} with the
/// largest dyadic m keeping lambda_{1,s} m phi <= lambda f(m phi)/(m phi)^q
/// nodewise and m phi <= theta1.
FirstPair first_pair(const GreenOperator& op, const ProblemSpec& spec, const Vector& w,
                     const EigenPair& eig);

/// theta2 = sigma1 w / ||w||_inf; requires
/// lambda <= sigma1^{q+1} / (f(sigma1) ||w||^{q+1}).
Vector second_supersolution(const GreenOperator& op, const ProblemSpec& spec, const Vector& w);

/// zeta2 = v1 = lambda K(h(a chi_R)); requires a in (sigma1, sigma2] and
/// lambda in [M2 a/h(a), M3 sigma2/h(a)]. Checks v1 >= a on [-R,R],
/// v1 <= sigma2, v1 > 0.
Vector second_subsolution(const GreenOperator& op, const ProblemSpec& spec, const TruncationH& h,
                          double R, double a);

struct WindowReport {
  double lambda1 = 0.0, lambda2 = 0.0;
  double a_star = 0.0;
  double M2 = 0.0, M3 = 0.0, C1 = 0.0;
  double w_sup = 0.0;
  double R = 0.0;
  bool empty = true;
  bool fallback_used = false;  // a_star from the any-a scan, not argmin a/h(a)
  std::string binding;         // which lambda2 constraint is active
};

/// The admissible window [lambda1, lambda2] =
/// [M2 a/h(a), min{sigma1^{q+1}/(f(sigma1)||w||^{q+1}), M3 sigma2/h(a)}]
/// evaluated at a_star = argmin a/h(a) over a dense grid of (sigma1, sigma2].
/// If empty there, a fallback scan looks for any a with a nonempty window.
/// Emptiness is a reported outcome, not an error.
WindowReport lambda_window(const GreenOperator& op, const ProblemSpec& spec, const TruncationH& h,
                           const Vector& w, double R = 0.5);

struct BarrierSet {
  Vector zeta1, zeta2, theta1, theta2;
  double m_lambda = 0.0, M_lambda = 0.0;
  double a = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;
  double w_sup = 0.0;
};

/// All four barriers with the ordering lattice
/// zeta1 <= zeta2, zeta1 <= theta2, zeta2 <= theta1, theta2 <= theta1 enforced
/// (m_lambda shrunk / M_lambda enlarged as needed; the defining inequalities
/// are retained). Requires lambda inside the window.
BarrierSet build_barriers(const GreenOperator& op, const ProblemSpec& spec, const TruncationH& h,
                          const Vector& w, const EigenPair& eig, double R = 0.5);

}  // namespace fracsing
