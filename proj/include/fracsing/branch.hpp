#pragma once

#include "fracsing/multiplicity.hpp"

namespace fracsing {

struct BranchRow {
  double lambda = 0.0;
  std::string kind;  // minimal | maximal | deflated
  double sup_norm = 0.0;
  double residual = 0.0;
  double cone_inf = 0.0;
  std::string flag;  // empty = ok, else a per-lambda failure note
};

struct BifurcationBranch {
  std::vector<BranchRow> rows;  // sorted by (lambda, sup_norm)
  double lambda1 = 0.0, lambda2 = 0.0;
  bool window_empty = true;
  std::optional<double> empirical_lambda_star;
  // solutions parallel to rows (empty vector for failure rows); kept for the
  // round-trip audit
  std::vector<Vector> solutions;
};

/// Default lambda grid: 40 log-spaced points on [0.01 lambda1, 100 lambda2]
/// when the window is nonempty, else on [1e-2, 1e3].
std::vector<double> default_lambda_grid(const WindowReport& win, int count = 40);

/// Branch tracing over an increasing positive lambda grid: the minimal fixed
/// point on [zeta1, theta1] at every lambda, the full window machinery when
/// lambda lies inside a nonempty [lambda1, lambda2], and Newton continuation
/// seeded from the previous lambda's solutions. Per-lambda failures become
/// flagged rows, the run continues.
BifurcationBranch trace_branch(const GreenOperator& op, const ProblemSpec& spec,
                               const std::vector<double>& lambda_grid);

/// min nodewise of u - Theta_lambda w with Theta_lambda = (lambda f(0))^{1/(1+q)};
/// the lower-bound lemma predicts margin >= -tol_order.
double lower_bound_check(const GreenOperator& op, const ProblemSpec& spec, const Vector& u,
                         double lambda, const Vector& w);

struct UniquenessRow {
  double lambda = 0.0;
  double gap = 0.0;  // sup distance between minimal and maximal fixed points
  double sup_min = 0.0, sup_max = 0.0;
  bool unique = false;
  std::string flag;
};

struct UniquenessReport {
  std::vector<UniquenessRow> rows;
  std::optional<double> lambda_star;     // smallest sampled lambda with all larger unique
  std::optional<double> decay_exponent;  // fitted slope of log gap vs log lambda
  bool f5_validated = false;
};

/// Minimal and maximal fixed points on [zeta1, theta1] per lambda; "unique"
/// when their sup distance < 10 tol_residual. Refuses to report lambda_star
/// when the (f5) sampling validation fails.
UniquenessReport uniqueness_scan(const GreenOperator& op, const ProblemSpec& spec,
                                 const std::vector<double>& lambdas);

// ---- export ----------------------------------------------------------------

/// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string to_csv(const BifurcationBranch& b);
std::string to_json(const BifurcationBranch& b);
std::string to_csv(const UniquenessReport& r);
std::string to_json(const UniquenessReport& r);
std::string to_csv(const WindowReport& w);
std::string to_json(const WindowReport& w);
std::string to_json(const SolutionSet& s, const WindowReport& win);

void write_file(const std::string& path, const std::string& content);

/// Round-trip audit: re-parse an exported branch CSV and re-certify each
/// non-failure row's residual against the in-memory solutions.
bool audit_branch_csv(const std::string& path, const GreenOperator& op, const ProblemSpec& spec,
                      const BifurcationBranch& b);

}  // namespace fracsing
