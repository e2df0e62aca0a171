#include "fracsing/branch.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace fracsing {

namespace {

using nlohmann::json;

struct Candidate {
  Vector u;
  std::string kind;
};

// dedup by sup-distance, keep first kind
void add_candidate(std::vector<Candidate>& cands, Vector u, std::string kind, double tol) {
  for (const auto& c : cands) {
    if (sup_dist(c.u, u) < tol) return;
  }
  cands.push_back({std::move(u), std::move(kind)});
}

Vector newton_continue(const GreenOperator& op, const ProblemSpec& spec, const Nonlinearity& nl,
                       const Vector& seed, bool& ok) {
  const int n = op.size();
  Vector u = seed.cwiseMax(1e-14);
  ok = false;
  for (int it = 0; it < 60; ++it) {
    Vector rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = spec.lambda * nl.f(u[i]) / std::pow(u[i], spec.q);
    const Vector R = u - op.apply(rhs);
    if (R.cwiseAbs().maxCoeff() <= 0.1 * spec.tol_residual) {
      ok = u.minCoeff() > 0.0;
      return u;
    }
    Matrix J = Matrix::Identity(n, n);
    Vector dphi(n);
    for (int i = 0; i < n; ++i) {
      dphi[i] = spec.lambda * (nl.fprime(u[i]) / std::pow(u[i], spec.q) -
                               spec.q * nl.f(u[i]) / std::pow(u[i], spec.q + 1.0));
    }
    J -= op.kernel_core() * op.masses().cwiseProduct(dphi).asDiagonal();
    Vector d = Eigen::PartialPivLU<Matrix>(J).solve(-R);
    if (!d.allFinite()) return u;
    double t = 1.0;
    for (int i = 0; i < n; ++i) {
      if (d[i] < 0.0) t = std::min(t, -0.95 * u[i] / d[i]);
    }
    u += t * d;
  }
  return u;
}

}  // namespace

std::vector<double> default_lambda_grid(const WindowReport& win, int count) {
  double lo = 1e-2, hi = 1e3;
  if (!win.empty) {
    lo = 0.01 * win.lambda1;
    hi = 100.0 * win.lambda2;
  }
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
  }
  return grid;
}

BifurcationBranch trace_branch(const GreenOperator& op, const ProblemSpec& spec,
                               const std::vector<double>& lambda_grid) {
  for (size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0) || (i > 0 && lambda_grid[i] <= lambda_grid[i - 1])) {
      throw ConfigError("trace_branch: lambda grid must be increasing and positive");
    }
  }
  const TContext base(op, spec.with_lambda(1.0));
  const Vector& w = base.pure_singular();
  const TruncationH h = build_h(spec.nonlinearity(), spec);
  const WindowReport win = lambda_window(op, spec, h, w);

  BifurcationBranch out;
  out.lambda1 = win.lambda1;
  out.lambda2 = win.lambda2;
  out.window_empty = win.empty;

  const Vector& phi = op.principal().vector;
  std::vector<Vector> prev_solutions;
  for (const double lam : lambda_grid) {
    const ProblemSpec ps = spec.with_lambda(lam);
    const TContext ctx = base.with_lambda(lam);
    std::vector<Candidate> cands;
    std::string fail;
    try {
      const FirstPair fp = first_pair(op, ps, w, op.principal());
      const FixedPointRun run = minimal_fixed_point(ctx, fp.zeta1, fp.theta1);
      add_candidate(cands, run.result, "minimal", 10.0 * ps.tol_residual);
    } catch (const std::exception& e) {
      fail = e.what();
    }
    if (!win.empty && lam >= win.lambda1 && lam <= win.lambda2) {
      try {
        const SolutionSet set = three_solutions(ctx);
        add_candidate(cands, set.u1, "maximal", 10.0 * ps.tol_residual);
        add_candidate(cands, set.u2, "minimal", 10.0 * ps.tol_residual);
        if (set.u3) add_candidate(cands, *set.u3, "deflated", 10.0 * ps.tol_residual);
      } catch (const std::exception& e) {
        if (fail.empty()) fail = e.what();
      }
    }
    // pseudo-continuation from the previous lambda's solutions
    const Nonlinearity nl = ps.nonlinearity();
    for (const auto& seed : prev_solutions) {
      bool ok = false;
      Vector u = newton_continue(op, ps, nl, seed, ok);
      if (ok && residual_P(op, ps, u) <= ps.tol_residual) {
        add_candidate(cands, std::move(u), "deflated", 10.0 * ps.tol_residual);
      }
    }

    if (cands.empty()) {
      BranchRow row;
      row.lambda = lam;
      row.kind = "failed";
      row.flag = fail.empty() ? "no certified solution" : fail;
      out.rows.push_back(std::move(row));
      out.solutions.emplace_back();
      prev_solutions.clear();
      continue;
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return sup_norm(a.u) < sup_norm(b.u); });
    prev_solutions.clear();
    for (const auto& c : cands) {
      BranchRow row;
      row.lambda = lam;
      row.kind = c.kind;
      row.sup_norm = sup_norm(c.u);
      row.residual = residual_P(op, ps, c.u);
      row.cone_inf = cone_inf(c.u, phi);
      if (row.residual > ps.tol_residual) row.flag = "residual above tolerance";
      out.rows.push_back(std::move(row));
      out.solutions.push_back(c.u);
      prev_solutions.push_back(c.u);
    }
  }

  // empirical lambda*: smallest sampled lambda above the last multi-solution one
  double last_multi = -1.0;
  for (size_t i = 0; i < out.rows.size(); ++i) {
    size_t j = i;
    int count = 0;
    while (j < out.rows.size() && out.rows[j].lambda == out.rows[i].lambda) {
      if (out.rows[j].kind != "failed") ++count;
      ++j;
    }
    if (count > 1) last_multi = out.rows[i].lambda;
    i = j - 1;
  }
  if (last_multi > 0.0) {
    for (const double lam : lambda_grid) {
      if (lam > last_multi) {
        out.empirical_lambda_star = lam;
        break;
      }
    }
  }
  return out;
}

double lower_bound_check(const GreenOperator& op, const ProblemSpec& spec, const Vector& u,
                         double lambda, const Vector& w) {
  (void)op;
  const double f0 = spec.nonlinearity().f_at_zero();
  const double theta = std::pow(lambda * f0, 1.0 / (1.0 + spec.q));
  return (u - theta * w).minCoeff();
}

UniquenessReport uniqueness_scan(const GreenOperator& op, const ProblemSpec& spec,
                                 const std::vector<double>& lambdas) {
  UniquenessReport rep;
  const Nonlinearity nl = spec.nonlinearity();
  rep.f5_validated = nl.satisfies_f5(spec.f5_threshold());

  const TContext base(op, spec.with_lambda(1.0));
  const Vector& w = base.pure_singular();
  for (const double lam : lambdas) {
    UniquenessRow row;
    row.lambda = lam;
    try {
      const ProblemSpec ps = spec.with_lambda(lam);
      const TContext ctx = base.with_lambda(lam);
      const FirstPair fp = first_pair(op, ps, w, op.principal());
      const FixedPointRun lo = minimal_fixed_point(ctx, fp.zeta1, fp.theta1);
      const FixedPointRun hi = maximal_fixed_point(ctx, fp.zeta1, fp.theta1);
      row.gap = sup_dist(lo.result, hi.result);
      row.sup_min = sup_norm(lo.result);
      row.sup_max = sup_norm(hi.result);
      row.unique = row.gap < 10.0 * ps.tol_residual;
    } catch (const std::exception& e) {
      row.flag = e.what();
    }
    rep.rows.push_back(std::move(row));
  }

  if (rep.f5_validated) {
    // smallest sampled lambda after which every flag is unique
    for (size_t i = 0; i < rep.rows.size(); ++i) {
      bool all = true;
      for (size_t j = i; j < rep.rows.size(); ++j) {
        if (!rep.rows[j].flag.empty() || !rep.rows[j].unique) {
          all = false;
          break;
        }
      }
      if (all) {
        rep.lambda_star = rep.rows[i].lambda;
        break;
      }
    }
  }

  // decay exponent of the measurable gaps (diagnostic)
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rep.rows) {
    if (r.flag.empty() && r.gap > 100.0 * spec.tol_residual) {
      pts.emplace_back(std::log(r.lambda), std::log(r.gap));
    }
  }
  if (pts.size() >= 2) {
    // least squares on the trailing decaying section
    size_t start = 0;
    for (size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].second > pts[i - 1].second) start = i;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = start; i < pts.size(); ++i) {
      sx += pts[i].first;
      sy += pts[i].second;
      sxx += pts[i].first * pts[i].first;
      sxy += pts[i].first * pts[i].second;
      ++m;
    }
    if (m >= 2 && sxx * m - sx * sx > 1e-12) {
      rep.decay_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
  }
  return rep;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::string to_csv(const BifurcationBranch& b) {
  std::ostringstream os;
  os << "lambda,kind,sup_norm,residual,cone_inf,flag\n";
  for (const auto& r : b.rows) {
    os << format_double(r.lambda) << ',' << r.kind << ',' << format_double(r.sup_norm) << ','
       << format_double(r.residual) << ',' << format_double(r.cone_inf) << ',' << r.flag << '\n';
  }
  return os.str();
}

std::string to_json(const BifurcationBranch& b) {
  json j;
  j["window"] = {{"lambda1", b.lambda1}, {"lambda2", b.lambda2}, {"empty", b.window_empty}};
  if (b.empirical_lambda_star) j["empirical_lambda_star"] = *b.empirical_lambda_star;
  j["rows"] = json::array();
  for (const auto& r : b.rows) {
    j["rows"].push_back({{"lambda", r.lambda},
                         {"kind", r.kind},
                         {"sup_norm", r.sup_norm},
                         {"residual", r.residual},
                         {"cone_inf", r.cone_inf},
                         {"flag", r.flag}});
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const UniquenessReport& r) {
  std::ostringstream os;
  os << "lambda,gap,sup_min,sup_max,unique,flag\n";
  for (const auto& row : r.rows) {
    os << format_double(row.lambda) << ',' << format_double(row.gap) << ','
       << format_double(row.sup_min) << ',' << format_double(row.sup_max) << ','
       << (row.unique ? "true" : "false") << ',' << row.flag << '\n';
  }
  return os.str();
}

std::string to_json(const UniquenessReport& r) {
  json j;
  j["f5_validated"] = r.f5_validated;
  if (r.lambda_star) j["lambda_star"] = *r.lambda_star;
  if (r.decay_exponent) j["decay_exponent"] = *r.decay_exponent;
  j["rows"] = json::array();
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"lambda", row.lambda},
                         {"gap", row.gap},
                         {"sup_min", row.sup_min},
                         {"sup_max", row.sup_max},
                         {"unique", row.unique},
                         {"flag", row.flag}});
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const WindowReport& w) {
  std::ostringstream os;
  os << "lambda1,lambda2,a_star,M2,M3,C1,w_sup,empty,binding\n";
  os << format_double(w.lambda1) << ',' << format_double(w.lambda2) << ','
     << format_double(w.a_star) << ',' << format_double(w.M2) << ',' << format_double(w.M3) << ','
     << format_double(w.C1) << ',' << format_double(w.w_sup) << ',' << (w.empty ? "true" : "false")
     << ',' << w.binding << '\n';
  return os.str();
}

std::string to_json(const WindowReport& w) {
  json j = {{"lambda1", w.lambda1}, {"lambda2", w.lambda2}, {"a_star", w.a_star},
            {"M2", w.M2},           {"M3", w.M3},           {"C1", w.C1},
            {"w_sup", w.w_sup},     {"R", w.R},             {"empty", w.empty},
            {"binding", w.binding}, {"fallback_used", w.fallback_used}};
  return j.dump(2) + "\n";
}

std::string to_json(const SolutionSet& s, const WindowReport& win) {
  json j;
  j["lambda"] = s.lambda;
  j["window"] = {{"lambda1", win.lambda1}, {"lambda2", win.lambda2}};
  j["solutions"] = json::array();
  j["solutions"].push_back(
      {{"sup_norm", sup_norm(s.u1)}, {"residual", s.res1}, {"kind", "maximal"}});
  j["solutions"].push_back(
      {{"sup_norm", sup_norm(s.u2)}, {"residual", s.res2}, {"kind", "minimal"}});
  if (s.u3) {
    j["solutions"].push_back(
        {{"sup_norm", sup_norm(*s.u3)}, {"residual", s.res3}, {"kind", "deflated"}});
  } else {
    j["u3_note"] = s.u3_note;
  }
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

bool audit_branch_csv(const std::string& path, const GreenOperator& op, const ProblemSpec& spec,
                      const BifurcationBranch& b) {
  std::ifstream in(path);
  if (!in) throw ConfigError("audit: cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "lambda,kind,sup_norm,residual,cone_inf,flag") return false;
  size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (i >= b.rows.size()) return false;
    std::istringstream ls(line);
    std::string lam_s, kind, sup_s;
    std::getline(ls, lam_s, ',');
    std::getline(ls, kind, ',');
    std::getline(ls, sup_s, ',');
    if (kind != "failed") {
      const Vector& u = b.solutions[i];
      if (u.size() != op.size()) return false;
      if (std::fabs(std::stod(lam_s) - b.rows[i].lambda) > 0.0) return false;
      if (std::fabs(std::stod(sup_s) - sup_norm(u)) > 0.0) return false;
      const double res = residual_P(op, spec.with_lambda(b.rows[i].lambda), u);
      if (res > spec.tol_residual) return false;
    }
    ++i;
  }
  return i == b.rows.size();
}

}  // namespace fracsing
