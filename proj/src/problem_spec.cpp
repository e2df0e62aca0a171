#include "fracsing/problem_spec.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fracsing {

void ProblemSpec::validate() const {
  if (!(s > 0.0 && s < 0.5)) throw ConfigError("spec: s must lie in (0, 1/2)");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("spec: q must lie in (0,1)");
  if (!(lambda > 0.0)) throw ConfigError("spec: lambda must be positive");
  if (!(alpha > 4.0 * q)) throw ConfigError("spec: alpha must exceed 4q");
  if (!(sigma1 > 0.0 && sigma1 < sigma2)) throw ConfigError("spec: need 0 < sigma1 < sigma2");
  if (n < 8) throw ConfigError("spec: n must be at least 8");
  if (!(tol_residual > 0.0 && tol_order > 0.0 && eps_min > 0.0)) {
    throw ConfigError("spec: tolerances must be positive");
  }
  // (f4) on (sigma1, sigma2), sampled
  const Nonlinearity nl = nonlinearity();
  const int ns = 2000;
  double prev = nl.f0(sigma1);
  for (int i = 1; i <= ns; ++i) {
    const double t = sigma1 + (sigma2 - sigma1) * i / ns;
    const double v = nl.f0(t);
    if (v < prev - 1e-10 * std::fabs(prev)) {
      throw ConfigError("spec: (f4) fails, f/u^q decreasing inside (sigma1, sigma2) near t=" +
                        std::to_string(t));
    }
    prev = v;
  }
}

Nonlinearity ProblemSpec::nonlinearity() const { return Nonlinearity::exemplar(alpha, q, lambda); }

double ProblemSpec::f5_threshold() const {
  if (alpha_f5 > 0.0) return alpha_f5;
  return exemplar_f0_monotone_interval(alpha, q).second;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

std::string ProblemSpec::to_string() const {
  std::ostringstream os;
  os << "s=" << fmt(s) << "\n"
     << "q=" << fmt(q) << "\n"
     << "lambda=" << fmt(lambda) << "\n"
     << "alpha=" << fmt(alpha) << "\n"
     << "sigma1=" << fmt(sigma1) << "\n"
     << "sigma2=" << fmt(sigma2) << "\n"
     << "N=" << n << "\n"
     << "grading=" << grading << "\n"
     << "tol_residual=" << fmt(tol_residual) << "\n"
     << "tol_order=" << fmt(tol_order) << "\n"
     << "eps_min=" << fmt(eps_min) << "\n";
  return os.str();
}

ProblemSpec ProblemSpec::from_string(const std::string& text) {
  ProblemSpec spec;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    auto num = [&]() {
      try {
        return std::stod(val);
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad number '" + val + "'");
      }
    };
    if (key == "s") spec.s = num();
    else if (key == "q") spec.q = num();
    else if (key == "lambda") spec.lambda = num();
    else if (key == "alpha") spec.alpha = num();
    else if (key == "sigma1") spec.sigma1 = num();
    else if (key == "sigma2") spec.sigma2 = num();
    else if (key == "alpha_f5") spec.alpha_f5 = num();
    else if (key == "N") spec.n = static_cast<int>(num());
    else if (key == "grading") spec.grading = val;
    else if (key == "tol_residual") spec.tol_residual = num();
    else if (key == "tol_order") spec.tol_order = num();
    else if (key == "eps_min") spec.eps_min = num();
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  return spec;
}

ProblemSpec ProblemSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

void ProblemSpec::to_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << to_string();
}

}  // namespace fracsing
