#include "weights.hpp"

#include <charconv>
#include <limits>

namespace rsc {

WeightFunction::WeightFunction(WeightFamily f, double param, int dim)
    : family_(f), param_(param), dim_(dim) {
  if (dim < 1) fail(errc::invalid_argument, "weight: dimension must be positive");
}

WeightFunction WeightFunction::tyler(int dim) { return WeightFunction(WeightFamily::tyler, 0.0, dim); }

WeightFunction WeightFunction::huber(double c, int dim) {
  if (!(c > 0.0)) fail(errc::invalid_argument, "huber weight: threshold must be positive");
  return WeightFunction(WeightFamily::huber, c, dim);
}

WeightFunction WeightFunction::t_dist(int nu, int dim) {
  if (nu < 1) fail(errc::invalid_argument, "t weight: degrees of freedom must be a positive integer");
  return WeightFunction(WeightFamily::t_dist, static_cast<double>(nu), dim);
}

WeightFunction WeightFunction::constant(double beta, int dim) {
  if (!(beta > 0.0)) fail(errc::invalid_argument, "constant weight: beta must be positive");
  return WeightFunction(WeightFamily::constant, beta, dim);
}

double WeightFunction::w(double s) const {
  if (s < 0.0) fail(errc::domain, "weight: negative argument");
  switch (family_) {
    case WeightFamily::tyler:
      if (s == 0.0) fail(errc::singular, "tyler weight unbounded at the origin");
      return static_cast<double>(dim_) / s;
    case WeightFamily::huber:
      return s <= param_ ? 1.0 : param_ / s;
    case WeightFamily::t_dist:
      return (static_cast<double>(dim_) + param_) / (s + param_);
    case WeightFamily::constant:
      return 1.0 / param_;
  }
  fail(errc::invalid_argument, "weight: unknown family");
}

double WeightFunction::psi(double s) const {
  if (s < 0.0) fail(errc::domain, "weight: negative argument");
  // psi(0) = 0 by the s-factor convention for every family, tyler included.
  if (s == 0.0) return 0.0;
  return s * w(s);
}

double WeightFunction::kappa() const {
  switch (family_) {
    case WeightFamily::tyler:
      return static_cast<double>(dim_);
    case WeightFamily::huber:
      return param_;
    case WeightFamily::t_dist:
      return static_cast<double>(dim_) + param_;
    case WeightFamily::constant:
      return std::numeric_limits<double>::infinity();
  }
  fail(errc::invalid_argument, "weight: unknown family");
}

std::string WeightFunction::spec() const {
  switch (family_) {
    case WeightFamily::tyler:
      return "tyler";
    case WeightFamily::huber:
      return "huber:" + std::to_string(param_);
    case WeightFamily::t_dist:
      return "t:" + std::to_string(static_cast<int>(param_));
    case WeightFamily::constant:
      return "const:" + std::to_string(param_);
  }
  return "?";
}

namespace {

double parse_positive_real(const std::string& text, const char* what) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !(v > 0.0) || !std::isfinite(v))
      fail(errc::invalid_argument, std::string("weight spec: bad ") + what + " '" + text + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(errc::invalid_argument, std::string("weight spec: bad ") + what + " '" + text + "'");
  }
}

}  // namespace

WeightFunction parse_weight(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "tyler") {
    if (!arg.empty()) fail(errc::invalid_argument, "weight spec: tyler takes no parameter");
    return WeightFunction::tyler(dim);
  }
  if (name == "huber") {
    if (arg.empty()) fail(errc::invalid_argument, "weight spec: huber:<c> requires a threshold");
    return WeightFunction::huber(parse_positive_real(arg, "huber threshold"), dim);
  }
  if (name == "t") {
    if (arg.empty()) fail(errc::invalid_argument, "weight spec: t:<nu> requires degrees of freedom");
    const double nu = parse_positive_real(arg, "degrees of freedom");
    if (nu != std::floor(nu) || nu > 1e9)
      fail(errc::invalid_argument, "weight spec: degrees of freedom must be a positive integer");
    return WeightFunction::t_dist(static_cast<int>(nu), dim);
  }
  if (name == "const") {
    if (arg.empty()) fail(errc::invalid_argument, "weight spec: const:<beta> requires a level");
    return WeightFunction::constant(parse_positive_real(arg, "beta"), dim);
  }
  fail(errc::invalid_argument, "weight spec: unknown family '" + name + "'");
}

ExistenceReport check_existence(const WeightFunction& wf, int n, int p) {
  if (p < 1 || n <= p) fail(errc::domain, "check_existence: requires n > p >= 1");
  ExistenceReport rep;
  rep.kappa = wf.kappa();
  rep.kappa_bounded = wf.kappa_bounded();
  rep.threshold_E = static_cast<double>(p);
  rep.threshold_cor = static_cast<double>(n) * (p - 1) / static_cast<double>(n - p);
  rep.condition_E = rep.kappa > rep.threshold_E;
  rep.corollary1 = rep.kappa > rep.threshold_cor;
  return rep;
}

std::vector<double> log_grid(int count, double lo, double hi) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) fail(errc::invalid_argument, "log_grid: bad range");
  std::vector<double> g(count);
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) g[i] = std::exp(std::log(lo) + step * i);
  return g;
}

}  // namespace rsc
