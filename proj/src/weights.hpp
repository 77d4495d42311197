#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"

namespace rsc {

enum class WeightFamily { tyler, huber, t_dist, constant };

// Weight family member: w(s), psi(s) = s*w(s), kappa = sup psi. The three
// robust families plus the constant weight needed for the EM-estimator
// identity. kappa() is +infinity for the constant family; callers that rely
// on the existence theory must check kappa_bounded().
class WeightFunction {
 public:
  static WeightFunction tyler(int dim);
  static WeightFunction huber(double c, int dim);
  static WeightFunction t_dist(int nu, int dim);
  static WeightFunction constant(double beta, int dim);

  WeightFamily family() const { return family_; }
  int dim() const { return dim_; }

  double w(double s) const;
  double psi(double s) const;
  double kappa() const;
  bool kappa_bounded() const { return family_ != WeightFamily::constant; }

  // true when w(0) is finite; tyler's w blows up at the origin and the
  // estimator layer rejects exact-zero rows for it.
  bool finite_at_zero() const { return family_ != WeightFamily::tyler; }

  // huber threshold c, t_dist degrees of freedom, or constant beta.
  double param() const { return param_; }

  // CLI grammar: tyler | huber:<c> | t:<nu> | const:<beta>
  std::string spec() const;

 private:
  WeightFunction(WeightFamily f, double param, int dim);
  WeightFamily family_;
  double param_;
  int dim_;
};

WeightFunction parse_weight(const std::string& spec, int dim);

struct ExistenceReport {
  double kappa;          // +infinity when unbounded
  bool kappa_bounded;    // Condition 1-(B)
  bool condition_E;      // kappa > p (strict)
  bool corollary1;       // kappa > n(p-1)/(n-p)
  double threshold_E;    // p
  double threshold_cor;  // n(p-1)/(n-p)
};

ExistenceReport check_existence(const WeightFunction& wf, int n, int p);

// Log-spaced evaluation grid shared by the Condition 1 monotonicity checks.
std::vector<double> log_grid(int count, double lo, double hi);

}  // namespace rsc
