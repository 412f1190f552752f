#pragma once

#include "quasilin/functional.hpp"
#include "quasilin/types.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace quasilin::scalarnl {

// Scalar nonlinearity g with an explicit derivative and validity interval.
class ScalarFn {
public:
  enum class Tag { ExpNeg, Log, Custom };

  static ScalarFn exp_neg();
  static ScalarFn log_fn();
  static ScalarFn custom(std::function<double(double)> value,
                         std::function<double(double)> derivative, double lo, double hi);

  Tag tag() const { return tag_; }
  double operator()(double y) const;
  double derivative(double y) const;
  bool contains(double y) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }

private:
  ScalarFn() = default;
  Tag tag_ = Tag::Custom;
  std::function<double(double)> value_;
  std::function<double(double)> deriv_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  bool open_lo_ = false;
  bool open_hi_ = false;
};

enum class ScalarMethod { Newton, FixedPoint };

struct ScalarOptions {
  double tol = 1e-12;  // absolute on |gamma1 + g(y) gamma2 - y|
  int max_iter = -1;   // -1 selects the method default (Newton 100, fixed point 1000)
};

struct ScalarSolveReport {
  double y_star = 0.0;
  std::vector<double> iterates;
  ScalarMethod method = ScalarMethod::Newton;
  double ostrowski_value = 0.0;  // |g'(y_star) gamma2|
  bool converged = false;
  bool hypotheses_hold = false;  // F' < 0 and F'' > 0 sampled on the bracket
  double bracket_hi = 0.0;       // upper end of the sign-change bracket, NaN if none
};

// (h(M), h(N)) for a linear functional h.
std::pair<double, double> reduce(const Mat& M, const Mat& N, const LinearFunctional& h);

ScalarSolveReport newton_solve(const ScalarFn& g, double gamma1, double gamma2, double y0,
                               const ScalarOptions& opts = {});

ScalarSolveReport fixed_point_solve(const ScalarFn& g, double gamma1, double gamma2,
                                    double y0, const ScalarOptions& opts = {});

// X = M + g(y_star) N, with the consistency checks h(X) = y_star and
// X = M + g(h(X)) N enforced before returning.
Mat assemble(const Mat& M, const Mat& N, const ScalarFn& g, double y_star,
             const LinearFunctional& h);

// Grid scan of [lo, hi] for sign changes of gamma1 + g(y) gamma2 - y, each
// refined by bisection. Best effort; roots between grid nodes of equal sign
// are missed.
std::vector<double> scan_roots(const ScalarFn& g, double gamma1, double gamma2, double lo,
                               double hi, int grid = 400);

}  // namespace quasilin::scalarnl
