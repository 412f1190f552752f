#include "quasilin/scalarnl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace quasilin::scalarnl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Residual {
  const ScalarFn& g;
  double gamma1;
  double gamma2;
  double operator()(double y) const { return gamma1 + g(y) * gamma2 - y; }
  double derivative(double y) const { return g.derivative(y) * gamma2 - 1.0; }
};

// Doubling search for a sign change of F on [start, b], respecting g's domain.
// Returns NaN when none is found below the cap.
double find_bracket(const Residual& F, double start, double cap = 1e8) {
  if (!F.g.contains(start)) return kNaN;
  const double f_lo = F(start);
  if (!std::isfinite(f_lo)) return kNaN;
  double b = 1.0;
  for (; b <= cap; b *= 2.0) {
    const double end = std::min(b, F.g.hi());
    if (!F.g.contains(end)) return kNaN;
    const double f_hi = F(end);
    if (!std::isfinite(f_hi)) return kNaN;
    if (f_lo * f_hi <= 0.0) return end;
    if (end < b) return kNaN;  // domain ends before the cap
  }
  return kNaN;
}

bool sample_newton_hypotheses(const Residual& F, double lo, double hi) {
  const int samples = 24;
  const double delta = std::max(1e-6, 1e-8 * (hi - lo));
  for (int i = 0; i <= samples; ++i) {
    const double y = lo + (hi - lo) * i / samples;
    if (!F.g.contains(y)) continue;
    if (F.derivative(y) >= 0.0) return false;
    const double yl = std::max(lo, y - delta);
    const double yr = std::min(hi, y + delta);
    if (yr <= yl || !F.g.contains(yl) || !F.g.contains(yr)) continue;
    if (F.derivative(yr) - F.derivative(yl) <= 0.0) return false;
  }
  return true;
}

}  // namespace

ScalarFn ScalarFn::exp_neg() {
  ScalarFn f;
  f.tag_ = Tag::ExpNeg;
  f.value_ = [](double y) { return std::exp(-y); };
  f.deriv_ = [](double y) { return -std::exp(-y); };
  f.lo_ = -kInf;
  f.hi_ = kInf;
  f.open_lo_ = true;
  f.open_hi_ = true;
  return f;
}

ScalarFn ScalarFn::log_fn() {
  ScalarFn f;
  f.tag_ = Tag::Log;
  f.value_ = [](double y) { return std::log(y); };
  f.deriv_ = [](double y) { return 1.0 / y; };
  f.lo_ = 0.0;
  f.hi_ = kInf;
  f.open_lo_ = true;
  f.open_hi_ = true;
  return f;
}

ScalarFn ScalarFn::custom(std::function<double(double)> value,
                          std::function<double(double)> derivative, double lo, double hi) {
  if (!value || !derivative) {
    throw Error("ScalarFn::custom: both evaluators are required");
  }
  if (!(lo < hi)) {
    throw Error("ScalarFn::custom: empty validity interval");
  }
  ScalarFn f;
  f.tag_ = Tag::Custom;
  f.value_ = std::move(value);
  f.deriv_ = std::move(derivative);
  f.lo_ = lo;
  f.hi_ = hi;
  return f;
}

double ScalarFn::operator()(double y) const {
  if (!contains(y)) {
    throw DomainExit("ScalarFn: argument " + std::to_string(y) +
                     " outside the validity interval");
  }
  return value_(y);
}

double ScalarFn::derivative(double y) const {
  if (!contains(y)) {
    throw DomainExit("ScalarFn: argument " + std::to_string(y) +
                     " outside the validity interval");
  }
  return deriv_(y);
}

bool ScalarFn::contains(double y) const {
  if (!std::isfinite(y)) return false;
  if (open_lo_ ? y <= lo_ : y < lo_) return false;
  if (open_hi_ ? y >= hi_ : y > hi_) return false;
  return true;
}

std::pair<double, double> reduce(const Mat& M, const Mat& N, const LinearFunctional& h) {
  return {h(M), h(N)};
}

ScalarSolveReport newton_solve(const ScalarFn& g, double gamma1, double gamma2, double y0,
                               const ScalarOptions& opts) {
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 100;
  Residual F{g, gamma1, gamma2};

  ScalarSolveReport report;
  report.method = ScalarMethod::Newton;
  report.bracket_hi = find_bracket(F, g.contains(0.0) ? 0.0 : g.lo() + 1e-12);
  if (std::isfinite(report.bracket_hi)) {
    const double lo = g.contains(0.0) ? 0.0 : g.lo() + 1e-12;
    report.hypotheses_hold = sample_newton_hypotheses(F, lo, report.bracket_hi);
  }

  double y = y0;
  if (!g.contains(y)) {
    throw DomainExit("newton_solve: starting point outside g's validity interval");
  }
  report.iterates.push_back(y);
  for (int k = 0; k < max_iter; ++k) {
    const double f = F(y);
    if (std::abs(f) <= opts.tol) {
      report.converged = true;
      break;
    }
    const double df = F.derivative(y);
    if (std::abs(df) <= 1e-14) {
      throw DerivativeVanishes("newton_solve: |F'| <= 1e-14 at y = " + std::to_string(y));
    }
    double step = -f / df;
    double y_next = y + step;
    int halvings = 0;
    while ((!g.contains(y_next) || !std::isfinite(y_next)) && halvings < 60) {
      step *= 0.5;
      y_next = y + step;
      ++halvings;
    }
    if (!g.contains(y_next)) {
      throw DomainExit("newton_solve: damped step cannot stay inside g's interval");
    }
    y = y_next;
    report.iterates.push_back(y);
  }
  if (!report.converged && std::abs(F(y)) <= opts.tol) {
    report.converged = true;
  }
  report.y_star = y;
  if (report.converged) {
    report.ostrowski_value = std::abs(g.derivative(y) * gamma2);
  } else {
    report.ostrowski_value = kNaN;
  }
  return report;
}

ScalarSolveReport fixed_point_solve(const ScalarFn& g, double gamma1, double gamma2,
                                    double y0, const ScalarOptions& opts) {
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 1000;
  Residual F{g, gamma1, gamma2};

  ScalarSolveReport report;
  report.method = ScalarMethod::FixedPoint;
  report.bracket_hi = kNaN;

  double y = y0;
  if (!g.contains(y)) {
    throw DomainExit("fixed_point_solve: starting point outside g's validity interval");
  }
  report.iterates.push_back(y);
  for (int k = 0; k < max_iter; ++k) {
    const double y_next = gamma1 + g(y) * gamma2;
    if (std::abs(y_next - y) <= opts.tol) {
      report.converged = true;
      break;
    }
    if (!std::isfinite(y_next)) break;
    if (!g.contains(y_next)) {
      throw DomainExit("fixed_point_solve: iterate " + std::to_string(y_next) +
                       " left g's validity interval");
    }
    y = y_next;
    report.iterates.push_back(y);
  }
  report.y_star = y;
  if (report.converged) {
    report.ostrowski_value = std::abs(g.derivative(y) * gamma2);
  } else {
    report.ostrowski_value = kNaN;
  }
  return report;
}

Mat assemble(const Mat& M, const Mat& N, const ScalarFn& g, double y_star,
             const LinearFunctional& h) {
  require_finite(M, "assemble: M");
  require_finite(N, "assemble: N");
  if (M.rows() != N.rows() || M.cols() != N.cols()) {
    throw DimensionMismatch("assemble: M and N must have the same shape");
  }
  if (!g.contains(y_star)) {
    throw DomainExit("assemble: y_star outside g's validity interval");
  }
  const double gy = g(y_star);
  Mat X = M + gy * N;

  const double hX = h(X);
  const double scale = 1.0 + std::abs(y_star);
  if (std::abs(hX - y_star) > 1e-12 * scale) {
    throw VerificationFailed("assemble: h(X) = " + std::to_string(hX) +
                             " disagrees with y_star = " + std::to_string(y_star));
  }
  if (!g.contains(hX)) {
    throw VerificationFailed("assemble: h(X) leaves g's validity interval");
  }
  const double mat_scale = std::max(1.0, M.norm() + N.norm());
  if ((X - M - g(hX) * N).norm() > 1e-12 * mat_scale) {
    throw VerificationFailed("assemble: fixed-point identity violated");
  }
  return X;
}

std::vector<double> scan_roots(const ScalarFn& g, double gamma1, double gamma2, double lo,
                               double hi, int grid) {
  if (!(lo < hi) || grid < 2) {
    throw Error("scan_roots: need lo < hi and at least two grid points");
  }
  Residual F{g, gamma1, gamma2};
  std::vector<double> roots;
  double y_prev = kNaN;
  double f_prev = kNaN;
  for (int i = 0; i <= grid; ++i) {
    const double y = lo + (hi - lo) * i / grid;
    if (!g.contains(y)) continue;
    const double f = F(y);
    if (!std::isfinite(f)) continue;
    if (std::isfinite(f_prev) && f_prev * f <= 0.0) {
      double a = y_prev, b = y, fa = f_prev;
      for (int step = 0; step < 200; ++step) {
        const double mid = 0.5 * (a + b);
        const double fm = F(mid);
        if (fa * fm <= 0.0) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
      }
      const double root = 0.5 * (a + b);
      if (roots.empty() || std::abs(roots.back() - root) > 1e-10 * (1.0 + std::abs(root))) {
        roots.push_back(root);
      }
    }
    y_prev = y;
    f_prev = f;
  }
  return roots;
}

}  // namespace quasilin::scalarnl
