#include "quasilin/fixpoint.hpp"

#include "quasilin/matcore.hpp"
#include "quasilin/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace quasilin::fixpoint {

namespace {

double eval_f_direct(PsiKind psi, const Mat& X) {
  if (psi == PsiKind::ExpNeg) {
    return mat_exp(-X).trace();
  }
  return mat_sqrt(symmetrize(X)).trace();
}

struct DiagFrame {
  Mat Q;
  Mat Qinv;
  Vec lambda;
  double condQ = 1.0;
};

double tail_average(const std::vector<double>& ratios) {
  if (ratios.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t take = std::min<std::size_t>(5, ratios.size());
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t i = ratios.size() - take; i < ratios.size(); ++i) {
    if (std::isfinite(ratios[i])) {
      acc += ratios[i];
      ++used;
    }
  }
  return used ? acc / used : std::numeric_limits<double>::quiet_NaN();
}

std::pair<Mat, IterationReport> run_direct(const Mat& M, const Mat& N, PsiKind psi,
                                           const IterateOptions& opts,
                                           IterationReport report) {
  const double m_norm = std::max(M.norm(), 1e-300);
  Mat X = M;
  double f_prev;
  try {
    f_prev = eval_f_direct(psi, X);
  } catch (const NumericalOverflow&) {
    report.termination = TerminationKind::Diverged;
    return {X, std::move(report)};
  }
  report.iterates_diag.push_back(X.diagonal());
  report.f_values.push_back(f_prev);

  double prev_diff = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < opts.max_iter; ++k) {
    Mat X_next = M + f_prev * N;
    double f_next;
    try {
      f_next = eval_f_direct(psi, X_next);
    } catch (const NumericalOverflow&) {
      report.termination = TerminationKind::Diverged;
      report.sigma_estimate = tail_average(report.contraction_ratios);
      return {X, std::move(report)};
    }
    if (!std::isfinite(f_next) || !X_next.allFinite()) {
      report.termination = TerminationKind::Diverged;
      report.sigma_estimate = tail_average(report.contraction_ratios);
      return {X, std::move(report)};
    }

    const double residual = (X_next - (M + f_next * N)).norm() / m_norm;
    const double diff = (X_next - X).norm();
    if (k > 0 && prev_diff > 0.0) {
      report.contraction_ratios.push_back(diff / prev_diff);
    }
    prev_diff = diff;

    X = std::move(X_next);
    f_prev = f_next;
    report.iterates_diag.push_back(X.diagonal());
    report.f_values.push_back(f_next);
    report.residuals.push_back(residual);
    ++report.iterations;

    if (residual < opts.tol) {
      report.termination = TerminationKind::Converged;
      report.sigma_estimate = tail_average(report.contraction_ratios);
      return {X, std::move(report)};
    }
  }
  report.termination = TerminationKind::IterationCap;
  report.sigma_estimate = tail_average(report.contraction_ratios);
  return {X, std::move(report)};
}

std::pair<Mat, IterationReport> run_diagonalized(const Mat& M, const Mat& N, PsiKind psi,
                                                 const IterateOptions& opts,
                                                 const DiagFrame& frame,
                                                 IterationReport report) {
  const double m_norm = std::max(M.norm(), 1e-300);
  const Mat M1 = frame.Qinv * M * frame.Q;

  auto eval_f = [&](const Mat& X1, Mat& X_out) {
    if (psi == PsiKind::ExpNeg) {
      // trace is similarity invariant, so psi can act on the transformed
      // iterate without leaving the diagonal frame
      X_out = frame.Q * X1 * frame.Qinv;
      return mat_exp(-X1).trace();
    }
    X_out = symmetrize(frame.Q * X1 * frame.Qinv);
    return mat_sqrt(X_out).trace();
  };

  Mat X1 = M1;
  Mat X;
  double f_prev;
  try {
    f_prev = eval_f(X1, X);
  } catch (const NumericalOverflow&) {
    report.termination = TerminationKind::Diverged;
    return {frame.Q * X1 * frame.Qinv, std::move(report)};
  }
  report.iterates_diag.push_back(X1.diagonal());
  report.f_values.push_back(f_prev);

  double prev_diff = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < opts.max_iter; ++k) {
    Mat X1_next = X1;
    X1_next.diagonal() = M1.diagonal() + f_prev * frame.lambda;

    Mat X_next;
    double f_next;
    try {
      f_next = eval_f(X1_next, X_next);
    } catch (const NumericalOverflow&) {
      report.termination = TerminationKind::Diverged;
      report.sigma_estimate = tail_average(report.contraction_ratios);
      return {X, std::move(report)};
    }
    if (!std::isfinite(f_next) || !X_next.allFinite()) {
      report.termination = TerminationKind::Diverged;
      report.sigma_estimate = tail_average(report.contraction_ratios);
      return {X, std::move(report)};
    }

    const double residual = (X_next - (M + f_next * N)).norm() / m_norm;
    const double diff = (X_next - X).norm();
    if (k > 0 && prev_diff > 0.0) {
      report.contraction_ratios.push_back(diff / prev_diff);
    }
    prev_diff = diff;

    X1 = std::move(X1_next);
    X = std::move(X_next);
    f_prev = f_next;
    report.iterates_diag.push_back(X1.diagonal());
    report.f_values.push_back(f_next);
    report.residuals.push_back(residual);
    ++report.iterations;

    if (residual < opts.tol) {
      report.termination = TerminationKind::Converged;
      report.sigma_estimate = tail_average(report.contraction_ratios);
      return {X, std::move(report)};
    }
  }
  report.termination = TerminationKind::IterationCap;
  report.sigma_estimate = tail_average(report.contraction_ratios);
  return {X, std::move(report)};
}

}  // namespace

std::string IterationReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "k,f_value,residual,ratio\n";
  for (int k = 1; k <= iterations; ++k) {
    os << k << ',' << f_values[static_cast<std::size_t>(k)] << ','
       << residuals[static_cast<std::size_t>(k - 1)] << ',';
    if (k >= 2) os << contraction_ratios[static_cast<std::size_t>(k - 2)];
    os << '\n';
  }
  return os.str();
}

std::pair<Mat, IterationReport> iterate(const Mat& M, const Mat& N, PsiKind psi,
                                        const IterateOptions& opts) {
  require_square(M, "iterate: M");
  require_square(N, "iterate: N");
  require_finite(M, "iterate: M");
  require_finite(N, "iterate: N");
  if (M.rows() != N.rows()) {
    throw DimensionMismatch("iterate: M and N must have the same size");
  }
  if (opts.max_iter < 1) {
    throw Error("iterate: max_iter must be positive");
  }

  IterationReport report;
  if (opts.mode == IterMode::Direct) {
    return run_direct(M, N, psi, opts, std::move(report));
  }

  DiagFrame frame;
  try {
    EigResult eig = eig_general(N);
    if (!eig.real_spectrum) {
      report.fallback_direct = true;
      report.warning = "N has a complex spectrum; using the direct iteration";
      return run_direct(M, N, psi, opts, std::move(report));
    }
    if (eig.condQ > 1e8) {
      report.fallback_direct = true;
      report.warning = "eigenvector conditioning exceeds 1e8; using the direct iteration";
      return run_direct(M, N, psi, opts, std::move(report));
    }
    frame.Q = eig.Q;
    frame.Qinv = eig.Q.partialPivLu().solve(Mat::Identity(N.rows(), N.rows()));
    frame.lambda = eig.lambda.real();
    frame.condQ = eig.condQ;
  } catch (const NotDiagonalizable&) {
    report.fallback_direct = true;
    report.warning = "N is not diagonalizable; using the direct iteration";
    return run_direct(M, N, psi, opts, std::move(report));
  }
  return run_diagonalized(M, N, psi, opts, frame, std::move(report));
}

double frechet_trace(PsiKind psi, const Mat& X, const Mat& direction) {
  require_square(X, "frechet_trace: X");
  if (direction.rows() != X.rows() || direction.cols() != X.cols()) {
    throw DimensionMismatch("frechet_trace: direction shape must match X");
  }
  if (psi == PsiKind::ExpNeg) {
    return (direction * mat_exp(-X)).trace();
  }
  Mat Xh = mat_sqrt(X);
  return 0.5 * Xh.partialPivLu().solve(direction).trace();
}

FrechetDiagnostics frechet_diagnostics(PsiKind psi, const Mat& X, const Mat& direction) {
  FrechetDiagnostics d;
  d.value = frechet_trace(psi, X, direction);
  if (psi == PsiKind::ExpNeg) {
    d.signed_finite_difference = -d.value;
    d.half_inverse_trace = std::numeric_limits<double>::quiet_NaN();
  } else {
    d.signed_finite_difference = d.value;
    d.half_inverse_trace = 0.5 * X.partialPivLu().solve(direction).trace();
  }
  return d;
}

ConvergencePrediction convergence_predicate(const Mat& X_ref, const Mat& N, PsiKind psi) {
  ConvergencePrediction p;
  p.sigma = std::abs(frechet_trace(psi, X_ref, N));
  p.contract = p.sigma < 1.0;
  return p;
}

Monotonicity classify_monotonicity(const IterationReport& report) {
  if (report.iterations < 4) {
    throw TooFewIterations("classify_monotonicity: need at least 4 iterations, have " +
                           std::to_string(report.iterations));
  }
  double f_scale = 0.0;
  for (double f : report.f_values) f_scale = std::max(f_scale, std::abs(f));
  const double floor = 1e-12 * (1.0 + f_scale);

  std::vector<double> diffs;
  for (std::size_t k = 0; k + 1 < report.f_values.size(); ++k) {
    const double d = report.f_values[k + 1] - report.f_values[k];
    if (std::abs(d) <= floor) break;  // converged stall; ignore the tail
    diffs.push_back(d);
  }
  if (diffs.size() < 3) {
    throw TooFewIterations("classify_monotonicity: too few significant f-differences");
  }

  bool all_positive = true;
  bool alternating = true;
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    if (diffs[k] <= 0.0) all_positive = false;
    if (k > 0 && diffs[k] * diffs[k - 1] >= 0.0) alternating = false;
  }
  if (all_positive) return Monotonicity::MonotoneIncreasing;
  if (alternating) return Monotonicity::Alternating;
  return Monotonicity::Irregular;
}

namespace {

Mat spd_factor_sqrt(const Mat& G0) { return mat_sqrt(symmetrize(G0.transpose() * G0)); }

ManufacturedInstance manufacture_expneg(Index n, double sigma_target, std::uint64_t seed) {
  Rng rng(seed);
  Mat G = spd_factor_sqrt(rng.randn(n, n));
  G /= G.norm() / std::sqrt(static_cast<double>(n));  // Frobenius norm ~ sqrt(n)
  Mat N = spd_factor_sqrt(rng.randn(n, n));
  N *= 2.5 / N.trace();

  auto sigma_of = [&](double alpha) {
    return (N * mat_exp(-(std::sqrt(alpha) * G))).trace();
  };

  double lo = 1e-8;
  double hi = 1.0;
  while (sigma_of(hi) > sigma_target) {
    hi *= 2.0;
    if (hi > 1e12) throw DegenerateCase("manufacture: sigma target unreachable");
  }
  if (sigma_of(lo) < sigma_target) {
    throw DegenerateCase("manufacture: sigma target above trace(N)");
  }
  for (int step = 0; step < 200; ++step) {
    const double mid = 0.5 * (lo + hi);
    (sigma_of(mid) > sigma_target ? lo : hi) = mid;
  }

  ManufacturedInstance inst;
  inst.alpha = 0.5 * (lo + hi);
  inst.X_star = std::sqrt(inst.alpha) * G;
  inst.N = N;
  const double f_star = mat_exp(-inst.X_star).trace();
  inst.M = inst.X_star - f_star * N;
  inst.sigma = std::abs(frechet_trace(PsiKind::ExpNeg, inst.X_star, N));
  return inst;
}

ManufacturedInstance manufacture_sqrt(Index n, double sigma_target, std::uint64_t seed) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double spread = 0.25 / (1 << attempt);
    Mat S = symmetrize(rng.randn(n, n));
    S /= std::max(S.norm(), 1e-300);
    Mat T = symmetrize(rng.randn(n, n));
    T /= std::max(T.norm(), 1e-300);

    Mat X_star = Mat::Identity(n, n) + spread * S;
    Mat N_hat = Mat::Identity(n, n) + 0.8 * spread * T;
    const double base = frechet_trace(PsiKind::Sqrt, X_star, N_hat);
    Mat N = (sigma_target / base) * N_hat;

    const double f_star = mat_sqrt(X_star).trace();
    Mat M = X_star - f_star * N;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M));
    if (es.eigenvalues()(0) > 1e-6) {
      ManufacturedInstance inst;
      inst.M = std::move(M);
      inst.N = std::move(N);
      inst.X_star = std::move(X_star);
      inst.alpha = std::numeric_limits<double>::quiet_NaN();
      inst.sigma = std::abs(frechet_trace(PsiKind::Sqrt, inst.X_star, inst.N));
      return inst;
    }
  }
  throw DegenerateCase("manufacture: could not keep M positive definite at this sigma");
}

}  // namespace

ManufacturedInstance manufacture_instance(PsiKind psi, Index n, double sigma_target,
                                          std::uint64_t seed) {
  if (n < 1) throw Error("manufacture_instance: n must be positive");
  if (!(sigma_target > 0.0)) {
    throw Error("manufacture_instance: sigma target must be positive");
  }
  return psi == PsiKind::ExpNeg ? manufacture_expneg(n, sigma_target, seed)
                                : manufacture_sqrt(n, sigma_target, seed);
}

}  // namespace quasilin::fixpoint
