#pragma once

#include "quasilin/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace quasilin::fixpoint {

enum class PsiKind { ExpNeg, Sqrt };

enum class IterMode { Diagonalized, Direct };

enum class TerminationKind { Converged, IterationCap, Diverged };

enum class Monotonicity { MonotoneIncreasing, Alternating, Irregular };

struct IterateOptions {
  double tol = 1e-7;
  int max_iter = 500;
  IterMode mode = IterMode::Diagonalized;
};

// Trace of one fixed-point run. Entry k of f_values belongs to iterate k
// (starting from X^0 = M), residuals[k] is the relative residual of iterate
// k+1, and contraction_ratios[k] compares successive difference norms.
struct IterationReport {
  std::vector<Vec> iterates_diag;
  std::vector<double> f_values;
  std::vector<double> residuals;
  std::vector<double> contraction_ratios;
  TerminationKind termination = TerminationKind::IterationCap;
  int iterations = 0;
  double sigma_estimate = 0.0;
  bool fallback_direct = false;
  std::string warning;

  std::string to_csv() const;
};

// Runs X^{k+1} = M + f(X^k) N with f(X) = trace(psi(X)) until the relative
// residual drops below opts.tol or opts.max_iter steps have been taken.
// Diagonalized mode conjugates by the eigenvectors of N and updates only the
// diagonal; it silently falls back to Direct (with report.warning set) when N
// resists a well-conditioned real diagonalization.
std::pair<Mat, IterationReport> iterate(const Mat& M, const Mat& N, PsiKind psi,
                                        const IterateOptions& opts = {});

// Directional derivative magnitude of X -> trace(psi(X)).
// ExpNeg: trace(direction * exp(-X)); Sqrt: (1/2) trace(X^{-1/2} direction).
double frechet_trace(PsiKind psi, const Mat& X, const Mat& direction);

struct FrechetDiagnostics {
  double value = 0.0;                // what frechet_trace returns
  double signed_finite_difference = 0.0;  // matches d/dt trace(psi(X + tE)) at 0
  double half_inverse_trace = 0.0;   // (1/2) trace(X^{-1} E); Sqrt only, else NaN
};

FrechetDiagnostics frechet_diagnostics(PsiKind psi, const Mat& X, const Mat& direction);

struct ConvergencePrediction {
  double sigma = 0.0;
  bool contract = false;
};

// sigma = |frechet_trace(psi, X_ref, N)|; contract iff sigma < 1.
ConvergencePrediction convergence_predicate(const Mat& X_ref, const Mat& N, PsiKind psi);

// Classifies the sign pattern of successive f-value differences. Requires at
// least four completed iterations; differences below round-off noise at the
// tail (the converged stall) are ignored.
Monotonicity classify_monotonicity(const IterationReport& report);

// Test instance with a prescribed derivative trace sigma at the solution.
struct ManufacturedInstance {
  Mat M;
  Mat N;
  Mat X_star;
  double alpha = 0.0;  // X_star = sqrt(alpha) * G for ExpNeg; unused for Sqrt
  double sigma = 0.0;  // achieved |frechet_trace(psi, X_star, N)|
};

ManufacturedInstance manufacture_instance(PsiKind psi, Index n, double sigma_target,
                                          std::uint64_t seed);

}  // namespace quasilin::fixpoint
