#pragma once

#include "quasilin/matcore.hpp"
#include "quasilin/problem.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace quasilin::linearf {

// Outcome of a linear-functional solve, following the exact trichotomy of the
// closed form: a unique solution, an affine family, or inconsistency.
struct LinearOutcome {
  enum class Tag { Unique, NonUniqueFamily, NoSolution };

  Tag tag = Tag::NoSolution;

  // Unique: the solution and the per-term scalars sigma_i = f_i(X).
  Mat X;
  Vec sigma;

  // Particular part M (for NonUniqueFamily, already shifted by the
  // minimum-norm particular sigma); family directions and their scalar-space
  // kernel coordinates.
  Mat M;
  std::vector<Mat> N_list;
  std::vector<Vec> sigma_kernel;

  // Diagnostics.
  double residual = std::numeric_limits<double>::quiet_NaN();
  double F_norm1 = 0.0;            // ||F||_1 of the coupling matrix
  bool norm_condition = false;     // ||F||_1 < 1, sufficient for uniqueness
  double singular_value_min = 0.0; // smallest singular value of I - F
  double inconsistency = 0.0;      // unresolvable right-hand-side component
};

// Single-term closed form: M = L^{-1}(D), N = -L^{-1}(C),
// sigma = f(M) / (1 - f(N)), X = M + sigma N. At 1 - f(N) = 0 the outcome
// degrades to a family (f(M) = 0) or to inconsistency (f(M) != 0).
LinearOutcome solve_single(const QuasiLinearProblem& problem);

// Multi-term reduction: F_ji = f_j(N_i), right side f_j(M), solve
// (I - F) sigma = f, assemble X = M + sum_i sigma_i N_i.
LinearOutcome solve_multi(const QuasiLinearProblem& problem);

// Scalar-system stage on an already reduced problem X = M + sum f_i(X) N_i.
LinearOutcome solve_reduced_multi(const ReducedProblem& reduced);

// Eliminates the Sylvester operator: M = L^{-1}(D), N_i = -L^{-1}(C_i).
ReducedProblem reduce_problem(const QuasiLinearProblem& problem);

// trace(X) = trace(A^{-1}D) / (2 + trace(A^{-1}C)) for B = A and f = trace,
// no Sylvester solve involved. Throws SingularOperator for singular A and
// DegenerateCase when the denominator vanishes.
double trace_shortcut(const Mat& A, const Mat& C, const Mat& D);

// Same value when C = C1 * C2^T is supplied factored: only k = cols(C1)
// solves with A enter the denominator term.
double trace_shortcut(const Mat& A, const Mat& C1, const Mat& C2, const Mat& D);

// Residual R = A X~ + X~ B + f(X~) C - D and the error equation solution E
// with A E + E B + f(E) C = R, so that X~ - E solves the original equation.
std::pair<Mat, LinearOutcome> error_from_residual(const QuasiLinearProblem& problem,
                                                  const Mat& X_approx);

}  // namespace quasilin::linearf
