#pragma once

#include "quasilin/functional.hpp"
#include "quasilin/problem.hpp"
#include "quasilin/types.hpp"

namespace quasilin {

// Eigendecomposition N = Q diag(lambda) Q^{-1}.
//
// When the spectrum is real (real_spectrum == true) Q is the real eigenvector
// matrix and Qc mirrors it; otherwise Q holds Re(Qc) and only the complex pair
// (Qc, lambda) diagonalizes N.
struct EigResult {
  Mat Q;
  CMat Qc;
  CVec lambda;
  double condQ = 0.0;
  bool real_spectrum = false;
};

// Solves AX + XB = D by real Schur reduction of A and B and quasi-triangular
// back-substitution. Throws SingularOperator when A and -B share an eigenvalue
// (a diagonal block system becomes numerically singular).
Mat solve_sylvester(const Mat& A, const Mat& B, const Mat& D);

// Brute-force oracle: assembles the full vectorized system
//   (I (x) A + B^T (x) I + sum_i vec(C_i) c_i^T) vec(X) = vec(D),
// c_i the vec-coefficients of f_i, and solves it densely. Capped at nm <= 400.
Mat kron_solve(const QuasiLinearProblem& problem);

// The vectorized operator matrix itself, for diagnostics and tests.
Mat kron_operator(const QuasiLinearProblem& problem);

Mat mat_exp(const Mat& X);

// Principal square root of a symmetric positive definite matrix via spectral
// decomposition. Throws NotSPD when an eigenvalue falls at or below
// 1e-12 * ||X||_2.
Mat mat_sqrt(const Mat& X);

inline double trace_functional(const LinearFunctional& f, const Mat& X) { return f(X); }

// Throws NotDiagonalizable when condQ exceeds 1e12 or the eigenpair residual
// check fails.
EigResult eig_general(const Mat& N);

}  // namespace quasilin
