#pragma once

#include "quasilin/types.hpp"

#include <string>
#include <vector>

namespace quasilin::polyf {

// One verified solution X = M + r N of a polynomial-reducible instance.
struct SolutionEntry {
  Cplx root;
  ComplexMat X;
  double f_residual = 0.0;   // |f(X) - root|
  double eq_residual = 0.0;  // ||X - M - f(X) N||_F relative to ||M||_F + ||N||_F
  bool is_real = true;
};

struct SpuriousRoot {
  Cplx root;
  std::string reason;
  double f_residual = 0.0;
};

// Accepted and rejected roots together account for the full root set of the
// reducing polynomial, multiplicity included.
struct SolutionSet {
  std::vector<SolutionEntry> entries;
  std::vector<SpuriousRoot> spurious;

  std::size_t total_roots() const { return entries.size() + spurious.size(); }
};

// f(X) = trace(X^2): the scalar reduction is
//   r^2 trace(N^2) + beta r + trace(M^2) = 0,  beta = 2 trace(MN) - 1.
// Complex-pair roots produce complex-pair solutions. Throws DegenerateCase
// when trace(N^2) and beta vanish together.
SolutionSet solve_trace_power2(const Mat& M, const Mat& N);

// f(X) = trace(X^p), p in 2..12. Expands trace((M + rN)^p) by summing the
// traces of all 2^p ordered words in {M, N} grouped by N-count, then solves
// q(r) - r = 0 through companion-matrix eigenvalues.
SolutionSet solve_trace_power_general(const Mat& M, const Mat& N, int p);

// f(X) = ||X||_F^2. Complex roots and negative roots are rejected since the
// functional is real and nonnegative; throws NoRealSolution when nothing
// survives.
SolutionSet solve_frobenius(const Mat& M, const Mat& N);

// f(X) = trace(X^{-1}) with rank-one M = m1 m2^T: cubic
//   r^3 + eta2 r^2 + eta1 r + eta0 = 0,
//   eta2 = m2^T N^{-1} m1, eta1 = -trace(N^{-1}), eta0 = eta1 eta2 + m2^T N^{-2} m1.
// Roots whose assembled matrix is singular or fails verification are spurious.
SolutionSet solve_trace_inverse_rank1M(const Vec& m1, const Vec& m2, const Mat& N);

// f(X) = trace(X^{-1}) with rank-one N = n1 n2^T: quadratic
//   eta2 r^2 + eta1 r + eta0 = 0,
//   eta0 = -trace(M^{-1}), eta2 = n2^T M^{-1} n1,
//   eta1 = 1 + eta0 eta2 + n2^T M^{-2} n1.
SolutionSet solve_trace_inverse_rank1N(const Mat& M, const Vec& n1, const Vec& n2);

// Roots of c[0] + c[1] x + ... + c[d] x^d via the companion matrix, with tiny
// leading coefficients trimmed and a few Newton polishing steps per root.
std::vector<Cplx> poly_roots(const std::vector<double>& coeffs);

}  // namespace quasilin::polyf
