#pragma once

#include "quasilin/functional.hpp"
#include "quasilin/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace quasilin {

// One coupling term f(X) * C of the equation AX + XB + sum_i f_i(X) C_i = D.
struct Term {
  Mat C;
  LinearFunctional f;
};

// AX + XB + sum_i f_i(X) C_i = D with X of size n x m.
// An empty term list is the plain Sylvester equation.
struct QuasiLinearProblem {
  Mat A;
  Mat B;
  std::vector<Term> terms;
  Mat D;

  Index n() const { return A.rows(); }
  Index m() const { return B.rows(); }

  void validate() const {
    require_square(A, "QuasiLinearProblem.A");
    require_square(B, "QuasiLinearProblem.B");
    require_finite(A, "QuasiLinearProblem.A");
    require_finite(B, "QuasiLinearProblem.B");
    require_finite(D, "QuasiLinearProblem.D");
    if (D.rows() != n() || D.cols() != m()) {
      throw DimensionMismatch("QuasiLinearProblem.D: expected " + std::to_string(n()) + "x" +
                              std::to_string(m()));
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const Term& t = terms[i];
      const std::string tag = "QuasiLinearProblem.terms[" + std::to_string(i) + "]";
      require_finite(t.C, tag + ".C");
      if (t.C.rows() != n() || t.C.cols() != m()) {
        throw DimensionMismatch(tag + ".C: expected " + std::to_string(n()) + "x" +
                                std::to_string(m()));
      }
      if (t.f.arg_rows() != n() || t.f.arg_cols() != m()) {
        throw DimensionMismatch(tag + ".f: functional expects " + std::to_string(t.f.arg_rows()) +
                                "x" + std::to_string(t.f.arg_cols()) + " arguments, X is " +
                                std::to_string(n()) + "x" + std::to_string(m()));
      }
    }
  }
};

// The same equation after eliminating the Sylvester operator:
// X = M + sum_i f_i(X) N_i, with M = L^{-1}(D) and N_i = -L^{-1}(C_i).
struct ReducedProblem {
  Mat M;
  std::vector<Mat> N;
  std::vector<LinearFunctional> f;

  void validate() const {
    require_finite(M, "ReducedProblem.M");
    if (N.size() != f.size()) {
      throw DimensionMismatch("ReducedProblem: " + std::to_string(N.size()) + " directions vs " +
                              std::to_string(f.size()) + " functionals");
    }
    for (std::size_t i = 0; i < N.size(); ++i) {
      require_finite(N[i], "ReducedProblem.N[" + std::to_string(i) + "]");
      if (N[i].rows() != M.rows() || N[i].cols() != M.cols()) {
        throw DimensionMismatch("ReducedProblem.N[" + std::to_string(i) + "]: shape mismatch");
      }
      if (f[i].arg_rows() != M.rows() || f[i].arg_cols() != M.cols()) {
        throw DimensionMismatch("ReducedProblem.f[" + std::to_string(i) + "]: shape mismatch");
      }
    }
  }
};

inline QuasiLinearProblem make_single_term(Mat A, Mat B, Mat C, LinearFunctional f, Mat D) {
  QuasiLinearProblem p;
  p.A = std::move(A);
  p.B = std::move(B);
  p.terms.push_back(Term{std::move(C), std::move(f)});
  p.D = std::move(D);
  p.validate();
  return p;
}

}  // namespace quasilin
