#include "quasilin/linearf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace quasilin::linearf {

namespace {

double equation_residual(const QuasiLinearProblem& p, const Mat& X) {
  Mat r = p.A * X + X * p.B - p.D;
  for (const Term& t : p.terms) r += t.f(X) * t.C;
  const double scale = (p.A.norm() + p.B.norm()) * X.norm() + p.D.norm();
  return r.norm() / std::max(1.0, scale);
}

double reduced_residual(const ReducedProblem& rp, const Mat& X) {
  Mat r = X - rp.M;
  for (std::size_t i = 0; i < rp.N.size(); ++i) r -= rp.f[i](X) * rp.N[i];
  return r.norm() / std::max(1.0, rp.M.norm());
}

}  // namespace

ReducedProblem reduce_problem(const QuasiLinearProblem& problem) {
  problem.validate();
  ReducedProblem rp;
  rp.M = solve_sylvester(problem.A, problem.B, problem.D);
  for (const Term& t : problem.terms) {
    rp.N.push_back(-solve_sylvester(problem.A, problem.B, t.C));
    rp.f.push_back(t.f);
  }
  return rp;
}

LinearOutcome solve_reduced_multi(const ReducedProblem& reduced) {
  reduced.validate();
  const Index ell = static_cast<Index>(reduced.N.size());
  LinearOutcome out;
  out.M = reduced.M;

  if (ell == 0) {
    out.tag = LinearOutcome::Tag::Unique;
    out.X = reduced.M;
    out.sigma = Vec::Zero(0);
    out.residual = 0.0;
    out.singular_value_min = 1.0;
    out.norm_condition = true;
    return out;
  }

  Mat F(ell, ell);
  Vec rhs(ell);
  for (Index j = 0; j < ell; ++j) {
    for (Index i = 0; i < ell; ++i) F(j, i) = reduced.f[j](reduced.N[i]);
    rhs(j) = reduced.f[j](reduced.M);
  }
  Mat IF = Mat::Identity(ell, ell) - F;
  out.F_norm1 = F.cwiseAbs().colwise().sum().maxCoeff();
  out.norm_condition = out.F_norm1 < 1.0;

  Eigen::JacobiSVD<Mat> svd(IF, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  out.singular_value_min = sv(ell - 1);
  const double tol_sv = 1e-10 * (1.0 + out.F_norm1);

  if (out.singular_value_min > tol_sv) {
    Vec sigma = svd.solve(rhs);
    out.tag = LinearOutcome::Tag::Unique;
    out.sigma = sigma;
    out.X = reduced.M;
    for (Index i = 0; i < ell; ++i) out.X += sigma(i) * reduced.N[i];
    out.residual = reduced_residual(reduced, out.X);
    return out;
  }

  // I - F is numerically singular: split the right side into the range
  // component (solvable, minimum-norm) and the orthogonal remainder.
  Index rank = 0;
  while (rank < ell && sv(rank) > tol_sv) ++rank;
  Vec coeffs = svd.matrixU().transpose() * rhs;
  Vec sigma_part = Vec::Zero(ell);
  for (Index k = 0; k < rank; ++k) {
    sigma_part += (coeffs(k) / sv(k)) * svd.matrixV().col(k);
  }
  double unresolved = 0.0;
  for (Index k = rank; k < ell; ++k) unresolved += coeffs(k) * coeffs(k);
  out.inconsistency = std::sqrt(unresolved);

  if (out.inconsistency > tol_sv * reduced.M.norm()) {
    out.tag = LinearOutcome::Tag::NoSolution;
    return out;
  }

  out.tag = LinearOutcome::Tag::NonUniqueFamily;
  for (Index i = 0; i < ell; ++i) out.M += sigma_part(i) * reduced.N[i];
  for (Index k = rank; k < ell; ++k) {
    Vec v = svd.matrixV().col(k);
    Mat Z = Mat::Zero(reduced.M.rows(), reduced.M.cols());
    for (Index i = 0; i < ell; ++i) Z += v(i) * reduced.N[i];
    out.N_list.push_back(Z);
    out.sigma_kernel.push_back(v);
  }
  return out;
}

LinearOutcome solve_single(const QuasiLinearProblem& problem) {
  problem.validate();
  if (problem.terms.size() != 1) {
    throw DimensionMismatch("solve_single: expected exactly one coupling term, got " +
                            std::to_string(problem.terms.size()));
  }
  const LinearFunctional& f = problem.terms[0].f;

  Mat M = solve_sylvester(problem.A, problem.B, problem.D);
  Mat N = -solve_sylvester(problem.A, problem.B, problem.terms[0].C);
  const double fM = f(M);
  const double fN = f(N);

  LinearOutcome out;
  out.M = M;
  out.F_norm1 = std::abs(fN);
  out.norm_condition = out.F_norm1 < 1.0;
  out.singular_value_min = std::abs(1.0 - fN);

  const double eps_sing = 1e-10 * (1.0 + std::abs(fN));
  if (std::abs(1.0 - fN) <= eps_sing) {
    if (std::abs(fM) <= eps_sing * M.norm()) {
      out.tag = LinearOutcome::Tag::NonUniqueFamily;
      out.N_list.push_back(N);
      out.sigma_kernel.push_back(Vec::Ones(1));
    } else {
      out.tag = LinearOutcome::Tag::NoSolution;
      out.inconsistency = std::abs(fM);
    }
    return out;
  }

  const double sigma = fM / (1.0 - fN);
  out.tag = LinearOutcome::Tag::Unique;
  out.sigma = Vec::Constant(1, sigma);
  out.X = M + sigma * N;
  out.residual = equation_residual(problem, out.X);
  if (out.residual > 1e-6) {
    throw VerificationFailed("solve_single: residual " + std::to_string(out.residual) +
                             " exceeds the verification bound");
  }
  return out;
}

LinearOutcome solve_multi(const QuasiLinearProblem& problem) {
  ReducedProblem rp = reduce_problem(problem);
  LinearOutcome out = solve_reduced_multi(rp);
  if (out.tag == LinearOutcome::Tag::Unique) {
    out.residual = equation_residual(problem, out.X);
    if (out.residual > 1e-6) {
      throw VerificationFailed("solve_multi: residual " + std::to_string(out.residual) +
                               " exceeds the verification bound");
    }
  }
  return out;
}

double trace_shortcut(const Mat& A, const Mat& C, const Mat& D) {
  require_square(A, "trace_shortcut: A");
  require_finite(A, "trace_shortcut: A");
  require_finite(C, "trace_shortcut: C");
  require_finite(D, "trace_shortcut: D");
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) {
    throw SingularOperator("trace_shortcut: A is numerically singular");
  }
  const double tc = lu.solve(C).trace();
  const double denom = 2.0 + tc;
  if (std::abs(denom) <= 1e-10 * (1.0 + std::abs(tc))) {
    throw DegenerateCase("trace_shortcut: denominator 2 + trace(A^{-1}C) vanishes");
  }
  return lu.solve(D).trace() / denom;
}

double trace_shortcut(const Mat& A, const Mat& C1, const Mat& C2, const Mat& D) {
  require_square(A, "trace_shortcut: A");
  require_finite(A, "trace_shortcut: A");
  require_finite(C1, "trace_shortcut: C1");
  require_finite(C2, "trace_shortcut: C2");
  require_finite(D, "trace_shortcut: D");
  if (C1.cols() != C2.cols() || C1.rows() != A.rows() || C2.rows() != A.rows()) {
    throw DimensionMismatch("trace_shortcut: factored C must be (n x k)(n x k)^T");
  }
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) {
    throw SingularOperator("trace_shortcut: A is numerically singular");
  }
  const double tc = (C2.transpose() * lu.solve(C1)).trace();
  const double denom = 2.0 + tc;
  if (std::abs(denom) <= 1e-10 * (1.0 + std::abs(tc))) {
    throw DegenerateCase("trace_shortcut: denominator 2 + trace(A^{-1}C) vanishes");
  }
  return lu.solve(D).trace() / denom;
}

std::pair<Mat, LinearOutcome> error_from_residual(const QuasiLinearProblem& problem,
                                                  const Mat& X_approx) {
  problem.validate();
  if (problem.terms.size() != 1) {
    throw DimensionMismatch("error_from_residual: expected exactly one coupling term");
  }
  if (X_approx.rows() != problem.n() || X_approx.cols() != problem.m()) {
    throw DimensionMismatch("error_from_residual: X_approx has the wrong shape");
  }
  const Term& t = problem.terms[0];
  Mat R = problem.A * X_approx + X_approx * problem.B + t.f(X_approx) * t.C - problem.D;

  QuasiLinearProblem err = problem;
  err.D = R;
  LinearOutcome E = solve_single(err);
  return {R, E};
}

}  // namespace quasilin::linearf
