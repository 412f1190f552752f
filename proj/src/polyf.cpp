#include "quasilin/polyf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>

namespace quasilin::polyf {

namespace {

Cplx horner(const std::vector<double>& c, Cplx x) {
  Cplx acc(0.0, 0.0);
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

Cplx horner_derivative(const std::vector<double>& c, Cplx x) {
  Cplx acc(0.0, 0.0);
  for (std::size_t i = c.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * c[i];
  return acc;
}

bool nearly_real(Cplx r) { return std::abs(r.imag()) <= 1e-10 * (1.0 + std::abs(r)); }

// Evaluation context shared by the accept/reject step of every solver.
struct Assembler {
  const Mat& M;
  const Mat& N;
  // Returns f(X) or throws SpuriousTag via the out-parameters.
  std::function<Cplx(const CMat&, bool is_real, bool& singular)> eval;

  void process(SolutionSet& out, Cplx root) const {
    const bool is_real = nearly_real(root);
    if (is_real) root = Cplx(root.real(), 0.0);
    CMat X = M.cast<Cplx>() + root * N.cast<Cplx>();

    bool singular = false;
    const Cplx fX = eval(X, is_real, singular);
    if (singular) {
      out.spurious.push_back({root, "assembled matrix is numerically singular", 0.0});
      return;
    }
    const double f_res = std::abs(fX - root);
    const double tol_accept = 1e-8 * (1.0 + std::abs(root));
    if (f_res > tol_accept) {
      out.spurious.push_back(
          {root, "verification failed: |f(X) - r| = " + std::to_string(f_res), f_res});
      return;
    }
    SolutionEntry e;
    e.root = root;
    e.is_real = is_real;
    e.X = ComplexMat(Mat(X.real()), Mat(X.imag()));
    e.f_residual = f_res;
    CMat eq = X - M.cast<Cplx>() - fX * N.cast<Cplx>();
    e.eq_residual = eq.norm() / std::max(1e-300, M.norm() + N.norm());
    out.entries.push_back(e);
  }
};

void require_same_square(const Mat& M, const Mat& N, const std::string& who) {
  require_square(M, who + ": M");
  require_square(N, who + ": N");
  require_finite(M, who + ": M");
  require_finite(N, who + ": N");
  if (M.rows() != N.rows()) {
    throw DimensionMismatch(who + ": M and N must have the same size");
  }
}

bool complex_singular(const CMat& X, double* smin_out = nullptr) {
  Eigen::JacobiSVD<CMat> svd(X);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(X.rows() - 1);
  if (smin_out) *smin_out = smin;
  return smin <= 1e-12 * std::max(1.0, smax);
}

Cplx trace_power(const CMat& X, int p) {
  CMat acc = X;
  for (int k = 1; k < p; ++k) acc = acc * X;
  return acc.trace();
}

Cplx trace_inverse(const CMat& X, bool& singular) {
  if (complex_singular(X)) {
    singular = true;
    return Cplx(0.0, 0.0);
  }
  return X.inverse().trace();
}

}  // namespace

std::vector<Cplx> poly_roots(const std::vector<double>& coeffs) {
  std::vector<double> c = coeffs;
  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, std::abs(v));
  if (cmax == 0.0) {
    throw DegenerateCase("poly_roots: identically zero polynomial");
  }
  while (c.size() > 1 && std::abs(c.back()) <= 1e-12 * cmax) c.pop_back();
  const std::size_t d = c.size() - 1;
  if (d == 0) return {};

  Mat companion = Mat::Zero(d, d);
  for (std::size_t i = 0; i + 1 < d; ++i) companion(i + 1, i) = 1.0;
  for (std::size_t i = 0; i < d; ++i) companion(i, d - 1) = -c[i] / c[d];

  Eigen::EigenSolver<Mat> es(companion);
  if (es.info() != Eigen::Success) {
    throw DegenerateCase("poly_roots: companion eigensolver failed");
  }
  std::vector<Cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + d);

  for (Cplx& r : roots) {
    for (int step = 0; step < 3; ++step) {
      const Cplx p = horner(c, r);
      const Cplx dp = horner_derivative(c, r);
      if (std::abs(dp) < 1e-300) break;
      const Cplx next = r - p / dp;
      if (std::abs(horner(c, next)) < std::abs(p)) {
        r = next;
      } else {
        break;
      }
    }
  }
  return roots;
}

SolutionSet solve_trace_power2(const Mat& M, const Mat& N) {
  require_same_square(M, N, "solve_trace_power2");
  const double fN = (N * N).trace();
  const double fM = (M * M).trace();
  const double beta = 2.0 * (M * N).trace() - 1.0;

  Assembler assembler{M, N,
                      [](const CMat& X, bool, bool&) { return trace_power(X, 2); }};
  SolutionSet out;

  const double eps = 1e-12 * N.squaredNorm();
  if (std::abs(fN) <= eps) {
    if (beta == 0.0) {
      throw DegenerateCase("solve_trace_power2: trace(N^2) and beta both vanish");
    }
    assembler.process(out, Cplx(-fM / beta, 0.0));
    return out;
  }

  const double disc = beta * beta - 4.0 * fN * fM;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    // Cancellation-free pairing of the classic quadratic roots.
    const double q = -0.5 * (beta + (beta >= 0.0 ? sq : -sq));
    const double r1 = q / fN;
    const double r2 = (q != 0.0) ? fM / q : -beta / fN - r1;
    assembler.process(out, Cplx(r1, 0.0));
    assembler.process(out, Cplx(r2, 0.0));
  } else {
    const double re = -beta / (2.0 * fN);
    const double im = std::sqrt(-disc) / (2.0 * fN);
    assembler.process(out, Cplx(re, im));
    assembler.process(out, Cplx(re, -im));
  }
  return out;
}

SolutionSet solve_trace_power_general(const Mat& M, const Mat& N, int p) {
  require_same_square(M, N, "solve_trace_power_general");
  if (p < 2 || p > 12) {
    throw DimensionMismatch("solve_trace_power_general: p must lie in 2..12, got " +
                            std::to_string(p));
  }

  // q(r) = trace((M + rN)^p): the coefficient of r^k collects every ordered
  // word with exactly k occurrences of N. Cyclic grouping is deliberately not
  // used, so the expansion stays an independent check of the algebra.
  std::vector<double> coeff(static_cast<std::size_t>(p) + 1, 0.0);
  const std::uint64_t words = std::uint64_t(1) << p;
  for (std::uint64_t mask = 0; mask < words; ++mask) {
    Mat prod = (mask & 1u) ? N : M;
    for (int pos = 1; pos < p; ++pos) {
      prod = prod * ((mask >> pos) & 1u ? N : M);
    }
    coeff[static_cast<std::size_t>(std::popcount(mask))] += prod.trace();
  }
  coeff[1] -= 1.0;  // q(r) - r = 0

  Assembler assembler{M, N,
                      [p](const CMat& X, bool, bool&) { return trace_power(X, p); }};
  SolutionSet out;
  for (Cplx r : poly_roots(coeff)) assembler.process(out, r);
  return out;
}

SolutionSet solve_frobenius(const Mat& M, const Mat& N) {
  require_same_square(M, N, "solve_frobenius");
  const double a = N.squaredNorm();
  const double b = 2.0 * (M.transpose() * N).trace() - 1.0;
  const double c = M.squaredNorm();

  std::vector<Cplx> roots;
  if (a == 0.0) {
    roots.push_back(Cplx(-c / b, 0.0));  // b = -1 when N = 0
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
      roots.push_back(Cplx(q / a, 0.0));
      roots.push_back(Cplx(q != 0.0 ? c / q : -b / a - q / a, 0.0));
    } else {
      const double re = -b / (2.0 * a);
      const double im = std::sqrt(-disc) / (2.0 * a);
      roots.push_back(Cplx(re, im));
      roots.push_back(Cplx(re, -im));
    }
  }

  SolutionSet out;
  Assembler assembler{M, N, [](const CMat& X, bool, bool&) {
                        return Cplx(X.squaredNorm(), 0.0);
                      }};
  for (Cplx r : roots) {
    if (!nearly_real(r)) {
      out.spurious.push_back({r, "complex root rejected: squared norm is real", 0.0});
      continue;
    }
    if (r.real() < 0.0) {
      out.spurious.push_back({r, "negative root rejected: squared norm is nonnegative", 0.0});
      continue;
    }
    assembler.process(out, r);
  }
  if (out.entries.empty()) {
    throw NoRealSolution("solve_frobenius: every root was rejected (" +
                         std::to_string(out.spurious.size()) + " spurious)");
  }
  return out;
}

SolutionSet solve_trace_inverse_rank1M(const Vec& m1, const Vec& m2, const Mat& N) {
  require_square(N, "solve_trace_inverse_rank1M: N");
  require_finite(N, "solve_trace_inverse_rank1M: N");
  const Index n = N.rows();
  if (m1.size() != n || m2.size() != n) {
    throw DimensionMismatch("solve_trace_inverse_rank1M: vector sizes must match N");
  }
  Eigen::FullPivLU<Mat> lu(N);
  if (!lu.isInvertible()) {
    throw SingularOperator("solve_trace_inverse_rank1M: N is numerically singular");
  }
  const Vec y1 = lu.solve(m1);
  const Vec y2 = lu.solve(y1);
  const double eta2 = m2.dot(y1);
  const double eta1 = -lu.inverse().trace();
  const double eta0 = eta1 * eta2 + m2.dot(y2);

  Mat M = m1 * m2.transpose();
  SolutionSet out;
  Assembler assembler{M, N, [](const CMat& X, bool, bool& singular) {
                        return trace_inverse(X, singular);
                      }};
  for (Cplx r : poly_roots({eta0, eta1, eta2, 1.0})) assembler.process(out, r);
  return out;
}

SolutionSet solve_trace_inverse_rank1N(const Mat& M, const Vec& n1, const Vec& n2) {
  require_square(M, "solve_trace_inverse_rank1N: M");
  require_finite(M, "solve_trace_inverse_rank1N: M");
  const Index n = M.rows();
  if (n1.size() != n || n2.size() != n) {
    throw DimensionMismatch("solve_trace_inverse_rank1N: vector sizes must match M");
  }
  Eigen::FullPivLU<Mat> lu(M);
  if (!lu.isInvertible()) {
    throw SingularOperator("solve_trace_inverse_rank1N: M is numerically singular");
  }
  const double fM = lu.inverse().trace();
  const Vec y1 = lu.solve(n1);
  const Vec y2 = lu.solve(y1);
  const double eta2 = n2.dot(y1);
  const double eta0 = -fM;
  const double eta1 = 1.0 - fM * eta2 + n2.dot(y2);

  Mat N = n1 * n2.transpose();
  SolutionSet out;
  Assembler assembler{M, N, [](const CMat& X, bool, bool& singular) {
                        return trace_inverse(X, singular);
                      }};
  for (Cplx r : poly_roots({eta0, eta1, eta2})) assembler.process(out, r);
  return out;
}

}  // namespace quasilin::polyf
