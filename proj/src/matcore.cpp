#include "quasilin/matcore.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace quasilin {

namespace {

// Quasi-upper-triangular matrices from a real Schur decomposition carry their
// spectrum in 1x1 and 2x2 diagonal blocks. Returns the starting index of each
// block; Eigen stores exact zeros on the subdiagonal between blocks.
std::vector<Index> block_starts(const Mat& T) {
  std::vector<Index> starts;
  const Index n = T.rows();
  Index k = 0;
  while (k < n) {
    starts.push_back(k);
    if (k + 1 < n && T(k + 1, k) != 0.0) {
      k += 2;
    } else {
      k += 1;
    }
  }
  return starts;
}

// Solves the p*q sized system (I_q (x) Rii + Sjj^T (x) I_p) vec(Y) = vec(G)
// for one diagonal-block pair; p, q <= 2.
Mat solve_block(const Mat& Rii, const Mat& Sjj, const Mat& G) {
  const Index p = Rii.rows();
  const Index q = Sjj.rows();
  Mat K = Mat::Zero(p * q, p * q);
  for (Index j = 0; j < q; ++j) {
    K.block(j * p, j * p, p, p) += Rii;
    for (Index k = 0; k < q; ++k) {
      // (S^T (x) I)_{jk} = S(k, j) I
      for (Index r = 0; r < p; ++r) K(j * p + r, k * p + r) += Sjj(k, j);
    }
  }
  Eigen::JacobiSVD<Mat> svd(K, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(p * q - 1);
  if (smin <= 1e-13 * std::max(1.0, smax)) {
    throw SingularOperator(
        "solve_sylvester: A and -B share an eigenvalue (singular diagonal block)");
  }
  Vec g(p * q);
  for (Index j = 0; j < q; ++j) g.segment(j * p, p) = G.col(j);
  Vec y = svd.solve(g);
  Mat Y(p, q);
  for (Index j = 0; j < q; ++j) Y.col(j) = y.segment(j * p, p);
  return Y;
}

// Back-substitution for R Y + Y S = F with R, S quasi-upper-triangular.
// Column blocks advance left to right; within one column block, row blocks
// advance bottom to top so every referenced block is already known.
Mat solve_quasi_triangular(const Mat& R, const Mat& S, const Mat& F) {
  const std::vector<Index> rb = block_starts(R);
  const std::vector<Index> cb = block_starts(S);
  const Index n = R.rows();
  const Index m = S.rows();
  Mat Y = Mat::Zero(n, m);

  for (std::size_t jb = 0; jb < cb.size(); ++jb) {
    const Index j0 = cb[jb];
    const Index q = (jb + 1 < cb.size() ? cb[jb + 1] : m) - j0;
    // Accumulate the contribution of already-solved column blocks.
    Mat Gcol = F.middleCols(j0, q);
    if (j0 > 0) Gcol.noalias() -= Y.leftCols(j0) * S.block(0, j0, j0, q);

    for (std::size_t ib = rb.size(); ib-- > 0;) {
      const Index i0 = rb[ib];
      const Index p = (ib + 1 < rb.size() ? rb[ib + 1] : n) - i0;
      Mat G = Gcol.middleRows(i0, p);
      const Index below = n - (i0 + p);
      if (below > 0) {
        G.noalias() -= R.block(i0, i0 + p, p, below) * Y.block(i0 + p, j0, below, q);
      }
      Y.block(i0, j0, p, q) = solve_block(R.block(i0, i0, p, p), S.block(j0, j0, q, q), G);
    }
  }
  return Y;
}

}  // namespace

Mat solve_sylvester(const Mat& A, const Mat& B, const Mat& D) {
  require_square(A, "solve_sylvester: A");
  require_square(B, "solve_sylvester: B");
  require_finite(A, "solve_sylvester: A");
  require_finite(B, "solve_sylvester: B");
  require_finite(D, "solve_sylvester: D");
  const Index n = A.rows();
  const Index m = B.rows();
  if (D.rows() != n || D.cols() != m) {
    throw DimensionMismatch("solve_sylvester: D must be " + std::to_string(n) + "x" +
                            std::to_string(m));
  }
  if (n == 0 || m == 0) return Mat::Zero(n, m);

  Eigen::RealSchur<Mat> schurA(A);
  if (schurA.info() != Eigen::Success) {
    throw SingularOperator("solve_sylvester: Schur factorization of A failed");
  }
  Eigen::RealSchur<Mat> schurB(B);
  if (schurB.info() != Eigen::Success) {
    throw SingularOperator("solve_sylvester: Schur factorization of B failed");
  }
  const Mat& U = schurA.matrixU();
  const Mat& R = schurA.matrixT();
  const Mat& V = schurB.matrixU();
  const Mat& S = schurB.matrixT();

  Mat F = U.transpose() * D * V;
  Mat Y = solve_quasi_triangular(R, S, F);
  Mat X = U * Y * V.transpose();
  if (!X.allFinite()) {
    throw SingularOperator("solve_sylvester: non-finite solution (operator nearly singular)");
  }
  return X;
}

Mat kron_operator(const QuasiLinearProblem& problem) {
  problem.validate();
  const Index n = problem.n();
  const Index m = problem.m();
  if (n * m > 400) {
    throw DimensionMismatch("kron_operator: oracle capped at n*m <= 400");
  }
  Mat G = Mat::Zero(n * m, n * m);
  for (Index j = 0; j < m; ++j) {
    G.block(j * n, j * n, n, n) += problem.A;
    for (Index k = 0; k < m; ++k) {
      // (B^T (x) I)_{jk} = B(k, j) I
      for (Index r = 0; r < n; ++r) G(j * n + r, k * n + r) += problem.B(k, j);
    }
  }
  for (const Term& t : problem.terms) {
    Vec vc = Eigen::Map<const Vec>(t.C.data(), n * m);
    Vec coeff = t.f.vec_coefficients();
    G.noalias() += vc * coeff.transpose();
  }
  return G;
}

Mat kron_solve(const QuasiLinearProblem& problem) {
  const Index n = problem.n();
  const Index m = problem.m();
  Mat G = kron_operator(problem);
  Eigen::FullPivLU<Mat> lu(G);
  if (!lu.isInvertible()) {
    throw SingularOperator("kron_solve: vectorized system is numerically singular");
  }
  Vec d = Eigen::Map<const Vec>(problem.D.data(), n * m);
  Vec x = lu.solve(d);
  return Eigen::Map<const Mat>(x.data(), n, m);
}

Mat mat_exp(const Mat& X) {
  require_square(X, "mat_exp: X");
  require_finite(X, "mat_exp: X");
  Mat E = X.exp();
  if (!E.allFinite()) {
    throw NumericalOverflow("mat_exp: overflow for ||X||_F = " + std::to_string(X.norm()));
  }
  return E;
}

Mat mat_sqrt(const Mat& X) {
  require_square(X, "mat_sqrt: X");
  require_finite(X, "mat_sqrt: X");
  if (asymmetry(X) > 1e-8) {
    throw NotSPD("mat_sqrt: input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(X));
  if (es.info() != Eigen::Success) {
    throw NotSPD("mat_sqrt: eigendecomposition failed");
  }
  const Vec& d = es.eigenvalues();
  const double spectral_norm = std::max(std::abs(d(0)), std::abs(d(d.size() - 1)));
  if (d(0) <= 1e-12 * spectral_norm || d(0) <= 0.0) {
    throw NotSPD("mat_sqrt: smallest eigenvalue " + std::to_string(d(0)) +
                 " fails the positive definiteness threshold");
  }
  Mat S = es.eigenvectors() * d.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  return symmetrize(S);
}

EigResult eig_general(const Mat& N) {
  require_square(N, "eig_general: N");
  require_finite(N, "eig_general: N");
  const Index n = N.rows();
  EigResult out;

  if (asymmetry(N) <= 1e-13) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(N));
    if (es.info() != Eigen::Success) {
      throw NotDiagonalizable("eig_general: symmetric eigensolver failed");
    }
    out.Q = es.eigenvectors();
    out.Qc = out.Q.cast<Cplx>();
    out.lambda = es.eigenvalues().cast<Cplx>();
    out.condQ = 1.0;
    out.real_spectrum = true;
    return out;
  }

  Eigen::EigenSolver<Mat> es(N);
  if (es.info() != Eigen::Success) {
    throw NotDiagonalizable("eig_general: eigensolver failed to converge");
  }
  out.lambda = es.eigenvalues();
  out.Qc = es.eigenvectors();

  const double lam_scale = std::max(out.lambda.cwiseAbs().maxCoeff(), 1e-300);
  const double imag_mag = out.lambda.imag().cwiseAbs().maxCoeff();
  out.real_spectrum = imag_mag <= 1e-10 * std::max(1.0, lam_scale);
  if (out.real_spectrum) {
    out.Q = out.Qc.real();
    for (Index j = 0; j < n; ++j) {
      const double cn = out.Q.col(j).norm();
      if (cn > 0.0) out.Q.col(j) /= cn;
    }
    out.Qc = out.Q.cast<Cplx>();
    out.lambda = out.lambda.real().cast<Cplx>();
  } else {
    out.Q = out.Qc.real();
  }

  Eigen::JacobiSVD<CMat> svd(out.Qc);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  out.condQ = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
  if (out.condQ > 1e12) {
    throw NotDiagonalizable("eig_general: eigenvector condition " + std::to_string(out.condQ) +
                            " exceeds 1e12 (matrix is defective or nearly so)");
  }

  const double resid = (N.cast<Cplx>() * out.Qc - out.Qc * out.lambda.asDiagonal()).norm();
  if (resid > 1e-9 * std::max(1.0, N.norm())) {
    throw NotDiagonalizable("eig_general: eigenpair residual " + std::to_string(resid) +
                            " fails the backward-stability check");
  }
  return out;
}

}  // namespace quasilin
