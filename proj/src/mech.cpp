#include "quasilin/mech.hpp"

#include "quasilin/linearf.hpp"
#include "quasilin/matcore.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

namespace quasilin::mech {

namespace {

void require_symmetric(const Mat& M, const std::string& who) {
  require_square(M, who);
  require_finite(M, who);
  if (asymmetry(M) > 1e-8) {
    throw Error(who + " must be symmetric");
  }
}

void require_spd(const Mat& M, const std::string& who) {
  require_symmetric(M, who);
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M));
  if (es.eigenvalues()(0) <= 0.0) {
    throw NotSPD(who + " must be positive definite");
  }
}

Mat spd_inverse(const Mat& M, const std::string& who) {
  require_spd(M, who);
  Eigen::LLT<Mat> llt(symmetrize(M));
  if (llt.info() != Eigen::Success) {
    throw NotSPD(who + ": Cholesky factorization failed");
  }
  return symmetrize(llt.solve(Mat::Identity(M.rows(), M.rows())));
}

double trace_coupling(const ElasticityIso& el) {
  return el.nu * el.E / ((1.0 + el.nu) * (1.0 - 2.0 * el.nu));
}

double min_eigenvalue(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(S));
  return es.eigenvalues()(0);
}

Mat solve_step(const QuasiLinearProblem& problem) {
  auto out = linearf::solve_single(problem);
  if (out.tag != linearf::LinearOutcome::Tag::Unique) {
    throw StepFailure("projection_demo: step equation lost uniqueness");
  }
  return out.X;
}

}  // namespace

ElasticityIso::ElasticityIso(double young, double poisson) : E(young), nu(poisson) {
  if (!(E > 0.0) || !std::isfinite(E)) {
    throw InvalidElasticity("ElasticityIso: Young's modulus must be positive");
  }
  if (!(nu > -1.0 && nu < 0.5)) {
    throw InvalidElasticity("ElasticityIso: Poisson ratio must lie in (-1, 1/2)");
  }
}

ElasticityTI::ElasticityTI(std::vector<TiTerm> t) : terms(std::move(t)) {
  if (terms.empty()) {
    throw InvalidElasticity("ElasticityTI: at least one term is required");
  }
  const Index n = terms.front().H.rows();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string tag = "ElasticityTI.terms[" + std::to_string(i) + "]";
    require_square(terms[i].H, tag + ".H");
    require_square(terms[i].K, tag + ".K");
    if (terms[i].H.rows() != n || terms[i].K.rows() != n) {
      throw DimensionMismatch(tag + ": inconsistent sizes");
    }
    if (asymmetry(terms[i].H) > 1e-10 || asymmetry(terms[i].K) > 1e-10) {
      throw InvalidElasticity(tag + ": H and K must be symmetric");
    }
  }
}

Mat ElasticityTI::apply(const Mat& X) const {
  Mat out = Mat::Zero(X.rows(), X.cols());
  for (const TiTerm& t : terms) {
    out += (t.H * X).trace() * t.K;
  }
  return out;
}

Mat isotropic_apply(const ElasticityIso& el, const Mat& X) {
  require_symmetric(X, "isotropic_apply: X");
  const Index n = X.rows();
  const double lead = el.E / (1.0 + el.nu);
  return lead * (X + el.nu / (1.0 - 2.0 * el.nu) * X.trace() * Mat::Identity(n, n));
}

QuasiLinearProblem build_aho_iso(const Mat& S, const Mat& Y, const Mat& Ybar,
                                 const ElasticityIso& el, double mu) {
  require_spd(S, "build_aho_iso: S");
  require_spd(Y, "build_aho_iso: Y");
  require_symmetric(Ybar, "build_aho_iso: Ybar");
  if (S.rows() != Y.rows() || Ybar.rows() != Y.rows()) {
    throw DimensionMismatch("build_aho_iso: S, Y, Ybar sizes disagree");
  }
  if (!(mu > 0.0)) {
    throw Error("build_aho_iso: mu must be positive");
  }
  const Index n = S.rows();

  Mat A = S + el.E / (1.0 + el.nu) * Y;
  // C(X)Y + YC(X) contributes the trace part of the tensor through both
  // products, so the coupling matrix carries twice the nominal coefficient.
  Mat C = 2.0 * trace_coupling(el) * Y;

  Mat T = isotropic_apply(el, symmetrize(Y + Ybar)) - S;
  Mat D = 2.0 * mu * Mat::Identity(n, n) - (Y * S + S * Y) - (Y * T + T * Y);
  return make_single_term(A, A, std::move(C), LinearFunctional::identity(n), std::move(D));
}

QuasiLinearProblem build_nt_iso(const Mat& W, const Mat& D, const ElasticityIso& el) {
  require_symmetric(D, "build_nt_iso: D");
  Mat Winv = spd_inverse(W, "build_nt_iso: W");
  if (D.rows() != W.rows()) {
    throw DimensionMismatch("build_nt_iso: W and D sizes disagree");
  }
  const Index n = W.rows();
  Mat A = el.E / (1.0 + el.nu) * Winv;
  Mat C = trace_coupling(el) * Winv;
  Mat rhs = Winv * D;
  return make_single_term(std::move(A), W, std::move(C), LinearFunctional::identity(n),
                          std::move(rhs));
}

QuasiLinearProblem build_ti_aho(const ElasticityTI& ti, const Mat& S, const Mat& Y,
                                const Mat& D) {
  require_spd(S, "build_ti_aho: S");
  require_spd(Y, "build_ti_aho: Y");
  const Index n = S.rows();
  if (Y.rows() != n || D.rows() != n || D.cols() != n || ti.terms.front().H.rows() != n) {
    throw DimensionMismatch("build_ti_aho: sizes disagree");
  }
  QuasiLinearProblem p;
  p.A = S;
  p.B = S;
  p.D = D;
  for (const TiTerm& t : ti.terms) {
    p.terms.push_back(Term{t.K * Y + Y * t.K, LinearFunctional::dense(t.H)});
  }
  p.validate();
  return p;
}

ReducedProblem build_ti_nt(const ElasticityTI& ti, const Mat& W, const Mat& D) {
  Mat Winv = spd_inverse(W, "build_ti_nt: W");
  const Index n = W.rows();
  if (D.rows() != n || D.cols() != n || ti.terms.front().H.rows() != n) {
    throw DimensionMismatch("build_ti_nt: sizes disagree");
  }
  ReducedProblem r;
  r.M = Winv * D * Winv;
  for (const TiTerm& t : ti.terms) {
    r.N.push_back(-(Winv * t.K * Winv));
    r.f.push_back(LinearFunctional::dense(t.H));
  }
  r.validate();
  return r;
}

ElasticityTI ti_from_isotropic(const ElasticityIso& el, Index n) {
  if (n < 1) throw Error("ti_from_isotropic: n must be positive");
  std::vector<TiTerm> terms;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      Mat B = Mat::Zero(n, n);
      if (i == j) {
        B(i, i) = 1.0;
      } else {
        B(i, j) = inv_sqrt2;
        B(j, i) = inv_sqrt2;
      }
      terms.push_back(TiTerm{B, isotropic_apply(el, B)});
    }
  }
  return ElasticityTI(std::move(terms));
}

Mat nt_scaling(const Mat& Y, const Mat& S) {
  require_spd(Y, "nt_scaling: Y");
  require_spd(S, "nt_scaling: S");
  if (Y.rows() != S.rows()) {
    throw DimensionMismatch("nt_scaling: Y and S sizes disagree");
  }
  Mat Yh = mat_sqrt(Y);
  Mat Yhi = spd_inverse(Yh, "nt_scaling: Y^{1/2}");
  Mat mid = mat_sqrt(symmetrize(Yh * S * Yh));
  Mat W = symmetrize(Yhi * mid * Yhi);

  const double gap = (W * Y * W - S).norm() / std::max(1.0, S.norm());
  if (gap > 1e-10) {
    throw NotSPD("nt_scaling: W Y W = S violated, relative gap " + std::to_string(gap));
  }
  return W;
}

std::string DemoTrajectory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "step,mu,step_residual,min_eig_Y,duality_gap\n";
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const DemoStep& s = steps[k];
    os << k + 1 << ',' << s.mu << ',' << s.step_residual << ',' << min_eigenvalue(s.Y) << ','
       << (s.Y * s.S).trace() / static_cast<double>(s.Y.rows()) << '\n';
  }
  return os.str();
}

DemoTrajectory projection_demo(const Mat& Ybar, const ElasticityIso& el, DemoScheme scheme,
                               int steps, double mu0, double mu_factor) {
  require_symmetric(Ybar, "projection_demo: Ybar");
  if (steps < 1 || steps > 50) {
    throw Error("projection_demo: steps must lie in 1..50");
  }
  if (!(mu0 > 0.0) || !(mu_factor > 0.0) || mu_factor > 1.0) {
    throw Error("projection_demo: need mu0 > 0 and mu_factor in (0, 1]");
  }
  const Index n = Ybar.rows();

  Mat Y = Mat::Identity(n, n);
  Mat S = Mat::Identity(n, n);
  double mu = mu0;

  DemoTrajectory traj;
  for (int k = 0; k < steps; ++k) {
    Mat X;
    double residual;
    if (scheme == DemoScheme::AHO) {
      QuasiLinearProblem p = build_aho_iso(S, Y, Ybar, el, mu);
      X = solve_step(p);
      Mat CX = isotropic_apply(el, symmetrize(X));
      residual = (S * X + X * S + CX * Y + Y * CX - p.D).norm() /
                 std::max(1.0, p.D.norm());
    } else {
      Mat W = nt_scaling(Y, S);
      Mat Yinv = spd_inverse(Y, "projection_demo: Y");
      Mat Dnt = symmetrize(mu * Yinv - isotropic_apply(el, symmetrize(Y + Ybar)));
      QuasiLinearProblem p = build_nt_iso(W, Dnt, el);
      X = solve_step(p);
      Mat CX = isotropic_apply(el, symmetrize(X));
      residual = (W * X * W + CX - Dnt).norm() / std::max(1.0, Dnt.norm());
    }
    X = symmetrize(X);

    const double floor = 0.05 * min_eigenvalue(Y);
    double tau = 1.0;
    int halvings = 0;
    while (min_eigenvalue(Y + tau * X) <= floor) {
      tau *= 0.5;
      if (++halvings > 30) {
        throw StepFailure("projection_demo: backtracking exhausted 30 halvings");
      }
    }

    Y = symmetrize(Y + tau * X);
    S = symmetrize(mu * spd_inverse(Y, "projection_demo: Y"));
    traj.steps.push_back(DemoStep{Y, S, mu, residual});
    mu *= mu_factor;
  }
  return traj;
}

}  // namespace quasilin::mech
