#pragma once

#include "quasilin/problem.hpp"
#include "quasilin/types.hpp"

#include <string>
#include <vector>

namespace quasilin::mech {

// Isotropic elastic moduli.
struct ElasticityIso {
  double E;
  double nu;
  ElasticityIso(double young, double poisson);
};

struct TiTerm {
  Mat H;
  Mat K;
};

// Transversely isotropic (general linear) elasticity as a sum of
// trace-functional terms: C(X) = sum_i trace(H_i X) K_i.
struct ElasticityTI {
  std::vector<TiTerm> terms;
  explicit ElasticityTI(std::vector<TiTerm> t);
  std::size_t size() const { return terms.size(); }
  Mat apply(const Mat& X) const;
};

// C(X) = E/(1+nu) (X + nu/(1-2nu) trace(X) I); symmetric in, symmetric out.
Mat isotropic_apply(const ElasticityIso& el, const Mat& X);

// Newton-step equation S X + X S + C(X) Y + Y C(X) = D in the symmetrized
// (AHO) frame, with D = 2 mu I - (YS + SY) - (Y T + T Y), T = C(Y + Ybar) - S.
QuasiLinearProblem build_aho_iso(const Mat& S, const Mat& Y, const Mat& Ybar,
                                 const ElasticityIso& el, double mu);

// Scaled (NT) frame of W X W + C(X) = D, premultiplied by W^{-1}.
QuasiLinearProblem build_nt_iso(const Mat& W, const Mat& D, const ElasticityIso& el);

// General-tensor variants. The AHO frame keeps the quasi-linear form with
// A = B = S and terms (K_i Y + Y K_i, trace(H_i .)); the NT frame is already
// reduced: M = W^{-1} D W^{-1}, N_i = -W^{-1} K_i W^{-1}.
QuasiLinearProblem build_ti_aho(const ElasticityTI& ti, const Mat& S, const Mat& Y,
                                const Mat& D);
ReducedProblem build_ti_nt(const ElasticityTI& ti, const Mat& W, const Mat& D);

// Spectral-basis encoding of the isotropic tensor with n(n+1)/2 terms.
ElasticityTI ti_from_isotropic(const ElasticityIso& el, Index n);

// W = Y^{-1/2} (Y^{1/2} S Y^{1/2})^{1/2} Y^{-1/2}, the SPD scaling point
// with W Y W = S.
Mat nt_scaling(const Mat& Y, const Mat& S);

enum class DemoScheme { AHO, NT };

struct DemoStep {
  Mat Y;
  Mat S;
  double mu = 0.0;
  double step_residual = 0.0;
};

struct DemoTrajectory {
  std::vector<DemoStep> steps;
  std::string to_csv() const;
};

// Interior-point-flavoured projection loop from Y = S = I: solve the step
// equation, damp the update to keep Y positive definite, reset S = mu Y^{-1},
// shrink mu. Demonstration quality only; no convergence claim.
DemoTrajectory projection_demo(const Mat& Ybar, const ElasticityIso& el, DemoScheme scheme,
                               int steps, double mu0, double mu_factor);

}  // namespace quasilin::mech
