#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "quasilin/linearf.hpp"
#include "quasilin/random.hpp"

#include <cmath>
#include <utility>
#include <vector>

using namespace quasilin;
using linearf::LinearOutcome;

namespace {

double full_residual(const QuasiLinearProblem& p, const Mat& X) {
  Mat r = p.A * X + X * p.B - p.D;
  for (const Term& t : p.terms) r += t.f(X) * t.C;
  return r.norm();
}

// D manufactured so that X_star solves the problem exactly.
QuasiLinearProblem manufactured(Rng& rng, Index n, Index ell, Mat& X_star) {
  QuasiLinearProblem p;
  p.A = rng.well_conditioned(n);
  p.B = rng.well_conditioned(n);
  X_star = rng.randn(n, n);
  p.D = p.A * X_star + X_star * p.B;
  for (Index i = 0; i < ell; ++i) {
    Mat C = 0.2 * rng.randn(n, n);
    LinearFunctional f = (i % 2 == 0) ? LinearFunctional::identity(n)
                                      : LinearFunctional::dense(0.3 * rng.randn(n, n));
    p.D += f(X_star) * C;
    p.terms.push_back(Term{C, f});
  }
  return p;
}

}  // namespace

TEST_CASE("solve_single with C = 0 returns the Sylvester solution") {
  Rng rng(101);
  const Index n = 5;
  QuasiLinearProblem p;
  p.A = rng.well_conditioned(n);
  p.B = rng.well_conditioned(n);
  p.D = rng.randn(n, n);
  p.terms.push_back(Term{Mat::Zero(n, n), LinearFunctional::identity(n)});
  LinearOutcome out = linearf::solve_single(p);
  REQUIRE(out.tag == LinearOutcome::Tag::Unique);
  Mat M = solve_sylvester(p.A, p.B, p.D);
  CHECK((out.X - M).norm() < 1e-13 * M.norm());
  // With a vanishing coupling matrix the scalar is still f of the solution.
  CHECK(out.sigma(0) == doctest::Approx(out.X.trace()).epsilon(1e-12));
}

TEST_CASE("solve_single identity instance has the closed-form solution") {
  for (Index n : {2, 5, 9}) {
    QuasiLinearProblem p;
    p.A = Mat::Identity(n, n);
    p.B = Mat::Identity(n, n);
    p.D = Mat::Identity(n, n);
    p.terms.push_back(Term{Mat::Identity(n, n), LinearFunctional::identity(n)});
    LinearOutcome out = linearf::solve_single(p);
    REQUIRE(out.tag == LinearOutcome::Tag::Unique);
    const double nd = static_cast<double>(n);
    CHECK((out.X - Mat::Identity(n, n) / (nd + 2.0)).norm() < 1e-13);
    CHECK(out.sigma(0) == doctest::Approx(nd / (nd + 2.0)).epsilon(1e-13));
  }
}

TEST_CASE("solve_single recovers a manufactured solution") {
  Rng rng(102);
  Mat X_star;
  QuasiLinearProblem p = manufactured(rng, 10, 1, X_star);
  LinearOutcome out = linearf::solve_single(p);
  REQUIRE(out.tag == LinearOutcome::Tag::Unique);
  CHECK((out.X - X_star).norm() < 1e-10 * X_star.norm());
}

TEST_CASE("solve_single recomputing f on X reproduces sigma") {
  Rng rng(103);
  for (int trial = 0; trial < 5; ++trial) {
    Mat X_star;
    QuasiLinearProblem p = manufactured(rng, 7, 1, X_star);
    LinearOutcome out = linearf::solve_single(p);
    REQUIRE(out.tag == LinearOutcome::Tag::Unique);
    CHECK(p.terms[0].f(out.X) == doctest::Approx(out.sigma(0)).epsilon(1e-10));
  }
}

TEST_CASE("solve_single scaling the right side scales the solution") {
  Rng rng(104);
  Mat X_star;
  QuasiLinearProblem p = manufactured(rng, 6, 1, X_star);
  LinearOutcome base = linearf::solve_single(p);
  QuasiLinearProblem scaled = p;
  scaled.D *= 4.0;
  LinearOutcome big = linearf::solve_single(scaled);
  REQUIRE(base.tag == LinearOutcome::Tag::Unique);
  REQUIRE(big.tag == LinearOutcome::Tag::Unique);
  CHECK((big.X - 4.0 * base.X).norm() < 1e-13 * big.X.norm());
}

TEST_CASE("solve_single singular branch splits into family and no-solution") {
  Rng rng(105);
  const Index n = 6;
  Mat A = rng.well_conditioned(n);
  Mat B = rng.well_conditioned(n);
  Mat C0 = rng.randn(n, n);
  auto f = LinearFunctional::identity(n);

  // Scale C so that f(N) = 1 exactly up to rounding.
  Mat N0 = -solve_sylvester(A, B, C0);
  REQUIRE(std::abs(f(N0)) > 1e-6);
  Mat C = C0 / f(N0);

  SUBCASE("consistent right side yields the affine family") {
    // Build M with trace zero, so f(M) = 0.
    Mat Z = rng.randn(n, n);
    Mat M0 = Z - (Z.trace() / static_cast<double>(n)) * Mat::Identity(n, n);
    QuasiLinearProblem p;
    p.A = A;
    p.B = B;
    p.D = A * M0 + M0 * B;
    p.terms.push_back(Term{C, f});
    LinearOutcome out = linearf::solve_single(p);
    REQUIRE(out.tag == LinearOutcome::Tag::NonUniqueFamily);
    REQUIRE(out.N_list.size() == 1);
    const double scale = std::max(1.0, p.D.norm());
    CHECK(full_residual(p, out.M) < 1e-8 * scale);
    CHECK(full_residual(p, out.M + 3.7 * out.N_list[0]) < 1e-8 * scale);
    CHECK(full_residual(p, out.M - 1.3 * out.N_list[0]) < 1e-8 * scale);
  }

  SUBCASE("inconsistent right side yields no solution") {
    Mat M1 = rng.randn(n, n);
    M1 += (1.0 - M1.trace() / static_cast<double>(n)) * Mat::Identity(n, n);
    REQUIRE(std::abs(M1.trace()) > 0.5);
    QuasiLinearProblem p;
    p.A = A;
    p.B = B;
    p.D = A * M1 + M1 * B;
    p.terms.push_back(Term{C, f});
    LinearOutcome out = linearf::solve_single(p);
    CHECK(out.tag == LinearOutcome::Tag::NoSolution);
    CHECK(out.inconsistency > 0.0);
  }
}

TEST_CASE("solve_single agrees with the rank-one vectorized path") {
  Rng rng(106);
  const Index n = 6;
  for (int trial = 0; trial < 5; ++trial) {
    Mat A = rng.well_conditioned(n);
    Mat B = rng.well_conditioned(n);
    Vec u = rng.randn_vec(n);
    Vec v = rng.randn_vec(n);
    Mat C = v * v.transpose();
    Mat D = rng.randn(n, n);
    auto p = make_single_term(A, B, C, LinearFunctional::rank_one(u, u), D);

    LinearOutcome out = linearf::solve_single(p);
    REQUIRE(out.tag == LinearOutcome::Tag::Unique);
    Mat X_kron = kron_solve(p);
    CHECK((out.X - X_kron).norm() < 1e-10 * std::max(1.0, X_kron.norm()));

    // Scalar from the vectorized rank-one update formula.
    Mat G = oracles::sylvester_operator(A, B);
    Eigen::PartialPivLU<Mat> lu(G);
    Vec Uv(n * n), Vv(n * n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        Uv(j * n + i) = u(i) * u(j);
        Vv(j * n + i) = v(i) * v(j);
      }
    Vec Gid = lu.solve(oracles::vec_of(D));
    Vec GiV = lu.solve(Vv);
    const double sigma_vec = Uv.dot(Gid) / (1.0 + Uv.dot(GiV));
    CHECK(out.sigma(0) == doctest::Approx(sigma_vec).epsilon(1e-10));
  }
}

TEST_CASE("solve_multi with one term reduces to solve_single") {
  Rng rng(107);
  Mat X_star;
  QuasiLinearProblem p = manufactured(rng, 8, 1, X_star);
  LinearOutcome a = linearf::solve_single(p);
  LinearOutcome b = linearf::solve_multi(p);
  REQUIRE(a.tag == LinearOutcome::Tag::Unique);
  REQUIRE(b.tag == LinearOutcome::Tag::Unique);
  CHECK((a.X - b.X).norm() < 1e-13 * std::max(1.0, a.X.norm()));
  CHECK(a.sigma(0) == doctest::Approx(b.sigma(0)).epsilon(1e-13));
}

TEST_CASE("solve_multi recovers a three-term manufactured solution") {
  Rng rng(108);
  Mat X_star;
  QuasiLinearProblem p = manufactured(rng, 8, 3, X_star);
  LinearOutcome out = linearf::solve_multi(p);
  REQUIRE(out.tag == LinearOutcome::Tag::Unique);
  CHECK((out.X - X_star).norm() < 1e-9 * X_star.norm());
  for (Index i = 0; i < 3; ++i) {
    CHECK(p.terms[i].f(out.X) == doctest::Approx(out.sigma(i)).epsilon(1e-9));
  }
}

TEST_CASE("solve_multi matches the vectorized oracle") {
  Rng rng(109);
  const Index n = 6, m = 5;
  QuasiLinearProblem p;
  p.A = rng.well_conditioned(n);
  p.B = rng.well_conditioned(m);
  p.D = rng.randn(n, m);
  std::vector<std::pair<Mat, Mat>> CH;
  for (int i = 0; i < 2; ++i) {
    Mat C = 0.2 * rng.randn(n, m);
    Mat H = 0.2 * rng.randn(m, n);
    p.terms.push_back(Term{C, LinearFunctional::dense(H)});
    CH.emplace_back(C, H);
  }
  LinearOutcome out = linearf::solve_multi(p);
  REQUIRE(out.tag == LinearOutcome::Tag::Unique);
  Mat X_ref = oracles::vectorized_solve(p.A, p.B, CH, p.D);
  CHECK((out.X - X_ref).norm() < 1e-10 * std::max(1.0, X_ref.norm()));
}

TEST_CASE("solve_multi duplicated term at the critical coupling is a family") {
  Rng rng(110);
  const Index n = 6;
  Mat A = rng.well_conditioned(n);
  Mat B = rng.well_conditioned(n);
  auto f = LinearFunctional::identity(n);
  Mat C0 = rng.randn(n, n);
  Mat N0 = -solve_sylvester(A, B, C0);
  REQUIRE(std::abs(f(N0)) > 1e-6);
  // With both terms equal, the scalar system is singular exactly when each
  // term carries coupling 1/2.
  Mat C = C0 / (2.0 * f(N0));

  Mat Z = rng.randn(n, n);
  Mat M0 = Z - (Z.trace() / static_cast<double>(n)) * Mat::Identity(n, n);
  QuasiLinearProblem p;
  p.A = A;
  p.B = B;
  p.D = A * M0 + M0 * B;
  p.terms.push_back(Term{C, f});
  p.terms.push_back(Term{C, f});

  LinearOutcome out = linearf::solve_multi(p);
  REQUIRE(out.tag == LinearOutcome::Tag::NonUniqueFamily);
  REQUIRE(out.N_list.size() == 1);
  const double scale = std::max(1.0, p.D.norm());
  CHECK(full_residual(p, out.M) < 1e-8 * scale);
  CHECK(full_residual(p, out.M + 2.1 * out.N_list[0]) < 1e-8 * scale);
}

TEST_CASE("solve_multi with all C_i zero returns the Sylvester solution") {
  Rng rng(111);
  const Index n = 5;
  QuasiLinearProblem p;
  p.A = rng.well_conditioned(n);
  p.B = rng.well_conditioned(n);
  p.D = rng.randn(n, n);
  p.terms.push_back(Term{Mat::Zero(n, n), LinearFunctional::identity(n)});
  p.terms.push_back(Term{Mat::Zero(n, n), LinearFunctional::dense(rng.randn(n, n))});
  LinearOutcome out = linearf::solve_multi(p);
  REQUIRE(out.tag == LinearOutcome::Tag::Unique);
  Mat M = solve_sylvester(p.A, p.B, p.D);
  CHECK((out.X - M).norm() < 1e-12 * std::max(1.0, M.norm()));
}

TEST_CASE("solve_multi reports the coupling norm and sufficient condition") {
  Rng rng(112);
  Mat X_star;
  QuasiLinearProblem p = manufactured(rng, 6, 2, X_star);
  LinearOutcome out = linearf::solve_multi(p);
  CHECK(out.F_norm1 >= 0.0);
  CHECK(out.norm_condition == (out.F_norm1 < 1.0));
  CHECK(out.singular_value_min > 0.0);
}

TEST_CASE("trace_shortcut identity instance") {
  for (Index n : {2, 7}) {
    const double got = linearf::trace_shortcut(Mat::Identity(n, n), Mat::Identity(n, n),
                                               Mat::Identity(n, n));
    CHECK(got == doctest::Approx(static_cast<double>(n) / (2.0 + static_cast<double>(n))));
  }
  CHECK(linearf::trace_shortcut(Mat::Identity(2, 2), Mat::Identity(2, 2),
                                Mat::Identity(2, 2)) == doctest::Approx(0.5));
}

TEST_CASE("trace_shortcut with C = 0 is half the trace of D") {
  Rng rng(113);
  Mat D = rng.randn(5, 5);
  CHECK(linearf::trace_shortcut(Mat::Identity(5, 5), Mat::Zero(5, 5), D) ==
        doctest::Approx(D.trace() / 2.0).epsilon(1e-13));
}

TEST_CASE("trace_shortcut matches the trace of the full solve") {
  Rng rng(114);
  const Index n = 12;
  Mat A = rng.spd(n);
  Mat C = 0.3 * rng.randn(n, n);
  Mat D = rng.randn(n, n);
  auto p = make_single_term(A, A, C, LinearFunctional::identity(n), D);
  LinearOutcome out = linearf::solve_single(p);
  REQUIRE(out.tag == LinearOutcome::Tag::Unique);
  const double shortcut = linearf::trace_shortcut(A, C, D);
  CHECK(shortcut == doctest::Approx(out.X.trace()).epsilon(1e-11));
}

TEST_CASE("trace_shortcut low-rank factorization gives identical values") {
  Rng rng(115);
  const Index n = 10, k = 3;
  Mat A = rng.spd(n);
  Mat C1 = rng.randn(n, k);
  Mat C2 = rng.randn(n, k);
  Mat C = C1 * C2.transpose();
  Mat D = rng.randn(n, n);
  const double dense = linearf::trace_shortcut(A, C, D);
  const double lowrank = linearf::trace_shortcut(A, C1, C2, D);
  CHECK(dense == doctest::Approx(lowrank).epsilon(1e-12));
}

TEST_CASE("trace_shortcut error taxonomy") {
  Rng rng(116);
  const Index n = 4;
  Mat singularA = Mat::Zero(n, n);
  singularA(0, 0) = 1.0;
  CHECK_THROWS_AS(linearf::trace_shortcut(singularA, Mat::Zero(n, n), Mat::Identity(n, n)),
                  SingularOperator);
  // trace(A^{-1}C) = -2 makes the denominator vanish.
  Mat A = rng.spd(n);
  Mat C = (-2.0 / static_cast<double>(n)) * A;
  CHECK_THROWS_AS(linearf::trace_shortcut(A, C, Mat::Identity(n, n)), DegenerateCase);
}

TEST_CASE("error_from_residual at the exact solution is zero") {
  Rng rng(117);
  Mat X_star;
  QuasiLinearProblem p = manufactured(rng, 7, 1, X_star);
  auto [R, E] = linearf::error_from_residual(p, X_star);
  REQUIRE(E.tag == LinearOutcome::Tag::Unique);
  const double scale = std::max(1.0, p.D.norm());
  CHECK(R.norm() < 1e-12 * scale);
  CHECK(E.X.norm() < 1e-12 * scale);
}

TEST_CASE("error_from_residual reconstructs the exact solution") {
  Rng rng(118);
  Mat X_star;
  QuasiLinearProblem p = manufactured(rng, 7, 1, X_star);
  Mat P = 0.01 * rng.randn(7, 7);
  auto [R, E] = linearf::error_from_residual(p, X_star + P);
  REQUIRE(E.tag == LinearOutcome::Tag::Unique);
  CHECK((X_star + P - E.X - X_star).norm() < 1e-10 * X_star.norm());
  CHECK((E.X - P).norm() < 1e-10 * std::max(1.0, P.norm()));
}

TEST_CASE("error_from_residual with C = 0 is the classical relation") {
  Rng rng(119);
  const Index n = 6;
  QuasiLinearProblem p;
  p.A = rng.well_conditioned(n);
  p.B = rng.well_conditioned(n);
  p.D = rng.randn(n, n);
  p.terms.push_back(Term{Mat::Zero(n, n), LinearFunctional::identity(n)});
  Mat X_tilde = rng.randn(n, n);
  auto [R, E] = linearf::error_from_residual(p, X_tilde);
  REQUIRE(E.tag == LinearOutcome::Tag::Unique);
  Mat E_classic = solve_sylvester(p.A, p.B, R);
  CHECK((E.X - E_classic).norm() < 1e-12 * std::max(1.0, E_classic.norm()));
}

TEST_CASE("reduce_problem produces the reduced fixed-point form") {
  Rng rng(120);
  Mat X_star;
  QuasiLinearProblem p = manufactured(rng, 6, 2, X_star);
  ReducedProblem rp = linearf::reduce_problem(p);
  REQUIRE(rp.N.size() == 2);
  // X satisfies X = M + sum_i f_i(X) N_i whenever it solves the original.
  LinearOutcome out = linearf::solve_multi(p);
  REQUIRE(out.tag == LinearOutcome::Tag::Unique);
  Mat rhs = rp.M;
  for (int i = 0; i < 2; ++i) rhs += rp.f[i](out.X) * rp.N[i];
  CHECK((out.X - rhs).norm() < 1e-10 * std::max(1.0, out.X.norm()));
}
