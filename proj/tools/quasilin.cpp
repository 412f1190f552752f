#include "CLI11.hpp"
#include "json.hpp"

#include "quasilin/fixpoint.hpp"
#include "quasilin/linearf.hpp"
#include "quasilin/matcore.hpp"
#include "quasilin/mmio.hpp"
#include "quasilin/polyf.hpp"
#include "quasilin/random.hpp"
#include "quasilin/scalarnl.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace quasilin;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError(tmp + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError(tmp + ": write failed");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError(path + ": rename into place failed");
  }
}

std::string resolve(const std::string& dir, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute() || dir.empty()) return name;
  return (fs::path(dir) / p).string();
}

std::string require_string(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw IoError("problem file: missing or non-string field '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

Mat load_mat(const std::string& dir, const json& j, const std::string& key) {
  return mmio::read_file(resolve(dir, require_string(j, key)));
}

Vec load_vec(const std::string& dir, const json& j, const std::string& key) {
  Mat X = load_mat(dir, j, key);
  if (X.cols() == 1) return X.col(0);
  if (X.rows() == 1) return X.row(0).transpose();
  throw IoError("field '" + key + "': expected a vector, got " + std::to_string(X.rows()) +
                "x" + std::to_string(X.cols()));
}

LinearFunctional parse_functional(const json& spec, const std::string& dir, Index n,
                                  Index m) {
  const std::string tag = spec.value("tag", "trace");
  if (tag == "trace") {
    if (n != m) throw IoError("trace functional requires a square unknown");
    return LinearFunctional::identity(n);
  }
  if (tag == "rank_one") {
    Vec u = load_vec(dir, spec, "u");
    Vec v = load_vec(dir, spec, "v");
    return LinearFunctional::rank_one(std::move(u), std::move(v));
  }
  if (tag == "dense") {
    return LinearFunctional::dense(load_mat(dir, spec, "H"));
  }
  throw IoError("unknown linear functional tag '" + tag + "'");
}

struct SolveArgs {
  std::string problem_path;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::string> mode;
  std::string out = ".";
  std::string format = "json";
};

void emit_report(const SolveArgs& a, const json& rep) {
  fs::create_directories(a.out);
  write_text_atomic((fs::path(a.out) / "report.json").string(), rep.dump(2) + "\n");
}

void emit_matrix(const SolveArgs& a, const std::string& name, const Mat& X) {
  fs::create_directories(a.out);
  mmio::write_file((fs::path(a.out) / name).string(), X);
}

void emit_trace_csv(const SolveArgs& a, const std::string& csv) {
  if (a.format != "csv") return;
  fs::create_directories(a.out);
  write_text_atomic((fs::path(a.out) / "trace.csv").string(), csv);
}

int emit_linear_outcome(const SolveArgs& a, const linearf::LinearOutcome& out,
                        double residual, json rep) {
  using Tag = linearf::LinearOutcome::Tag;
  if (out.tag == Tag::Unique) {
    rep["outcome"] = "unique";
    rep["sigma"] = std::vector<double>(out.sigma.data(), out.sigma.data() + out.sigma.size());
    rep["residual"] = residual;
    rep["solution_file"] = "solution.mtx";
    emit_matrix(a, "solution.mtx", out.X);
    emit_report(a, rep);
    return 0;
  }
  if (out.tag == Tag::NonUniqueFamily) {
    rep["outcome"] = "non_unique_family";
    rep["residual"] = residual;
    rep["family_particular_file"] = "family_M.mtx";
    std::vector<std::string> dir_files;
    for (std::size_t i = 0; i < out.N_list.size(); ++i) {
      dir_files.push_back("family_N" + std::to_string(i) + ".mtx");
    }
    rep["family_direction_files"] = dir_files;
    emit_matrix(a, "family_M.mtx", out.M);
    for (std::size_t i = 0; i < out.N_list.size(); ++i) {
      emit_matrix(a, dir_files[i], out.N_list[i]);
    }
    emit_report(a, rep);
    return 0;
  }
  rep["outcome"] = "no_solution";
  rep["inconsistency"] = out.inconsistency;
  emit_report(a, rep);
  return 2;
}

int emit_solution_set(const SolveArgs& a, const polyf::SolutionSet& s, json rep) {
  json accepted = json::array();
  std::ostringstream csv;
  csv << "root_re,root_im,f_residual,eq_residual,accepted,reason\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    json je;
    je["root_re"] = e.root.real();
    je["root_im"] = e.root.imag();
    je["f_residual"] = e.f_residual;
    je["eq_residual"] = e.eq_residual;
    je["real"] = e.is_real;
    if (e.is_real) {
      const std::string name = "solution_" + std::to_string(i) + ".mtx";
      je["solution_file"] = name;
      emit_matrix(a, name, e.X.re);
    } else {
      const std::string re_name = "solution_" + std::to_string(i) + "_re.mtx";
      const std::string im_name = "solution_" + std::to_string(i) + "_im.mtx";
      je["solution_file_re"] = re_name;
      je["solution_file_im"] = im_name;
      emit_matrix(a, re_name, e.X.re);
      emit_matrix(a, im_name, e.X.im);
    }
    accepted.push_back(je);
    worst = std::max(worst, e.eq_residual);
    csv << fmt17(e.root.real()) << "," << fmt17(e.root.imag()) << ","
        << fmt17(e.f_residual) << "," << fmt17(e.eq_residual) << ",1,\n";
  }
  json spurious = json::array();
  for (const auto& r : s.spurious) {
    spurious.push_back({{"root_re", r.root.real()},
                        {"root_im", r.root.imag()},
                        {"f_residual", r.f_residual},
                        {"reason", r.reason}});
    csv << fmt17(r.root.real()) << "," << fmt17(r.root.imag()) << ","
        << fmt17(r.f_residual) << ",,0," << r.reason << "\n";
  }
  rep["outcome"] = s.entries.empty() ? "no_accepted_root" : "roots";
  rep["accepted"] = accepted;
  rep["spurious"] = spurious;
  if (!s.entries.empty()) rep["residual"] = worst;
  emit_trace_csv(a, csv.str());
  emit_report(a, rep);
  return s.entries.empty() ? 2 : 0;
}

std::vector<Mat> load_directions(const std::string& dir, const json& doc) {
  std::vector<Mat> Ns;
  if (!doc.contains("N")) throw IoError("problem file: reduced form needs field 'N'");
  const json& jn = doc.at("N");
  if (jn.is_string()) {
    Ns.push_back(mmio::read_file(resolve(dir, jn.get<std::string>())));
  } else if (jn.is_array()) {
    for (const auto& item : jn) {
      if (!item.is_string()) throw IoError("problem file: 'N' entries must be file names");
      Ns.push_back(mmio::read_file(resolve(dir, item.get<std::string>())));
    }
  } else {
    throw IoError("problem file: 'N' must be a file name or a list of file names");
  }
  if (Ns.empty()) throw IoError("problem file: 'N' must not be empty");
  return Ns;
}

int solve_full_form(const SolveArgs& a, const json& doc, const std::string& dir) {
  QuasiLinearProblem p;
  p.A = load_mat(dir, doc, "A");
  p.B = load_mat(dir, doc, "B");
  p.D = load_mat(dir, doc, "D");
  for (const auto& term : doc.value("terms", json::array())) {
    Mat C = load_mat(dir, term, "C");
    LinearFunctional f =
        parse_functional(term.value("functional", json{{"tag", "trace"}}), dir, p.n(), p.m());
    p.terms.push_back({std::move(C), std::move(f)});
  }
  p.validate();

  json rep;
  rep["command"] = "solve";
  rep["form"] = "full";

  if (p.terms.empty()) {
    Mat X = solve_sylvester(p.A, p.B, p.D);
    const double res =
        (p.A * X + X * p.B - p.D).norm() / std::max(1.0, p.D.norm());
    rep["outcome"] = "unique";
    rep["sigma"] = json::array();
    rep["residual"] = res;
    rep["solution_file"] = "solution.mtx";
    emit_matrix(a, "solution.mtx", X);
    emit_report(a, rep);
    return 0;
  }

  auto out = p.terms.size() == 1 ? linearf::solve_single(p) : linearf::solve_multi(p);
  double residual = 0.0;
  const Mat& Xr = out.tag == linearf::LinearOutcome::Tag::NonUniqueFamily ? out.M : out.X;
  if (out.tag != linearf::LinearOutcome::Tag::NoSolution) {
    Mat R = p.A * Xr + Xr * p.B - p.D;
    for (const auto& t : p.terms) R += t.f(Xr) * t.C;
    residual = R.norm() / std::max(1.0, p.D.norm());
  }
  return emit_linear_outcome(a, out, residual, std::move(rep));
}

int solve_reduced_form(const SolveArgs& a, const json& doc, const std::string& dir) {
  const json fspec = doc.value("functional", json{{"tag", "linear"}});
  const std::string tag = fspec.value("tag", "linear");
  const json jopts = doc.value("options", json::object());

  json rep;
  rep["command"] = "solve";
  rep["form"] = "reduced";
  rep["functional"] = tag;

  if (tag == "inverse_trace_rank_one_m") {
    Vec m1 = load_vec(dir, fspec, "m1");
    Vec m2 = load_vec(dir, fspec, "m2");
    std::vector<Mat> Ns = load_directions(dir, doc);
    return emit_solution_set(a, polyf::solve_trace_inverse_rank1M(m1, m2, Ns.front()),
                             std::move(rep));
  }
  if (tag == "inverse_trace_rank_one_n") {
    Mat M = load_mat(dir, doc, "M");
    Vec n1 = load_vec(dir, fspec, "n1");
    Vec n2 = load_vec(dir, fspec, "n2");
    return emit_solution_set(a, polyf::solve_trace_inverse_rank1N(M, n1, n2),
                             std::move(rep));
  }

  Mat M = load_mat(dir, doc, "M");
  std::vector<Mat> Ns = load_directions(dir, doc);

  if (tag == "trace_power") {
    const int p = fspec.value("p", 2);
    auto s = p == 2 ? polyf::solve_trace_power2(M, Ns.front())
                    : polyf::solve_trace_power_general(M, Ns.front(), p);
    rep["power"] = p;
    return emit_solution_set(a, s, std::move(rep));
  }
  if (tag == "frobenius") {
    return emit_solution_set(a, polyf::solve_frobenius(M, Ns.front()), std::move(rep));
  }

  if (tag == "exp_neg_trace" || tag == "sqrt_trace") {
    const fixpoint::PsiKind psi =
        tag == "exp_neg_trace" ? fixpoint::PsiKind::ExpNeg : fixpoint::PsiKind::Sqrt;
    fixpoint::IterateOptions io;
    io.tol = a.tol ? *a.tol : jopts.value("tol", 1e-7);
    io.max_iter = a.max_iter ? *a.max_iter : jopts.value("max_iter", 500);
    const std::string mode = a.mode ? *a.mode : jopts.value("mode", std::string("diag"));
    io.mode = mode == "direct" ? fixpoint::IterMode::Direct : fixpoint::IterMode::Diagonalized;
    auto [X, fr] = fixpoint::iterate(M, Ns.front(), psi, io);

    rep["iterations"] = fr.iterations;
    rep["sigma_estimate"] = fr.sigma_estimate;
    rep["fallback_direct"] = fr.fallback_direct;
    if (!fr.warning.empty()) rep["warning"] = fr.warning;
    if (!fr.residuals.empty()) rep["final_iteration_residual"] = fr.residuals.back();
    emit_trace_csv(a, fr.to_csv());

    if (fr.termination == fixpoint::TerminationKind::Converged) {
      const double fx = psi == fixpoint::PsiKind::ExpNeg ? mat_exp(-X).trace()
                                                        : mat_sqrt(X).trace();
      const double res =
          (X - M - fx * Ns.front()).norm() / std::max(1.0, M.norm());
      rep["outcome"] = "converged";
      rep["residual"] = res;
      rep["solution_file"] = "solution.mtx";
      emit_matrix(a, "solution.mtx", X);
      emit_report(a, rep);
      return 0;
    }
    rep["outcome"] = fr.termination == fixpoint::TerminationKind::IterationCap
                         ? "iteration_cap"
                         : "diverged";
    emit_report(a, rep);
    return 2;
  }

  if (tag == "scalar_exp_neg" || tag == "scalar_log") {
    scalarnl::ScalarFn g = tag == "scalar_exp_neg" ? scalarnl::ScalarFn::exp_neg()
                                                   : scalarnl::ScalarFn::log_fn();
    LinearFunctional h = parse_functional(fspec.value("h", json{{"tag", "trace"}}), dir,
                                          M.rows(), M.cols());
    auto [g1, g2] = scalarnl::reduce(M, Ns.front(), h);
    scalarnl::ScalarOptions so;
    so.tol = a.tol ? *a.tol : jopts.value("tol", 1e-12);
    if (a.max_iter) so.max_iter = *a.max_iter;
    else if (jopts.contains("max_iter")) so.max_iter = jopts.at("max_iter").get<int>();
    const std::string method = jopts.value("method", std::string("newton"));
    double y0 = jopts.value("y0", g.contains(1.0) ? 1.0 : g.lo() + 1.0);
    auto sr = method == "fixed_point" ? scalarnl::fixed_point_solve(g, g1, g2, y0, so)
                                      : scalarnl::newton_solve(g, g1, g2, y0, so);

    rep["gamma1"] = g1;
    rep["gamma2"] = g2;
    rep["method"] = method == "fixed_point" ? "fixed_point" : "newton";
    rep["iterations"] = sr.iterates.size();
    rep["hypotheses_hold"] = sr.hypotheses_hold;
    std::ostringstream csv;
    csv << "k,y\n";
    for (std::size_t k = 0; k < sr.iterates.size(); ++k) {
      csv << k << "," << fmt17(sr.iterates[k]) << "\n";
    }
    emit_trace_csv(a, csv.str());

    if (!sr.converged) {
      rep["outcome"] = "no_convergence";
      emit_report(a, rep);
      return 2;
    }
    Mat X = scalarnl::assemble(M, Ns.front(), g, sr.y_star, h);
    const double res = (X - M - g(h(X)) * Ns.front()).norm() /
                       std::max(1.0, M.norm() + Ns.front().norm());
    rep["outcome"] = "converged";
    rep["y_star"] = sr.y_star;
    rep["ostrowski_value"] = sr.ostrowski_value;
    rep["residual"] = res;
    rep["solution_file"] = "solution.mtx";
    emit_matrix(a, "solution.mtx", X);
    emit_report(a, rep);
    return 0;
  }

  if (tag == "linear") {
    ReducedProblem r;
    r.M = M;
    r.N = Ns;
    json specs = fspec.value("of", json::array());
    if (specs.is_object()) specs = json::array({specs});
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      const json one = i < specs.size() ? specs.at(i) : json{{"tag", "trace"}};
      r.f.push_back(parse_functional(one, dir, M.rows(), M.cols()));
    }
    r.validate();
    auto out = linearf::solve_reduced_multi(r);
    double residual = 0.0;
    const Mat& Xr = out.tag == linearf::LinearOutcome::Tag::NonUniqueFamily ? out.M : out.X;
    if (out.tag != linearf::LinearOutcome::Tag::NoSolution) {
      Mat R = Xr - r.M;
      for (std::size_t i = 0; i < r.N.size(); ++i) R -= r.f[i](Xr) * r.N[i];
      residual = R.norm() / std::max(1.0, r.M.norm());
    }
    return emit_linear_outcome(a, out, residual, std::move(rep));
  }

  throw IoError("unknown functional tag '" + tag + "'");
}

int cmd_solve(const SolveArgs& a) {
  std::ifstream in(a.problem_path);
  if (!in) {
    std::cerr << "error: cannot open problem file '" << a.problem_path << "'\n";
    return 1;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "error: malformed problem file: " << e.what() << "\n";
    return 1;
  }
  const std::string dir = fs::path(a.problem_path).parent_path().string();
  const std::string form = doc.value("form", "full");

  try {
    if (form == "full") return solve_full_form(a, doc, dir);
    if (form == "reduced") return solve_reduced_form(a, doc, dir);
    throw IoError("unknown form '" + form + "'");
  } catch (const NoRealSolution& e) {
    json rep{{"command", "solve"}, {"outcome", "no_real_solution"}, {"detail", e.what()}};
    emit_report(a, rep);
    return 2;
  } catch (const DegenerateCase& e) {
    json rep{{"command", "solve"}, {"outcome", "degenerate"}, {"detail", e.what()}};
    emit_report(a, rep);
    return 2;
  } catch (const DomainExit& e) {
    json rep{{"command", "solve"}, {"outcome", "domain_exit"}, {"detail", e.what()}};
    emit_report(a, rep);
    return 2;
  } catch (const DerivativeVanishes& e) {
    json rep{{"command", "solve"}, {"outcome", "derivative_vanishes"}, {"detail", e.what()}};
    emit_report(a, rep);
    return 2;
  } catch (const VerificationFailed& e) {
    json rep{{"command", "solve"}, {"outcome", "verification_failed"}, {"detail", e.what()}};
    emit_report(a, rep);
    return 2;
  } catch (const NumericalOverflow& e) {
    json rep{{"command", "solve"}, {"outcome", "diverged"}, {"detail", e.what()}};
    emit_report(a, rep);
    return 2;
  }
}

std::vector<double> parse_sigma_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.find_last_not_of(" \t") + 1) {
      throw IoError("bad sigma value '" + token + "'");
    }
    out.push_back(v);
  }
  return out;
}

int cmd_table1(const std::string& sigma_csv, double tol, int cap, int n,
               std::uint64_t seed, const std::string& out_dir) {
  const std::vector<double> sigmas = parse_sigma_list(sigma_csv);
  std::ostringstream csv;
  csv << "sigma,alpha,iterations,final_residual\n";
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    auto inst = fixpoint::manufacture_instance(fixpoint::PsiKind::ExpNeg, n, sigmas[i],
                                               seed + i);
    fixpoint::IterateOptions io;
    io.tol = tol;
    io.max_iter = cap;
    auto [X, rep] = fixpoint::iterate(inst.M, inst.N, fixpoint::PsiKind::ExpNeg, io);
    (void)X;
    const double final_res = rep.residuals.empty() ? 0.0 : rep.residuals.back();
    csv << fmt17(sigmas[i]) << "," << fmt17(inst.alpha) << "," << rep.iterations << ","
        << fmt17(final_res) << "\n";
  }
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "table1.csv").string();
  write_text_atomic(path, csv.str());
  std::cout << path << "\n";
  return 0;
}

int cmd_fig1(const std::string& psi_name, int n, std::uint64_t seed, double scale_n,
             const std::string& out_dir) {
  const bool expneg = psi_name == "expneg";
  Rng rng(seed);
  Mat N;
  if (expneg) {
    Mat G = rng.randn(n, n);
    N = mat_sqrt(symmetrize(G.transpose() * G));
  } else {
    Mat U = rng.rand_uniform(n, n);
    N = 0.2 * mat_sqrt(symmetrize(U.transpose() * U));
  }
  N *= scale_n;
  Mat H = 2.0 * static_cast<double>(n) * rng.randn(n, n);
  Mat X_star = mat_sqrt(symmetrize(H.transpose() * H));
  const auto f_of = [&](const Mat& X) {
    return expneg ? mat_exp(-X).trace() : mat_sqrt(X).trace();
  };
  Mat M = X_star - f_of(X_star) * N;
  if (!expneg) {
    for (int halvings = 0; halvings < 60; ++halvings) {
      Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M));
      if (es.eigenvalues()(0) > 1e-10 * std::max(1.0, M.norm())) break;
      N *= 0.5;
      M = X_star - f_of(X_star) * N;
    }
  }

  auto [X, rep] = fixpoint::iterate(
      M, N, expneg ? fixpoint::PsiKind::ExpNeg : fixpoint::PsiKind::Sqrt);
  (void)X;
  const Index idx = std::max<Index>(0, n / 2 - 1);
  std::ostringstream csv;
  csv << "k,value\n";
  for (int k = 1; k < static_cast<int>(rep.iterates_diag.size()); ++k) {
    csv << k << "," << fmt17(rep.iterates_diag[k](idx)) << "\n";
  }
  fs::create_directories(out_dir);
  const std::string path =
      (fs::path(out_dir) / ("fig1_" + psi_name + ".csv")).string();
  write_text_atomic(path, csv.str());
  std::cout << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-linear matrix equation toolkit"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "solve a problem described by a JSON file");
  std::string problem_path;
  solve->add_option("problem", problem_path, "problem JSON file")->required();
  double tol = 0.0;
  auto* tol_opt = solve->add_option("--tol", tol, "solver tolerance");
  int max_iter = 0;
  auto* mi_opt = solve->add_option("--max-iter", max_iter, "iteration cap");
  std::string mode = "diag";
  auto* mode_opt = solve->add_option("--mode", mode, "fixed point iteration mode")
                       ->check(CLI::IsMember({"diag", "direct"}));
  std::string out_dir = ".";
  solve->add_option("--out", out_dir, "output directory");
  std::string format = "json";
  solve->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  std::uint64_t seed = 1;
  solve->add_option("--seed", seed, "random seed");

  auto* table1 = app.add_subcommand(
      "table1", "contraction factor sweep of the diagonal fixed point iteration");
  std::string sigma_csv = "0.079,0.176,0.335,0.57,0.889,1.296,1.789";
  table1->add_option("--sigma", sigma_csv,
                     "comma separated target contraction factors ('' for header only)");
  double t_tol = 1e-7;
  table1->add_option("--tol", t_tol, "convergence tolerance");
  int t_cap = 500;
  table1->add_option("--cap", t_cap, "iteration cap");
  int t_n = 10;
  table1->add_option("--n", t_n, "matrix dimension");
  std::uint64_t t_seed = 1;
  table1->add_option("--seed", t_seed, "random seed");
  std::string t_out = ".";
  table1->add_option("--out", t_out, "output directory");

  auto* fig1 = app.add_subcommand(
      "fig1", "per-iteration diagonal element trajectory of the fixed point iteration");
  std::string psi_name;
  fig1->add_option("--psi", psi_name, "nonlinearity: expneg or sqrt")
      ->required()
      ->check(CLI::IsMember({"expneg", "sqrt"}));
  int f_n = 10;
  fig1->add_option("--n", f_n, "matrix dimension");
  std::uint64_t f_seed = 1;
  fig1->add_option("--seed", f_seed, "random seed");
  double f_scale_n = 1.0;
  fig1->add_option("--scale-n", f_scale_n, "multiplier applied to the direction matrix");
  std::string f_out = ".";
  fig1->add_option("--out", f_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (const char* env = std::getenv("QUASILIN_SEED"); env != nullptr && *env != '\0') {
    try {
      const std::uint64_t s = std::stoull(env);
      seed = s;
      t_seed = s;
      f_seed = s;
    } catch (const std::exception&) {
      std::cerr << "error: QUASILIN_SEED is not an unsigned integer\n";
      return 1;
    }
  }
  (void)seed;

  try {
    if (solve->parsed()) {
      SolveArgs a;
      a.problem_path = problem_path;
      if (tol_opt->count() > 0) a.tol = tol;
      if (mi_opt->count() > 0) a.max_iter = max_iter;
      if (mode_opt->count() > 0) a.mode = mode;
      a.out = out_dir;
      a.format = format;
      return cmd_solve(a);
    }
    if (table1->parsed()) {
      return cmd_table1(sigma_csv, t_tol, t_cap, t_n, t_seed, t_out);
    }
    return cmd_fig1(psi_name, f_n, f_seed, f_scale_n, f_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
