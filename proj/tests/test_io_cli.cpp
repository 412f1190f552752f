#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "json.hpp"
#include "quasilin/fixpoint.hpp"
#include "quasilin/matcore.hpp"
#include "quasilin/mmio.hpp"
#include "quasilin/random.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace quasilin;

namespace {

bool bit_equal(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

std::string cli_path() {
  if (const char* env = std::getenv("QUASILIN_CLI"); env != nullptr && *env != '\0') {
    return env;
  }
  for (const char* cand :
       {"../tools/quasilin", "tools/quasilin", "build/tools/quasilin", "./quasilin"}) {
    if (fs::exists(cand)) return fs::absolute(cand).string();
  }
  FAIL("quasilin binary not found; set QUASILIN_CLI");
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + cli_path() + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "quasilin_io_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream fs_(line);
    std::string field;
    while (std::getline(fs_, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    rows.push_back(fields);
  }
  return rows;
}

json read_report(const fs::path& dir) {
  std::ifstream in(dir / "report.json");
  REQUIRE(in.good());
  return json::parse(in);
}

}  // namespace

TEST_CASE("matrix market round trip is bit exact") {
  Mat X(3, 2);
  X << 1.0 / 3.0, -0.0, 5e-324, 1.797e308, -2.5e-300, 123456789.123456789;
  std::stringstream ss;
  mmio::write(ss, X);
  Mat Y = mmio::read(ss);
  CHECK(bit_equal(X, Y));

  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Mat A = rng.randn(1 + trial % 8, 1 + (trial * 3) % 8) * std::pow(10.0, trial - 10);
    std::stringstream s2;
    mmio::write(s2, A);
    CHECK(bit_equal(A, mmio::read(s2)));
  }
}

TEST_CASE("matrix market file round trip through temp and rename") {
  auto dir = scratch_dir("roundtrip");
  Rng rng(2);
  Mat X = rng.randn(5, 5);
  const std::string path = (dir / "x.mtx").string();
  mmio::write_file(path, X);
  CHECK(bit_equal(X, mmio::read_file(path)));
  CHECK(!fs::exists(path + ".tmp"));
}

TEST_CASE("symmetric layout stores the lower triangle") {
  Rng rng(3);
  Mat S = symmetrize(rng.randn(4, 4));
  std::stringstream ss;
  mmio::write(ss, S, mmio::Layout::Symmetric);
  const std::string text = ss.str();
  CHECK(text.find("symmetric") != std::string::npos);
  std::stringstream back(text);
  CHECK(bit_equal(S, mmio::read(back)));

  Mat A = rng.randn(3, 3);
  std::stringstream s2;
  CHECK_THROWS_AS(mmio::write(s2, A, mmio::Layout::Symmetric), IoError);
  std::stringstream s3;
  CHECK_THROWS_AS(mmio::write(s3, rng.randn(2, 3), mmio::Layout::Symmetric), IoError);
}

TEST_CASE("reader skips comments and accepts the integer field") {
  std::stringstream ss(
      "%%MatrixMarket matrix array integer general\n"
      "% produced by hand\n"
      "\n"
      "2 2\n"
      "1\n2\n3\n4\n");
  Mat X = mmio::read(ss);
  CHECK(X(0, 0) == 1.0);
  CHECK(X(1, 0) == 2.0);
  CHECK(X(0, 1) == 3.0);
  CHECK(X(1, 1) == 4.0);
}

TEST_CASE("reader rejects malformed input") {
  auto expect_throw = [](const std::string& text) {
    std::stringstream ss(text);
    CHECK_THROWS_AS(mmio::read(ss), IoError);
  };
  expect_throw("");
  expect_throw("%%NotMatrixMarket matrix array real general\n1 1\n0\n");
  expect_throw("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 0\n");
  expect_throw("%%MatrixMarket matrix array complex general\n1 1\n0 0\n");
  expect_throw("%%MatrixMarket matrix array real skew-symmetric\n1 1\n0\n");
  expect_throw("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n");
  expect_throw("%%MatrixMarket matrix array real general\n1 1\n1\nextra\n");
  expect_throw("%%MatrixMarket matrix array real general\nnot a size\n");
  expect_throw("%%MatrixMarket matrix array real symmetric\n2 3\n1\n2\n3\n");
}

TEST_CASE("cli solves the identity single-term instance") {
  auto dir = scratch_dir("identity");
  mmio::write_file((dir / "I.mtx").string(), Mat::Identity(2, 2));
  json prob = {{"form", "full"},
               {"A", "I.mtx"},
               {"B", "I.mtx"},
               {"D", "I.mtx"},
               {"terms", {{{"C", "I.mtx"}, {"functional", {{"tag", "trace"}}}}}}};
  std::ofstream(dir / "prob.json") << prob.dump(2);

  const fs::path out = dir / "out";
  const int code = run_cli("solve \"" + (dir / "prob.json").string() + "\" --out \"" +
                           out.string() + "\"");
  CHECK(code == 0);

  json rep = read_report(out);
  CHECK(rep["outcome"] == "unique");
  REQUIRE(rep["sigma"].size() == 1);
  CHECK(rep["sigma"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-14));

  Mat X = mmio::read_file((out / "solution.mtx").string());
  CHECK((X - 0.25 * Mat::Identity(2, 2)).norm() <= 1e-14);

  const Mat I = Mat::Identity(2, 2);
  const double res = (I * X + X * I + X.trace() * I - I).norm() / std::max(1.0, I.norm());
  CHECK(std::abs(res - rep["residual"].get<double>()) <= 1e-12);
}

TEST_CASE("cli reports accepted and spurious inverse-trace roots") {
  auto dir = scratch_dir("inverse_trace");
  Vec m1(2), m2(2);
  m1 << 1.0, 1.0;
  m2 << 1.0, -1.0;
  mmio::write_file((dir / "m1.mtx").string(), m1);
  mmio::write_file((dir / "m2.mtx").string(), m2);
  mmio::write_file((dir / "N.mtx").string(), Mat::Identity(2, 2));
  json prob = {{"form", "reduced"},
               {"N", "N.mtx"},
               {"functional",
                {{"tag", "inverse_trace_rank_one_m"}, {"m1", "m1.mtx"}, {"m2", "m2.mtx"}}}};
  std::ofstream(dir / "prob.json") << prob.dump(2);

  const fs::path out = dir / "out";
  const int code = run_cli("solve \"" + (dir / "prob.json").string() + "\" --out \"" +
                           out.string() + "\" --format csv");
  CHECK(code == 0);

  json rep = read_report(out);
  REQUIRE(rep["accepted"].size() == 2);
  REQUIRE(rep["spurious"].size() == 1);
  double hi = rep["accepted"][0]["root_re"].get<double>();
  double lo = rep["accepted"][1]["root_re"].get<double>();
  if (hi < lo) std::swap(hi, lo);
  CHECK(hi == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(lo == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
  CHECK(!rep["spurious"][0]["reason"].get<std::string>().empty());
  CHECK(fs::exists(out / rep["accepted"][0]["solution_file"].get<std::string>()));
  CHECK(fs::exists(out / "trace.csv"));
}

TEST_CASE("cli exits 1 on malformed json and writes nothing") {
  auto dir = scratch_dir("malformed");
  std::ofstream(dir / "bad.json") << "{\"form\": oops";
  const fs::path out = dir / "out";
  const int code =
      run_cli("solve \"" + (dir / "bad.json").string() + "\" --out \"" + out.string() + "\"");
  CHECK(code == 1);
  CHECK(!fs::exists(out));
}

TEST_CASE("cli exits 1 on a missing referenced matrix file") {
  auto dir = scratch_dir("missing_ref");
  json prob = {{"form", "full"}, {"A", "absent.mtx"}, {"B", "absent.mtx"}, {"D", "absent.mtx"}};
  std::ofstream(dir / "prob.json") << prob.dump(2);
  const fs::path out = dir / "out";
  const int code =
      run_cli("solve \"" + (dir / "prob.json").string() + "\" --out \"" + out.string() + "\"");
  CHECK(code == 1);
  CHECK(!fs::exists(out));
}

TEST_CASE("cli exits 2 on an inconsistent singular instance") {
  auto dir = scratch_dir("no_solution");
  mmio::write_file((dir / "A.mtx").string(), 0.5 * Mat::Identity(2, 2));
  mmio::write_file((dir / "C.mtx").string(), -0.5 * Mat::Identity(2, 2));
  mmio::write_file((dir / "D.mtx").string(), Mat::Identity(2, 2));
  json prob = {{"form", "full"},
               {"A", "A.mtx"},
               {"B", "A.mtx"},
               {"D", "D.mtx"},
               {"terms", {{{"C", "C.mtx"}, {"functional", {{"tag", "trace"}}}}}}};
  std::ofstream(dir / "prob.json") << prob.dump(2);

  const fs::path out = dir / "out";
  const int code = run_cli("solve \"" + (dir / "prob.json").string() + "\" --out \"" +
                           out.string() + "\"");
  CHECK(code == 2);
  json rep = read_report(out);
  CHECK(rep["outcome"] == "no_solution");
  CHECK(!fs::exists(out / "solution.mtx"));
}

TEST_CASE("cli fixed point solve writes a reproducible residual") {
  auto dir = scratch_dir("fixpoint");
  auto inst = fixpoint::manufacture_instance(fixpoint::PsiKind::ExpNeg, 8, 0.3, 7);
  mmio::write_file((dir / "M.mtx").string(), inst.M);
  mmio::write_file((dir / "N.mtx").string(), inst.N);
  json prob = {{"form", "reduced"},
               {"M", "M.mtx"},
               {"N", "N.mtx"},
               {"functional", {{"tag", "exp_neg_trace"}}}};
  std::ofstream(dir / "prob.json") << prob.dump(2);

  const fs::path out = dir / "out";
  const int code = run_cli("solve \"" + (dir / "prob.json").string() + "\" --out \"" +
                           out.string() + "\" --format csv");
  CHECK(code == 0);

  json rep = read_report(out);
  CHECK(rep["outcome"] == "converged");
  CHECK(rep["iterations"].get<int>() >= 1);

  Mat X = mmio::read_file((out / "solution.mtx").string());
  const double fx = mat_exp(-X).trace();
  const double res = (X - inst.M - fx * inst.N).norm() / std::max(1.0, inst.M.norm());
  CHECK(std::abs(res - rep["residual"].get<double>()) <= 1e-12);

  auto rows = parse_csv(slurp(out / "trace.csv"));
  REQUIRE(!rows.empty());
  CHECK(rows[0] == std::vector<std::string>{"k", "f_value", "residual", "ratio"});
  CHECK(static_cast<int>(rows.size()) == rep["iterations"].get<int>() + 1);
}

TEST_CASE("cli iteration cap maps to exit 2") {
  auto dir = scratch_dir("cap");
  auto inst = fixpoint::manufacture_instance(fixpoint::PsiKind::ExpNeg, 8, 1.5, 11);
  mmio::write_file((dir / "M.mtx").string(), inst.M);
  mmio::write_file((dir / "N.mtx").string(), inst.N);
  json prob = {{"form", "reduced"},
               {"M", "M.mtx"},
               {"N", "N.mtx"},
               {"functional", {{"tag", "exp_neg_trace"}}}};
  std::ofstream(dir / "prob.json") << prob.dump(2);

  const fs::path out = dir / "out";
  const int code = run_cli("solve \"" + (dir / "prob.json").string() + "\" --out \"" +
                           out.string() + "\" --max-iter 40");
  CHECK(code == 2);
  json rep = read_report(out);
  CHECK(rep["outcome"] == "iteration_cap");
  CHECK(rep["iterations"].get<int>() == 40);
  CHECK(!fs::exists(out / "solution.mtx"));
}

TEST_CASE("table1 sweep emits anchored rows") {
  auto dir = scratch_dir("table1");
  const int code =
      run_cli("table1 --sigma 0.335,1.8 --seed 1 --out \"" + dir.string() + "\"");
  CHECK(code == 0);
  auto rows = parse_csv(slurp(dir / "table1.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"sigma", "alpha", "iterations", "final_residual"});
  const int k_mid = std::stoi(rows[1][2]);
  CHECK(k_mid >= 8);
  CHECK(k_mid <= 16);
  CHECK(std::stod(rows[1][3]) < 1e-7);
  CHECK(std::stoi(rows[2][2]) == 500);
  CHECK(std::stod(rows[2][3]) >= 1e-2);
}

TEST_CASE("table1 with an empty sigma list is header only") {
  auto dir = scratch_dir("table1_empty");
  const int code = run_cli("table1 --sigma \"\" --out \"" + dir.string() + "\"");
  CHECK(code == 0);
  auto rows = parse_csv(slurp(dir / "table1.csv"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][0] == "sigma");
}

TEST_CASE("QUASILIN_SEED overrides the seed flag") {
  auto d1 = scratch_dir("seed_env1");
  auto d2 = scratch_dir("seed_env2");
  auto d3 = scratch_dir("seed_flag");
  const std::string quoted = "\"" + cli_path() + "\"";
  auto run_raw = [&](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
  };
  CHECK(run_raw("QUASILIN_SEED=3 " + quoted + " table1 --sigma 0.4 --out \"" +
                d1.string() + "\"") == 0);
  CHECK(run_raw("QUASILIN_SEED=3 " + quoted + " table1 --sigma 0.4 --seed 99 --out \"" +
                d2.string() + "\"") == 0);
  CHECK(run_raw(quoted + " table1 --sigma 0.4 --seed 99 --out \"" + d3.string() + "\"") == 0);
  CHECK(slurp(d1 / "table1.csv") == slurp(d2 / "table1.csv"));
  CHECK(slurp(d1 / "table1.csv") != slurp(d3 / "table1.csv"));
}

TEST_CASE("fig1 produces a monotone column for the square root functional") {
  auto dir = scratch_dir("fig1_sqrt");
  const int code = run_cli("fig1 --psi sqrt --seed 1 --out \"" + dir.string() + "\"");
  CHECK(code == 0);
  auto rows = parse_csv(slurp(dir / "fig1_sqrt.csv"));
  REQUIRE(rows.size() >= 4);
  CHECK(rows[0] == std::vector<std::string>{"k", "value"});
  for (std::size_t i = 2; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][1]) > std::stod(rows[i - 1][1]));
  }
}

TEST_CASE("fig1 alternates for the negative exponential functional") {
  auto dir = scratch_dir("fig1_expneg");
  const int code = run_cli("fig1 --psi expneg --seed 5 --out \"" + dir.string() + "\"");
  CHECK(code == 0);
  auto rows = parse_csv(slurp(dir / "fig1_expneg.csv"));
  REQUIRE(rows.size() >= 5);
  std::vector<double> vals;
  for (std::size_t i = 1; i < rows.size(); ++i) vals.push_back(std::stod(rows[i][1]));
  int sign_flips = 0;
  int significant = 0;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    const double d0 = vals[i + 1] - vals[i];
    if (std::abs(d0) <= 1e-8 * (1.0 + std::abs(vals[i]))) continue;
    ++significant;
    if (i + 2 < vals.size()) {
      const double d1 = vals[i + 2] - vals[i + 1];
      if (std::abs(d1) > 1e-8 * (1.0 + std::abs(vals[i + 1])) && d0 * d1 < 0.0) ++sign_flips;
    }
  }
  CHECK(significant >= 3);
  CHECK(sign_flips >= significant - 2);
}

TEST_CASE("fig1 with a zero direction matrix is a single row") {
  auto dir = scratch_dir("fig1_zero");
  const int code =
      run_cli("fig1 --psi expneg --scale-n 0 --out \"" + dir.string() + "\"");
  CHECK(code == 0);
  auto rows = parse_csv(slurp(dir / "fig1_expneg.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "1");
}

TEST_CASE("cli rejects unknown flags and missing subcommands") {
  CHECK(run_cli("solve") == 1);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("fig1 --psi wedge") == 1);
}
