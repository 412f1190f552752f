#include "quasilin/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace quasilin::mmio {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw IoError(context + ": " + what);
}

// Reads the next line that is neither blank nor a % comment.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace

Mat read(std::istream& in, const std::string& context) {
  std::string banner;
  if (!std::getline(in, banner)) fail(context, "empty input");
  std::istringstream hs(banner);
  std::string magic, object, format, field, symmetry;
  hs >> magic >> object >> format >> field >> symmetry;
  if (lower(magic) != "%%matrixmarket") fail(context, "missing MatrixMarket banner");
  if (lower(object) != "matrix") fail(context, "unsupported object '" + object + "'");
  if (lower(format) != "array") fail(context, "unsupported format '" + format + "'");
  if (lower(field) != "real" && lower(field) != "integer") {
    fail(context, "unsupported field '" + field + "'");
  }
  const std::string sym = lower(symmetry);
  if (sym != "general" && sym != "symmetric") {
    fail(context, "unsupported symmetry '" + symmetry + "'");
  }

  std::string line;
  if (!next_content_line(in, line)) fail(context, "missing size line");
  std::istringstream ss(line);
  long long rows = -1, cols = -1;
  if (!(ss >> rows >> cols) || rows < 0 || cols < 0) {
    fail(context, "bad size line '" + line + "'");
  }
  std::string extra;
  if (ss >> extra) fail(context, "trailing tokens on size line");
  if (sym == "symmetric" && rows != cols) {
    fail(context, "symmetric layout requires a square matrix");
  }

  const long long count =
      sym == "general" ? rows * cols : rows * (rows + 1) / 2;
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(count));
  double v = 0.0;
  while (static_cast<long long>(vals.size()) < count && in >> v) vals.push_back(v);
  if (static_cast<long long>(vals.size()) < count) {
    fail(context, "expected " + std::to_string(count) + " entries, found " +
                      std::to_string(vals.size()));
  }
  if (in >> extra) fail(context, "trailing data after matrix entries");

  Mat X(rows, cols);
  std::size_t k = 0;
  if (sym == "general") {
    for (long long j = 0; j < cols; ++j)
      for (long long i = 0; i < rows; ++i) X(i, j) = vals[k++];
  } else {
    for (long long j = 0; j < cols; ++j)
      for (long long i = j; i < rows; ++i) {
        X(i, j) = vals[k];
        X(j, i) = vals[k];
        ++k;
      }
  }
  return X;
}

Mat read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open for reading");
  return read(in, path);
}

void write(std::ostream& out, const Mat& X, Layout layout) {
  if (layout == Layout::Symmetric) {
    if (X.rows() != X.cols()) {
      throw IoError("symmetric layout requires a square matrix");
    }
    for (Index j = 0; j < X.cols(); ++j)
      for (Index i = j + 1; i < X.rows(); ++i)
        if (X(i, j) != X(j, i)) {
          throw IoError("symmetric layout requires exactly symmetric entries");
        }
  }
  out << "%%MatrixMarket matrix array real "
      << (layout == Layout::General ? "general" : "symmetric") << "\n";
  out << X.rows() << " " << X.cols() << "\n";
  char buf[64];
  if (layout == Layout::General) {
    for (Index j = 0; j < X.cols(); ++j)
      for (Index i = 0; i < X.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
        out << buf << "\n";
      }
  } else {
    for (Index j = 0; j < X.cols(); ++j)
      for (Index i = j; i < X.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
        out << buf << "\n";
      }
  }
  if (!out) throw IoError("stream write failed");
}

void write_file(const std::string& path, const Mat& X, Layout layout) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError(tmp + ": cannot open for writing");
    write(out, X, layout);
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

}  // namespace quasilin::mmio
