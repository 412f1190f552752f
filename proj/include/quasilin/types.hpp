#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace quasilin {

// Dense real matrices are the universal value type of the library.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Cplx = std::complex<double>;

using Index = Eigen::Index;

// Base class for all library failures so callers can map them uniformly.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// The linear operator (or one of its small diagonal-block systems) is
// numerically singular.
class SingularOperator : public Error {
public:
  using Error::Error;
};

class NotSPD : public Error {
public:
  using Error::Error;
};

class NotDiagonalizable : public Error {
public:
  using Error::Error;
};

class NumericalOverflow : public Error {
public:
  using Error::Error;
};

class DegenerateCase : public Error {
public:
  using Error::Error;
};

class NoRealSolution : public Error {
public:
  using Error::Error;
};

class InvalidElasticity : public Error {
public:
  using Error::Error;
};

class StepFailure : public Error {
public:
  using Error::Error;
};

class DomainExit : public Error {
public:
  using Error::Error;
};

class DerivativeVanishes : public Error {
public:
  using Error::Error;
};

class VerificationFailed : public Error {
public:
  using Error::Error;
};

class TooFewIterations : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Real/imaginary split of a complex matrix; shapes always agree.
struct ComplexMat {
  Mat re;
  Mat im;

  ComplexMat() = default;
  ComplexMat(Mat real_part, Mat imag_part) : re(std::move(real_part)), im(std::move(imag_part)) {
    if (re.rows() != im.rows() || re.cols() != im.cols()) {
      throw DimensionMismatch("ComplexMat: real and imaginary parts differ in shape");
    }
  }
  explicit ComplexMat(const CMat& z) : re(z.real()), im(z.imag()) {}

  CMat complex() const { return re.cast<Cplx>() + Cplx(0.0, 1.0) * im.cast<Cplx>(); }
  bool is_real(double tol = 0.0) const {
    return im.size() == 0 || im.cwiseAbs().maxCoeff() <= tol;
  }
};

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) {
    throw DimensionMismatch(what + ": non-finite entries");
  }
}

inline void require_square(const Mat& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(what + ": expected a square matrix, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

// Relative departure from symmetry, ||M - M^T||_F / ||M||_F.
inline double asymmetry(const Mat& m) {
  const double nrm = m.norm();
  if (nrm == 0.0) return 0.0;
  return (m - m.transpose()).norm() / nrm;
}

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace quasilin
