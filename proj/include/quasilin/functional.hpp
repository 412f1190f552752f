#pragma once

#include "quasilin/types.hpp"

#include <utility>

namespace quasilin {

// Scalar-valued linear functional f(X) = trace(H X) on n x m matrices.
//
// Three representations share one call interface:
//   Identity : H = I, f(X) = trace(X)           (square arguments only)
//   RankOne  : H = u v^T, f(X) = v^T X u        (never forms H)
//   Dense    : arbitrary H, f(X) = trace(H X)
//
// Shapes: X is n x m, H is m x n (so H X is m x m and the trace is defined).
// For RankOne that means v has n entries and u has m. Square problems, the
// common case, have n == m.
class LinearFunctional {
public:
  enum class Kind { Identity, RankOne, Dense };

  static LinearFunctional identity(Index n) {
    LinearFunctional f;
    f.kind_ = Kind::Identity;
    f.rows_ = n;
    f.cols_ = n;
    return f;
  }

  // f(X) = v^T X u = trace((u v^T) X); u has X's column count, v its row count.
  static LinearFunctional rank_one(Vec u, Vec v) {
    LinearFunctional f;
    f.kind_ = Kind::RankOne;
    f.u_ = std::move(u);
    f.v_ = std::move(v);
    f.rows_ = f.v_.size();
    f.cols_ = f.u_.size();
    return f;
  }

  // f(X) = trace(H X); X must be cols(H) x rows(H).
  static LinearFunctional dense(Mat H) {
    LinearFunctional f;
    f.kind_ = Kind::Dense;
    f.H_ = std::move(H);
    f.rows_ = f.H_.cols();
    f.cols_ = f.H_.rows();
    return f;
  }

  Kind kind() const { return kind_; }

  // Expected shape of the argument X.
  Index arg_rows() const { return rows_; }
  Index arg_cols() const { return cols_; }

  double operator()(const Mat& X) const {
    if (X.rows() != rows_ || X.cols() != cols_) {
      throw DimensionMismatch("LinearFunctional: argument is " + std::to_string(X.rows()) +
                              "x" + std::to_string(X.cols()) + ", expected " +
                              std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    switch (kind_) {
      case Kind::Identity:
        return X.trace();
      case Kind::RankOne:
        return v_.dot(X * u_);
      case Kind::Dense:
        return (H_ * X).trace();
    }
    throw Error("LinearFunctional: unreachable");
  }

  // The matrix H with f(X) = trace(H X), materialized for every kind.
  Mat dense_matrix() const {
    switch (kind_) {
      case Kind::Identity:
        return Mat::Identity(rows_, rows_);
      case Kind::RankOne:
        return u_ * v_.transpose();
      case Kind::Dense:
        return H_;
    }
    throw Error("LinearFunctional: unreachable");
  }

  // vec-convention coefficient vector: f(X) = c^T vec(X), c = vec(H^T).
  Vec vec_coefficients() const {
    Mat Ht = dense_matrix().transpose();
    return Eigen::Map<const Vec>(Ht.data(), Ht.size());
  }

  const Vec& rank_one_u() const { return u_; }
  const Vec& rank_one_v() const { return v_; }

private:
  LinearFunctional() = default;

  Kind kind_ = Kind::Identity;
  Index rows_ = 0;
  Index cols_ = 0;
  Vec u_, v_;
  Mat H_;
};

}  // namespace quasilin
