#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace minkdist {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

template <int N>
using Mat = Eigen::Matrix<double, N, N>;

// Chart parameter: one coordinate per boundary dimension.
template <int N>
using Param = Eigen::Matrix<double, N - 1, 1>;

// Tangent-space matrices (n-1 x n-1) in the principal frame.
template <int N>
using TangentMat = Eigen::Matrix<double, N - 1, N - 1>;

template <int N>
using TangentVec = Eigen::Matrix<double, N - 1, 1>;

// Columns are the n-1 tangent vectors dY/du_i.
template <int N>
using Jacobian = Eigen::Matrix<double, N, N - 1>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteInput : public Error {
 public:
  explicit NonFiniteInput(const std::string& where) : Error(where + ": non-finite input") {}
};

class ZeroVector : public Error {
 public:
  explicit ZeroVector(const std::string& where) : Error(where + ": zero vector") {}
};

class InvalidBody : public Error {
 public:
  using Error::Error;
};

class InvalidDomain : public Error {
 public:
  using Error::Error;
};

class OutOfChart : public Error {
 public:
  using Error::Error;
};

class SideMismatch : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

class MonotoneViolation : public Error {
 public:
  using Error::Error;
};

class NonTangent : public Error {
 public:
  using Error::Error;
};

class SupportViolation : public Error {
 public:
  using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

inline double sqr(double v) { return v * v; }

}  // namespace minkdist
