#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace specdesc {

using Scalar = double;
using Index = Eigen::Index;

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Matrix = MatrixX<Scalar>;
using Vector = VectorX<Scalar>;
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
using SparseMatrix = Eigen::SparseMatrix<Scalar>;
using Triplet = Eigen::Triplet<Scalar>;

/// Row-per-vertex coordinate storage (V x 3).
using VertexMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// Row-per-face vertex indices (F x 3).
using FaceMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 3, Eigen::RowMajor>;

// Error hierarchy. The CLI maps these onto exit codes: usage 2, data 3,
// numerical 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (parse and validation failures, I/O).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::int64_t line)
      : DataError(what + (line >= 0 ? " (line " + std::to_string(line) + ")" : std::string{})),
        line_(line) {}
  std::int64_t line() const noexcept { return line_; }

 private:
  std::int64_t line_;
};

class ValidationError : public DataError {
 public:
  ValidationError(const std::string& what, std::int64_t element)
      : DataError(what + " (element " + std::to_string(element) + ")"), element_(element) {}
  std::int64_t element() const noexcept { return element_; }

 private:
  std::int64_t element_;
};

/// Solver failures and numerically infeasible requests.
class NumericalError : public Error {
 public:
  using Error::Error;
};

using Warnings = std::vector<std::string>;

}  // namespace specdesc
