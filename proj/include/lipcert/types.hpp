#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lipcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Which induced matrix norm a computation targets.
enum class Norm { One, Inf };

inline const char* to_string(Norm p) { return p == Norm::One ? "1" : "inf"; }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrixError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

struct InvalidInputError : Error {
  using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& what) {
  if (!m.allFinite()) throw InvalidInputError(what + ": entries must be finite");
}

}  // namespace lipcert
