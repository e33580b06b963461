#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dayvec {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using IndexVector = Eigen::VectorXi;

template <class T>
using CRef = const Eigen::Ref<const T>&;

// Calendar date as days since 1970-01-01 (UTC).
using Date = std::int32_t;
// UTC instant as seconds since the epoch.
using Timestamp = std::int64_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dayvec
