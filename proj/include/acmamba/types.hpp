#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace acmamba {

using Index = Eigen::Index;

// Dense types used across the library, templated on scalar so the
// numerical core can run at float or double precision.
template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using ArrXX = Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using ArrX = Eigen::Array<S, Eigen::Dynamic, 1>;

using MatXd = MatX<double>;
using VecXd = VecX<double>;
using ArrXXd = ArrXX<double>;
using ArrXd = ArrX<double>;

} // namespace acmamba
