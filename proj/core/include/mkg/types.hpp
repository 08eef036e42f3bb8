#pragma once

#include <complex>
#include <Eigen/Dense>

namespace mkg {

using cplx = std::complex<double>;

inline constexpr int kMaxComponents = 8;

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxComponents, kMaxComponents>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxComponents, 1>;
using SmallCMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxComponents, kMaxComponents>;
using SmallCVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxComponents, 1>;

}  // namespace mkg
