#pragma once

#include <complex>

#include <Eigen/Dense>

namespace hygrid {

using Complex = std::complex<double>;
using Vec3c = Eigen::Vector3cd;
using Mat3c = Eigen::Matrix3cd;
using Vec3d = Eigen::Vector3d;

inline constexpr int kPhases = 3;

/// Phase labels used in reports and file I/O.
inline constexpr const char* kPhaseNames[kPhases] = {"a", "b", "c"};

}  // namespace hygrid
