#pragma once

#include <Eigen/Core>

#include <complex>

namespace evatrap {

// Eigen's cross() conjugates the result for complex scalars; field algebra
// needs the plain bilinear product.
template <typename S>
Eigen::Matrix<S, 3, 1> cross(const Eigen::Matrix<S, 3, 1>& a, const Eigen::Matrix<S, 3, 1>& b) {
    return {a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0)};
}

/// i (A* x B), real when A = B.
inline Eigen::Vector3cd spin_density(const Eigen::Vector3cd& a, const Eigen::Vector3cd& b) {
    return std::complex<double>(0, 1) * cross<std::complex<double>>(a.conjugate(), b);
}

}  // namespace evatrap
