#pragma once

#include "evatrap/error.hpp"
#include "evatrap/units.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace evatrap {

template <typename Alpha>
double c3_integral(Alpha&& alpha, const Material& material) {
    if (material.oscillators.empty()) return 0.0;
    // xi = scale * t keeps the integrand O(1) for the quadrature
    constexpr double scale = 1e15;
    auto integrand = [&](double t) {
        const double xi = scale * t;
        const double eps = material.epsilon_imaginary(xi);
        return alpha(xi) * (eps - 1) / (eps + 1);
    };
    double error = 0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-10, &error);
    if (!std::isfinite(value) || error > 1e-6 * std::abs(value))
        throw PhysicsError("C3 quadrature did not reach 1e-6 relative accuracy for " + material.name);
    return units::hbar / (16 * units::pi * units::pi * units::epsilon0) * scale * value;
}

}  // namespace evatrap
