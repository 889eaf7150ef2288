#pragma once

#include "evatrap/atomdata.hpp"
#include "evatrap/units.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace evatrap {

/// Irreducible dynamical polarizabilities of one hyperfine level, in
/// C^2 m^2 / J.
struct PolarizabilitySet {
    double alpha0 = 0.0;  ///< scalar (includes the core term)
    double alpha1 = 0.0;  ///< vector
    double alpha2 = 0.0;  ///< tensor
    HalfInteger f;
    double omega = 0.0;
};

struct PolarizabilityOptions {
    /// Minimum |omega - omega_FF'| accepted (rad/s).
    double guard_band = 2.0 * units::pi * 10e9;
};

/// Scalar, vector and tensor polarizabilities of (level, F) at angular
/// frequency omega, summed over every F' of every transition touching the
/// level. Throws PhysicsError inside the resonance guard band.
PolarizabilitySet polarizabilities(const AtomicSystem& system, std::size_t level, HalfInteger f,
                                   double omega, const PolarizabilityOptions& options = {});

/// B_fict = alpha1 / (muB gF F) * i (E- x E+), in tesla.
Eigen::Vector3d fictitious_field(double alpha1, HalfInteger f, double gf,
                                 const Eigen::Vector3cd& e_plus);

/// Valence scalar polarizability continued to imaginary frequency i*xi.
/// The core term is not included.
double polarizability_imaginary_axis(const AtomicSystem& system, std::size_t level, double xi);

/// Angular frequency of light with vacuum wavelength `wavelength_m`.
inline double angular_frequency_of(double wavelength_m) {
    return 2.0 * units::pi * units::c / wavelength_m;
}

}  // namespace evatrap
