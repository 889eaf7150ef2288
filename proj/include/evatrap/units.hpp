#pragma once

#include <numbers>

// CODATA 2018 values, SI.
namespace evatrap::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double h = 6.62607015e-34;
inline constexpr double c = 299792458.0;
inline constexpr double epsilon0 = 8.8541878128e-12;
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double kB = 1.380649e-23;
inline constexpr double e = 1.602176634e-19;
inline constexpr double a0 = 5.29177210903e-11;
inline constexpr double muB = 9.2740100783e-24;
inline constexpr double amu = 1.66053906660e-27;
inline constexpr double hartree = 4.3597447222071e-18;
inline constexpr double g_s = 2.00231930436256;

/// e*a0, the atomic unit of dipole moment (C m).
inline constexpr double dipole_au = e * a0;
/// e^2 a0^2 / Eh, the atomic unit of polarizability (C^2 m^2 / J).
inline constexpr double polarizability_au = dipole_au * dipole_au / hartree;

inline constexpr double to_mK(double joules) { return joules / kB * 1e3; }
inline constexpr double from_mK(double mK) { return mK * 1e-3 * kB; }

}  // namespace evatrap::units
