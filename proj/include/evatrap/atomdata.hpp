#pragma once

#include "evatrap/half_integer.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evatrap {

//==============================================================================
// Wigner symbols

/// Wigner 6-j symbol {j1 j2 j3; j4 j5 j6}. Evaluated with the Racah sum in
/// exact rational arithmetic; returns exactly 0 when a triad fails the
/// triangle rule or has a non-integer sum. Arguments are doubled values.
double wigner6j_twice(int j1, int j2, int j3, int j4, int j5, int j6);

double wigner6j(HalfInteger j1, HalfInteger j2, HalfInteger j3,
                HalfInteger j4, HalfInteger j5, HalfInteger j6);

/// Convenience overload; throws InvalidArgument for negative or
/// non-half-integer input.
double wigner6j(double j1, double j2, double j3, double j4, double j5, double j6);

/// True when (a, b, c) satisfy |a-b| <= c <= a+b with integer a+b+c.
bool triangle_ok(HalfInteger a, HalfInteger b, HalfInteger c);

//==============================================================================
// Atomic data

struct Level {
    int n = 0;
    int l = 0;
    HalfInteger j;
    double energy_J = 0.0;  ///< relative to the ground level
    /// Hyperfine energy offsets (J) keyed by 2F. Empty when the data file
    /// does not provide them.
    std::map<int, double> hyperfine_offset_J;

    /// "6S1/2", "6P3/2"
    std::string label() const;
};

struct Transition {
    std::size_t lower = 0;  ///< index into AtomicSystem::levels
    std::size_t upper = 0;
    double reduced_dipole_Cm = 0.0;      ///< <J||d||J'>, non-negative
    double angular_frequency = 0.0;      ///< omega_e > 0, rad/s
};

/// A dipole coupling seen from one level: the other level, |<J||d||J'>| and
/// the signed level-to-level angular frequency (E_other - E_this)/hbar.
struct Coupling {
    std::size_t other = 0;
    double reduced_dipole_Cm = 0.0;
    double angular_frequency = 0.0;
};

struct StateSpec {
    int n = 0;
    int l = 0;
    HalfInteger j;
    HalfInteger f;
};

class AtomicSystem {
public:
    std::string species;
    double mass_kg = 0.0;
    HalfInteger nuclear_spin;
    std::vector<Level> levels;
    std::vector<Transition> transitions;  ///< sorted by angular frequency
    std::size_t state_level = 0;          ///< level of the state of interest
    HalfInteger state_f;
    /// Static ionic-core polarizability (C^2 m^2 / J) added to every scalar
    /// polarizability; 0 when the data file does not declare it.
    double core_polarizability = 0.0;
    int truncation_n_max = 0;

    std::optional<std::size_t> find_level(int n, int l, HalfInteger j) const;
    std::size_t require_level(int n, int l, HalfInteger j) const;

    /// All couplings of `level`, in transition order.
    std::vector<Coupling> couplings(std::size_t level) const;

    /// Hyperfine offset of (level, F) in joules, 0 when absent.
    double hyperfine_offset(std::size_t level, HalfInteger f) const;
};

/// Parses and validates an atomic-data JSON file. The state of interest must
/// satisfy |J-I| <= F <= J+I and have at least one transition.
AtomicSystem load_atomic_system(const std::filesystem::path& path, const StateSpec& state);

/// Same validation for a document already in memory.
AtomicSystem parse_atomic_system(const std::string& json_text, const StateSpec& state);

/// F = |J-I| ... J+I for a level of `system`.
std::vector<HalfInteger> hyperfine_levels(const AtomicSystem& system, std::size_t level);

/// <F||d||F'> = <J||d||J'> (-1)^(1+F'+J+I) sqrt(2F'+1) {J J' 1; F' F I}
/// for a transition, with F on the lower and F' on the upper level.
double reduced_dipole_F(const AtomicSystem& system, const Transition& transition,
                        HalfInteger f, HalfInteger fp);

/// Same relation with explicit angular momenta; J/F belong to the level the
/// element is evaluated from.
double reduced_dipole_hyperfine(double reduced_dipole_JJ, HalfInteger j, HalfInteger jp,
                                HalfInteger nuclear_spin, HalfInteger f, HalfInteger fp);

/// Hyperfine Lande factor g_F (nuclear moment neglected).
double lande_gf(const AtomicSystem& system, std::size_t level, HalfInteger f);

}  // namespace evatrap
