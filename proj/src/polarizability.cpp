#include "evatrap/polarizability.hpp"
#include "evatrap/error.hpp"
#include "evatrap/vector_ops.hpp"

#include <cmath>
#include <sstream>

namespace evatrap {

PolarizabilitySet polarizabilities(const AtomicSystem& system, std::size_t level, HalfInteger f,
                                   double omega, const PolarizabilityOptions& options) {
    if (!(omega >= 0)) throw InvalidArgument("polarizabilities: omega must be >= 0");
    const Level& lv = system.levels.at(level);
    const auto couplings = system.couplings(level);
    if (couplings.empty())
        throw PhysicsError("polarizabilities: level " + lv.label() + " has no transitions");

    const HalfInteger one = HalfInteger::from_int(1);
    const HalfInteger two = HalfInteger::from_int(2);
    const double fv = f.value();
    // Twice the commonly printed sqrt(3F(2F+1)/(2(F+1))); this is the value
    // that reproduces the direct second-order sum over |F' m'>.
    const double vector_prefactor =
        fv > 0 ? std::sqrt(6.0 * fv * (2 * fv + 1) / (fv + 1)) : 0.0;
    const double tensor_prefactor =
        fv > 0.5 ? std::sqrt(40.0 * fv * (2 * fv + 1) * (2 * fv - 1) /
                             (3.0 * (fv + 1) * (2 * fv + 3)))
                 : 0.0;
    const double own_offset = system.hyperfine_offset(level, f);

    PolarizabilitySet out;
    out.f = f;
    out.omega = omega;
    for (const auto& cp : couplings) {
        const Level& other = system.levels[cp.other];
        for (const HalfInteger fp : hyperfine_levels(system, cp.other)) {
            const double d = reduced_dipole_hyperfine(cp.reduced_dipole_Cm, lv.j, other.j,
                                                      system.nuclear_spin, f, fp);
            if (d == 0.0) continue;
            const double w =
                cp.angular_frequency +
                (system.hyperfine_offset(cp.other, fp) - own_offset) / units::hbar;
            if (std::abs(std::abs(w) - omega) < options.guard_band) {
                std::ostringstream msg;
                msg << "resonance: light at " << 2 * units::pi * units::c / omega * 1e9
                    << " nm is within the guard band of " << lv.label() << " F=" << f.str()
                    << " -> " << other.label() << " F'=" << fp.str();
                throw PhysicsError(msg.str());
            }
            const double d2 = d * d;
            const double denom = units::hbar * (w * w - omega * omega);
            const int sign = ((f.twice() + fp.twice()) / 2) % 2 == 0 ? 1 : -1;

            out.alpha0 += 2.0 * w * d2 / (3.0 * denom);
            if (vector_prefactor != 0.0)
                out.alpha1 += sign * vector_prefactor * wigner6j(one, one, one, f, f, fp) *
                              omega * d2 / denom;
            if (tensor_prefactor != 0.0)
                out.alpha2 += sign * tensor_prefactor * wigner6j(one, one, two, f, f, fp) * w *
                              d2 / denom;
        }
    }
    out.alpha0 += system.core_polarizability;
    // The rank-2 part cancels identically for J < 1 once summed over F'.
    if (lv.j.twice() < 2) out.alpha2 = 0.0;
    return out;
}

Eigen::Vector3d fictitious_field(double alpha1, HalfInteger f, double gf,
                                 const Eigen::Vector3cd& e_plus) {
    if (f.twice() == 0) throw InvalidArgument("fictitious_field: F = 0");
    if (gf == 0.0) throw InvalidArgument("fictitious_field: g_F = 0");
    return alpha1 / (units::muB * gf * f.value()) * spin_density(e_plus, e_plus).real();
}

double polarizability_imaginary_axis(const AtomicSystem& system, std::size_t level, double xi) {
    if (!(xi >= 0)) throw InvalidArgument("polarizability_imaginary_axis: xi must be >= 0");
    const double degeneracy = system.levels.at(level).j.twice() + 1.0;
    double alpha = 0.0;
    for (const auto& cp : system.couplings(level)) {
        const double w = cp.angular_frequency;
        alpha += 2.0 * w * cp.reduced_dipole_Cm * cp.reduced_dipole_Cm /
                 (3.0 * units::hbar * degeneracy * (w * w + xi * xi));
    }
    return alpha;
}

}  // namespace evatrap
