#pragma once

#include "evatrap/atomdata.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace evatrap {

struct Oscillator {
    double omega = 0.0;     ///< resonance, rad/s
    double strength = 0.0;  ///< dimensionless
    double gamma = 0.0;     ///< damping, rad/s
};

/// eps(i xi) = 1 + sum S_j w_j^2 / (w_j^2 + xi^2 + g_j xi)
struct Material {
    std::string name;
    std::vector<Oscillator> oscillators;

    double epsilon_imaginary(double xi) const;
    /// Real-frequency refractive index of the undamped model.
    double refractive_index(double omega) const;
};

Material load_material(const std::filesystem::path& path);
Material parse_material(const std::string& json_text);

struct Surface {
    enum class Kind { plane, cylinder };
    Kind kind = Kind::plane;
    /// plane: unit normal pointing from the material into vacuum, offset
    /// along it (surface is n.x = offset). cylinder: unit axis direction.
    Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
    double offset = 0.0;
    Eigen::Vector3d axis_point = Eigen::Vector3d::Zero();
    double radius = 0.0;
    Material material;

    static Surface plane(const Eigen::Vector3d& normal, double offset, Material m);
    static Surface cylinder(const Eigen::Vector3d& point, const Eigen::Vector3d& direction,
                            double radius, Material m);

    /// Distance to the surface, negative inside the material.
    double signed_distance(const Eigen::Vector3d& p) const;
};

/// C3 = hbar/(16 pi^2 eps0) ∫ alpha(i xi) (eps-1)/(eps+1) dxi in J m^3,
/// using the valence imaginary-axis polarizability of `level`. Throws
/// PhysicsError if the 1e-6 relative target is not reached.
double c3_coefficient(const AtomicSystem& system, std::size_t level, const Material& material);

/// Same integral for an arbitrary alpha(i xi) (C^2 m^2 / J).
template <typename Alpha>
double c3_integral(Alpha&& alpha, const Material& material);

constexpr double kCpMinDistance = 1e-9;

struct CpValue {
    double energy = 0.0;  ///< J
    bool masked = false;  ///< inside the material or closer than kCpMinDistance
};

/// U = -C3/d^3, clamped at d_min. Points inside the material are masked.
CpValue cp_potential(const Surface& surface, double c3, const Eigen::Vector3d& point);

}  // namespace evatrap

#include "evatrap/detail/c3_integral.hpp"
