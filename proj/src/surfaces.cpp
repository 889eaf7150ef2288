#include "evatrap/surfaces.hpp"
#include "evatrap/error.hpp"
#include "evatrap/polarizability.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace evatrap {

using nlohmann::json;

double Material::epsilon_imaginary(double xi) const {
    double eps = 1.0;
    for (const auto& o : oscillators) eps += o.strength * o.omega * o.omega / (o.omega * o.omega + xi * xi + o.gamma * xi);
    return eps;
}

double Material::refractive_index(double omega) const {
    double eps = 1.0;
    for (const auto& o : oscillators) eps += o.strength * o.omega * o.omega / (o.omega * o.omega - omega * omega);
    return std::sqrt(eps);
}

Material parse_material(const std::string& json_text) {
    Material m;
    try {
        const json doc = json::parse(json_text);
        m.name = doc.at("name").get<std::string>();
        for (const auto& o : doc.at("oscillators")) {
            Oscillator osc{o.at("omega_rad_s").get<double>(), o.at("strength").get<double>(),
                           o.value("gamma_rad_s", 0.0)};
            if (!(osc.omega > 0) || !(osc.strength >= 0) || !(osc.gamma >= 0))
                throw ConfigError("material " + m.name + ": oscillators need omega > 0, strength >= 0, gamma >= 0");
            m.oscillators.push_back(osc);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("material file: ") + e.what());
    }
    return m;
}

Material load_material(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open material file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_material(ss.str());
}

Surface Surface::plane(const Eigen::Vector3d& normal, double offset, Material m) {
    if (!normal.allFinite() || std::abs(normal.norm() - 1) > 1e-9)
        throw ConfigError("plane surface: normal must be a unit vector");
    Surface s;
    s.kind = Kind::plane;
    s.direction = normal;
    s.offset = offset;
    s.material = std::move(m);
    return s;
}

Surface Surface::cylinder(const Eigen::Vector3d& point, const Eigen::Vector3d& direction, double radius,
                          Material m) {
    if (!direction.allFinite() || std::abs(direction.norm() - 1) > 1e-9)
        throw ConfigError("cylinder surface: axis direction must be a unit vector");
    if (!(radius > 0)) throw ConfigError("cylinder surface: radius must be positive");
    Surface s;
    s.kind = Kind::cylinder;
    s.direction = direction;
    s.axis_point = point;
    s.radius = radius;
    s.material = std::move(m);
    return s;
}

double Surface::signed_distance(const Eigen::Vector3d& p) const {
    if (kind == Kind::plane) return direction.dot(p) - offset;
    const Eigen::Vector3d rel = p - axis_point;
    const double rho = (rel - rel.dot(direction) * direction).norm();
    return rho - radius;
}

double c3_coefficient(const AtomicSystem& system, std::size_t level, const Material& material) {
    return c3_integral([&](double xi) { return polarizability_imaginary_axis(system, level, xi); }, material);
}

CpValue cp_potential(const Surface& surface, double c3, const Eigen::Vector3d& point) {
    const double d = surface.signed_distance(point);
    if (d < kCpMinDistance) return {-c3 / (kCpMinDistance * kCpMinDistance * kCpMinDistance), true};
    return {-c3 / (d * d * d), false};
}

}  // namespace evatrap
