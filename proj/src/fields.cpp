#include "evatrap/fields.hpp"
#include "evatrap/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace evatrap {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

const char* const direction_names[] = {"none", "+x", "-x", "+y", "-y", "+z", "-z"};

void check_axis(const std::vector<double>& a, const char* name) {
    if (a.empty()) throw ConfigError(std::string("grid axis ") + name + " is empty");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]))
            throw ConfigError(std::string("grid axis ") + name + " has a non-finite coordinate");
        if (i > 0 && !(a[i] > a[i - 1]))
            throw ConfigError(std::string("grid axis ") + name + " is not strictly increasing");
    }
}

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
    return v;
}

}  // namespace

std::string to_string(Direction d) { return direction_names[static_cast<int>(d)]; }

Direction direction_from_string(const std::string& s) {
    for (int i = 0; i < 7; ++i)
        if (s == direction_names[i]) return static_cast<Direction>(i);
    throw ConfigError("unknown direction tag '" + s + "' (expected +x, -x, +y, -y, +z, -z or none)");
}

Direction reversed(Direction d) {
    switch (d) {
    case Direction::plus_x: return Direction::minus_x;
    case Direction::minus_x: return Direction::plus_x;
    case Direction::plus_y: return Direction::minus_y;
    case Direction::minus_y: return Direction::plus_y;
    case Direction::plus_z: return Direction::minus_z;
    case Direction::minus_z: return Direction::plus_z;
    default: return Direction::none;
    }
}

int direction_axis(Direction d) {
    switch (d) {
    case Direction::plus_x:
    case Direction::minus_x: return 0;
    case Direction::plus_y:
    case Direction::minus_y: return 1;
    case Direction::plus_z:
    case Direction::minus_z: return 2;
    default: return -1;
    }
}

Eigen::Vector3d Grid::point(std::size_t i) const {
    const std::size_t iz = i % z.size();
    const std::size_t iy = (i / z.size()) % y.size();
    const std::size_t ix = i / (z.size() * y.size());
    return {x[ix], y[iy], z[iz]};
}

void Grid::validate() const {
    check_axis(x, "x");
    check_axis(y, "y");
    check_axis(z, "z");
}

std::vector<double> Grid::linspace(double lo, double hi, std::size_t n) {
    if (n == 0) throw ConfigError("linspace: n must be positive");
    if (n == 1) return {lo};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    v.back() = hi;
    return v;
}

bool operator==(const Grid& a, const Grid& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

void FieldMap::validate() const {
    if (!(wavelength_m > 0) || !std::isfinite(wavelength_m))
        throw ConfigError("field map: wavelength must be positive");
    if (!(p_ref_W > 0) || !std::isfinite(p_ref_W))
        throw ConfigError("field map: P_ref must be positive");
    grid.validate();
    if (e_plus.size() != grid.size())
        throw ConfigError("field map: " + std::to_string(e_plus.size()) + " field values for " +
                          std::to_string(grid.size()) + " grid points");
    for (const auto& e : e_plus)
        if (!e.allFinite()) throw ConfigError("field map: non-finite field value");
}

FieldMap total_field_at_power(const Beam& beam) {
    if (!beam.field) throw ConfigError("beam without a field map");
    if (!(beam.power_W >= 0)) throw ConfigError("beam power must be non-negative");
    FieldMap out = *beam.field;
    const double scale = std::sqrt(beam.power_W / beam.field->p_ref_W);
    for (auto& e : out.e_plus) e *= scale;
    out.p_ref_W = beam.power_W > 0 ? beam.power_W : beam.field->p_ref_W;
    return out;
}

FieldMap total_field_at_power(const BeamPair& pair) {
    if (!pair.forward.field || !pair.backward.field) throw ConfigError("beam pair without field maps");
    const FieldMap& f = *pair.forward.field;
    const FieldMap& b = *pair.backward.field;
    if (std::abs(f.wavelength_m - b.wavelength_m) > 1e-9 * f.wavelength_m)
        throw ConfigError("beam pair members have different wavelengths");
    if (!(f.grid == b.grid)) throw ConfigError("beam pair members are sampled on different grids");
    if (!(pair.forward.power_W >= 0) || !(pair.backward.power_W >= 0))
        throw ConfigError("beam power must be non-negative");

    FieldMap out = f;
    const double sf = std::sqrt(pair.forward.power_W / f.p_ref_W);
    const Complex sb = std::polar(std::sqrt(pair.backward.power_W / b.p_ref_W), pair.relative_phase);
    for (std::size_t i = 0; i < out.e_plus.size(); ++i) out.e_plus[i] = sf * f.e_plus[i] + sb * b.e_plus[i];
    out.direction = Direction::none;
    out.p_ref_W = 1.0;
    return out;
}

FieldMap backward_from_forward(const FieldMap& map) {
    if (map.direction == Direction::none)
        throw ConfigError("backward_from_forward: field map has no propagation direction");
    if (!map.translation_invariant)
        throw ConfigError(
            "backward_from_forward: field map is not declared translation invariant; "
            "supply the counterpropagating map explicitly");
    FieldMap out = map;
    for (auto& e : out.e_plus) e = e.conjugate();
    out.direction = reversed(map.direction);
    return out;
}

void write_fieldmap(const FieldMap& map, const std::filesystem::path& dir) {
    map.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create field directory " + dir.string() + ": " + ec.message());

    json meta = {{"format_version", kFormatVersion},
                 {"wavelength_m", map.wavelength_m},
                 {"P_ref_W", map.p_ref_W},
                 {"direction", to_string(map.direction)},
                 {"translation_invariant", map.translation_invariant},
                 {"axes", {{"x", map.grid.x}, {"y", map.grid.y}, {"z", map.grid.z}}}};
    {
        std::ofstream out(dir / "meta.json");
        if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
        out << meta.dump(2) << '\n';
    }

    const std::size_t n = map.grid.size();
    std::vector<std::uint64_t> buf(3 * n * 2);
    std::size_t k = 0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            const double re = map.e_plus[i](c).real(), im = map.e_plus[i](c).imag();
            buf[k++] = to_le(std::bit_cast<std::uint64_t>(re));
            buf[k++] = to_le(std::bit_cast<std::uint64_t>(im));
        }
    std::ofstream out(dir / "e_plus.bin", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "e_plus.bin").string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
    if (!out) throw IoError("short write to " + (dir / "e_plus.bin").string());
}

FieldMap read_fieldmap(const std::filesystem::path& dir) {
    const auto meta_path = dir / "meta.json";
    const auto bin_path = dir / "e_plus.bin";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw IoError("missing field metadata " + meta_path.string());

    FieldMap map;
    try {
        const json meta = json::parse(meta_in);
        const int version = meta.at("format_version").get<int>();
        if (version != kFormatVersion)
            throw IoError("unsupported field format_version " + std::to_string(version));
        map.wavelength_m = meta.at("wavelength_m").get<double>();
        map.p_ref_W = meta.at("P_ref_W").get<double>();
        map.direction = direction_from_string(meta.value("direction", std::string("none")));
        map.translation_invariant = meta.value("translation_invariant", false);
        const auto& axes = meta.at("axes");
        map.grid.x = axes.at("x").get<std::vector<double>>();
        map.grid.y = axes.at("y").get<std::vector<double>>();
        map.grid.z = axes.at("z").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw IoError("corrupt field metadata " + meta_path.string() + ": " + e.what());
    }
    try {
        map.grid.validate();
    } catch (const ConfigError& e) {
        throw IoError(meta_path.string() + ": " + e.what());
    }

    std::ifstream bin(bin_path, std::ios::binary | std::ios::ate);
    if (!bin) throw IoError("missing field data " + bin_path.string());
    const std::size_t n = map.grid.size();
    const std::size_t expected = 3 * n * 2 * 8;
    const auto actual = static_cast<std::size_t>(bin.tellg());
    if (actual != expected)
        throw IoError("shape mismatch: " + bin_path.string() + " holds " + std::to_string(actual) +
                      " bytes, meta.json grid " + std::to_string(map.grid.x.size()) + "x" +
                      std::to_string(map.grid.y.size()) + "x" + std::to_string(map.grid.z.size()) +
                      " needs " + std::to_string(expected));
    bin.seekg(0);
    std::vector<std::uint64_t> buf(3 * n * 2);
    bin.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected));
    if (!bin) throw IoError("short read from " + bin_path.string());

    map.e_plus.assign(n, Eigen::Vector3cd::Zero());
    std::size_t k = 0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            const double re = std::bit_cast<double>(to_le(buf[k++]));
            const double im = std::bit_cast<double>(to_le(buf[k++]));
            map.e_plus[i](c) = Complex(re, im);
        }
    try {
        map.validate();
    } catch (const ConfigError& e) {
        throw IoError(dir.string() + ": " + e.what());
    }
    return map;
}

}  // namespace evatrap
