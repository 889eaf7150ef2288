#include "evatrap/config.hpp"
#include "evatrap/error.hpp"
#include "binio.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#ifndef EVATRAP_DEFAULT_DATA_DIR
#define EVATRAP_DEFAULT_DATA_DIR "data"
#endif

namespace evatrap {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kResultFormat = 1;

std::string slurp(const fs::path& p, const char* what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError(std::string("cannot open ") + what + " " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json canonicalize(const json& j) {
    if (j.is_object()) {
        json out = json::object();
        for (const auto& [k, v] : j.items()) out[k] = canonicalize(v);
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& v : j) out.push_back(canonicalize(v));
        return out;
    }
    if (j.is_number()) return j.get<double>();
    return j;
}

// typed accessors with config-path error messages
struct Reader {
    const json& j;
    std::string where;

    bool has(const char* key) const { return j.is_object() && j.contains(key) && !j.at(key).is_null(); }

    const json& at(const char* key) const {
        if (!has(key)) throw ConfigError("config: missing '" + std::string(key) + "' in " + where);
        return j.at(key);
    }
    double number(const char* key) const {
        const auto& v = at(key);
        if (!v.is_number()) throw ConfigError("config: '" + std::string(key) + "' in " + where + " must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError("config: '" + std::string(key) + "' in " + where + " is not finite");
        return d;
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
    std::string string(const char* key) const {
        const auto& v = at(key);
        if (!v.is_string()) throw ConfigError("config: '" + std::string(key) + "' in " + where + " must be a string");
        return v.get<std::string>();
    }
    std::string string(const char* key, const std::string& fallback) const { return has(key) ? string(key) : fallback; }
    Eigen::Vector3d vec3(const char* key, double scale = 1.0) const {
        const auto& v = at(key);
        if (!v.is_array() || v.size() != 3)
            throw ConfigError("config: '" + std::string(key) + "' in " + where + " must be a 3-vector");
        Eigen::Vector3d out;
        for (int k = 0; k < 3; ++k) {
            if (!v[k].is_number()) throw ConfigError("config: '" + std::string(key) + "' in " + where + " must hold numbers");
            out(k) = v[k].get<double>() * scale;
        }
        return out;
    }
    Reader child(const char* key) const { return {at(key), where + "." + key}; }
};

HalfInteger half(double v, const std::string& where) {
    try {
        return HalfInteger::from_double(v);
    } catch (const Error&) {
        throw ConfigError("config: " + where + " must be a multiple of 1/2");
    }
}

struct Resolver {
    ConfigPaths paths;
    bool build = true;
    json files = json::object();

    fs::path find(const std::string& rel, const char* what) const {
        const fs::path p(rel);
        if (p.is_absolute()) return p;
        if (fs::exists(paths.base_dir / p)) return paths.base_dir / p;
        if (fs::exists(paths.data_dir / p)) return paths.data_dir / p;
        throw IoError(std::string(what) + " not found: " + rel);
    }

    Material material(const json& spec, const std::string& where) {
        if (spec.is_object()) return parse_material(spec.dump());
        if (!spec.is_string()) throw ConfigError("config: material in " + where + " must be a name or an object");
        const std::string name = spec.get<std::string>();
        fs::path path;
        if (name.find('/') != std::string::npos || name.ends_with(".json")) {
            path = find(name, "material file");
        } else {
            path = paths.data_dir / "materials" / (name + ".json");
            if (!fs::exists(path)) throw ConfigError("config: unknown material '" + name + "' in " + where);
        }
        const std::string text = slurp(path, "material file");
        files["materials"][name] = sha256_hex(text);
        return parse_material(text);
    }

    std::shared_ptr<FieldMap> field(const std::string& folder, double lambda, const std::string& beam) {
        fs::path dir;
        try {
            dir = find(folder, "field folder");
        } catch (const IoError&) {
            throw IoError("beam '" + beam + "': field folder not found: " + folder);
        }
        auto matches = [&](const fs::path& d) {
            if (!fs::exists(d / "meta.json")) return false;
            try {
                const json meta = json::parse(slurp(d / "meta.json", "field metadata"));
                return std::abs(meta.at("wavelength_m").get<double>() - lambda) <= 1e-6 * lambda;
            } catch (const json::exception&) {
                return false;
            }
        };
        fs::path chosen;
        if (matches(dir)) {
            chosen = dir;
        } else if (fs::is_directory(dir)) {
            std::vector<fs::path> subdirs;
            for (const auto& e : fs::directory_iterator(dir))
                if (e.is_directory()) subdirs.push_back(e.path());
            std::sort(subdirs.begin(), subdirs.end());
            for (const auto& d : subdirs)
                if (matches(d)) {
                    chosen = d;
                    break;
                }
        }
        if (chosen.empty()) {
            std::ostringstream msg;
            msg << "beam '" << beam << "': no field data at " << lambda * 1e9 << " nm in " << dir.string();
            throw IoError(msg.str());
        }
        files["fields"][folder + "@" + std::to_string(lambda)] =
            sha256_hex(slurp(chosen / "meta.json", "field metadata") + slurp(chosen / "e_plus.bin", "field data"));
        if (!build) return nullptr;
        return std::make_shared<FieldMap>(read_fieldmap(chosen));
    }
};

std::vector<double> parse_axis(const json& spec, const std::string& where) {
    if (spec.is_number()) return {spec.get<double>() * 1e-9};
    if (spec.is_array()) {
        std::vector<double> v;
        for (const auto& x : spec) {
            if (!x.is_number()) throw ConfigError("config: " + where + " must hold numbers");
            v.push_back(x.get<double>() * 1e-9);
        }
        return v;
    }
    const Reader r{spec, where};
    const double lo = r.number("min"), hi = r.number("max");
    const double n = r.number("n");
    if (n < 1 || n != std::floor(n) || n > 1e6) throw ConfigError("config: " + where + ".n must be a positive integer");
    if (n == 1) return {lo * 1e-9};
    auto v = Grid::linspace(lo * 1e-9, hi * 1e-9, static_cast<std::size_t>(n));
    return v;
}

}  // namespace

//------------------------------------------------------------------------------

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw InvalidArgument("base64 length is not a multiple of 4");
    std::string out(3 * text.size() / 4, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw InvalidArgument("invalid base64");
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string canonical_dump(const json& doc) { return canonicalize(doc).dump(); }

fs::path default_data_dir() {
    if (const char* env = std::getenv("EVATRAP_DATA_DIR"); env && *env) return env;
    return EVATRAP_DEFAULT_DATA_DIR;
}

int axis_from_string(const std::string& s) {
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "z") return 2;
    throw ConfigError("unknown axis '" + s + "' (expected x, y or z)");
}

LoadedConfig load_config(const fs::path& path, ConfigPaths paths, bool build) {
    if (!fs::exists(path)) throw IoError("config file not found: " + path.string());
    if (paths.base_dir == ".") paths.base_dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    return parse_config(slurp(path, "config file"), paths, build);
}

LoadedConfig parse_config(const std::string& text, const ConfigPaths& in_paths, bool build) {
    LoadedConfig cfg;
    try {
        cfg.document = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!cfg.document.is_object()) throw ConfigError("config: document must be a JSON object");
    Resolver res{in_paths, build};
    if (res.paths.data_dir.empty()) res.paths.data_dir = default_data_dir();
    const Reader root{cfg.document, "config"};

    // atom and levels
    const Reader atom = root.child("atom");
    const Reader state = atom.child("state");
    const StateSpec spec{static_cast<int>(state.number("n")), static_cast<int>(state.number("l")),
                         half(state.number("j"), "atom.state.j"), half(state.number("f"), "atom.state.f")};
    const fs::path atom_path = res.find(atom.string("data"), "atomic data file");
    const std::string atom_text = slurp(atom_path, "atomic data file");
    res.files["atom"] = sha256_hex(atom_text);
    cfg.system = parse_atomic_system(atom_text, spec);

    if (root.has("levels")) {
        const auto& lv = root.at("levels");
        if (!lv.is_array() || lv.empty()) throw ConfigError("config: 'levels' must be a non-empty array");
        for (std::size_t k = 0; k < lv.size(); ++k) {
            const Reader r{lv[k], "levels[" + std::to_string(k) + "]"};
            const int n = static_cast<int>(r.number("n")), l = static_cast<int>(r.number("l"));
            const auto j = half(r.number("j"), r.where + ".j");
            const auto idx = cfg.system.find_level(n, l, j);
            if (!idx) throw ConfigError("config: " + r.where + " is not in the atomic data");
            cfg.levels.push_back({*idx, half(r.number("f"), r.where + ".f")});
        }
    } else {
        cfg.levels.push_back({cfg.system.state_level, cfg.system.state_f});
    }
    for (const auto& l : cfg.levels)
        cfg.level_labels.push_back(cfg.system.levels[l.level].label() + " F=" + l.f.str());

    // geometry
    Grid grid;
    bool have_grid = false;
    if (root.has("geometry")) {
        const Reader g = root.child("geometry");
        grid.x = parse_axis(g.at("x_nm"), "geometry.x_nm");
        grid.y = parse_axis(g.at("y_nm"), "geometry.y_nm");
        grid.z = parse_axis(g.at("z_nm"), "geometry.z_nm");
        grid.validate();
        have_grid = true;
    }

    if (root.has("quantization_axis")) cfg.trap.quantization_axis = root.vec3("quantization_axis");
    if (std::abs(cfg.trap.quantization_axis.norm() - 1) > 1e-9)
        throw ConfigError("config: quantization_axis must be a unit vector");
    if (root.has("guard_band_GHz")) {
        const double gb = root.number("guard_band_GHz");
        if (gb < 0) throw ConfigError("config: guard_band_GHz must be non-negative");
        cfg.trap.polarizability.guard_band = 2 * units::pi * gb * 1e9;
    }

    // beams
    const auto& beams = root.at("beams");
    if (!beams.is_array() || beams.empty()) throw ConfigError("config: 'beams' must be a non-empty array");
    std::map<std::string, int> names;
    for (std::size_t k = 0; k < beams.size(); ++k) {
        const Reader b{beams[k], "beams[" + std::to_string(k) + "]"};
        BeamSource src;
        src.name = b.string("name", "beam" + std::to_string(k));
        if (names[src.name]++) throw ConfigError("config: duplicate beam name '" + src.name + "'");
        const double lambda = b.number("wavelength_nm") * 1e-9;
        if (!(lambda > 0)) throw ConfigError("config: " + b.where + ".wavelength_nm must be positive");
        const double power = b.number("power_mW") * 1e-3;
        if (power < 0) throw ConfigError("config: " + b.where + ".power_mW must be non-negative");
        src.max_power_W = b.number("max_power_mW", 0.0) * 1e-3;

        std::shared_ptr<FieldMap> fwd, bwd;
        bool pair = false;
        double back_power = power, phase = 0.0;
        if (b.has("pair")) {
            const auto& p = b.at("pair");
            if (p.is_boolean()) {
                pair = p.get<bool>();
            } else if (p.is_object()) {
                pair = true;
                const Reader pr{p, b.where + ".pair"};
                src.split = pr.has("split") && pr.at("split").get<bool>();
                back_power = pr.number("backward_power_mW", power * 1e3) * 1e-3;
                phase = pr.number("relative_phase_rad", 0.0);
                if (back_power < 0) throw ConfigError("config: backward_power_mW must be non-negative");
            } else {
                throw ConfigError("config: " + b.where + ".pair must be true/false or an object");
            }
        }

        if (b.has("nanofiber") == b.has("field"))
            throw ConfigError("config: " + b.where + " needs exactly one of 'nanofiber' or 'field'");
        if (b.has("nanofiber")) {
            if (!have_grid) throw ConfigError("config: nanofiber beams need a 'geometry' grid");
            const Reader nf = b.child("nanofiber");
            NanofiberParams p;
            p.radius_m = nf.number("radius_nm") * 1e-9;
            p.wavelength_m = lambda;
            p.polarization_angle = nf.number("polarization_deg", 0.0) * units::pi / 180;
            p.direction = direction_from_string(b.string("direction", "+z"));
            const double omega = angular_frequency_of(lambda);
            if (nf.has("n_core")) p.n_core = nf.number("n_core");
            else p.n_core = res.material(nf.at("core_material"), nf.where).refractive_index(omega);
            if (nf.has("n_clad")) p.n_clad = nf.number("n_clad");
            else if (nf.has("clad_material")) p.n_clad = res.material(nf.at("clad_material"), nf.where).refractive_index(omega);
            if (!(p.radius_m > 0)) throw ConfigError("config: " + nf.where + ".radius_nm must be positive");
            if (build) {
                std::vector<std::string> warnings;
                // unit power keeps the stored field at P_ref = 1 W
                fwd = std::make_shared<FieldMap>(solve_nanofiber_mode(p, grid, 1.0, &warnings));
                for (const auto& w : warnings) cfg.warnings.push_back("beam '" + src.name + "': " + w);
                if (pair) bwd = std::make_shared<FieldMap>(backward_from_forward(*fwd));
            }
        } else {
            fwd = res.field(b.string("field"), lambda, src.name);
            if (!fwd) {
                if (pair && b.has("backward_field")) res.field(b.string("backward_field"), lambda, src.name);
            } else if (have_grid && !(fwd->grid == grid))
                throw ConfigError("grid mismatch: field data of beam '" + src.name + "' is not sampled on the geometry grid");
            if (fwd && !have_grid) {
                grid = fwd->grid;
                have_grid = true;
            }
            if (fwd && pair) {
                if (b.has("backward_field")) bwd = res.field(b.string("backward_field"), lambda, src.name);
                else bwd = std::make_shared<FieldMap>(backward_from_forward(*fwd));
            }
        }
        if (pair) src.beam = BeamPair{{fwd, power}, {bwd, back_power}, phase};
        else src.beam = Beam{fwd, power};
        cfg.trap.beams.push_back(std::move(src));
    }

    // surfaces
    if (root.has("surfaces")) {
        const auto& ss = root.at("surfaces");
        if (!ss.is_array()) throw ConfigError("config: 'surfaces' must be an array");
        for (std::size_t k = 0; k < ss.size(); ++k) {
            const Reader s{ss[k], "surfaces[" + std::to_string(k) + "]"};
            const Material m = res.material(s.at("material"), s.where);
            const std::string type = s.string("type");
            Surface surf;
            if (type == "cylinder") {
                const Eigen::Vector3d point = s.has("point_nm") ? s.vec3("point_nm", 1e-9) : Eigen::Vector3d::Zero();
                const Eigen::Vector3d axis = s.has("axis") ? s.vec3("axis") : Eigen::Vector3d::UnitZ();
                surf = Surface::cylinder(point, axis, s.number("radius_nm") * 1e-9, m);
            } else if (type == "plane") {
                surf = Surface::plane(s.vec3("normal"), s.number("offset_nm", 0.0) * 1e-9, m);
            } else {
                throw ConfigError("config: unknown surface type '" + type + "' (expected plane or cylinder)");
            }
            SurfaceTerm term{surf, {}};
            if (build)
                for (const auto& l : cfg.levels) term.c3.push_back(c3_coefficient(cfg.system, l.level, m));
            cfg.surfaces.push_back(std::move(term));
        }
    }

    cfg.analysis_axis = 0;
    if (root.has("analysis")) {
        const Reader a = root.child("analysis");
        cfg.analysis_axis = axis_from_string(a.string("axis", "x"));
    }

    cfg.canonical = {{"config", canonicalize(cfg.document)}, {"files", res.files}, {"format_version", kResultFormat}};
    cfg.hash = sha256_hex(cfg.canonical.dump());
    return cfg;
}

//------------------------------------------------------------------------------

ScanSpec parse_scan_spec(const std::string& text, const TrapModel& model, const LoadedConfig& config) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scan spec: malformed JSON: ") + e.what());
    }
    const Reader root{doc, "scan spec"};
    auto slider_index = [&](const std::string& name) {
        const auto& s = model.sliders();
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i].name == name) return i;
        throw ConfigError("scan spec: unknown slider '" + name + "'");
    };
    ScanSpec spec;
    const auto& params = root.at("parameters");
    if (!params.is_array()) throw ConfigError("scan spec: 'parameters' must be an array");
    for (std::size_t k = 0; k < params.size(); ++k) {
        const Reader p{params[k], "parameters[" + std::to_string(k) + "]"};
        ScanParameter sp;
        sp.slider = slider_index(p.string("slider"));
        sp.min_W = p.number("min_mW") * 1e-3;
        sp.max_W = p.number("max_mW") * 1e-3;
        const double steps = p.number("steps");
        if (steps < 1 || steps != std::floor(steps)) throw ConfigError("scan spec: steps must be a positive integer");
        sp.steps = static_cast<std::size_t>(steps);
        spec.parameters.push_back(sp);
    }
    spec.objective = objective_from_string(root.string("objective", "depth"));
    spec.level = static_cast<std::size_t>(root.number("level", 0));
    spec.sheet = static_cast<int>(root.number("sheet", 0));
    spec.axis = root.has("axis") ? axis_from_string(root.string("axis")) : config.analysis_axis;
    if (root.has("through_nm")) spec.through = root.vec3("through_nm", 1e-9);
    if (root.has("frequency_axes"))
        for (const auto& a : root.at("frequency_axes")) spec.frequency_axes.push_back(axis_from_string(a.get<std::string>()));
    if (root.has("fixed_mW")) {
        const auto& f = root.at("fixed_mW");
        if (!f.is_object()) throw ConfigError("scan spec: 'fixed_mW' must map slider names to powers");
        for (const auto& s : model.sliders()) spec.fixed.push_back(s.default_W);
        for (const auto& [name, v] : f.items()) {
            if (!v.is_number() || v.get<double>() < 0) throw ConfigError("scan spec: fixed power of '" + name + "' must be >= 0");
            spec.fixed[slider_index(name)] = v.get<double>() * 1e-3;
        }
    }
    spec.validate(model);
    return spec;
}

//------------------------------------------------------------------------------

json summarize(const TrapResult& result, const LoadedConfig& config) {
    static const char* axis_names[] = {"x", "y", "z"};
    json levels = json::array();
    for (std::size_t l = 0; l < result.levels.size(); ++l) {
        const auto& lr = result.levels[l];
        json sheets = json::array();
        for (int k = 0; k < lr.dim; ++k) {
            const auto tp = trap_properties(result, l, k, config.analysis_axis, config.system.mass_kg);
            json freq = json::array();
            for (const auto& f : tp.frequency_Hz) freq.push_back(f ? json(*f) : json(nullptr));
            sheets.push_back({{"sheet", k},
                              {"stable", tp.stable},
                              {"depth_mK", tp.depth_mK},
                              {"minimum_mK", tp.minimum_mK},
                              {"index", tp.index},
                              {"position_m", {tp.position(0), tp.position(1), tp.position(2)}},
                              {"surface_distance_m", tp.surface_distance_m ? json(*tp.surface_distance_m) : json(nullptr)},
                              {"frequencies_Hz", freq},
                              {"broadening_mK", tp.broadening_mK}});
        }
        levels.push_back({{"label", l < config.level_labels.size() ? config.level_labels[l] : std::string()},
                          {"dim", lr.dim},
                          {"sheets", sheets}});
    }
    const auto shape = result.grid.shape();
    return {{"config_hash", config.hash},
            {"grid_shape", {shape[0], shape[1], shape[2]}},
            {"analysis_axis", axis_names[config.analysis_axis]},
            {"levels", levels},
            {"warnings", config.warnings}};
}

void write_result(const TrapResult& result, const LoadedConfig& config, const json& summary, const fs::path& dir) {
    std::error_code ec;
    const fs::path tmp = dir.string() + ".tmp";
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp, ec);
    if (ec) throw IoError("cannot create result directory " + tmp.string() + ": " + ec.message());

    json levels = json::array();
    for (std::size_t l = 0; l < result.levels.size(); ++l)
        levels.push_back({{"label", config.level_labels[l]}, {"dim", result.levels[l].dim},
                          {"file", "potential_" + std::to_string(l) + ".bin"}});
    const json params = {{"format_version", kResultFormat},
                         {"hash", config.hash},
                         {"config", config.document},
                         {"canonical", config.canonical},
                         {"axes", {{"x", result.grid.x}, {"y", result.grid.y}, {"z", result.grid.z}}},
                         {"levels", levels},
                         {"units", "J"},
                         {"layout", "sheet-major [sheet][point], points x-major z fastest, float64 LE, NaN masked"}};
    auto write_text = [&](const fs::path& p, const std::string& s) {
        std::ofstream out(p);
        if (!out) throw IoError("cannot write " + p.string());
        out << s << '\n';
        if (!out) throw IoError("short write to " + p.string());
    };
    write_text(tmp / "params.json", params.dump(2));
    {
        std::ofstream out(tmp / "mask.bin", std::ios::binary);
        out.write(reinterpret_cast<const char*>(result.mask.data()), static_cast<std::streamsize>(result.mask.size()));
        if (!out) throw IoError("cannot write " + (tmp / "mask.bin").string());
    }
    const std::size_t n = result.grid.size();
    for (std::size_t l = 0; l < result.levels.size(); ++l) {
        const auto& lr = result.levels[l];
        std::vector<double> sheet_major(n * lr.dim);
        for (int k = 0; k < lr.dim; ++k)
            for (std::size_t i = 0; i < n; ++i) sheet_major[k * n + i] = lr.energy(i, k);
        binio::write_doubles(tmp / ("potential_" + std::to_string(l) + ".bin"), sheet_major);
    }
    write_text(tmp / "summary.json", summary.dump(2));

    fs::remove_all(dir, ec);
    fs::create_directories(dir.parent_path().empty() ? fs::path(".") : dir.parent_path(), ec);
    fs::rename(tmp, dir, ec);
    if (ec) throw IoError("cannot move result into " + dir.string() + ": " + ec.message());
}

TrapResult read_result(const fs::path& dir, const LoadedConfig& config) {
    json params;
    try {
        params = json::parse(slurp(dir / "params.json", "result metadata"));
    } catch (const json::exception& e) {
        throw IoError("corrupt result metadata in " + dir.string() + ": " + e.what());
    }
    TrapResult r;
    try {
        r.config_hash = params.at("hash").get<std::string>();
        r.grid.x = params.at("axes").at("x").get<std::vector<double>>();
        r.grid.y = params.at("axes").at("y").get<std::vector<double>>();
        r.grid.z = params.at("axes").at("z").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw IoError("corrupt result metadata in " + dir.string() + ": " + e.what());
    }
    if (r.config_hash != config.hash) throw IoError("stored result in " + dir.string() + " belongs to another config");
    const std::size_t n = r.grid.size();
    const std::string mask = slurp(dir / "mask.bin", "result mask");
    if (mask.size() != n) throw IoError("shape mismatch: mask.bin in " + dir.string());
    r.mask.assign(mask.begin(), mask.end());
    for (const auto& s : config.surfaces) r.surfaces.push_back(s.surface);
    for (std::size_t l = 0; l < config.levels.size(); ++l) {
        LevelResult lr;
        lr.level = config.levels[l];
        lr.dim = lr.level.f.twice() + 1;
        const auto sheet_major = binio::read_doubles(dir / ("potential_" + std::to_string(l) + ".bin"), n * lr.dim);
        lr.energy_J.resize(n * lr.dim);
        for (int k = 0; k < lr.dim; ++k)
            for (std::size_t i = 0; i < n; ++i) lr.energy_J[i * lr.dim + k] = sheet_major[k * n + i];
        r.levels.push_back(std::move(lr));
    }
    return r;
}

std::optional<fs::path> cache_lookup(const fs::path& cache_dir, const std::string& hash) {
    const fs::path d = cache_dir / hash;
    if (!fs::exists(d / "params.json") || !fs::exists(d / "summary.json")) return std::nullopt;
    try {
        const json params = json::parse(slurp(d / "params.json", "result metadata"));
        if (params.value("hash", std::string()) != hash) return std::nullopt;
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return d;
}

}  // namespace evatrap
