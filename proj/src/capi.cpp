#include "evatrap/evatrap.h"

#include "evatrap/config.hpp"
#include "evatrap/engine.hpp"
#include "evatrap/error.hpp"
#include "evatrap/optimizer.hpp"
#include "binio.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

using nlohmann::json;
namespace fs = std::filesystem;
using namespace evatrap;

struct evatrap_model {
    LoadedConfig config;
    std::unique_ptr<TrapModel> model;
};

struct evatrap_result {
    const evatrap_model* owner = nullptr;  // decompositions recompute from it; free results first
    LoadedConfig config;                   // only the parts summarize() reads
    Powers powers;
    TrapResult result;
};

namespace {

thread_local std::string last_error;

evatrap_status status_of(ErrorKind k) {
    switch (k) {
    case ErrorKind::config: return EVATRAP_ERR_CONFIG;
    case ErrorKind::physics: return EVATRAP_ERR_PHYSICS;
    case ErrorKind::io: return EVATRAP_ERR_IO;
    case ErrorKind::not_found: return EVATRAP_ERR_NOT_FOUND;
    case ErrorKind::invalid_argument: return EVATRAP_ERR_INVALID_ARGUMENT;
    }
    return EVATRAP_ERR_INTERNAL;
}

template <typename Fn>
evatrap_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return EVATRAP_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const json::exception& e) {
        last_error = std::string("malformed JSON argument: ") + e.what();
        return EVATRAP_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return EVATRAP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return EVATRAP_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_options(const char* options_json) {
    if (!options_json || !*options_json) return json::object();
    json o = json::parse(options_json);
    if (!o.is_object()) throw InvalidArgument("options must be a JSON object");
    return o;
}

ConfigPaths paths_from(const json& options) {
    ConfigPaths p;
    if (options.contains("data_dir") && options["data_dir"].is_string()) p.data_dir = options["data_dir"].get<std::string>();
    return p;
}

unsigned threads_from(const json& options) {
    if (!options.contains("threads")) return 1;
    const long long t = options["threads"].get<long long>();
    if (t < 0) throw InvalidArgument("threads must be >= 0");
    return static_cast<unsigned>(t);
}

json grid_json(const Grid& g) { return {{"x", g.x}, {"y", g.y}, {"z", g.z}}; }

// Stored eigenvectors when the result has them, else one point recomputed from
// the model. The potentials themselves always come from the stored result.
json decomposition_json(const evatrap_result& er, std::size_t level, std::size_t point, int sheet) {
    const TrapResult& r = er.result;
    if (level >= r.levels.size()) throw InvalidArgument("level index out of range");
    if (point >= r.grid.size()) throw InvalidArgument("point index outside the grid");
    const auto d = r.levels[level].eigenvectors.empty()
                       ? eigenstate_decomposition(*er.owner->model, er.powers, level, point, sheet)
                       : eigenstate_decomposition(r, level, point, sheet);
    json w = json::array();
    for (const auto& [m, weight] : d.weights) w.push_back({{"m_F", m}, {"weight", weight}});
    const auto p = r.grid.point(point);
    return {{"level", level},
            {"point", point},
            {"sheet", sheet},
            {"position_m", {p(0), p(1), p(2)}},
            {"energy_mK", r.energy_mK(level, point, sheet)},
            {"degenerate", d.degenerate},
            {"weights", w}};
}

void write_csv(const TrapResult& r, const LoadedConfig& cfg, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    out << "x_m,y_m,z_m,masked";
    for (std::size_t l = 0; l < r.levels.size(); ++l)
        for (int k = 0; k < r.levels[l].dim; ++k) out << ',' << cfg.level_labels[l] << " sheet " << k << " [mK]";
    out << '\n';
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        const auto p = r.grid.point(i);
        out << p(0) << ',' << p(1) << ',' << p(2) << ',' << int(r.mask[i]);
        for (std::size_t l = 0; l < r.levels.size(); ++l)
            for (int k = 0; k < r.levels[l].dim; ++k) {
                out << ',';
                const double v = r.energy_mK(l, i, k);
                if (std::isfinite(v)) out << v;
            }
        out << '\n';
    }
    if (!out) throw IoError("short write to " + path.string());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

extern "C" {

const char* evatrap_version(void) { return "0.1.0"; }

const char* evatrap_last_error(void) { return last_error.c_str(); }

const char* evatrap_status_name(evatrap_status s) {
    switch (s) {
    case EVATRAP_OK: return "ok";
    case EVATRAP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EVATRAP_ERR_CONFIG: return "config error";
    case EVATRAP_ERR_PHYSICS: return "physics error";
    case EVATRAP_ERR_IO: return "I/O error";
    case EVATRAP_ERR_NOT_FOUND: return "not found";
    case EVATRAP_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

void evatrap_free_string(char* s) { std::free(s); }

evatrap_status evatrap_model_load(const char* config_path, const char* data_dir, evatrap_model** out) {
    return guarded([&] {
        require(config_path && out, "config path and output handle are required");
        *out = nullptr;
        ConfigPaths paths;
        if (data_dir) paths.data_dir = data_dir;
        auto m = std::make_unique<evatrap_model>();
        m->config = load_config(config_path, paths);
        m->model = std::make_unique<TrapModel>(m->config.trap, m->config.system, m->config.surfaces, m->config.levels);
        *out = m.release();
    });
}

evatrap_status evatrap_model_parse(const char* config_json, const char* base_dir, const char* data_dir,
                                   evatrap_model** out) {
    return guarded([&] {
        require(config_json && out, "config text and output handle are required");
        *out = nullptr;
        ConfigPaths paths;
        if (base_dir) paths.base_dir = base_dir;
        if (data_dir) paths.data_dir = data_dir;
        auto m = std::make_unique<evatrap_model>();
        m->config = parse_config(config_json, paths);
        m->model = std::make_unique<TrapModel>(m->config.trap, m->config.system, m->config.surfaces, m->config.levels);
        *out = m.release();
    });
}

void evatrap_model_free(evatrap_model* model) { delete model; }

evatrap_status evatrap_model_info(const evatrap_model* m, char** json_out) {
    return guarded([&] {
        require(m && json_out, "model and output are required");
        json sliders = json::array();
        for (const auto& s : m->model->sliders())
            sliders.push_back({{"name", s.name}, {"default_W", s.default_W}, {"max_W", s.max_W}});
        json levels = json::array();
        for (std::size_t l = 0; l < m->model->level_count(); ++l)
            levels.push_back({{"label", m->config.level_labels[l]}, {"dim", m->model->dim(l)}});
        const auto shape = m->model->grid().shape();
        const json info = {{"hash", m->config.hash},
                           {"grid", grid_json(m->model->grid())},
                           {"shape", {shape[0], shape[1], shape[2]}},
                           {"levels", levels},
                           {"sliders", sliders},
                           {"analysis_axis", std::string(1, "xyz"[m->config.analysis_axis])},
                           {"warnings", m->config.warnings}};
        *json_out = dup_string(info.dump());
    });
}

size_t evatrap_model_slider_count(const evatrap_model* m) { return m ? m->model->sliders().size() : 0; }

evatrap_status evatrap_model_compute(const evatrap_model* m, const double* slider_W, size_t count, unsigned threads,
                                     int eigenvectors, evatrap_result** out) {
    return guarded([&] {
        require(m && out, "model and output handle are required");
        require(count == 0 || slider_W, "slider values missing");
        *out = nullptr;
        Powers p = count == 0 ? m->model->default_powers()
                              : m->model->powers_from_sliders(std::span<const double>(slider_W, count));
        auto r = std::make_unique<evatrap_result>();
        r->owner = m;
        r->config.hash = m->config.hash;
        r->config.system.mass_kg = m->config.system.mass_kg;
        r->config.level_labels = m->config.level_labels;
        r->config.analysis_axis = m->config.analysis_axis;
        r->config.warnings = m->config.warnings;
        r->result = compute_trap(*m->model, p, {threads, eigenvectors != 0});
        r->powers = std::move(p);
        r->result.config_hash = m->config.hash;
        *out = r.release();
    });
}

void evatrap_result_free(evatrap_result* r) { delete r; }

size_t evatrap_result_point_count(const evatrap_result* r) { return r ? r->result.grid.size() : 0; }

evatrap_status evatrap_result_summary(const evatrap_result* r, char** json_out) {
    return guarded([&] {
        require(r && json_out, "result and output are required");
        *json_out = dup_string(summarize(r->result, r->config).dump());
    });
}

evatrap_status evatrap_result_sheet(const evatrap_result* r, size_t level, int sheet, double* out_mK, size_t n) {
    return guarded([&] {
        require(r && out_mK, "result and output buffer are required");
        require(n == r->result.grid.size(), "buffer size must equal the point count");
        require(level < r->result.levels.size(), "level index out of range");
        require(sheet >= 0 && sheet < r->result.levels[level].dim, "sheet index out of range");
        for (std::size_t i = 0; i < n; ++i) out_mK[i] = r->result.energy_mK(level, i, sheet);
    });
}

evatrap_status evatrap_result_mask(const evatrap_result* r, unsigned char* out, size_t n) {
    return guarded([&] {
        require(r && out, "result and output buffer are required");
        require(n == r->result.grid.size(), "buffer size must equal the point count");
        std::memcpy(out, r->result.mask.data(), n);
    });
}

evatrap_status evatrap_result_decomposition(const evatrap_result* r, size_t level, size_t point, int sheet,
                                            char** json_out) {
    return guarded([&] {
        require(r && json_out, "result and output are required");
        *json_out = dup_string(decomposition_json(*r, level, point, sheet).dump());
    });
}

evatrap_status evatrap_result_payload(const evatrap_result* r, char** json_out) {
    return guarded([&] {
        require(r && json_out, "result and output are required");
        const auto& res = r->result;
        const json summary = summarize(res, r->config);
        json levels = json::array();
        const std::size_t n = res.grid.size();
        for (std::size_t l = 0; l < res.levels.size(); ++l) {
            const auto& lr = res.levels[l];
            json sheets = json::array();
            for (int k = 0; k < lr.dim; ++k) {
                std::vector<double> mk(n);
                for (std::size_t i = 0; i < n; ++i) mk[i] = res.energy_mK(l, i, k);
                const auto bytes = binio::encode(mk);
                const auto& props = summary["levels"][l]["sheets"][k];
                json entry = {{"sheet", k}, {"potential_mK_b64", base64_encode({bytes.data(), bytes.size()})},
                              {"properties", props}};
                const std::size_t at = props["index"].get<std::size_t>();
                entry["decomposition"] = res.mask[at] ? json(nullptr) : decomposition_json(*r, l, at, k);
                sheets.push_back(entry);
            }
            levels.push_back({{"label", r->config.level_labels[l]}, {"dim", lr.dim}, {"sheets", sheets}});
        }
        const std::string mask(res.mask.begin(), res.mask.end());
        const json payload = {{"config_hash", r->config.hash},
                              {"grid", grid_json(res.grid)},
                              {"dtype", "float64-le"},
                              {"mask_b64", base64_encode(mask)},
                              {"summary", summary},
                              {"levels", levels}};
        *json_out = dup_string(payload.dump());
    });
}

evatrap_status evatrap_simulate(const char* config_path, const char* options_json, char** report_json) {
    return guarded([&] {
        require(config_path && report_json, "config path and report output are required");
        *report_json = nullptr;
        const json opt = parse_options(options_json);
        const unsigned threads = threads_from(opt);
        const bool no_cache = opt.value("no_cache", false);
        const fs::path cache_dir = opt.value("cache_dir", std::string(".evatrap-cache"));
        const std::string out_dir = opt.value("out_dir", std::string());
        const std::string export_fmt = opt.contains("export") && opt["export"].is_string() ? opt["export"].get<std::string>() : "";
        if (!export_fmt.empty() && export_fmt != "csv") throw InvalidArgument("unsupported export format '" + export_fmt + "'");

        const ConfigPaths paths = paths_from(opt);
        json report = {{"cache_hit", false}, {"result_dir", nullptr}, {"export", nullptr}};
        LoadedConfig light = load_config(config_path, paths, false);
        const fs::path export_path = out_dir.empty() ? fs::path(fs::path(config_path).stem().string() + ".csv")
                                                     : fs::path(out_dir) / "potential.csv";

        std::optional<fs::path> hit;
        if (!no_cache) hit = cache_lookup(cache_dir, light.hash);
        json summary;
        fs::path result_dir;
        if (hit) {
            report["cache_hit"] = true;
            result_dir = *hit;
            summary = json::parse(slurp(*hit / "summary.json"));
            if (!out_dir.empty() && fs::path(out_dir) != *hit) {
                std::error_code ec;
                fs::remove_all(out_dir, ec);
                fs::copy(*hit, out_dir, fs::copy_options::recursive, ec);
                if (ec) throw IoError("cannot copy cached result to " + out_dir + ": " + ec.message());
                result_dir = out_dir;
            }
            if (export_fmt == "csv") write_csv(read_result(result_dir, light), light, export_path);
        } else {
            const LoadedConfig cfg = load_config(config_path, paths, true);
            const TrapModel model(cfg.trap, cfg.system, cfg.surfaces, cfg.levels);
            TrapResult r = compute_trap(model, model.default_powers(), {threads, false});
            r.config_hash = cfg.hash;
            summary = summarize(r, cfg);
            if (!no_cache) {
                result_dir = cache_dir / cfg.hash;
                write_result(r, cfg, summary, result_dir);
            }
            if (!out_dir.empty()) {
                write_result(r, cfg, summary, out_dir);
                result_dir = out_dir;
            }
            if (export_fmt == "csv") write_csv(r, cfg, export_path);
        }
        if (!result_dir.empty()) report["result_dir"] = result_dir.string();
        if (export_fmt == "csv") report["export"] = export_path.string();
        report["summary"] = summary;
        *report_json = dup_string(report.dump());
    });
}

evatrap_status evatrap_scan(const char* config_path, const char* spec_path, const char* options_json,
                            char** report_json) {
    return guarded([&] {
        require(config_path && spec_path && report_json, "config, spec and report output are required");
        *report_json = nullptr;
        const json opt = parse_options(options_json);
        const LoadedConfig cfg = load_config(config_path, paths_from(opt));
        const TrapModel model(cfg.trap, cfg.system, cfg.surfaces, cfg.levels);
        const ScanSpec spec = parse_scan_spec(slurp(spec_path), model, cfg);
        const ScanResult r = power_scan(model, spec, cfg.system.mass_kg, threads_from(opt));
        const fs::path out = opt.value("out_dir", std::string("evatrap-scan"));
        write_scan(r, out);

        std::size_t stable = 0;
        for (auto s : r.stable) stable += s;
        json report = {{"out_dir", out.string()},
                       {"objective", to_string(spec.objective)},
                       {"sliders", r.names},
                       {"stable_points", stable},
                       {"total_points", r.values.size()}};
        json shape = json::array();
        for (const auto& a : r.axes) shape.push_back(a.size());
        report["shape"] = shape;
        if (r.argmax) {
            const auto [i, j] = *r.argmax;
            json powers = json::array();
            powers.push_back(r.axes[0][i]);
            if (r.axes.size() > 1) powers.push_back(r.axes[1][j]);
            report["argmax"] = {{"powers_W", powers}, {"value", r.values[r.flat(i, j)]}};
        } else {
            report["argmax"] = nullptr;
        }
        *report_json = dup_string(report.dump());
    });
}

evatrap_status evatrap_solve_nanofiber(const char* params_json, const char* out_dir, char** report_json) {
    return guarded([&] {
        require(params_json && out_dir && report_json, "parameters, output directory and report are required");
        *report_json = nullptr;
        const json p = json::parse(params_json);
        auto num = [&](const char* key) {
            if (!p.contains(key) || !p[key].is_number()) throw ConfigError(std::string("missing numeric '") + key + "'");
            return p[key].get<double>();
        };
        NanofiberParams np;
        np.radius_m = num("radius_nm") * 1e-9;
        np.wavelength_m = num("wavelength_nm") * 1e-9;
        const double omega = 2 * units::pi * units::c / np.wavelength_m;
        auto index = [&](const char* number, const char* material, double fallback) {
            if (p.contains(number)) return num(number);
            if (!p.contains(material)) return fallback;
            const std::string name = p[material].get<std::string>();
            const fs::path dir = p.contains("data_dir") ? fs::path(p["data_dir"].get<std::string>()) : default_data_dir();
            const fs::path file = dir / "materials" / (name + ".json");
            if (!fs::exists(file)) throw ConfigError("unknown material '" + name + "'");
            return load_material(file).refractive_index(omega);
        };
        np.n_core = index("n_core", "core_material", std::nan(""));
        if (!std::isfinite(np.n_core)) throw ConfigError("give n_core or core_material");
        np.n_clad = index("n_clad", "clad_material", 1.0);
        np.polarization_angle = p.value("polarization_deg", 0.0) * units::pi / 180;
        np.direction = direction_from_string(p.value("direction", std::string("+z")));
        if (!(np.radius_m > 0) || !(np.wavelength_m > 0)) throw ConfigError("radius and wavelength must be positive");
        const double power = num("power_mW") * 1e-3;
        if (!(power > 0)) throw ConfigError("power must be positive");
        if (!p.contains("geometry")) throw ConfigError("missing 'geometry'");
        // same axis syntax as the config geometry block
        Grid g;
        auto axis = [&](const char* key) -> std::vector<double> {
            const auto& a = p["geometry"].at(key);
            if (a.is_number()) return {a.get<double>() * 1e-9};
            if (a.is_array()) {
                std::vector<double> v;
                for (const auto& x : a) v.push_back(x.get<double>() * 1e-9);
                return v;
            }
            const auto n = a.at("n").get<std::size_t>();
            if (n == 1) return {a.at("min").get<double>() * 1e-9};
            return Grid::linspace(a.at("min").get<double>() * 1e-9, a.at("max").get<double>() * 1e-9, n);
        };
        try {
            g = {axis("x_nm"), axis("y_nm"), axis("z_nm")};
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad geometry: ") + e.what());
        }
        g.validate();
        const NanofiberMode mode(np, power);
        std::vector<std::string> warnings;
        const FieldMap map = solve_nanofiber_mode(np, g, power, &warnings);
        write_fieldmap(map, out_dir);
        const auto shape = g.shape();
        const json report = {{"out_dir", out_dir},
                             {"beta_per_m", mode.beta()},
                             {"effective_index", mode.beta() / mode.k()},
                             {"decay_constant_per_m", mode.q()},
                             {"v_parameter", mode.v_parameter()},
                             {"single_mode", mode.single_mode()},
                             {"residual", mode.residual()},
                             {"integrated_power_W", mode.integrated_power()},
                             {"shape", {shape[0], shape[1], shape[2]}},
                             {"warnings", warnings}};
        *report_json = dup_string(report.dump());
    });
}

evatrap_status evatrap_inspect_field(const char* dir, char** report_json) {
    return guarded([&] {
        require(dir && report_json, "directory and report output are required");
        *report_json = nullptr;
        const FieldMap map = read_fieldmap(dir);
        double peak = 0;
        std::size_t at = 0;
        for (std::size_t i = 0; i < map.e_plus.size(); ++i)
            if (map.e_plus[i].norm() > peak) {
                peak = map.e_plus[i].norm();
                at = i;
            }
        const auto shape = map.grid.shape();
        const auto p = map.grid.point(at);
        json bounds = json::array();
        for (int a = 0; a < 3; ++a) bounds.push_back({map.grid.axis(a).front(), map.grid.axis(a).back()});
        const json report = {{"dir", dir},
                             {"wavelength_m", map.wavelength_m},
                             {"P_ref_W", map.p_ref_W},
                             {"direction", to_string(map.direction)},
                             {"translation_invariant", map.translation_invariant},
                             {"shape", {shape[0], shape[1], shape[2]}},
                             {"bounds_m", bounds},
                             {"max_abs_E_V_per_m", peak},
                             {"max_at_m", {p(0), p(1), p(2)}}};
        *report_json = dup_string(report.dump());
    });
}

}  // extern "C"
