// evatrap-cli: simulate, scan, solve-nanofiber, inspect-field.
// Talks to the engine only through the C API.

#include <evatrap/evatrap.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

int exit_code(evatrap_status s) {
    switch (s) {
    case EVATRAP_OK: return 0;
    case EVATRAP_ERR_CONFIG:
    case EVATRAP_ERR_INVALID_ARGUMENT: return 2;
    case EVATRAP_ERR_PHYSICS: return 3;
    case EVATRAP_ERR_IO:
    case EVATRAP_ERR_NOT_FOUND: return 4;
    default: return 1;
    }
}

// Runs a C call that hands back a JSON string. Prints the error and returns
// the exit code on failure.
template <typename Fn>
int call(Fn&& fn, json& out) {
    char* text = nullptr;
    const evatrap_status s = fn(&text);
    if (s != EVATRAP_OK) {
        std::cerr << "error: " << evatrap_status_name(s) << ": " << evatrap_last_error() << '\n';
        return exit_code(s);
    }
    out = json::parse(text);
    evatrap_free_string(text);
    return 0;
}

std::string fmt(const json& v, double scale, int precision) {
    if (v.is_null()) return "-";
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(precision);
    s << v.get<double>() * scale;
    return s.str();
}

void print_summary(const json& summary) {
    std::printf("config hash %s\n", summary["config_hash"].get<std::string>().c_str());
    for (const auto& w : summary["warnings"]) std::printf("warning: %s\n", w.get<std::string>().c_str());
    std::printf("analysis axis %s\n", summary["analysis_axis"].get<std::string>().c_str());
    for (const auto& level : summary["levels"]) {
        std::printf("\n%s\n", level["label"].get<std::string>().c_str());
        std::printf("%5s %8s %10s %10s %12s %10s %10s %10s %12s\n", "sheet", "stable", "depth_mK", "min_mK",
                    "distance_nm", "f_x_kHz", "f_y_kHz", "f_z_kHz", "spread_mK");
        for (const auto& s : level["sheets"]) {
            const auto& f = s["frequencies_Hz"];
            std::printf("%5d %8s %10s %10s %12s %10s %10s %10s %12s\n", s["sheet"].get<int>(),
                        s["stable"].get<bool>() ? "yes" : "no", fmt(s["depth_mK"], 1, 4).c_str(),
                        fmt(s["minimum_mK"], 1, 4).c_str(), fmt(s["surface_distance_m"], 1e9, 1).c_str(),
                        fmt(f[0], 1e-3, 1).c_str(), fmt(f[1], 1e-3, 1).c_str(), fmt(f[2], 1e-3, 1).c_str(),
                        fmt(s["broadening_mK"], 1, 5).c_str());
        }
    }
}

// "min:max:n" or a single value, in nm
json axis_spec(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
    if (parts.size() == 1) return parts[0];
    if (parts.size() == 3) return {{"min", parts[0]}, {"max", parts[1]}, {"n", parts[2]}};
    throw CLI::ValidationError("axis '" + text + "' must be a value or min:max:n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optical dipole trap potentials for multilevel alkali atoms"};
    app.require_subcommand(1);
    app.set_version_flag("--version", evatrap_version());

    bool as_json = false;
    unsigned threads = 1;
    std::string data_dir;

    // simulate
    auto* sim = app.add_subcommand("simulate", "compute the trap of a config and print its properties");
    std::string config_path, export_fmt, cache_dir = ".evatrap-cache", out_dir;
    bool no_cache = false;
    sim->add_option("config", config_path, "config file")->required();
    sim->add_option("--threads", threads, "worker threads, 0 for all cores");
    sim->add_flag("--json", as_json, "machine-readable output");
    sim->add_option("--export", export_fmt, "also write plot data")->check(CLI::IsMember({"csv"}));
    sim->add_flag("--no-cache", no_cache, "ignore and do not fill the result cache");
    sim->add_option("--cache-dir", cache_dir, "result cache directory");
    sim->add_option("--out", out_dir, "also write the result to this directory");
    sim->add_option("--data-dir", data_dir, "atomic and material data directory");

    // scan
    auto* scan = app.add_subcommand("scan", "scan beam powers and report the best trap");
    std::string spec_path, scan_out = "evatrap-scan";
    scan->add_option("config", config_path, "config file")->required();
    scan->add_option("spec", spec_path, "scan spec file")->required();
    scan->add_option("--threads", threads, "worker threads, 0 for all cores");
    scan->add_flag("--json", as_json, "machine-readable output");
    scan->add_option("--out", scan_out, "output directory for scan.json and objective.bin");
    scan->add_option("--data-dir", data_dir, "atomic and material data directory");

    // solve-nanofiber
    auto* solve = app.add_subcommand("solve-nanofiber", "solve the fundamental fiber mode and write a field map");
    double radius_nm = 0, wavelength_nm = 0, power_mW = 1, pol_deg = 0, n_clad = 1.0;
    std::optional<double> n_core;
    std::string core_material, direction = "+z", x_axis = "0", y_axis = "0", z_axis = "0", solve_out;
    solve->add_option("--radius-nm", radius_nm, "fiber radius")->required();
    solve->add_option("--wavelength-nm", wavelength_nm, "vacuum wavelength")->required();
    auto* core_opt = solve->add_option("--n-core", n_core, "core refractive index");
    solve->add_option("--core-material", core_material, "core material name (data/materials)")->excludes(core_opt);
    solve->add_option("--n-clad", n_clad, "cladding refractive index");
    solve->add_option("--power-mW", power_mW, "guided power");
    solve->add_option("--polarization-deg", pol_deg, "quasi-linear polarization angle from x");
    solve->add_option("--direction", direction, "+z or -z");
    solve->add_option("--x-nm", x_axis, "x axis: value or min:max:n");
    solve->add_option("--y-nm", y_axis, "y axis: value or min:max:n");
    solve->add_option("--z-nm", z_axis, "z axis: value or min:max:n");
    solve->add_option("--out", solve_out, "field map directory")->required();
    solve->add_flag("--json", as_json, "machine-readable output");
    solve->add_option("--data-dir", data_dir, "material data directory");

    // inspect-field
    auto* inspect = app.add_subcommand("inspect-field", "print metadata of a field map directory");
    std::string field_dir;
    inspect->add_option("dir", field_dir, "field map directory")->required();
    inspect->add_flag("--json", as_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);

    json report;
    if (sim->parsed()) {
        json opt = {{"threads", threads}, {"no_cache", no_cache}, {"cache_dir", cache_dir}};
        if (!out_dir.empty()) opt["out_dir"] = out_dir;
        if (!export_fmt.empty()) opt["export"] = export_fmt;
        if (!data_dir.empty()) opt["data_dir"] = data_dir;
        const std::string o = opt.dump();
        if (int rc = call([&](char** r) { return evatrap_simulate(config_path.c_str(), o.c_str(), r); }, report))
            return rc;
        // status lines go to stderr so stdout stays identical between runs
        if (report["cache_hit"].get<bool>())
            std::cerr << "cache hit: " << report["result_dir"].get<std::string>() << '\n';
        else if (!report["result_dir"].is_null())
            std::cerr << "computed, stored in " << report["result_dir"].get<std::string>() << '\n';
        if (!report["export"].is_null()) std::cerr << "exported " << report["export"].get<std::string>() << '\n';
        if (as_json) std::cout << report["summary"].dump(2) << '\n';
        else print_summary(report["summary"]);
        return 0;
    }

    if (scan->parsed()) {
        json opt = {{"threads", threads}, {"out_dir", scan_out}};
        if (!data_dir.empty()) opt["data_dir"] = data_dir;
        const std::string o = opt.dump();
        if (int rc = call([&](char** r) { return evatrap_scan(config_path.c_str(), spec_path.c_str(), o.c_str(), r); },
                          report))
            return rc;
        if (as_json) {
            std::cout << report.dump(2) << '\n';
            return 0;
        }
        std::printf("scan of %s over", report["objective"].get<std::string>().c_str());
        for (std::size_t k = 0; k < report["sliders"].size(); ++k)
            std::printf(" %s (%zu)", report["sliders"][k].get<std::string>().c_str(),
                        report["shape"][k].get<std::size_t>());
        std::printf(", %zu of %zu stable\n", report["stable_points"].get<std::size_t>(),
                    report["total_points"].get<std::size_t>());
        if (report["argmax"].is_null()) {
            std::printf("no stable trap in range\n");
        } else {
            std::printf("argmax:");
            for (std::size_t k = 0; k < report["sliders"].size(); ++k)
                std::printf(" %s=%.6g mW", report["sliders"][k].get<std::string>().c_str(),
                            report["argmax"]["powers_W"][k].get<double>() * 1e3);
            std::printf(" value=%.6g\n", report["argmax"]["value"].get<double>());
        }
        std::printf("written to %s\n", report["out_dir"].get<std::string>().c_str());
        return 0;
    }

    if (solve->parsed()) {
        json params = {{"radius_nm", radius_nm},
                       {"wavelength_nm", wavelength_nm},
                       {"n_clad", n_clad},
                       {"power_mW", power_mW},
                       {"polarization_deg", pol_deg},
                       {"direction", direction}};
        if (n_core) params["n_core"] = *n_core;
        if (!core_material.empty()) params["core_material"] = core_material;
        if (!data_dir.empty()) params["data_dir"] = data_dir;
        try {
            params["geometry"] = {{"x_nm", axis_spec(x_axis)}, {"y_nm", axis_spec(y_axis)}, {"z_nm", axis_spec(z_axis)}};
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }
        const std::string p = params.dump();
        if (int rc = call([&](char** r) { return evatrap_solve_nanofiber(p.c_str(), solve_out.c_str(), r); }, report))
            return rc;
        if (as_json) {
            std::cout << report.dump(2) << '\n';
            return 0;
        }
        std::printf("beta        %.10g 1/m (n_eff %.8f)\n", report["beta_per_m"].get<double>(),
                    report["effective_index"].get<double>());
        std::printf("q           %.10g 1/m (decay length %.2f nm)\n", report["decay_constant_per_m"].get<double>(),
                    1e9 / report["decay_constant_per_m"].get<double>());
        std::printf("V           %.6f (%s)\n", report["v_parameter"].get<double>(),
                    report["single_mode"].get<bool>() ? "single mode" : "multimode");
        std::printf("residual    %.3g\n", report["residual"].get<double>());
        std::printf("power check %.10g W\n", report["integrated_power_W"].get<double>());
        for (const auto& w : report["warnings"]) std::printf("warning: %s\n", w.get<std::string>().c_str());
        std::printf("written to %s\n", report["out_dir"].get<std::string>().c_str());
        return 0;
    }

    if (inspect->parsed()) {
        if (int rc = call([&](char** r) { return evatrap_inspect_field(field_dir.c_str(), r); }, report)) return rc;
        if (as_json) {
            std::cout << report.dump(2) << '\n';
            return 0;
        }
        const auto& b = report["bounds_m"];
        std::printf("wavelength  %.6f nm\n", report["wavelength_m"].get<double>() * 1e9);
        std::printf("P_ref       %.6g W\n", report["P_ref_W"].get<double>());
        std::printf("direction   %s%s\n", report["direction"].get<std::string>().c_str(),
                    report["translation_invariant"].get<bool>() ? " (translation invariant)" : "");
        std::printf("shape       %zu x %zu x %zu\n", report["shape"][0].get<std::size_t>(),
                    report["shape"][1].get<std::size_t>(), report["shape"][2].get<std::size_t>());
        for (int a = 0; a < 3; ++a)
            std::printf("%c           [%.2f, %.2f] nm\n", "xyz"[a], b[a][0].get<double>() * 1e9, b[a][1].get<double>() * 1e9);
        std::printf("max |E+|    %.6g V/m\n", report["max_abs_E_V_per_m"].get<double>());
        return 0;
    }
    return 0;
}
