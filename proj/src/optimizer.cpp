#include "evatrap/optimizer.hpp"
#include "evatrap/error.hpp"
#include "binio.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace evatrap {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json optional_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string to_string(Objective o) {
    switch (o) {
    case Objective::depth: return "depth";
    case Objective::frequency: return "frequency";
    case Objective::distance: return "distance";
    }
    return "depth";
}

Objective objective_from_string(const std::string& s) {
    if (s == "depth") return Objective::depth;
    if (s == "frequency") return Objective::frequency;
    if (s == "distance") return Objective::distance;
    throw ConfigError("unknown objective '" + s + "' (expected depth, frequency or distance)");
}

std::vector<double> ScanParameter::values() const {
    if (steps == 1) return {min_W};
    std::vector<double> v = Grid::linspace(min_W, max_W, steps);
    v.back() = max_W;
    return v;
}

void ScanSpec::validate(const TrapModel& model) const {
    if (parameters.empty() || parameters.size() > 2)
        throw ConfigError("a scan takes one or two power parameters");
    for (const auto& p : parameters) {
        if (p.slider >= model.sliders().size()) throw ConfigError("scan parameter names an unknown slider");
        if (!std::isfinite(p.min_W) || !std::isfinite(p.max_W) || p.min_W < 0 || p.max_W < p.min_W)
            throw ConfigError("scan range for '" + model.sliders()[p.slider].name +
                              "' must satisfy 0 <= min <= max");
        if (p.steps == 0) throw ConfigError("scan step count must be at least 1");
    }
    if (parameters.size() == 2 && parameters[0].slider == parameters[1].slider)
        throw ConfigError("the two scan parameters must be different sliders");
    if (level >= model.level_count()) throw ConfigError("scan level index out of range");
    if (sheet < 0 || sheet >= model.dim(level)) throw ConfigError("scan sheet index out of range");
    if (axis < 0 || axis > 2) throw ConfigError("scan axis must be x, y or z");
    if (model.grid().axis(axis).size() < 3) throw ConfigError("scan axis has fewer than 3 grid points");
    for (int a : frequency_axes)
        if (a < 0 || a > 2) throw ConfigError("frequency axis must be x, y or z");
    if (!fixed.empty() && fixed.size() != model.sliders().size())
        throw ConfigError("fixed slider values must list every slider");
}

double objective_value(const TrapProperties& tp, const ScanSpec& spec) {
    switch (spec.objective) {
    case Objective::depth: return tp.depth_mK;
    case Objective::distance:
        return tp.stable && tp.surface_distance_m ? *tp.surface_distance_m : kNaN;
    case Objective::frequency: {
        if (!tp.stable) return kNaN;
        std::vector<int> axes = spec.frequency_axes;
        if (axes.empty()) axes.push_back(spec.axis);
        double log_sum = 0;
        int count = 0;
        for (int a : axes)
            if (tp.frequency_Hz[a]) {
                log_sum += std::log(*tp.frequency_Hz[a]);
                ++count;
            }
        return count ? std::exp(log_sum / count) : kNaN;
    }
    }
    return kNaN;
}

ScanResult power_scan(const TrapModel& model, const ScanSpec& spec, double mass_kg, unsigned threads) {
    spec.validate(model);
    const TrapModel line = model.line(spec.axis, spec.through, {spec.level});

    ScanResult r;
    r.spec = spec;
    for (const auto& p : spec.parameters) {
        r.names.push_back(model.sliders()[p.slider].name);
        r.axes.push_back(p.values());
    }
    const std::size_t n0 = r.axes[0].size(), n1 = r.axes.size() > 1 ? r.axes[1].size() : 1;
    r.values.assign(n0 * n1, kNaN);
    r.stable.assign(n0 * n1, 0);

    std::vector<double> base = spec.fixed;
    if (base.empty())
        for (const auto& s : model.sliders()) base.push_back(s.default_W);

    parallel_chunks(n0 * n1, threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> sliders = base;
        for (std::size_t k = lo; k < hi; ++k) {
            sliders[spec.parameters[0].slider] = r.axes[0][k / n1];
            if (r.axes.size() > 1) sliders[spec.parameters[1].slider] = r.axes[1][k % n1];
            const TrapResult res = compute_trap(line, line.powers_from_sliders(sliders));
            const TrapProperties tp = trap_properties(res, 0, spec.sheet, spec.axis, mass_kg);
            r.values[k] = objective_value(tp, spec);
            r.stable[k] = tp.stable;
        }
    });

    for (std::size_t k = 0; k < r.values.size(); ++k) {
        if (!r.stable[k] || !std::isfinite(r.values[k])) continue;
        if (!r.argmax || r.values[k] > r.values[r.flat((*r.argmax)[0], (*r.argmax)[1])])
            r.argmax = std::array<std::size_t, 2>{k / n1, k % n1};
    }
    return r;
}

void write_scan(const ScanResult& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create scan directory " + dir.string() + ": " + ec.message());

    static const char* axis_names[] = {"x", "y", "z"};
    const char* unit = r.spec.objective == Objective::depth ? "mK" : r.spec.objective == Objective::frequency ? "Hz" : "m";
    json params = json::array();
    for (std::size_t k = 0; k < r.axes.size(); ++k)
        params.push_back({{"slider", r.names[k]},
                          {"min_W", r.spec.parameters[k].min_W},
                          {"max_W", r.spec.parameters[k].max_W},
                          {"steps", r.spec.parameters[k].steps},
                          {"values_W", r.axes[k]}});
    json freq_axes = json::array();
    for (int a : r.spec.frequency_axes) freq_axes.push_back(axis_names[a]);
    json doc = {{"format_version", 1},
                {"objective", to_string(r.spec.objective)},
                {"unit", unit},
                {"level", r.spec.level},
                {"sheet", r.spec.sheet},
                {"axis", axis_names[r.spec.axis]},
                {"through_m", {r.spec.through(0), r.spec.through(1), r.spec.through(2)}},
                {"frequency_axes", freq_axes},
                {"parameters", params},
                {"shape", json::array()},
                {"dtype", "float64-le"},
                {"unavailable", "NaN"}};
    for (const auto& a : r.axes) doc["shape"].push_back(a.size());
    if (r.argmax) {
        const auto [i, j] = *r.argmax;
        json powers = json::array();
        powers.push_back(r.axes[0][i]);
        if (r.axes.size() > 1) powers.push_back(r.axes[1][j]);
        doc["argmax"] = {{"index", r.axes.size() > 1 ? json{i, j} : json{i}},
                         {"powers_W", powers},
                         {"value", optional_number(r.values[r.flat(i, j)])}};
    } else {
        doc["argmax"] = nullptr;
    }
    std::ofstream out(dir / "scan.json");
    if (!out) throw IoError("cannot write " + (dir / "scan.json").string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("short write to " + (dir / "scan.json").string());
    binio::write_doubles(dir / "objective.bin", r.values);
}

}  // namespace evatrap
