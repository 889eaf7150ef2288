#pragma once

#include "evatrap/engine.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace evatrap {

enum class Objective { depth, frequency, distance };

std::string to_string(Objective o);
/// "depth", "frequency" or "distance"; throws ConfigError otherwise.
Objective objective_from_string(const std::string& s);

struct ScanParameter {
    std::size_t slider = 0;  ///< index into TrapModel::sliders()
    double min_W = 0.0;
    double max_W = 0.0;
    std::size_t steps = 1;

    std::vector<double> values() const;
};

struct ScanSpec {
    std::vector<ScanParameter> parameters;  ///< one or two
    Objective objective = Objective::depth;
    /// Axes entering the frequency objective (geometric mean); empty means
    /// the trapping axis.
    std::vector<int> frequency_axes;
    std::size_t level = 0;
    int sheet = 0;
    int axis = 0;  ///< trapping axis; the scan runs along the grid line through `through`
    Eigen::Vector3d through = Eigen::Vector3d::Zero();
    /// Values of the sliders that are not scanned; empty keeps the defaults.
    std::vector<double> fixed;

    /// Throws ConfigError when the spec does not fit the model.
    void validate(const TrapModel& model) const;
};

struct ScanResult {
    ScanSpec spec;
    std::vector<std::string> names;         ///< scanned slider names
    std::vector<std::vector<double>> axes;  ///< power values per parameter, W
    /// Row-major, first parameter slowest. Depth in mK (0 when unstable),
    /// frequency in Hz, distance in m; NaN where unavailable.
    std::vector<double> values;
    std::vector<std::uint8_t> stable;
    /// Best available point; ties go to the lowest first, then second power.
    std::optional<std::array<std::size_t, 2>> argmax;

    std::size_t flat(std::size_t i, std::size_t j) const {
        return axes.size() > 1 ? i * axes[1].size() + j : i;
    }
};

/// Exhaustive scan. Only the line along the trapping axis is diagonalized;
/// every tuple is a fresh compute_trap + trap_properties on that line, so the
/// map equals direct evaluation exactly.
ScanResult power_scan(const TrapModel& model, const ScanSpec& spec, double mass_kg, unsigned threads = 1);

/// Objective of one properties record under a spec (NaN when unavailable).
double objective_value(const TrapProperties& tp, const ScanSpec& spec);

/// scan.json (spec echo, axes, argmax) and objective.bin (float64 LE).
void write_scan(const ScanResult& result, const std::filesystem::path& dir);

}  // namespace evatrap
