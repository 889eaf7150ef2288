#pragma once

#include "evatrap/engine.hpp"
#include "evatrap/optimizer.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace evatrap {

/// A parsed simulation config with every referenced file resolved.
struct LoadedConfig {
    nlohmann::json document;  ///< as given
    /// Canonical form: sorted keys, numbers as doubles, plus the SHA-256 of
    /// every data file the run reads (atom data, materials, field maps).
    nlohmann::json canonical;
    std::string hash;  ///< SHA-256 hex of canonical.dump()

    AtomicSystem system;
    TrapConfig trap;
    std::vector<SurfaceTerm> surfaces;
    std::vector<LevelSelection> levels;
    std::vector<std::string> level_labels;  ///< "6S1/2 F=4"
    int analysis_axis = 0;                  ///< trapping axis for the summary
    std::vector<std::string> warnings;
};

struct ConfigPaths {
    /// Relative paths in the document are tried against this directory first.
    std::filesystem::path base_dir = ".";
    /// Fallback for atom data and named materials. Empty: $EVATRAP_DATA_DIR,
    /// then the data directory of the source tree.
    std::filesystem::path data_dir;
};

/// Throws ConfigError for malformed or inconsistent documents, IoError for
/// missing files or field data, PhysicsError for resonant wavelengths or
/// failed mode solves. With build = false only the document is validated and
/// hashed: no field maps are read or solved and no C3 is integrated.
LoadedConfig load_config(const std::filesystem::path& path, ConfigPaths paths = {}, bool build = true);
LoadedConfig parse_config(const std::string& json_text, const ConfigPaths& paths, bool build = true);

std::filesystem::path default_data_dir();

std::string sha256_hex(const std::string& bytes);
std::string base64_encode(std::string_view bytes);
/// Throws InvalidArgument on malformed input.
std::string base64_decode(std::string_view text);

/// Canonical serialization used for hashing: sorted keys, every number
/// written as a double.
std::string canonical_dump(const nlohmann::json& doc);

/// Scan spec document:
///   {"parameters": [{"slider": "red", "min_mW": 0, "max_mW": 5, "steps": 21}, ...],
///    "objective": "depth", "level": 0, "sheet": 0, "axis": "x",
///    "through_nm": [0, 0, 0], "frequency_axes": ["x"], "fixed_mW": {"blue": 25}}
ScanSpec parse_scan_spec(const std::string& json_text, const TrapModel& model, const LoadedConfig& config);

int axis_from_string(const std::string& s);

//------------------------------------------------------------------------------
// Results: summary, persistence and cache

/// Trap properties of every sheet of every level, plus the config hash.
/// The single source of the numbers printed by the CLI and served over HTTP.
nlohmann::json summarize(const TrapResult& result, const LoadedConfig& config);

/// Directory with params.json, mask.bin (uint8), potential_<level>.bin
/// (float64 LE, J, sheet-major: [sheet][point]) and summary.json.
void write_result(const TrapResult& result, const LoadedConfig& config, const nlohmann::json& summary,
                  const std::filesystem::path& dir);

/// Reads a stored result (energies, mask, grid, surfaces) back.
TrapResult read_result(const std::filesystem::path& dir, const LoadedConfig& config);

/// Cached result directory for a hash, if it exists and is complete.
std::optional<std::filesystem::path> cache_lookup(const std::filesystem::path& cache_dir, const std::string& hash);

}  // namespace evatrap
