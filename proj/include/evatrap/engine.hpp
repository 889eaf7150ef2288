#pragma once

#include "evatrap/atomdata.hpp"
#include "evatrap/fields.hpp"
#include "evatrap/polarizability.hpp"
#include "evatrap/stark.hpp"
#include "evatrap/surfaces.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace evatrap {

/// (level index, F) of one Zeeman manifold to evaluate.
struct LevelSelection {
    std::size_t level = 0;
    HalfInteger f;
};

/// One coherent field source: a single beam or a counterpropagating pair.
struct BeamSource {
    std::string name;
    std::variant<Beam, BeamPair> beam;
    /// Pairs normally share one power slider; split gives each member its own.
    bool split = false;
    /// Upper end of the slider range (W); 0 picks 4x the configured power.
    double max_power_W = 0.0;
};

struct TrapConfig {
    std::vector<BeamSource> beams;
    Eigen::Vector3d quantization_axis = Eigen::Vector3d::UnitZ();
    PolarizabilityOptions polarizability;
};

/// A surface with its C3 coefficient for every requested level (J m^3).
struct SurfaceTerm {
    Surface surface;
    std::vector<double> c3;
};

/// Member powers of one source. `backward` is ignored for single beams.
struct SourcePower {
    double forward = 0.0;
    double backward = 0.0;
};
using Powers = std::vector<SourcePower>;

struct Slider {
    enum class Member { both, forward, backward };
    std::string name;
    std::size_t source = 0;
    Member member = Member::both;
    double default_W = 0.0;
    double max_W = 0.0;
};

struct ComputeOptions {
    unsigned threads = 1;  ///< 0: hardware concurrency
    bool eigenvectors = false;
};

/// Eigen-decomposition of every requested manifold on every grid point.
/// Sheet k at a point is the k-th eigenvalue in ascending order.
struct LevelResult {
    LevelSelection level;
    int dim = 0;
    std::vector<double> energy_J;  ///< [point * dim + sheet], NaN where masked
    /// [(point * dim + sheet) * dim + m], component m along |m_F = -F + m>.
    /// Empty unless eigenvectors were requested.
    std::vector<Complex> eigenvectors;
    /// Set when a sheet's eigenvector has overlap below 0.5 with the matching
    /// eigenspace at a lower-index neighbour. Empty without eigenvectors.
    std::vector<std::uint8_t> crossing;

    double energy(std::size_t point, int sheet) const { return energy_J[point * dim + sheet]; }
};

struct TrapResult {
    Grid grid;
    std::vector<std::uint8_t> mask;  ///< 1 inside material or closer than kCpMinDistance
    std::vector<LevelResult> levels;
    std::vector<Surface> surfaces;
    std::string config_hash;

    double energy_mK(std::size_t level, std::size_t point, int sheet) const {
        return units::to_mK(levels[level].energy(point, sheet));
    }
    /// One sheet as a flat grid array in J.
    std::vector<double> sheet(std::size_t level, int sheet) const;
};

/// Unit-power field data and per-level operator bases for one configuration.
/// Building it does all field and polarizability work; evaluating a power
/// vector afterwards only sums and diagonalizes small matrices.
class TrapModel {
public:
    TrapModel(const TrapConfig& config, const AtomicSystem& system,
              const std::vector<SurfaceTerm>& surfaces, const std::vector<LevelSelection>& levels);

    const Grid& grid() const { return grid_; }
    std::size_t point_count() const { return grid_.size(); }
    std::size_t level_count() const { return levels_.size(); }
    std::size_t source_count() const { return sources_.size(); }
    const LevelSelection& level(std::size_t i) const { return levels_[i].selection; }
    int dim(std::size_t level) const { return levels_[level].dim; }
    bool masked(std::size_t point) const { return mask_[point] != 0; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    const std::vector<Surface>& surfaces() const { return surfaces_; }
    const PolarizabilitySet& polarizability(std::size_t source, std::size_t level) const {
        return sources_[source].pol[level];
    }
    double cp_energy(std::size_t level, std::size_t point) const {
        return levels_[level].cp[point];
    }
    const Eigen::Vector3d& quantization_axis() const { return axis_; }

    /// Powers from the configuration.
    Powers default_powers() const;
    const std::vector<Slider>& sliders() const { return sliders_; }
    Powers powers_from_sliders(std::span<const double> values) const;

    /// Total field E+ (global frame) of one source at the given powers.
    Eigen::Vector3cd source_field(std::size_t source, std::size_t point, const SourcePower& p) const;

    /// H = sum over sources of Q(E_s, E_s) + U_CP, written into `out`.
    void hamiltonian(std::size_t level, std::size_t point, const Powers& powers,
                     Eigen::MatrixXcd& out) const;

    void check_powers(const Powers& powers) const;

    /// Model restricted to the grid line along `axis` through the grid point
    /// nearest `through`, keeping only the listed levels (all when empty).
    /// Field samples and CP values are copied, not recomputed.
    TrapModel line(int axis, const Eigen::Vector3d& through, std::vector<std::size_t> levels = {}) const;

private:
    TrapModel() = default;

    struct Source {
        std::string name;
        std::vector<Eigen::Vector3cd> forward;   // local frame, per sqrt(W)
        std::vector<Eigen::Vector3cd> backward;  // empty for single beams
        std::vector<PolarizabilitySet> pol;      // per level
        // per level: K_ij with H = sum_ij conj(E_i) E_j K_ij
        std::vector<std::array<Eigen::MatrixXcd, 9>> basis;
        SourcePower configured;
    };
    struct LevelData {
        LevelSelection selection;
        int dim = 0;
        std::vector<double> cp;
    };

    Grid grid_;
    Eigen::Vector3d axis_;
    QuantizationFrame frame_;
    std::vector<Source> sources_;
    std::vector<LevelData> levels_;
    std::vector<std::uint8_t> mask_;
    std::vector<Surface> surfaces_;
    std::vector<Slider> sliders_;
};

TrapResult compute_trap(const TrapModel& model, const Powers& powers, const ComputeOptions& options = {});

TrapResult compute_trap(const TrapConfig& config, const AtomicSystem& system,
                        const std::vector<SurfaceTerm>& surfaces,
                        const std::vector<LevelSelection>& levels, const ComputeOptions& options = {});

//------------------------------------------------------------------------------
// Trap characterization

struct TrapProperties {
    bool stable = false;
    std::size_t index = 0;            ///< grid point of the minimum
    Eigen::Vector3d position = Eigen::Vector3d::Zero();  ///< refined where a fit exists
    double minimum_mK = 0.0;
    double depth_mK = 0.0;
    std::array<std::optional<double>, 3> frequency_Hz;  ///< x, y, z
    std::optional<double> surface_distance_m;
    double broadening_mK = 0.0;
};

/// Characterizes a single potential grid (J). `axis` is the trapping axis
/// along which the depth is measured. A minimum needs unmasked neighbours
/// on every axis; on the other axes it may sit at the grid edge. Broadening
/// is left at 0.
TrapProperties analyze_potential(const Grid& grid, std::span<const double> potential_J,
                                 std::span<const std::uint8_t> mask, int axis, double mass_kg);

/// Same for one sheet of a result, with surface distance and manifold
/// broadening at the minimum.
TrapProperties trap_properties(const TrapResult& result, std::size_t level, int sheet, int axis,
                               double mass_kg);

struct Decomposition {
    std::vector<std::pair<double, double>> weights;  ///< (m_F, |amplitude|^2)
    bool degenerate = false;                           ///< eigenvalue shared within 1e-9
};

/// Squared overlaps of eigenstate `sheet` with |m_F>. Uses stored
/// eigenvectors. Throws InvalidArgument for a masked or out-of-range point
/// and when the result holds no eigenvectors.
Decomposition eigenstate_decomposition(const TrapResult& result, std::size_t level,
                                       std::size_t point, int sheet);

/// Recomputes one point from the model.
Decomposition eigenstate_decomposition(const TrapModel& model, const Powers& powers,
                                       std::size_t level, std::size_t point, int sheet);

}  // namespace evatrap
