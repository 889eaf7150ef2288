#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace evatrap {

using Complex = std::complex<double>;

enum class Direction { none, plus_x, minus_x, plus_y, minus_y, plus_z, minus_z };

std::string to_string(Direction d);
/// Accepts "+x", "-x", ..., "none". Throws ConfigError otherwise.
Direction direction_from_string(const std::string& s);
Direction reversed(Direction d);
/// Grid axis (0, 1, 2) of a direction tag, -1 for none.
int direction_axis(Direction d);

/// Rectilinear grid; any axis may be a single point. Points are ordered
/// x-major, z fastest.
struct Grid {
    std::vector<double> x, y, z;

    std::size_t size() const { return x.size() * y.size() * z.size(); }
    std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return (ix * y.size() + iy) * z.size() + iz;
    }
    Eigen::Vector3d point(std::size_t i) const;
    const std::vector<double>& axis(int a) const { return a == 0 ? x : a == 1 ? y : z; }
    std::array<std::size_t, 3> shape() const { return {x.size(), y.size(), z.size()}; }

    /// Throws ConfigError for empty, non-finite or non-increasing axes.
    void validate() const;

    static std::vector<double> linspace(double lo, double hi, std::size_t n);
};

bool operator==(const Grid& a, const Grid& b);

/// Positive-frequency field E+ on a grid, normalized to P_ref.
struct FieldMap {
    double wavelength_m = 0.0;
    Grid grid;
    std::vector<Eigen::Vector3cd> e_plus;  ///< one per grid point
    Direction direction = Direction::none;
    double p_ref_W = 1.0;
    /// Declares the structure invariant along the propagation axis, which
    /// allows the counterpropagating partner to be synthesized.
    bool translation_invariant = false;

    void validate() const;
};

struct Beam {
    std::shared_ptr<const FieldMap> field;
    double power_W = 0.0;
};

/// Counterpropagating pair summed coherently (standing wave).
struct BeamPair {
    Beam forward;
    Beam backward;
    double relative_phase = 0.0;
};

/// E+ scaled by sqrt(P / P_ref).
FieldMap total_field_at_power(const Beam& beam);
/// Coherent sum of the two members; throws ConfigError on grid or
/// wavelength mismatch.
FieldMap total_field_at_power(const BeamPair& pair);

/// Counterpropagating partner of a translation-invariant guided mode: the
/// time-reversed field conj(E+), with the direction tag flipped.
FieldMap backward_from_forward(const FieldMap& map);

/// Directory with meta.json and e_plus.bin.
FieldMap read_fieldmap(const std::filesystem::path& dir);
void write_fieldmap(const FieldMap& map, const std::filesystem::path& dir);

//------------------------------------------------------------------------------
// Step-index nanofiber, fundamental HE11 mode

struct NanofiberParams {
    double radius_m = 250e-9;
    double n_core = 1.45;
    double n_clad = 1.0;
    double wavelength_m = 1064e-9;
    double polarization_angle = 0.0;  ///< quasi-linear polarization axis in the xy plane
    Direction direction = Direction::plus_z;
};

/// Solved HE11 mode. The fiber axis is z through the origin. Transverse
/// field components are real at z = 0 and E_z is in quadrature.
class NanofiberMode {
public:
    NanofiberMode(const NanofiberParams& params, double power_W);

    const NanofiberParams& params() const { return params_; }
    double k() const { return k_; }
    double beta() const { return beta_; }
    double h() const { return h_; }  ///< inner transverse wavenumber
    double q() const { return q_; }  ///< outer decay constant
    double v_parameter() const { return v_; }
    bool single_mode() const { return v_ < 2.404825557695773; }
    /// Relative residual of the eigenvalue equation at beta.
    double residual() const { return residual_; }
    double power() const { return power_; }

    Eigen::Vector3cd e_field(const Eigen::Vector3d& pos) const;
    Eigen::Vector3cd h_field(const Eigen::Vector3d& pos) const;

    /// Time-averaged axial power 2 Re ∫ (E+ x H+*)_z dA computed by
    /// independent radial quadrature.
    double integrated_power() const;

    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    struct Cyl {
        Complex er, ephi, ez, hr, hphi, hz;
    };
    Cyl circular(double r) const;  // l = +1 mode, amplitude-normalized, no phase factors
    void fields(const Eigen::Vector3d& pos, Eigen::Vector3cd* e, Eigen::Vector3cd* hv) const;

    NanofiberParams params_;
    double power_;
    double k_, beta_, h_, q_, v_, s_, residual_;
    double amplitude_ = 1.0;
    std::vector<std::string> warnings_;
};

/// Relative residual of the HE11 eigenvalue equation at propagation
/// constant beta.
double nanofiber_dispersion_residual(const NanofiberParams& params, double beta);

/// Samples the mode on `grid`. Throws ConfigError if a non-singleton
/// transverse axis is coarser than 1/16 of the evanescent decay length.
FieldMap solve_nanofiber_mode(const NanofiberParams& params, const Grid& grid, double power_W,
                              std::vector<std::string>* warnings = nullptr);

}  // namespace evatrap
