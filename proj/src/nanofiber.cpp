#include "evatrap/error.hpp"
#include "evatrap/fields.hpp"
#include "evatrap/units.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <sstream>

namespace evatrap {

namespace {

constexpr double kHe11Cutoff = 2.404825557695773;  // first zero of J0

// libstdc++ throws instead of underflowing for large arguments
double bessel_k(double nu, double x) { return x > 700 ? 0.0 : std::cyl_bessel_k(nu, x); }

struct Dispersion {
    double k, a, n1, n2;

    // J1'(U)/(U J1(U)) and K1'(W)/(W K1(W))
    static double jterm(double u) {
        const double j1 = std::cyl_bessel_j(1.0, u);
        return (std::cyl_bessel_j(0.0, u) - j1 / u) / (u * j1);
    }
    static double kterm(double w) {
        const double k1 = bessel_k(1.0, w);
        return (-bessel_k(0.0, w) - k1 / w) / (w * k1);
    }

    double v() const { return k * a * std::sqrt(n1 * n1 - n2 * n2); }
    double beta_of_u(double u) const { return std::sqrt(n1 * n1 * k * k - u * u / (a * a)); }

    // LHS - RHS and the larger magnitude of the two sides
    std::pair<double, double> sides(double u) const {
        const double w = std::sqrt(v() * v() - u * u);
        const double jt = jterm(u), kt = kterm(w);
        const double lhs = (jt + kt) * (jt + (n2 * n2) / (n1 * n1) * kt);
        const double b = beta_of_u(u) / (k * n1);
        const double g = 1.0 / (u * u) + 1.0 / (w * w);
        const double rhs = b * b * g * g;
        return {lhs - rhs, std::max(std::abs(lhs), std::abs(rhs))};
    }
    double f(double u) const { return sides(u).first; }
};

void check_params(const NanofiberParams& p) {
    if (!(p.radius_m > 0)) throw ConfigError("nanofiber: radius must be positive");
    if (!(p.wavelength_m > 0)) throw ConfigError("nanofiber: wavelength must be positive");
    if (!(p.n_clad >= 1.0)) throw ConfigError("nanofiber: n_clad must be >= 1");
    if (!(p.n_core > p.n_clad)) throw ConfigError("nanofiber: n_core must exceed n_clad");
    if (direction_axis(p.direction) != 2)
        throw ConfigError("nanofiber: direction must be +z or -z (fiber axis is z)");
}

}  // namespace

double nanofiber_dispersion_residual(const NanofiberParams& params, double beta) {
    check_params(params);
    const double k = 2 * units::pi / params.wavelength_m;
    Dispersion d{k, params.radius_m, params.n_core, params.n_clad};
    const double u = params.radius_m * std::sqrt(params.n_core * params.n_core * k * k - beta * beta);
    const auto [diff, scale] = d.sides(u);
    return std::abs(diff) / scale;
}

NanofiberMode::NanofiberMode(const NanofiberParams& params, double power_W)
    : params_(params), power_(power_W) {
    check_params(params);
    if (!(power_W > 0)) throw ConfigError("nanofiber: power must be positive");
    k_ = 2 * units::pi / params.wavelength_m;
    const double a = params.radius_m;
    Dispersion d{k_, a, params.n_core, params.n_clad};
    v_ = d.v();
    if (!single_mode()) {
        std::ostringstream msg;
        msg << "nanofiber: V = " << v_ << " exceeds the single-mode cutoff 2.405; "
            << "higher-order modes are guided but only HE11 is returned";
        warnings_.push_back(msg.str());
    }

    // HE11 has U below the first zero of J0 for any V; scan for the first
    // sign change (largest beta) and refine.
    const double u_max = std::min(v_, kHe11Cutoff) * (1 - 1e-12);
    const int n_scan = 4000;
    double lo = 0, hi = 0;
    bool found = false;
    double u_prev = u_max * 1e-4;
    double f_prev = d.f(u_prev);
    for (int i = 1; i <= n_scan && !found; ++i) {
        const double u = u_max * (1e-4 + (1 - 1e-4) * i / n_scan);
        const double fu = d.f(u);
        if (std::isfinite(f_prev) && std::isfinite(fu) && (f_prev == 0 || (f_prev < 0) != (fu < 0))) {
            lo = u_prev;
            hi = u;
            found = true;
        }
        u_prev = u;
        f_prev = fu;
    }
    if (!found)
        throw PhysicsError("nanofiber: no guided HE11 root in (n_clad k, n_core k)");
    std::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        [&](double u) { return d.f(u); }, lo, hi, boost::math::tools::eps_tolerance<double>(52),
        iters);
    const double u = 0.5 * (bracket.first + bracket.second);
    const double w = std::sqrt(v_ * v_ - u * u);
    beta_ = d.beta_of_u(u);
    h_ = u / a;
    q_ = w / a;
    residual_ = std::abs(d.sides(u).first) / d.sides(u).second;
    if (!(beta_ > params.n_clad * k_ && beta_ < params.n_core * k_))
        throw PhysicsError("nanofiber: propagation constant outside the guided range");
    s_ = (1 / (u * u) + 1 / (w * w)) / (Dispersion::jterm(u) + Dispersion::kterm(w));

    // Power of the unit-amplitude circular mode; the quasi-linear
    // superposition carries the same power.
    namespace quad = boost::math::quadrature;
    auto density = [this](double r) {
        const Cyl c = circular(r);
        return 2.0 * 2 * units::pi * r * std::real(c.er * std::conj(c.hphi) - c.ephi * std::conj(c.hr));
    };
    // The exterior power falls off like exp(-2 q r); 40/q leaves < 1e-30.
    const double p_in = quad::gauss_kronrod<double, 61>::integrate(density, 0.0, a, 10, 1e-12);
    const double p_out = quad::gauss_kronrod<double, 61>::integrate(density, a, a + 40 / q_, 10, 1e-12);
    amplitude_ = std::sqrt(power_W / (p_in + p_out));
}

NanofiberMode::Cyl NanofiberMode::circular(double r) const {
    using std::cyl_bessel_j;
    const double a = params_.radius_m;
    const double n1 = params_.n_core, n2 = params_.n_clad;
    const double omega = units::c * k_;
    const double s1 = beta_ * beta_ * s_ / (k_ * k_ * n1 * n1);
    const double s2 = beta_ * beta_ * s_ / (k_ * k_ * n2 * n2);
    const Complex i(0, 1);
    Cyl c;
    if (r < a) {
        const double hr = h_ * r;
        const double j0 = cyl_bessel_j(0.0, hr), j1 = cyl_bessel_j(1.0, hr), j2 = cyl_bessel_j(2.0, hr);
        const double pe = beta_ / (2 * h_);
        const double ph = omega * units::epsilon0 * n1 * n1 / (2 * h_);
        c.er = i * pe * ((1 - s_) * j0 - (1 + s_) * j2);
        c.ephi = -pe * ((1 - s_) * j0 + (1 + s_) * j2);
        c.ez = j1;
        c.hr = ph * ((1 - s1) * j0 + (1 + s1) * j2);
        c.hphi = i * ph * ((1 - s1) * j0 - (1 + s1) * j2);
        c.hz = i * beta_ * s_ / (omega * units::mu0) * j1;
    } else {
        const double qr = q_ * r;
        const double ratio = cyl_bessel_j(1.0, h_ * a) / bessel_k(1.0, q_ * a);
        const double k0 = bessel_k(0.0, qr), k1 = bessel_k(1.0, qr), k2 = bessel_k(2.0, qr);
        const double pe = ratio * beta_ / (2 * q_);
        const double ph = ratio * omega * units::epsilon0 * n2 * n2 / (2 * q_);
        c.er = i * pe * ((1 - s_) * k0 + (1 + s_) * k2);
        c.ephi = -pe * ((1 - s_) * k0 - (1 + s_) * k2);
        c.ez = ratio * k1;
        c.hr = ph * ((1 - s2) * k0 - (1 + s2) * k2);
        c.hphi = i * ph * ((1 - s2) * k0 + (1 + s2) * k2);
        c.hz = i * beta_ * s_ / (omega * units::mu0) * ratio * k1;
    }
    return c;
}

void NanofiberMode::fields(const Eigen::Vector3d& pos, Eigen::Vector3cd* e, Eigen::Vector3cd* hv) const {
    const double r = std::hypot(pos.x(), pos.y());
    const double phi = std::atan2(pos.y(), pos.x());
    const double rel = phi - params_.polarization_angle;
    const double cr = std::cos(rel), sr = std::sin(rel);
    const double cp = std::cos(phi), sp = std::sin(phi);
    const Cyl c = circular(r);
    const Complex i(0, 1);
    const double rt2 = std::sqrt(2.0);
    // -i makes the transverse field real at z = 0
    const Complex phase = -i * amplitude_ * std::polar(1.0, beta_ * pos.z());
    const bool backward = params_.direction == Direction::minus_z;

    auto to_cart = [&](Complex fr, Complex fphi, Complex fz) {
        return Eigen::Vector3cd(fr * cp - fphi * sp, fr * sp + fphi * cp, fz);
    };
    if (e) {
        Eigen::Vector3cd v = phase * to_cart(rt2 * c.er * cr, rt2 * i * c.ephi * sr, rt2 * c.ez * cr);
        *e = backward ? Eigen::Vector3cd(v.conjugate()) : v;
    }
    if (hv) {
        Eigen::Vector3cd v = phase * to_cart(rt2 * i * c.hr * sr, rt2 * c.hphi * cr, rt2 * i * c.hz * sr);
        *hv = backward ? Eigen::Vector3cd(-v.conjugate()) : v;
    }
}

Eigen::Vector3cd NanofiberMode::e_field(const Eigen::Vector3d& pos) const {
    Eigen::Vector3cd e;
    fields(pos, &e, nullptr);
    return e;
}

Eigen::Vector3cd NanofiberMode::h_field(const Eigen::Vector3d& pos) const {
    Eigen::Vector3cd h;
    fields(pos, nullptr, &h);
    return h;
}

double NanofiberMode::integrated_power() const {
    namespace quad = boost::math::quadrature;
    // 64-point trapezoid in phi is exact for the trigonometric polynomials here.
    const int n_phi = 64;
    auto ring = [this](double r) {
        if (r == 0) return 0.0;
        double sum = 0;
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2 * units::pi * j / n_phi;
            Eigen::Vector3cd e, h;
            fields({r * std::cos(phi), r * std::sin(phi), 0.0}, &e, &h);
            sum += std::real(e(0) * std::conj(h(1)) - e(1) * std::conj(h(0)));
        }
        return 2.0 * r * sum * (2 * units::pi / n_phi);
    };
    const double a = params_.radius_m;
    return quad::gauss_kronrod<double, 61>::integrate(ring, 0.0, a, 8, 1e-10) +
           quad::gauss_kronrod<double, 61>::integrate(ring, a, a + 40 / q_, 8, 1e-10);
}

FieldMap solve_nanofiber_mode(const NanofiberParams& params, const Grid& grid, double power_W,
                              std::vector<std::string>* warnings) {
    grid.validate();
    const NanofiberMode mode(params, power_W);
    if (warnings) warnings->insert(warnings->end(), mode.warnings().begin(), mode.warnings().end());

    const double max_step = 1.0 / (16.0 * mode.q());
    for (int ax = 0; ax < 2; ++ax) {
        const auto& v = grid.axis(ax);
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] - v[i - 1] > max_step * (1 + 1e-12)) {
                std::ostringstream msg;
                msg << "nanofiber: grid too coarse along " << "xy"[ax] << " (step "
                    << (v[i] - v[i - 1]) * 1e9 << " nm, need <= " << max_step * 1e9
                    << " nm = 1/16 of the decay length at " << params.wavelength_m * 1e9 << " nm)";
                throw ConfigError(msg.str());
            }
    }

    FieldMap map;
    map.wavelength_m = params.wavelength_m;
    map.grid = grid;
    map.direction = params.direction;
    map.p_ref_W = power_W;
    map.translation_invariant = true;
    map.e_plus.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) map.e_plus[i] = mode.e_field(grid.point(i));
    return map;
}

}  // namespace evatrap
