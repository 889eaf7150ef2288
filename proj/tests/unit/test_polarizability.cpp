#include "evatrap/error.hpp"
#include "evatrap/polarizability.hpp"
#include "evatrap/stark.hpp"
#include "evatrap/vector_ops.hpp"
#include "oracles.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace evatrap;

namespace {

const std::string cesium_path = std::string(EVATRAP_DATA_DIR) + "/cesium.json";

AtomicSystem cesium(int f = 4) {
    return load_atomic_system(cesium_path, {6, 0, HalfInteger::from_twice(1), HalfInteger::from_int(f)});
}

AtomicSystem without_hyperfine(AtomicSystem sys) {
    for (auto& lv : sys.levels) lv.hyperfine_offset_J.clear();
    return sys;
}

// J-level dynamic scalar polarizability by direct sum, valence only.
double scalar_oracle(const AtomicSystem& sys, std::size_t level, double omega) {
    const double g = sys.levels[level].j.twice() + 1.0;
    double a = 0.0;
    for (const auto& t : sys.transitions) {
        double w;
        if (t.lower == level) w = t.angular_frequency;
        else if (t.upper == level) w = -t.angular_frequency;
        else continue;
        a += 2.0 * w * t.reduced_dipole_Cm * t.reduced_dipole_Cm /
             (3.0 * units::hbar * g * (w * w - omega * omega));
    }
    return a;
}

Eigen::Vector3cd random_field(std::mt19937& rng) {
    std::normal_distribution<double> n(0.0, 1e5);
    Eigen::Vector3cd e;
    for (int k = 0; k < 3; ++k) e(k) = {n(rng), n(rng)};
    return e;
}

Eigen::Vector3d random_axis(std::mt19937& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d a(n(rng), n(rng), n(rng));
    return a.normalized();
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("static scalar polarizability of the cesium ground state") {
    const auto sys = cesium();
    const auto pol = polarizabilities(sys, sys.state_level, HalfInteger::from_int(4), 0.0);
    CHECK(pol.alpha0 == rel(6.61e-39).epsilon(0.02));
    CHECK(pol.alpha0 / units::polarizability_au == rel(401.0).epsilon(0.02));
    CHECK(pol.alpha1 == 0.0);
    CHECK(pol.alpha2 == 0.0);

    // F sum with offsets stripped collapses onto the J-level direct sum
    const auto flat = without_hyperfine(sys);
    const auto p = polarizabilities(flat, flat.state_level, HalfInteger::from_int(4), 0.0);
    CHECK(p.alpha0 - flat.core_polarizability ==
          rel(oracle::static_scalar(flat, flat.state_level)).epsilon(1e-12));
}

TEST_CASE("tensor polarizability vanishes for J = 1/2") {
    const auto sys = cesium();
    for (double lambda : {532e-9, 780e-9, 937e-9, 1064e-9, 1550e-9})
        for (int f : {3, 4})
            CHECK(polarizabilities(sys, sys.state_level, HalfInteger::from_int(f),
                                   angular_frequency_of(lambda))
                      .alpha2 == 0.0);
}

TEST_CASE("scalar polarizability is F independent without hyperfine offsets") {
    const auto flat = without_hyperfine(cesium());
    const double w = angular_frequency_of(1064e-9);
    const double a4 = polarizabilities(flat, flat.state_level, HalfInteger::from_int(4), w).alpha0;
    const double a3 = polarizabilities(flat, flat.state_level, HalfInteger::from_int(3), w).alpha0;
    CHECK(std::abs(a4 - a3) / a4 < 1e-3);
}

TEST_CASE("scalar polarizability follows the direct sum across frequency") {
    const auto flat = without_hyperfine(cesium());
    const auto& lv = flat.state_level;
    // 50 wavelengths from 600 nm to 2 um, skipping the D-line guard bands
    int checked = 0;
    for (int k = 0; k < 50; ++k) {
        const double lambda = 600e-9 + k * (1400e-9 / 49);
        const double w = angular_frequency_of(lambda);
        double a;
        try {
            a = polarizabilities(flat, lv, HalfInteger::from_int(4), w).alpha0;
        } catch (const PhysicsError&) {
            continue;
        }
        const double ref = scalar_oracle(flat, lv, w) + flat.core_polarizability;
        CHECK(a == rel(ref).epsilon(1e-9));
        CHECK((a > 0) == (ref > 0));
        ++checked;
    }
    CHECK(checked >= 45);
    // red of D1 the ground state is attracted
    CHECK(polarizabilities(flat, lv, HalfInteger::from_int(4), angular_frequency_of(1064e-9)).alpha0 > 0);
    CHECK(polarizabilities(flat, lv, HalfInteger::from_int(4), angular_frequency_of(780e-9)).alpha0 < 0);
}

TEST_CASE("scalar polarizability changes sign across an isolated resonance") {
    const auto sys = cesium();
    const auto p32 = sys.require_level(6, 1, HalfInteger::from_twice(3));
    double w_res = 0;
    for (const auto& c : sys.couplings(sys.state_level))
        if (c.other == p32)
            w_res = c.angular_frequency + (sys.hyperfine_offset(p32, HalfInteger::from_int(5)) -
                                           sys.hyperfine_offset(sys.state_level, HalfInteger::from_int(4))) /
                                              units::hbar;
    REQUIRE(w_res > 0);
    PolarizabilityOptions opts;
    opts.guard_band = 2 * units::pi * 1e6;
    double last_below = 0, last_above = 0;
    for (double delta : {2 * units::pi * 1e8, 2 * units::pi * 2e7, 2 * units::pi * 4e6}) {
        const double below = polarizabilities(sys, sys.state_level, HalfInteger::from_int(4), w_res - delta, opts).alpha0;
        const double above = polarizabilities(sys, sys.state_level, HalfInteger::from_int(4), w_res + delta, opts).alpha0;
        CHECK(below > 0);
        CHECK(above < 0);
        if (last_below != 0) {
            CHECK(below > last_below);
            CHECK(above < last_above);
        }
        last_below = below;
        last_above = above;
    }
}

TEST_CASE("resonance guard band") {
    const auto sys = cesium();
    CHECK_THROWS_AS(polarizabilities(sys, sys.state_level, HalfInteger::from_int(4),
                                     angular_frequency_of(852.347e-9)),
                    PhysicsError);
    CHECK_THROWS_AS(polarizabilities(sys, sys.state_level, HalfInteger::from_int(4), -1.0),
                    InvalidArgument);
    // -130 GHz from D2 stays usable
    const double w_d2 = angular_frequency_of(852.347e-9);
    CHECK_NOTHROW(polarizabilities(sys, sys.state_level, HalfInteger::from_int(4),
                                   w_d2 - 2 * units::pi * 130e9));
}

TEST_CASE("vector polarizability vanishes in the static limit") {
    const auto sys = cesium();
    const double a_near = polarizabilities(sys, sys.state_level, HalfInteger::from_int(4),
                                           angular_frequency_of(10.0)).alpha1;
    const double a_ref = polarizabilities(sys, sys.state_level, HalfInteger::from_int(4),
                                          angular_frequency_of(1064e-9)).alpha1;
    CHECK(std::abs(a_near) < 1e-6 * std::abs(a_ref));
}

TEST_CASE("fictitious magnetic field") {
    const auto sys = cesium();
    const double alpha1 = polarizabilities(sys, sys.state_level, HalfInteger::from_int(4),
                                           angular_frequency_of(1064e-9)).alpha1;
    const HalfInteger f = HalfInteger::from_int(4);
    const double gf = lande_gf(sys, sys.state_level, f);
    const double e0 = 1e6;

    const auto lin = fictitious_field(alpha1, f, gf, Eigen::Vector3cd(e0, 0, 0));
    CHECK(lin.norm() == 0.0);

    const Eigen::Vector3cd sigma = e0 / std::sqrt(2.0) * Eigen::Vector3cd(1, Complex(0, 1), 0);
    const auto b = fictitious_field(alpha1, f, gf, sigma);
    const double expected = std::abs(alpha1) * e0 * e0 / (units::muB * std::abs(gf) * 4.0);
    CHECK(std::abs(b.x()) <= 1e-12 * std::abs(b.z()));
    CHECK(std::abs(b.y()) <= 1e-12 * std::abs(b.z()));
    CHECK(std::abs(b.z()) == rel(expected).epsilon(1e-12));
    // i (E- x E+) = (0, 0, -E0^2) for this field
    CHECK(b.z() == rel(-alpha1 * e0 * e0 / (units::muB * gf * 4.0)).epsilon(1e-12));

    const auto b2 = fictitious_field(alpha1, f, gf, 2.0 * sigma);
    CHECK(b2.norm() == rel(4 * b.norm()).epsilon(1e-14));

    CHECK_THROWS_AS(fictitious_field(alpha1, HalfInteger::from_int(0), gf, sigma), InvalidArgument);
}

TEST_CASE("imaginary-axis polarizability") {
    const auto sys = cesium();
    const auto lv = sys.state_level;
    CHECK(polarizability_imaginary_axis(sys, lv, 0.0) ==
          rel(oracle::static_scalar(sys, lv)).epsilon(1e-12));
    const auto flat = without_hyperfine(sys);
    CHECK(polarizability_imaginary_axis(sys, lv, 0.0) ==
          rel(polarizabilities(flat, lv, HalfInteger::from_int(4), 0.0).alpha0 -
                          flat.core_polarizability)
              .epsilon(1e-12));

    double w_max = 0;
    for (const auto& c : sys.couplings(lv)) w_max = std::max(w_max, std::abs(c.angular_frequency));
    CHECK(polarizability_imaginary_axis(sys, lv, 10 * w_max) <
          0.015 * polarizability_imaginary_axis(sys, lv, 0.0));

    for (double xi = 1e12; xi < 1e18; xi *= 3.7) {
        const double a = polarizability_imaginary_axis(sys, lv, xi);
        CHECK(a > 0);
        CHECK(polarizability_imaginary_axis(sys, lv, 2 * xi) < a);
    }
    CHECK_THROWS_AS(polarizability_imaginary_axis(sys, lv, -1.0), InvalidArgument);
}

TEST_CASE("spin matrices") {
    for (int f2 : {1, 2, 7, 8, 10}) {
        const SpinMatrices s(HalfInteger::from_twice(f2));
        const double fv = f2 / 2.0;
        const Eigen::MatrixXcd f_sq = s.fx * s.fx + s.fy * s.fy + s.fz * s.fz;
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(s.dim(), s.dim());
        CHECK(max_abs(f_sq - fv * (fv + 1) * id) < 1e-12);
        const Eigen::MatrixXcd comm = s.fx * s.fy - s.fy * s.fx;
        CHECK(max_abs(comm - Complex(0, 1) * s.fz) < 1e-12);
    }
}

TEST_CASE("light-shift operator matches the Kramers-Heisenberg sum") {
    // Ground state with excited-state hyperfine offsets removed (so the rank-2
    // part cancels exactly) and 6P3/2 with its offsets intact.
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> lambda_dist(1000e-9, 1400e-9);
    const auto base = cesium();
    const auto p32 = base.require_level(6, 1, HalfInteger::from_twice(3));

    int cases = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const bool ground = trial % 2 == 0;
        AtomicSystem sys = ground ? without_hyperfine(base) : base;
        sys.core_polarizability = 0.0;
        const std::size_t level = ground ? sys.state_level : p32;
        const auto fs = hyperfine_levels(sys, level);
        const HalfInteger f = fs[trial / 2 % fs.size()];
        const double omega = angular_frequency_of(lambda_dist(rng));
        const Eigen::Vector3cd e = random_field(rng);
        const Eigen::Vector3d axis = random_axis(rng);

        const auto pol = polarizabilities(sys, level, f, omega);
        const auto h = stark_hamiltonian(pol, e, axis).matrix;
        const auto frame = QuantizationFrame::from_axis(axis);
        const auto ref = oracle::kramers_heisenberg(sys, level, f.twice(), omega, frame.to_local(e));

        CHECK(max_abs(h - ref) <= 1e-9 * max_abs(ref));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_h(h), es_ref(ref);
        const double scale = es_ref.eigenvalues().cwiseAbs().maxCoeff();
        CHECK((es_h.eigenvalues() - es_ref.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-9 * scale);
        ++cases;
    }
    CHECK(cases == 20);
}

TEST_CASE("light-shift operator is Hermitian with +-m degeneracy for linear light") {
    std::mt19937 rng(5);
    const auto sys = cesium();
    const auto p32 = sys.require_level(6, 1, HalfInteger::from_twice(3));
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t level = trial % 2 ? p32 : sys.state_level;
        const HalfInteger f = hyperfine_levels(sys, level).back();
        const auto pol = polarizabilities(sys, level, f, angular_frequency_of(1064e-9));
        const Eigen::Vector3d axis = random_axis(rng);

        const auto h_any = stark_hamiltonian(pol, random_field(rng), axis).matrix;
        CHECK(max_abs(h_any - h_any.adjoint()) <= 1e-14 * max_abs(h_any));

        // linear polarization along the quantization axis: diagonal and even in m
        const Eigen::Vector3cd e_par = Complex(1.3e5, -0.4e5) * axis.cast<Complex>();
        const auto h = stark_hamiltonian(pol, e_par, axis).matrix;
        const int n = f.twice() + 1;
        for (int k = 0; k < n; ++k)
            CHECK(std::abs(h(k, k) - h(n - 1 - k, n - 1 - k)) <= 1e-12 * max_abs(h));

        // any linear polarization: spectrum is doubly degenerate for half-integer F
        const Eigen::Vector3cd e_lin = Complex(0.7, 0.2) * Eigen::Vector3d(random_axis(rng)).cast<Complex>() * 1e5;
        const auto h_lin = stark_hamiltonian(pol, e_lin, axis).matrix;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_lin);
        if (f.twice() % 2 == 1)
            for (int k = 0; k + 1 < n; k += 2)
                CHECK(std::abs(es.eigenvalues()(k) - es.eigenvalues()(k + 1)) <=
                      1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
    }
}

TEST_CASE("vector shift vanishes for linear polarization") {
    const auto sys = cesium();
    const HalfInteger f = HalfInteger::from_int(4);
    PolarizabilitySet pol = polarizabilities(sys, sys.state_level, f, angular_frequency_of(1064e-9));
    PolarizabilitySet vec_only = pol;
    vec_only.alpha0 = 0;
    vec_only.alpha2 = 0;
    std::mt19937 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Vector3cd e = Complex(std::cos(trial), std::sin(trial)) *
                                   Eigen::Vector3d(random_axis(rng)).cast<Complex>() * 2e5;
        const Eigen::Vector3d axis = random_axis(rng);
        const auto full = stark_hamiltonian(pol, e, axis).matrix;
        const auto vec = stark_hamiltonian(vec_only, e, axis).matrix;
        CHECK(max_abs(vec) <= 1e-12 * max_abs(full));
    }
}

TEST_CASE("ground-state operator is scalar plus vector only") {
    // For J = 1/2 and any field, the shifted manifold is alpha0 |E|^2 plus a
    // term linear in F.
    const auto sys = cesium();
    const HalfInteger f = HalfInteger::from_int(4);
    const auto pol = polarizabilities(sys, sys.state_level, f, angular_frequency_of(937e-9));
    const Eigen::Vector3cd e(Complex(1e5, 0), Complex(0, 0.5e5), Complex(0.2e5, 0.1e5));
    const Eigen::Vector3d axis(0, 0, 1);
    const auto h = stark_hamiltonian(pol, e, axis).matrix;
    const SpinMatrices s(f);
    const Eigen::Vector3cd v = spin_density(e, e);
    Eigen::MatrixXcd expected = -pol.alpha0 * e.squaredNorm() * Eigen::MatrixXcd::Identity(9, 9);
    expected -= pol.alpha1 / 4.0 * (v(0) * s.fx + v(1) * s.fy + v(2) * s.fz);
    CHECK(max_abs(h - expected) <= 1e-14 * max_abs(expected));
}
