#include "evatrap/atomdata.hpp"
#include "evatrap/error.hpp"
#include "evatrap/units.hpp"
#include "oracles.hpp"

#include "approx.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <random>
#include <sstream>

using namespace evatrap;

namespace {

const std::string cesium_path = std::string(EVATRAP_DATA_DIR) + "/cesium.json";

StateSpec cs_ground(int f) {
    return {6, 0, HalfInteger::from_twice(1), HalfInteger::from_int(f)};
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Random admissible 6-j arguments (doubled), all triads valid.
struct SixJ {
    int j[6];
};

SixJ random_valid_6j(std::mt19937& rng, int max_twice) {
    std::uniform_int_distribution<int> pick(0, max_twice);
    for (;;) {
        SixJ s{};
        for (int& v : s.j) v = pick(rng);
        auto tri = [](int a, int b, int c) {
            return (a + b + c) % 2 == 0 && c >= std::abs(a - b) && c <= a + b;
        };
        if (tri(s.j[0], s.j[1], s.j[2]) && tri(s.j[0], s.j[4], s.j[5]) &&
            tri(s.j[3], s.j[1], s.j[5]) && tri(s.j[3], s.j[4], s.j[2]))
            return s;
    }
}

}  // namespace

TEST_CASE("wigner6j reference values") {
    CHECK(wigner6j(0.0, 0.0, 0.0, 0.0, 0.0, 0.0) == 1.0);
    CHECK(wigner6j(1.0, 1.0, 1.0, 1.0, 1.0, 1.0) == rel(1.0 / 6.0).epsilon(1e-15));
    CHECK(wigner6j(1.0, 2.0, 4.0, 1.0, 1.0, 1.0) == 0.0);
    // frozen from an exact symbolic evaluation: -sqrt(286)/693
    CHECK(wigner6j(4.0, 3.5, 4.5, 2.5, 3.0, 3.0) ==
          rel(-0.024403368723358965).epsilon(1e-14));
    CHECK(wigner6j(10.0, 10.0, 10.0, 10.0, 10.0, 10.0) ==
          rel(-0.0029191867806092103).epsilon(1e-13));
    // odd triad sum
    CHECK(wigner6j_twice(1, 1, 1, 1, 1, 1) == 0.0);
}

TEST_CASE("wigner6j rejects invalid arguments") {
    CHECK_THROWS_AS(wigner6j(-1.0, 1.0, 1.0, 1.0, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(wigner6j(0.3, 1.0, 1.0, 1.0, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("wigner6j symmetries on random symbols") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = random_valid_6j(rng, 24);
        const auto& j = s.j;
        const double v = wigner6j_twice(j[0], j[1], j[2], j[3], j[4], j[5]);
        const double tol = 1e-12 * std::max(1.0, std::abs(v));
        // column permutations
        CHECK(std::abs(wigner6j_twice(j[1], j[0], j[2], j[4], j[3], j[5]) - v) <= tol);
        CHECK(std::abs(wigner6j_twice(j[0], j[2], j[1], j[3], j[5], j[4]) - v) <= tol);
        CHECK(std::abs(wigner6j_twice(j[2], j[1], j[0], j[5], j[4], j[3]) - v) <= tol);
        // upper/lower swap in two columns
        CHECK(std::abs(wigner6j_twice(j[3], j[4], j[2], j[0], j[1], j[5]) - v) <= tol);
        CHECK(std::abs(wigner6j_twice(j[0], j[4], j[5], j[3], j[1], j[2]) - v) <= tol);
    }
}

TEST_CASE("wigner6j orthogonality") {
    // sum_j3 (2j3+1)(2j6+1) {j1 j2 j3; j4 j5 j6}{j1 j2 j3; j4 j5 j6'} = delta
    const int j1 = 5, j2 = 4, j4 = 3, j5 = 6;  // doubled
    for (int j6 = std::max(std::abs(j1 - j5), std::abs(j4 - j2)); j6 <= std::min(j1 + j5, j4 + j2); j6 += 2)
        for (int j6p = j6 % 2; j6p <= 12; j6p += 2) {
            double sum = 0.0;
            for (int j3 = 0; j3 <= 20; ++j3)
                sum += (j3 + 1.0) * (j6 + 1.0) * wigner6j_twice(j1, j2, j3, j4, j5, j6) *
                       wigner6j_twice(j1, j2, j3, j4, j5, j6p);
            const bool j6p_valid = (j6p >= std::max(std::abs(j1 - j5), std::abs(j4 - j2)) &&
                                    j6p <= std::min(j1 + j5, j4 + j2));
            const double expected = (j6 == j6p && j6p_valid) ? 1.0 : 0.0;
            CHECK(std::abs(sum - expected) < 1e-12);
        }
}

TEST_CASE("wigner6j matches an independent implementation") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = random_valid_6j(rng, 16);
        const auto& j = s.j;
        const double ours = wigner6j_twice(j[0], j[1], j[2], j[3], j[4], j[5]);
        const double ref = oracle::sixj(j[0], j[1], j[2], j[3], j[4], j[5]);
        CHECK(std::abs(ours - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("load cesium") {
    const auto sys = load_atomic_system(cesium_path, cs_ground(4));
    CHECK(sys.nuclear_spin == HalfInteger::from_twice(7));
    CHECK(sys.levels[sys.state_level].label() == "6S1/2");
    CHECK(sys.state_f == HalfInteger::from_int(4));

    const auto d1 = sys.require_level(6, 1, HalfInteger::from_twice(1));
    const auto d2 = sys.require_level(6, 1, HalfInteger::from_twice(3));
    bool seen_d1 = false, seen_d2 = false;
    for (const auto& c : sys.couplings(sys.state_level)) {
        const double lambda_nm = 2 * units::pi * units::c / c.angular_frequency * 1e9;
        if (c.other == d1) {
            seen_d1 = true;
            CHECK(lambda_nm == rel(894.6).epsilon(1e-3));
        }
        if (c.other == d2) {
            seen_d2 = true;
            CHECK(lambda_nm == rel(852.3).epsilon(1e-3));
        }
    }
    CHECK(seen_d1);
    CHECK(seen_d2);
    CHECK(sys.couplings(sys.state_level).size() >= 2);

    for (std::size_t k = 1; k < sys.transitions.size(); ++k)
        CHECK(sys.transitions[k - 1].angular_frequency <= sys.transitions[k].angular_frequency);
}

TEST_CASE("loading is deterministic") {
    const auto a = load_atomic_system(cesium_path, cs_ground(4));
    const auto b = load_atomic_system(cesium_path, cs_ground(4));
    REQUIRE(a.transitions.size() == b.transitions.size());
    for (std::size_t k = 0; k < a.transitions.size(); ++k) {
        CHECK(a.transitions[k].lower == b.transitions[k].lower);
        CHECK(a.transitions[k].reduced_dipole_Cm == b.transitions[k].reduced_dipole_Cm);
        CHECK(a.transitions[k].angular_frequency == b.transitions[k].angular_frequency);
    }
}

TEST_CASE("load rejects invalid states and files") {
    CHECK_THROWS_AS(load_atomic_system(cesium_path, cs_ground(7)), ConfigError);
    CHECK_THROWS_AS(load_atomic_system(std::string(EVATRAP_DATA_DIR) + "/nope.json", cs_ground(4)),
                    IoError);

    auto doc = nlohmann::json::parse(read_text(cesium_path));
    SUBCASE("dangling level reference") {
        doc["transitions"][0]["upper_index"] = 999;
        CHECK_THROWS_AS(parse_atomic_system(doc.dump(), cs_ground(4)), ConfigError);
    }
    SUBCASE("malformed document") {
        CHECK_THROWS_AS(parse_atomic_system("{not json", cs_ground(4)), ConfigError);
    }
    SUBCASE("missing species") {
        doc.erase("species");
        CHECK_THROWS_AS(parse_atomic_system(doc.dump(), cs_ground(4)), ConfigError);
    }
    SUBCASE("no transitions from the state") {
        doc["transitions"] = nlohmann::json::array();
        CHECK_THROWS_AS(parse_atomic_system(doc.dump(), cs_ground(4)), ConfigError);
    }
    SUBCASE("J incompatible with L") {
        doc["levels"][1]["j_times_2"] = 5;
        CHECK_THROWS_AS(parse_atomic_system(doc.dump(), cs_ground(4)), ConfigError);
    }
}

TEST_CASE("hyperfine levels") {
    const auto sys = load_atomic_system(cesium_path, cs_ground(4));
    const auto ground = hyperfine_levels(sys, sys.state_level);
    REQUIRE(ground.size() == 2);
    CHECK(ground[0] == HalfInteger::from_int(3));
    CHECK(ground[1] == HalfInteger::from_int(4));

    const auto p32 = hyperfine_levels(sys, sys.require_level(6, 1, HalfInteger::from_twice(3)));
    REQUIRE(p32.size() == 4);
    CHECK(p32.front() == HalfInteger::from_int(2));
    CHECK(p32.back() == HalfInteger::from_int(5));

    AtomicSystem spinless = sys;
    spinless.nuclear_spin = HalfInteger::from_int(0);
    const auto only = hyperfine_levels(spinless, spinless.state_level);
    REQUIRE(only.size() == 1);
    CHECK(only[0] == HalfInteger::from_twice(1));
}

TEST_CASE("F-reduced dipole elements") {
    const auto sys = load_atomic_system(cesium_path, cs_ground(4));
    const auto p32 = sys.require_level(6, 1, HalfInteger::from_twice(3));
    const Transition* d2 = nullptr;
    for (const auto& t : sys.transitions)
        if (t.lower == sys.state_level && t.upper == p32) d2 = &t;
    REQUIRE(d2 != nullptr);

    // (-1)^(1+5+1/2+7/2) sqrt(11) {1/2 3/2 1; 5 4 7/2}, the 6-j being exactly 1/6
    const double factor = std::sqrt(11.0) / 6.0;
    CHECK(reduced_dipole_F(sys, *d2, HalfInteger::from_int(4), HalfInteger::from_int(5)) ==
          rel(d2->reduced_dipole_Cm * factor).epsilon(1e-14));
    CHECK(reduced_dipole_F(sys, *d2, HalfInteger::from_int(3), HalfInteger::from_int(5)) == 0.0);
    CHECK_THROWS_AS(reduced_dipole_F(sys, *d2, HalfInteger::from_int(5), HalfInteger::from_int(4)),
                    InvalidArgument);

    // sum rule: sum_F' <F||d||F'>^2 = <J||d||J'>^2 (2F+1) sum_F' (2F'+1) 6j^2 / (2F+1)
    for (int f : {3, 4}) {
        double lhs = 0.0, rhs = 0.0;
        for (int fp = 2; fp <= 5; ++fp) {
            const double d =
                reduced_dipole_F(sys, *d2, HalfInteger::from_int(f), HalfInteger::from_int(fp));
            lhs += d * d;
            const double sj = oracle::sixj(1, 3, 2, 2 * fp, 2 * f, 7);
            rhs += (2 * fp + 1) * sj * sj;
        }
        rhs *= d2->reduced_dipole_Cm * d2->reduced_dipole_Cm;
        CHECK(lhs == rel(rhs).epsilon(1e-12));
        // and 6-j orthogonality collapses the F' sum to 1/(2J+1)
        CHECK(lhs == rel(d2->reduced_dipole_Cm * d2->reduced_dipole_Cm / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("reduced_dipole_F vanishes whenever the (F, F', 1) triangle fails") {
    const auto sys = load_atomic_system(cesium_path, cs_ground(4));
    for (const auto& t : sys.transitions) {
        if (t.lower != sys.state_level) continue;
        for (auto f : hyperfine_levels(sys, t.lower))
            for (auto fp : hyperfine_levels(sys, t.upper))
                if (!triangle_ok(f, fp, HalfInteger::from_int(1)))
                    CHECK(reduced_dipole_F(sys, t, f, fp) == 0.0);
    }
}

TEST_CASE("Lande g_F of the cesium ground state") {
    const auto sys = load_atomic_system(cesium_path, cs_ground(4));
    CHECK(lande_gf(sys, sys.state_level, HalfInteger::from_int(4)) ==
          rel(0.2503).epsilon(1e-3));
    CHECK(lande_gf(sys, sys.state_level, HalfInteger::from_int(3)) ==
          rel(-0.2503).epsilon(1e-3));
}

TEST_CASE("cesium level energies follow the Rydberg-Ritz series") {
    // Modified Rydberg-Ritz with published Cs quantum defects; accurate to
    // a few cm^-1 from n = 8 on (n = 7 for D), so gross table errors show up.
    const auto sys = load_atomic_system(cesium_path, cs_ground(4));
    const double ip = 31406.4677, ry = 109736.862;  // cm^-1
    struct Defect {
        int l, j2;
        double d0, d2, d4;
    };
    const Defect defects[] = {{0, 1, 4.04935665, 0.2377037, 0.255401},
                              {1, 1, 3.5915895, 0.360926, 0.41905},
                              {1, 3, 3.5589599, 0.392469, -0.67431},
                              {2, 3, 2.4754562, 0.009320, -0.43498},
                              {2, 5, 2.4663091, 0.014964, -0.45828}};
    int checked = 0;
    for (const auto& lv : sys.levels) {
        if (lv.l > 2 || lv.n < (lv.l == 2 ? 7 : 8)) continue;
        for (const auto& d : defects) {
            if (d.l != lv.l || d.j2 != lv.j.twice()) continue;
            double ns = lv.n - d.d0;
            for (int it = 0; it < 20; ++it) ns = lv.n - d.d0 - d.d2 / (ns * ns) - d.d4 / std::pow(ns, 4);
            const double expected = ip - ry / (ns * ns);
            const double actual = lv.energy_J / (units::h * units::c * 100);
            INFO(lv.label());
            CHECK(std::abs(actual - expected) < 10.0);
            ++checked;
        }
    }
    CHECK(checked == 17);

    // the near-magic region around 685 nm must not hold a 6P3/2 resonance
    const auto p32 = sys.require_level(6, 1, HalfInteger::from_twice(3));
    for (const auto& c : sys.couplings(p32)) {
        const double lambda = 2 * units::pi * units::c / std::abs(c.angular_frequency);
        CHECK((lambda < 670e-9 || lambda > 690e-9));
    }
}
