#include "evatrap/atomdata.hpp"
#include "evatrap/error.hpp"
#include "evatrap/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace evatrap {

using nlohmann::json;

HalfInteger HalfInteger::from_double(double value) {
    const double twice = 2.0 * value;
    const double rounded = std::round(twice);
    if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9)
        throw InvalidArgument("not a half-integer: " + std::to_string(value));
    return HalfInteger(static_cast<int>(rounded));
}

std::string HalfInteger::str() const {
    if (is_integer()) return std::to_string(twice_ / 2);
    return std::to_string(twice_) + "/2";
}

std::string Level::label() const {
    static constexpr const char* letters = "SPDFGHIK";
    std::string s = std::to_string(n);
    s += (l >= 0 && l < 8) ? letters[l] : '?';
    return s + j.str();
}

std::optional<std::size_t> AtomicSystem::find_level(int n, int l, HalfInteger j) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i].n == n && levels[i].l == l && levels[i].j == j) return i;
    return std::nullopt;
}

std::size_t AtomicSystem::require_level(int n, int l, HalfInteger j) const {
    auto idx = find_level(n, l, j);
    if (!idx)
        throw ConfigError("level n=" + std::to_string(n) + " l=" + std::to_string(l) +
                          " j=" + j.str() + " not present in atomic data for " + species);
    return *idx;
}

std::vector<Coupling> AtomicSystem::couplings(std::size_t level) const {
    std::vector<Coupling> out;
    for (const auto& t : transitions) {
        if (t.lower == level)
            out.push_back({t.upper, t.reduced_dipole_Cm, t.angular_frequency});
        else if (t.upper == level)
            out.push_back({t.lower, t.reduced_dipole_Cm, -t.angular_frequency});
    }
    return out;
}

double AtomicSystem::hyperfine_offset(std::size_t level, HalfInteger f) const {
    const auto& offsets = levels.at(level).hyperfine_offset_J;
    auto it = offsets.find(f.twice());
    return it == offsets.end() ? 0.0 : it->second;
}

namespace {

template <class T>
T get_field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError("atomic data: missing field '" + std::string(key) + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("atomic data: bad field '" + std::string(key) + "' in " + where +
                          ": " + e.what());
    }
}

bool f_in_range(HalfInteger j, HalfInteger i, HalfInteger f) {
    return f >= abs(j - i) && f <= j + i && ((f - j - i).twice() % 2 == 0);
}

}  // namespace

AtomicSystem parse_atomic_system(const std::string& json_text, const StateSpec& state) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("atomic data: malformed JSON: ") + e.what());
    }

    AtomicSystem sys;
    sys.species = get_field<std::string>(doc, "species", "document");
    if (sys.species.empty()) throw ConfigError("atomic data: unknown species (empty name)");
    sys.mass_kg = get_field<double>(doc, "mass_kg", "document");
    if (!(sys.mass_kg > 0)) throw ConfigError("atomic data: mass_kg must be positive");
    const int i2 = get_field<int>(doc, "nuclear_spin_times_2", "document");
    if (i2 < 0) throw ConfigError("atomic data: negative nuclear spin");
    sys.nuclear_spin = HalfInteger::from_twice(i2);
    if (doc.contains("core_polarizability_au"))
        sys.core_polarizability =
            get_field<double>(doc, "core_polarizability_au", "document") * units::polarizability_au;
    if (doc.contains("truncation_n_max"))
        sys.truncation_n_max = get_field<int>(doc, "truncation_n_max", "document");

    const auto& levels = doc.contains("levels") ? doc.at("levels") : json();
    if (!levels.is_array() || levels.empty())
        throw ConfigError("atomic data: 'levels' must be a non-empty array");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto& lv = levels[k];
        const std::string where = "levels[" + std::to_string(k) + "]";
        Level level;
        level.n = get_field<int>(lv, "n", where);
        level.l = get_field<int>(lv, "l", where);
        level.j = HalfInteger::from_twice(get_field<int>(lv, "j_times_2", where));
        level.energy_J = get_field<double>(lv, "energy_Hz", where) * units::h;
        if (level.n < 1 || level.l < 0 || level.l >= level.n)
            throw ConfigError("atomic data: invalid n/l in " + where);
        if (std::abs(level.j.twice() - 2 * level.l) != 1)
            throw ConfigError("atomic data: J violates |L-1/2| <= J <= L+1/2 in " + where);
        if (lv.contains("hyperfine_offsets_Hz")) {
            const auto& hf = lv.at("hyperfine_offsets_Hz");
            if (!hf.is_object()) throw ConfigError("atomic data: hyperfine_offsets_Hz must be a map");
            for (const auto& [key, value] : hf.items()) {
                int f2 = 0;
                try {
                    f2 = std::stoi(key);
                } catch (const std::exception&) {
                    throw ConfigError("atomic data: bad hyperfine key '" + key + "' in " + where);
                }
                if (!f_in_range(level.j, sys.nuclear_spin, HalfInteger::from_twice(f2)))
                    throw ConfigError("atomic data: hyperfine F out of range in " + where);
                level.hyperfine_offset_J[f2] = value.get<double>() * units::h;
            }
        }
        for (const auto& other : sys.levels)
            if (other.n == level.n && other.l == level.l && other.j == level.j)
                throw ConfigError("atomic data: duplicate level " + level.label());
        sys.levels.push_back(std::move(level));
    }
    const double ground = std::min_element(sys.levels.begin(), sys.levels.end(),
                                           [](const Level& a, const Level& b) {
                                               return a.energy_J < b.energy_J;
                                           })->energy_J;
    if (ground != 0.0) throw ConfigError("atomic data: ground level energy must be 0");

    const auto& trans = doc.contains("transitions") ? doc.at("transitions") : json();
    if (!trans.is_array()) throw ConfigError("atomic data: 'transitions' must be an array");
    for (std::size_t k = 0; k < trans.size(); ++k) {
        const auto& tv = trans[k];
        const std::string where = "transitions[" + std::to_string(k) + "]";
        const auto lo = get_field<long long>(tv, "lower_index", where);
        const auto up = get_field<long long>(tv, "upper_index", where);
        if (lo < 0 || up < 0 || lo >= static_cast<long long>(sys.levels.size()) ||
            up >= static_cast<long long>(sys.levels.size()))
            throw ConfigError("atomic data: dangling level reference in " + where);
        Transition t;
        t.lower = static_cast<std::size_t>(lo);
        t.upper = static_cast<std::size_t>(up);
        t.reduced_dipole_Cm = get_field<double>(tv, "reduced_dipole_Cm", where);
        if (t.reduced_dipole_Cm < 0)
            throw ConfigError("atomic data: negative reduced dipole in " + where);
        const Level& a = sys.levels[t.lower];
        const Level& b = sys.levels[t.upper];
        t.angular_frequency = (b.energy_J - a.energy_J) / units::hbar;
        if (!(t.angular_frequency > 0))
            throw ConfigError("atomic data: upper level not above lower level in " + where);
        if (std::abs(a.j.twice() - b.j.twice()) > 2 || std::abs(a.l - b.l) != 1)
            throw ConfigError("atomic data: transition is not electric-dipole allowed in " + where);
        sys.transitions.push_back(t);
    }
    std::stable_sort(sys.transitions.begin(), sys.transitions.end(),
                     [](const Transition& x, const Transition& y) {
                         return x.angular_frequency < y.angular_frequency;
                     });

    sys.state_level = sys.require_level(state.n, state.l, state.j);
    if (!f_in_range(state.j, sys.nuclear_spin, state.f))
        throw ConfigError("state F=" + state.f.str() + " outside |J-I| <= F <= J+I for " +
                          sys.levels[sys.state_level].label());
    sys.state_f = state.f;
    if (sys.couplings(sys.state_level).empty())
        throw ConfigError("atomic data: no transitions from " +
                          sys.levels[sys.state_level].label());
    return sys;
}

AtomicSystem load_atomic_system(const std::filesystem::path& path, const StateSpec& state) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open atomic data file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_atomic_system(ss.str(), state);
}

std::vector<HalfInteger> hyperfine_levels(const AtomicSystem& system, std::size_t level) {
    if (level >= system.levels.size())
        throw InvalidArgument("hyperfine_levels: level does not belong to system");
    const HalfInteger j = system.levels[level].j;
    const HalfInteger i = system.nuclear_spin;
    std::vector<HalfInteger> out;
    for (int f2 = abs(j - i).twice(); f2 <= (j + i).twice(); f2 += 2)
        out.push_back(HalfInteger::from_twice(f2));
    return out;
}

double reduced_dipole_hyperfine(double reduced_dipole_JJ, HalfInteger j, HalfInteger jp,
                                HalfInteger nuclear_spin, HalfInteger f, HalfInteger fp) {
    const auto one = HalfInteger::from_int(1);
    const double sixj = wigner6j(j, jp, one, fp, f, nuclear_spin);
    if (sixj == 0.0) return 0.0;
    // (-1)^(1+F'+J+I): the exponent is an integer for valid couplings.
    const int exponent2 = 2 + fp.twice() + j.twice() + nuclear_spin.twice();
    const double phase = ((exponent2 / 2) % 2 == 0) ? 1.0 : -1.0;
    return reduced_dipole_JJ * phase * std::sqrt(fp.twice() + 1.0) * sixj;
}

double reduced_dipole_F(const AtomicSystem& system, const Transition& transition,
                        HalfInteger f, HalfInteger fp) {
    const Level& lower = system.levels.at(transition.lower);
    const Level& upper = system.levels.at(transition.upper);
    if (!f_in_range(lower.j, system.nuclear_spin, f) ||
        !f_in_range(upper.j, system.nuclear_spin, fp))
        throw InvalidArgument("reduced_dipole_F: F out of range for transition " +
                              lower.label() + " -> " + upper.label());
    return reduced_dipole_hyperfine(transition.reduced_dipole_Cm, lower.j, upper.j,
                                    system.nuclear_spin, f, fp);
}

double lande_gf(const AtomicSystem& system, std::size_t level, HalfInteger f) {
    const Level& lv = system.levels.at(level);
    const double j = lv.j.value();
    const double l = lv.l;
    const double s = 0.5;
    const double i = system.nuclear_spin.value();
    const double fv = f.value();
    if (fv == 0.0) return 0.0;
    // g_L = 1 (reduced-mass correction below 1e-5 for alkalis)
    const double gj = (j * (j + 1) - s * (s + 1) + l * (l + 1)) / (2 * j * (j + 1)) +
                      units::g_s * (j * (j + 1) + s * (s + 1) - l * (l + 1)) / (2 * j * (j + 1));
    return gj * (fv * (fv + 1) - i * (i + 1) + j * (j + 1)) / (2 * fv * (fv + 1));
}

}  // namespace evatrap
