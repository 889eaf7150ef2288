#include "evatrap/engine.hpp"
#include "evatrap/error.hpp"
#include "parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace evatrap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDegeneracyTol = 1e-9;

std::vector<Eigen::Vector3cd> unit_power_local(const FieldMap& map, const QuantizationFrame& frame,
                                               Complex phase) {
    const double s = 1.0 / std::sqrt(map.p_ref_W);
    std::vector<Eigen::Vector3cd> out(map.e_plus.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (phase * s) * frame.to_local(map.e_plus[i]);
    return out;
}

double tolerance_for(const double* evals, int dim) {
    double scale = 0;
    for (int k = 0; k < dim; ++k) scale = std::max(scale, std::abs(evals[k]));
    return kDegeneracyTol * scale;
}

Decomposition decompose(const double* evals, const Complex* vec, int dim, int sheet, HalfInteger f) {
    Decomposition d;
    const double tol = tolerance_for(evals, dim);
    for (int k = 0; k < dim; ++k)
        if (k != sheet && std::abs(evals[k] - evals[sheet]) <= tol) d.degenerate = true;
    for (int m = 0; m < dim; ++m) d.weights.emplace_back(-f.value() + m, std::norm(vec[m]));
    return d;
}

}  // namespace

//------------------------------------------------------------------------------

TrapModel::TrapModel(const TrapConfig& config, const AtomicSystem& system,
                     const std::vector<SurfaceTerm>& surfaces, const std::vector<LevelSelection>& levels)
    : axis_(config.quantization_axis) {
    if (config.beams.empty()) throw ConfigError("trap configuration has no beams");
    if (levels.empty()) throw ConfigError("no levels requested");
    try {
        frame_ = QuantizationFrame::from_axis(axis_);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }

    for (const auto& sel : levels) {
        if (sel.level >= system.levels.size()) throw ConfigError("requested level is not in the atomic system");
        const auto fs = hyperfine_levels(system, sel.level);
        if (std::find(fs.begin(), fs.end(), sel.f) == fs.end())
            throw ConfigError("F = " + sel.f.str() + " does not exist for " +
                              system.levels[sel.level].label());
        levels_.push_back({sel, sel.f.twice() + 1, {}});
    }

    const Grid* reference = nullptr;
    for (const auto& bs : config.beams) {
        Source src;
        src.name = bs.name;
        const FieldMap* first = nullptr;
        if (const auto* beam = std::get_if<Beam>(&bs.beam)) {
            if (!beam->field) throw ConfigError("beam '" + bs.name + "' has no field map");
            if (!(beam->power_W >= 0)) throw ConfigError("beam '" + bs.name + "' has a negative power");
            first = beam->field.get();
            src.forward = unit_power_local(*first, frame_, 1.0);
            src.configured = {beam->power_W, 0.0};
        } else {
            const auto& pair = std::get<BeamPair>(bs.beam);
            if (!pair.forward.field || !pair.backward.field)
                throw ConfigError("beam pair '" + bs.name + "' lacks a field map");
            if (!(pair.forward.power_W >= 0) || !(pair.backward.power_W >= 0))
                throw ConfigError("beam pair '" + bs.name + "' has a negative power");
            first = pair.forward.field.get();
            const FieldMap& b = *pair.backward.field;
            if (std::abs(first->wavelength_m - b.wavelength_m) > 1e-9 * first->wavelength_m)
                throw ConfigError("beam pair '" + bs.name + "' members have different wavelengths");
            if (!(first->grid == b.grid))
                throw ConfigError("beam pair '" + bs.name + "' members are sampled on different grids");
            src.forward = unit_power_local(*first, frame_, 1.0);
            src.backward = unit_power_local(b, frame_, std::polar(1.0, pair.relative_phase));
            src.configured = {pair.forward.power_W, pair.backward.power_W};
        }
        if (!reference) reference = &first->grid;
        else if (!(first->grid == *reference))
            throw ConfigError("grid mismatch: beam '" + bs.name + "' is sampled on a different grid");

        const double omega = angular_frequency_of(first->wavelength_m);
        for (const auto& lv : levels_) {
            const auto pol = polarizabilities(system, lv.selection.level, lv.selection.f, omega,
                                              config.polarizability);
            const SpinMatrices spins(lv.selection.f);
            std::array<Eigen::MatrixXcd, 9> basis;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    stark_form(pol, spins, Eigen::Vector3cd::Unit(i), Eigen::Vector3cd::Unit(j),
                               basis[3 * i + j]);
            src.pol.push_back(pol);
            src.basis.push_back(std::move(basis));
        }

        // sliders
        const double max_or = bs.max_power_W;
        auto range = [&](double p) { return max_or > 0 ? max_or : std::max(4 * p, 1e-3); };
        if (std::holds_alternative<Beam>(bs.beam)) {
            sliders_.push_back({bs.name, sources_.size(), Slider::Member::both, src.configured.forward,
                                range(src.configured.forward)});
        } else if (!bs.split && src.configured.forward == src.configured.backward) {
            sliders_.push_back({bs.name, sources_.size(), Slider::Member::both, src.configured.forward,
                                range(src.configured.forward)});
        } else {
            sliders_.push_back({bs.name + ".forward", sources_.size(), Slider::Member::forward,
                                src.configured.forward, range(src.configured.forward)});
            sliders_.push_back({bs.name + ".backward", sources_.size(), Slider::Member::backward,
                                src.configured.backward, range(src.configured.backward)});
        }
        sources_.push_back(std::move(src));
    }
    grid_ = *reference;

    const std::size_t n = grid_.size();
    mask_.assign(n, 0);
    for (auto& lv : levels_) lv.cp.assign(n, 0.0);
    for (const auto& term : surfaces) {
        if (term.c3.size() != levels_.size())
            throw ConfigError("surface C3 list does not match the requested levels");
        surfaces_.push_back(term.surface);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = grid_.point(i);
            for (std::size_t l = 0; l < levels_.size(); ++l) {
                const auto v = cp_potential(term.surface, term.c3[l], p);
                if (v.masked) mask_[i] = 1;
                levels_[l].cp[i] += v.energy;
            }
        }
    }
}

Powers TrapModel::default_powers() const {
    Powers p;
    for (const auto& s : sources_) p.push_back(s.configured);
    return p;
}

Powers TrapModel::powers_from_sliders(std::span<const double> values) const {
    if (values.size() != sliders_.size())
        throw InvalidArgument("expected " + std::to_string(sliders_.size()) + " slider values, got " +
                              std::to_string(values.size()));
    Powers p = default_powers();
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto& s = sliders_[k];
        if (!std::isfinite(values[k]) || values[k] < 0)
            throw InvalidArgument("slider '" + s.name + "' power must be non-negative");
        if (s.member != Slider::Member::backward) p[s.source].forward = values[k];
        if (s.member != Slider::Member::forward) p[s.source].backward = values[k];
    }
    return p;
}

void TrapModel::check_powers(const Powers& powers) const {
    if (powers.size() != sources_.size())
        throw InvalidArgument("expected powers for " + std::to_string(sources_.size()) + " sources, got " +
                              std::to_string(powers.size()));
    for (const auto& p : powers)
        if (!(p.forward >= 0) || !(p.backward >= 0) || !std::isfinite(p.forward) || !std::isfinite(p.backward))
            throw InvalidArgument("beam powers must be finite and non-negative");
}

TrapModel TrapModel::line(int axis, const Eigen::Vector3d& through, std::vector<std::size_t> levels) const {
    if (axis < 0 || axis > 2) throw InvalidArgument("line axis must be 0, 1 or 2");
    if (levels.empty())
        for (std::size_t l = 0; l < levels_.size(); ++l) levels.push_back(l);
    for (auto l : levels)
        if (l >= levels_.size()) throw InvalidArgument("level index out of range");

    std::size_t fixed[3];
    for (int a = 0; a < 3; ++a) {
        const auto& ax = grid_.axis(a);
        fixed[a] = 0;
        for (std::size_t i = 1; i < ax.size(); ++i)
            if (std::abs(ax[i] - through(a)) < std::abs(ax[fixed[a]] - through(a))) fixed[a] = i;
    }
    TrapModel m;
    m.axis_ = axis_;
    m.frame_ = frame_;
    m.sliders_ = sliders_;
    m.surfaces_ = surfaces_;
    for (int a = 0; a < 3; ++a) {
        auto& dst = a == 0 ? m.grid_.x : a == 1 ? m.grid_.y : m.grid_.z;
        dst = a == axis ? grid_.axis(a) : std::vector<double>{grid_.axis(a)[fixed[a]]};
    }
    std::vector<std::size_t> points;
    for (std::size_t i = 0; i < grid_.axis(axis).size(); ++i) {
        std::size_t idx[3] = {fixed[0], fixed[1], fixed[2]};
        idx[axis] = i;
        points.push_back(grid_.index(idx[0], idx[1], idx[2]));
    }
    for (auto p : points) m.mask_.push_back(mask_[p]);
    for (auto l : levels) {
        LevelData lv{levels_[l].selection, levels_[l].dim, {}};
        for (auto p : points) lv.cp.push_back(levels_[l].cp[p]);
        m.levels_.push_back(std::move(lv));
    }
    for (const auto& src : sources_) {
        Source s;
        s.name = src.name;
        s.configured = src.configured;
        for (auto p : points) {
            s.forward.push_back(src.forward[p]);
            if (!src.backward.empty()) s.backward.push_back(src.backward[p]);
        }
        for (auto l : levels) {
            s.pol.push_back(src.pol[l]);
            s.basis.push_back(src.basis[l]);
        }
        m.sources_.push_back(std::move(s));
    }
    return m;
}

Eigen::Vector3cd TrapModel::source_field(std::size_t s, std::size_t point, const SourcePower& p) const {
    const auto& src = sources_[s];
    Eigen::Vector3cd local = std::sqrt(p.forward) * src.forward[point];
    if (!src.backward.empty()) local += std::sqrt(p.backward) * src.backward[point];
    return local(0) * frame_.e1.cast<Complex>() + local(1) * frame_.e2.cast<Complex>() +
           local(2) * frame_.axis.cast<Complex>();
}

void TrapModel::hamiltonian(std::size_t level, std::size_t point, const Powers& powers,
                            Eigen::MatrixXcd& out) const {
    const int dim = levels_[level].dim;
    out.setZero(dim, dim);
    for (std::size_t s = 0; s < sources_.size(); ++s) {
        const auto& src = sources_[s];
        Eigen::Vector3cd e = std::sqrt(powers[s].forward) * src.forward[point];
        if (!src.backward.empty()) e += std::sqrt(powers[s].backward) * src.backward[point];
        const auto& basis = src.basis[level];
        for (int i = 0; i < 3; ++i) {
            if (e(i) == 0.0) continue;
            for (int j = 0; j < 3; ++j) {
                const Complex t = std::conj(e(i)) * e(j);
                if (t != 0.0) out.noalias() += t * basis[3 * i + j];
            }
        }
    }
    out = (0.5 * (out + out.adjoint())).eval();
    out.diagonal().array() += levels_[level].cp[point];
}

//------------------------------------------------------------------------------

std::vector<double> TrapResult::sheet(std::size_t level, int k) const {
    const auto& lr = levels[level];
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lr.energy(i, k);
    return out;
}

TrapResult compute_trap(const TrapModel& model, const Powers& powers, const ComputeOptions& options) {
    model.check_powers(powers);
    TrapResult r;
    r.grid = model.grid();
    r.mask = model.mask();
    r.surfaces = model.surfaces();
    const std::size_t n = model.point_count();
    for (std::size_t l = 0; l < model.level_count(); ++l) {
        LevelResult lr;
        lr.level = model.level(l);
        lr.dim = model.dim(l);
        lr.energy_J.assign(n * lr.dim, kNaN);
        if (options.eigenvectors) lr.eigenvectors.assign(n * lr.dim * lr.dim, Complex(0));
        r.levels.push_back(std::move(lr));
    }

    const auto mode = options.eigenvectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    parallel_chunks(n, options.threads, [&](std::size_t lo, std::size_t hi) {
        Eigen::MatrixXcd h;
        for (std::size_t l = 0; l < r.levels.size(); ++l) {
            auto& lr = r.levels[l];
            const int dim = lr.dim;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dim);
            for (std::size_t i = lo; i < hi; ++i) {
                if (r.mask[i]) continue;
                model.hamiltonian(l, i, powers, h);
                solver.compute(h, mode);
                if (solver.info() != Eigen::Success)
                    throw PhysicsError("eigensolver failed at grid point " + std::to_string(i));
                for (int k = 0; k < dim; ++k) lr.energy_J[i * dim + k] = solver.eigenvalues()(k);
                if (options.eigenvectors) {
                    Complex* dst = &lr.eigenvectors[i * dim * dim];
                    for (int k = 0; k < dim; ++k)
                        for (int m = 0; m < dim; ++m) dst[k * dim + m] = solver.eigenvectors()(m, k);
                }
            }
        }
    });

    if (options.eigenvectors) {
        const auto shape = r.grid.shape();
        const std::size_t stride[3] = {shape[1] * shape[2], shape[2], 1};
        for (auto& lr : r.levels) {
            const int dim = lr.dim;
            lr.crossing.assign(n * dim, 0);
            parallel_chunks(n, options.threads, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    if (r.mask[i]) continue;
                    const std::size_t idx[3] = {i / stride[0], (i / stride[1]) % shape[1], i % shape[2]};
                    for (int a = 0; a < 3; ++a) {
                        if (idx[a] == 0) continue;
                        const std::size_t q = i - stride[a];
                        if (r.mask[q]) continue;
                        const double* eq = &lr.energy_J[q * dim];
                        const double tol = tolerance_for(eq, dim);
                        for (int k = 0; k < dim; ++k) {
                            const Complex* vk = &lr.eigenvectors[(i * dim + k) * dim];
                            double overlap = 0;
                            for (int j = 0; j < dim; ++j) {
                                if (std::abs(eq[j] - eq[k]) > tol) continue;
                                const Complex* vj = &lr.eigenvectors[(q * dim + j) * dim];
                                Complex s = 0;
                                for (int m = 0; m < dim; ++m) s += std::conj(vj[m]) * vk[m];
                                overlap += std::norm(s);
                            }
                            if (overlap < 0.5) lr.crossing[i * dim + k] = 1;
                        }
                    }
                }
            });
        }
    }
    return r;
}

TrapResult compute_trap(const TrapConfig& config, const AtomicSystem& system,
                        const std::vector<SurfaceTerm>& surfaces,
                        const std::vector<LevelSelection>& levels, const ComputeOptions& options) {
    const TrapModel model(config, system, surfaces, levels);
    return compute_trap(model, model.default_powers(), options);
}

//------------------------------------------------------------------------------

TrapProperties analyze_potential(const Grid& grid, std::span<const double> u,
                                 std::span<const std::uint8_t> mask, int axis, double mass) {
    const std::size_t n = grid.size();
    if (u.size() != n || (!mask.empty() && mask.size() != n))
        throw InvalidArgument("potential and mask must match the grid");
    if (axis < 0 || axis > 2) throw InvalidArgument("trapping axis must be 0, 1 or 2");
    if (!(mass > 0)) throw InvalidArgument("mass must be positive");
    const auto shape = grid.shape();
    if (shape[axis] < 3) throw InvalidArgument("trapping axis has fewer than 3 grid points");
    const std::size_t stride[3] = {shape[1] * shape[2], shape[2], 1};

    auto valid = [&](std::size_t i) { return (mask.empty() || !mask[i]) && std::isfinite(u[i]); };
    auto coord = [&](std::size_t i, int a) { return (i / stride[a]) % shape[a]; };

    TrapProperties tp;
    std::optional<std::size_t> best, lowest;
    for (std::size_t i = 0; i < n; ++i) {
        if (!valid(i)) continue;
        if (!lowest || u[i] < u[*lowest]) lowest = i;
        bool ok = true;
        for (int a = 0; a < 3 && ok; ++a) {
            const std::size_t c = coord(i, a);
            const bool has_lo = c > 0, has_hi = c + 1 < shape[a];
            if (a == axis) {
                ok = has_lo && has_hi && valid(i - stride[a]) && valid(i + stride[a]) &&
                     u[i] < u[i - stride[a]] && u[i] < u[i + stride[a]];
            } else {
                // touching the material is falling onto the surface, not a trap
                if (has_lo && (!valid(i - stride[a]) || u[i] > u[i - stride[a]])) ok = false;
                if (has_hi && (!valid(i + stride[a]) || u[i] > u[i + stride[a]])) ok = false;
            }
        }
        if (ok && (!best || u[i] < u[*best])) best = i;
    }
    if (!best) {
        if (lowest) {
            tp.index = *lowest;
            tp.position = grid.point(*lowest);
            tp.minimum_mK = units::to_mK(u[*lowest]);
        }
        return tp;
    }

    const std::size_t p = *best;
    tp.stable = true;
    tp.index = p;
    tp.position = grid.point(p);
    tp.minimum_mK = units::to_mK(u[p]);

    // escape barrier on each side of the trapping axis
    double barrier[2];
    for (int side = 0; side < 2; ++side) {
        double top = -std::numeric_limits<double>::infinity();
        std::size_t c = coord(p, axis), i = p;
        while (side == 0 ? c > 0 : c + 1 < shape[axis]) {
            i = side == 0 ? i - stride[axis] : i + stride[axis];
            c = side == 0 ? c - 1 : c + 1;
            if (!valid(i)) break;
            top = std::max(top, u[i]);
        }
        barrier[side] = top;
    }
    tp.depth_mK = units::to_mK(std::min(barrier[0], barrier[1]) - u[p]);

    for (int a = 0; a < 3; ++a) {
        const std::size_t c = coord(p, a);
        if (shape[a] < 5 || c < 2 || c + 2 >= shape[a]) continue;
        bool ok = true;
        for (int d = -2; d <= 2; ++d) ok = ok && valid(p + d * static_cast<std::ptrdiff_t>(stride[a]));
        if (!ok) continue;
        const auto& ax = grid.axis(a);
        Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
        Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
        for (int d = -2; d <= 2; ++d) {
            const double x = ax[c + d] - ax[c];
            const double y = u[p + d * static_cast<std::ptrdiff_t>(stride[a])] - u[p];
            const Eigen::Vector3d row(1.0, x, x * x);
            m += row * row.transpose();
            rhs += row * y;
        }
        const Eigen::Vector3d coef = m.ldlt().solve(rhs);
        if (!(coef(2) > 0)) continue;
        tp.frequency_Hz[a] = std::sqrt(2 * coef(2) / mass) / (2 * units::pi);
        const double shift = -coef(1) / (2 * coef(2));
        if (std::abs(shift) <= std::abs(ax[c + 2] - ax[c])) tp.position(a) = ax[c] + shift;
    }
    return tp;
}

TrapProperties trap_properties(const TrapResult& result, std::size_t level, int sheet, int axis,
                               double mass) {
    if (level >= result.levels.size()) throw InvalidArgument("level index out of range");
    const auto& lr = result.levels[level];
    if (sheet < 0 || sheet >= lr.dim) throw InvalidArgument("sheet index out of range");
    const auto u = result.sheet(level, sheet);
    TrapProperties tp = analyze_potential(result.grid, u, result.mask, axis, mass);
    if (std::isfinite(lr.energy(tp.index, 0)))
        tp.broadening_mK = units::to_mK(lr.energy(tp.index, lr.dim - 1) - lr.energy(tp.index, 0));
    for (const auto& s : result.surfaces) {
        const double d = s.signed_distance(tp.position);
        if (!tp.surface_distance_m || d < *tp.surface_distance_m) tp.surface_distance_m = d;
    }
    return tp;
}

Decomposition eigenstate_decomposition(const TrapResult& result, std::size_t level, std::size_t point,
                                       int sheet) {
    if (level >= result.levels.size()) throw InvalidArgument("level index out of range");
    const auto& lr = result.levels[level];
    if (point >= result.grid.size()) throw InvalidArgument("point outside the grid");
    if (sheet < 0 || sheet >= lr.dim) throw InvalidArgument("sheet index out of range");
    if (result.mask[point]) throw InvalidArgument("point is masked (inside material)");
    if (lr.eigenvectors.empty()) throw InvalidArgument("result was computed without eigenvectors");
    return decompose(&lr.energy_J[point * lr.dim], &lr.eigenvectors[(point * lr.dim + sheet) * lr.dim],
                     lr.dim, sheet, lr.level.f);
}

Decomposition eigenstate_decomposition(const TrapModel& model, const Powers& powers, std::size_t level,
                                       std::size_t point, int sheet) {
    model.check_powers(powers);
    if (level >= model.level_count()) throw InvalidArgument("level index out of range");
    if (point >= model.point_count()) throw InvalidArgument("point outside the grid");
    const int dim = model.dim(level);
    if (sheet < 0 || sheet >= dim) throw InvalidArgument("sheet index out of range");
    if (model.masked(point)) throw InvalidArgument("point is masked (inside material)");
    Eigen::MatrixXcd h;
    model.hamiltonian(level, point, powers, h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    const Eigen::VectorXd evals = solver.eigenvalues();
    const Eigen::VectorXcd vec = solver.eigenvectors().col(sheet);
    return decompose(evals.data(), vec.data(), dim, sheet, model.level(level).f);
}

}  // namespace evatrap
