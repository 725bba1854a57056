#include "magarray/interaction.hpp"

#include "magarray/field_kernel.hpp"
#include "magarray/parallel.hpp"
#include "magarray/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace magarray {

namespace {

double pair_coupling(const BarMagnet& source, const BarMagnet& target) {
    return kMu0 * bar_field_global(source, 1.0, target.center()).h.dot(target.axis_v());
}

void fill_row(Eigen::MatrixXd& c, const std::vector<BarMagnet>& mags, std::size_t i) {
    for (std::size_t p = 0; p < mags.size(); ++p)
        c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = p == i ? 0.0 : pair_coupling(mags[p], mags[i]);
}

void check_sizes(const ArrayModel& array, const InteractionMatrix& matrix, std::size_t nchars) {
    if (matrix.size() != array.magnets.size() || nchars != array.magnets.size())
        throw DomainError("solver: matrix/characteristics do not match the array (" + std::to_string(matrix.size()) +
                          " vs " + std::to_string(array.magnets.size()) + " magnets)");
}

// A = diag(mu0 + aleph*s) - C diag(s);  b = -aleph*q + C q.
Eigen::MatrixXd system_matrix(const InteractionMatrix& m, const Eigen::VectorXd& slope) {
    Eigen::MatrixXd a = -(m.coupling * slope.asDiagonal());
    a.diagonal().array() += kMu0 + m.demag.array() * slope.array();
    return a;
}

Eigen::VectorXd system_rhs(const InteractionMatrix& m, const Eigen::VectorXd& q) {
    return m.coupling * q - m.demag.cwiseProduct(q);
}

Eigen::PartialPivLU<Eigen::MatrixXd> factor(const Eigen::MatrixXd& a) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    if (a.rows() > 0) {
        const double rcond = lu.rcond();
        if (!(rcond > 1e-12))
            throw NumericalError("working-point system is singular or ill-conditioned (condition estimate " +
                                 text::fmt(1.0 / rcond) + ")");
    }
    return lu;
}

}  // namespace

InteractionMatrix assemble(const ArrayModel& array) {
    const std::size_t n = array.magnets.size();
    InteractionMatrix m;
    m.coupling = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.demag.resize(static_cast<Eigen::Index>(n));
    if (auto pair = find_overlap(array.magnets)) {
        throw GeometryError("assemble: magnets " + std::to_string(array.magnets[pair->first].index) + " and " +
                            std::to_string(array.magnets[pair->second].index) + " overlap");
    }
    for (std::size_t i = 0; i < n; ++i) m.demag[static_cast<Eigen::Index>(i)] = demag_factor(array.magnets[i].half_dims());
    parallel_for(n, [&](std::size_t i) { fill_row(m.coupling, array.magnets, i); });
    return m;
}

InteractionMatrix reassemble(const InteractionMatrix& base, const ArrayModel& array, std::span<const std::size_t> moved) {
    const std::size_t n = array.magnets.size();
    if (base.size() != n) throw DomainError("reassemble: base matrix size mismatch");
    if (2 * moved.size() > n) return assemble(array);
    InteractionMatrix m = base;
    for (std::size_t i : moved) m.demag[static_cast<Eigen::Index>(i)] = demag_factor(array.magnets[i].half_dims());
    parallel_for(moved.size(), [&](std::size_t k) { fill_row(m.coupling, array.magnets, moved[k]); });
    // Columns: every target's response to each moved source.
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t p : moved) {
            if (p == i) continue;
            m.coupling(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = pair_coupling(array.magnets[p], array.magnets[i]);
        }
    });
    return m;
}

std::string to_string(SolverMode m) {
    switch (m) {
        case SolverMode::Ideal: return "ideal";
        case SolverMode::Linear: return "linear";
        case SolverMode::Nonlinear: return "nonlinear";
    }
    return "?";
}

SolverMode solver_mode_from_string(const std::string& s) {
    if (s == "ideal") return SolverMode::Ideal;
    if (s == "linear") return SolverMode::Linear;
    if (s == "nonlinear") return SolverMode::Nonlinear;
    throw ConfigError("unknown solver mode '" + s + "' (expected ideal|linear|nonlinear)");
}

double Characteristic::nonlinear(double h) const {
    if (!shape) throw ReferenceError("nonlinear solve requires an H-J curve for every material");
    return scale * ((*shape)(h) + jr);
}

std::vector<Characteristic> resolve_characteristics(const ArrayModel& array, const CharacteristicOverrides* ov) {
    const std::size_t n = array.magnets.size();
    if (ov && !ov->remanence.empty() && ov->remanence.size() != n)
        throw DomainError("remanence overrides: one value per magnet required");

    struct Resolved {
        double jr, recoil;
        std::shared_ptr<const HJCurve> shape;
    };
    std::map<std::string, Resolved> per_material;
    for (const auto& [id, mat] : array.materials) {
        const MaterialState st = material_at_temperature(mat, array.temperature);
        Resolved r{st.jr, kMu0 * mat.mu_m, nullptr};
        if (st.scaled_curve) {
            const double at_zero = (*st.scaled_curve)(0.0);
            r.shape = std::make_shared<const HJCurve>(st.scaled_curve->transformed(1.0, 1.0, -at_zero));
        }
        per_material.emplace(id, std::move(r));
    }

    std::vector<Characteristic> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& mag = array.magnets[i];
        auto it = per_material.find(mag.material_id);
        if (it == per_material.end())
            throw ReferenceError("magnet " + std::to_string(mag.index) + ": unknown material '" + mag.material_id + "'");
        Characteristic& c = out[i];
        c.jr = it->second.jr;
        c.recoil = it->second.recoil;
        c.shape = it->second.shape;
        if (ov) {
            if (!ov->remanence.empty()) c.jr = ov->remanence[i];
            if (auto s = ov->curve_scale.find(mag.material_id); s != ov->curve_scale.end()) c.scale = s->second;
        }
    }
    return out;
}

WorkingPointSolution solve_ideal(const ArrayModel& array, std::span<const Characteristic> chars) {
    if (chars.size() != array.magnets.size()) throw DomainError("solve_ideal: one characteristic per magnet required");
    WorkingPointSolution sol;
    sol.mode = SolverMode::Ideal;
    sol.jv.resize(chars.size());
    sol.hv.resize(chars.size());
    for (std::size_t i = 0; i < chars.size(); ++i) {
        sol.jv[i] = chars[i].remanence();
        sol.hv[i] = -demag_factor(array.magnets[i].half_dims()) * sol.jv[i] / kMu0;
    }
    return sol;
}

WorkingPointSolution solve_ideal(const ArrayModel& array) {
    const auto chars = resolve_characteristics(array);
    return solve_ideal(array, chars);
}

WorkingPointSolution solve_linear(const ArrayModel& array, const InteractionMatrix& matrix,
                                  std::span<const Characteristic> chars) {
    check_sizes(array, matrix, chars.size());
    const auto n = static_cast<Eigen::Index>(chars.size());
    Eigen::VectorXd slope(n), q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        slope[i] = chars[i].scale * chars[i].recoil;
        q[i] = chars[i].remanence();
    }
    const Eigen::MatrixXd a = system_matrix(matrix, slope);
    const Eigen::VectorXd b = system_rhs(matrix, q);
    const auto lu = factor(a);
    const Eigen::VectorXd h = lu.solve(b);

    WorkingPointSolution sol;
    sol.mode = SolverMode::Linear;
    const double bnorm = b.norm();
    sol.residual_norm = bnorm > 0.0 ? (a * h - b).norm() / bnorm : 0.0;
    if (!(sol.residual_norm < 1e-12))
        throw NumericalError("solve_linear: relative residual " + text::fmt(sol.residual_norm) + " exceeds 1e-12");
    sol.hv.assign(h.data(), h.data() + n);
    sol.jv.resize(chars.size());
    for (Eigen::Index i = 0; i < n; ++i) sol.jv[i] = slope[i] * h[i] + q[i];
    sol.iterations = 1;
    return sol;
}

WorkingPointSolution solve_linear(const ArrayModel& array, const InteractionMatrix& matrix) {
    const auto chars = resolve_characteristics(array);
    return solve_linear(array, matrix, chars);
}

WorkingPointSolution solve_nonlinear(const ArrayModel& array, const InteractionMatrix& matrix,
                                     std::span<const Characteristic> chars, const FixedPointConfig& cfg) {
    check_sizes(array, matrix, chars.size());
    const auto n = static_cast<Eigen::Index>(chars.size());
    for (const auto& c : chars)
        if (!c.shape) throw ReferenceError("solve_nonlinear: every material needs an H-J curve");

    double mu_fp = 0.0;
    if (cfg.mu_fp) {
        mu_fp = *cfg.mu_fp;
    } else {
        double smin = std::numeric_limits<double>::infinity(), smax = -smin;
        const HJCurve* last = nullptr;
        double last_scale = 0.0;
        for (const auto& c : chars) {
            if (c.shape.get() == last && c.scale == last_scale) continue;
            last = c.shape.get();
            last_scale = c.scale;
            smin = std::min(smin, c.scale * c.shape->min_slope());
            smax = std::max(smax, c.scale * c.shape->max_slope());
        }
        mu_fp = n > 0 ? 0.5 * (smin + smax) : 0.0;
    }
    if (!(mu_fp >= 0.0) || !std::isfinite(mu_fp)) throw ConfigError("solve_nonlinear: invalid splitting slope");

    const Eigen::VectorXd slope = Eigen::VectorXd::Constant(n, mu_fp);
    const auto lu = factor(system_matrix(matrix, slope));

    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q[i] = chars[i].remanence();  // residual R = 0
    Eigen::VectorXd h = lu.solve(system_rhs(matrix, q));

    WorkingPointSolution sol;
    sol.mode = SolverMode::Nonlinear;
    sol.mu_fp = mu_fp;
    bool converged = n == 0;
    int it = 1;
    while (!converged && it < cfg.max_iters) {
        for (Eigen::Index i = 0; i < n; ++i) q[i] = chars[i].nonlinear(h[i]) - mu_fp * h[i];
        const Eigen::VectorXd next = lu.solve(system_rhs(matrix, q));
        ++it;
        const double scale = next.cwiseAbs().maxCoeff();
        const double change = scale > 0.0 ? (next - h).cwiseAbs().maxCoeff() / scale : 0.0;
        if (sol.history.size() >= 5 && change > sol.history.back()) ++sol.nonmonotone_steps;
        sol.history.push_back(change);
        h = next;
        converged = change < cfg.tol;
    }
    if (!converged) {
        throw ConvergenceError("solve_nonlinear: no convergence after " + std::to_string(cfg.max_iters) +
                                   " iterations (last relative change " +
                                   (sol.history.empty() ? std::string("n/a") : text::fmt(sol.history.back())) + ")",
                               sol.history);
    }
    sol.iterations = it;
    sol.residual_norm = sol.history.empty() ? 0.0 : sol.history.back();
    sol.hv.assign(h.data(), h.data() + n);
    sol.jv.resize(chars.size());
    for (Eigen::Index i = 0; i < n; ++i) sol.jv[i] = chars[i].nonlinear(h[i]);
    return sol;
}

WorkingPointSolution solve_nonlinear(const ArrayModel& array, const InteractionMatrix& matrix,
                                     const FixedPointConfig& cfg) {
    const auto chars = resolve_characteristics(array);
    return solve_nonlinear(array, matrix, chars, cfg);
}

WorkingPointSolution solve(SolverMode mode, const ArrayModel& array, const InteractionMatrix& matrix,
                           std::span<const Characteristic> chars, const FixedPointConfig& cfg) {
    switch (mode) {
        case SolverMode::Ideal: return solve_ideal(array, chars);
        case SolverMode::Linear: return solve_linear(array, matrix, chars);
        case SolverMode::Nonlinear: return solve_nonlinear(array, matrix, chars, cfg);
    }
    throw ConfigError("unknown solver mode");
}

std::string format_working_points(const ArrayModel& array, const WorkingPointSolution& sol) {
    std::string out = "# mode " + to_string(sol.mode) + " iterations " + std::to_string(sol.iterations) + "\n";
    out += "# index ring layer H_v[A/m] J_v[T]\n";
    for (std::size_t i = 0; i < array.magnets.size(); ++i) {
        const auto& m = array.magnets[i];
        out += std::to_string(m.index) + " " + std::to_string(m.ring) + " " + std::to_string(m.layer) + " " +
               text::fmt(sol.hv[i]) + " " + text::fmt(sol.jv[i]) + "\n";
    }
    return out;
}

}  // namespace magarray
