#pragma once

#include "magarray/core.hpp"
#include "magarray/geometry.hpp"
#include "magarray/material.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace magarray {

/// Dense pairwise coupling between magnets.
///
/// coupling(i, p) = mu0 * (H of magnet p with J_v = 1 T at the barycentre of
/// magnet i) . v_i; the row is the receiving magnet. The diagonal is zero.
struct InteractionMatrix {
    Eigen::MatrixXd coupling;
    Eigen::VectorXd demag;  ///< per-magnet demagnetizing factor

    std::size_t size() const { return static_cast<std::size_t>(demag.size()); }
    /// Coefficient of source magnet p acting on target magnet i.
    double coefficient(std::size_t p, std::size_t i) const { return coupling(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)); }
};

InteractionMatrix assemble(const ArrayModel& array);

/// Recomputes the rows and columns of `moved` magnets only. Falls back to a
/// full assembly when more than half of the magnets moved.
InteractionMatrix reassemble(const InteractionMatrix& base, const ArrayModel& array,
                             std::span<const std::size_t> moved);

enum class SolverMode { Ideal, Linear, Nonlinear };

std::string to_string(SolverMode m);
SolverMode solver_mode_from_string(const std::string& s);

/// Per-magnet constitutive law after temperature resolution and any
/// per-magnet overrides. J(H) = scale * (shape(H) + jr) when a curve is
/// present (shape(0) = 0), otherwise scale * (recoil * H + jr).
struct Characteristic {
    double jr = 0.0;       ///< T
    double recoil = 0.0;   ///< mu0 * mu_M, T per A/m
    double scale = 1.0;
    std::shared_ptr<const HJCurve> shape;

    double linear(double h) const { return scale * (recoil * h + jr); }
    double nonlinear(double h) const;
    double remanence() const { return scale * jr; }
};

/// Per-draw deviations from the nominal material laws.
struct CharacteristicOverrides {
    std::vector<double> remanence;              ///< per magnet; empty = temperature law
    std::map<std::string, double> curve_scale;  ///< per material id; missing = 1
};

std::vector<Characteristic> resolve_characteristics(const ArrayModel& array,
                                                    const CharacteristicOverrides* overrides = nullptr);

struct FixedPointConfig {
    double tol = 1e-7;
    int max_iters = 200;
    std::optional<double> mu_fp;  ///< splitting slope, T per A/m; default: midpoint of curve slopes
};

struct WorkingPointSolution {
    std::vector<double> hv;  ///< A/m
    std::vector<double> jv;  ///< T
    SolverMode mode = SolverMode::Ideal;
    int iterations = 0;
    double residual_norm = 0.0;      ///< relative; FP: last max relative change of H_v
    std::vector<double> history;     ///< FP convergence history
    int nonmonotone_steps = 0;       ///< FP steps after the fifth whose change grew (diagnostic only)
    double mu_fp = 0.0;
};

/// J_v = J_r(T); H_v reported as the self-demagnetized value -aleph*J_v/mu0
/// (a plotting convention; the ideal model has no reaction field).
WorkingPointSolution solve_ideal(const ArrayModel& array, std::span<const Characteristic> chars);
WorkingPointSolution solve_ideal(const ArrayModel& array);

/// Direct dense LU solve of the linear working-point system.
WorkingPointSolution solve_linear(const ArrayModel& array, const InteractionMatrix& matrix,
                                  std::span<const Characteristic> chars);
WorkingPointSolution solve_linear(const ArrayModel& array, const InteractionMatrix& matrix);

/// Fixed-point iteration: J = mu_fp*H + Q with Q = J(H) - mu_fp*H lagged one
/// iteration; the linear system is factored once and re-solved per step.
WorkingPointSolution solve_nonlinear(const ArrayModel& array, const InteractionMatrix& matrix,
                                     std::span<const Characteristic> chars, const FixedPointConfig& cfg = {});
WorkingPointSolution solve_nonlinear(const ArrayModel& array, const InteractionMatrix& matrix,
                                     const FixedPointConfig& cfg = {});

WorkingPointSolution solve(SolverMode mode, const ArrayModel& array, const InteractionMatrix& matrix,
                           std::span<const Characteristic> chars, const FixedPointConfig& cfg = {});

/// Per-magnet table: index ring layer H_v J_v.
std::string format_working_points(const ArrayModel& array, const WorkingPointSolution& sol);

}  // namespace magarray
