#pragma once

#include "magarray/fieldmap.hpp"
#include "magarray/interaction.hpp"
#include "magarray/metrics.hpp"

#include <optional>
#include <string>

namespace magarray {

/// Field of all magnets with the given working points on `grid`.
FieldMap field_map(const ArrayModel& array, std::span<const double> jv, const SampleGrid& grid,
                   const std::string& solver_mode);

struct SimulationTimings {
    double assemble_s = 0.0;
    double solve_s = 0.0;
    double field_s = 0.0;
};

struct SimulationResult {
    WorkingPointSolution solution;
    FieldMap map;
    HomogeneityMetrics metrics;
    Vec3 isocenter_b = Vec3::Zero();
    SimulationTimings timings;
};

struct SimulationOptions {
    SolverMode mode = SolverMode::Nonlinear;
    FixedPointConfig fp;
    const InteractionMatrix* matrix = nullptr;           ///< reused when given
    const CharacteristicOverrides* overrides = nullptr;
};

/// Assemble (unless ideal or supplied), solve, and sample the field.
SimulationResult simulate(const ArrayModel& array, const SampleGrid& grid, const SimulationOptions& opt = {});

/// Copy of `array` with every magnet assigned to `material_id`.
ArrayModel with_uniform_material(const ArrayModel& array, const std::string& material_id);

}  // namespace magarray
