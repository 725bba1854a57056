#include "magarray/pipeline.hpp"

#include "magarray/field_kernel.hpp"

#include <chrono>

namespace magarray {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

FieldMap field_map(const ArrayModel& array, std::span<const double> jv, const SampleGrid& grid,
                   const std::string& solver_mode) {
    FieldMap map;
    map.grid = grid;
    const auto samples = superpose(array, jv, grid.points);
    map.b.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) map.b[i] = samples[i].b;
    map.provenance.kind = Provenance::Kind::Simulated;
    map.provenance.solver_mode = solver_mode;
    map.provenance.temperature = array.temperature;
    return map;
}

SimulationResult simulate(const ArrayModel& array, const SampleGrid& grid, const SimulationOptions& opt) {
    SimulationResult r;
    auto t0 = std::chrono::steady_clock::now();
    const auto chars = resolve_characteristics(array, opt.overrides);
    std::optional<InteractionMatrix> own;
    const InteractionMatrix* matrix = opt.matrix;
    if (opt.mode != SolverMode::Ideal && !matrix) {
        own = assemble(array);
        matrix = &*own;
    }
    r.timings.assemble_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    r.solution = opt.mode == SolverMode::Ideal ? solve_ideal(array, chars) : solve(opt.mode, array, *matrix, chars, opt.fp);
    r.timings.solve_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    r.map = field_map(array, r.solution.jv, grid, to_string(opt.mode));
    const Vec3 origin = Vec3::Zero();
    r.isocenter_b = superpose(array, r.solution.jv, std::span<const Vec3>(&origin, 1)).front().b;
    r.timings.field_s = seconds_since(t0);

    r.metrics = metrics(r.map);
    return r;
}

ArrayModel with_uniform_material(const ArrayModel& array, const std::string& material_id) {
    if (!array.materials.count(material_id)) throw ReferenceError("unknown material '" + material_id + "'");
    ArrayModel out = array;
    for (auto& m : out.magnets) m.material_id = material_id;
    return out;
}

}  // namespace magarray
