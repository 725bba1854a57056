#pragma once

#include "magarray/geometry.hpp"
#include "magarray/interaction.hpp"
#include "magarray/sampling.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace magarray {

struct RemanenceSpread {
    std::optional<double> mean;  ///< T; default J_r at the array temperature
    double std = 0.0;            ///< T
};

struct VariabilityConfig {
    std::size_t draws = 1000;
    std::uint64_t seed = 42;
    SolverMode mode = SolverMode::Nonlinear;
    FixedPointConfig fp;
    GridSpec grid;

    bool remanence = false;
    std::map<std::string, RemanenceSpread> remanence_spread;  ///< per material id

    bool characterization = false;
    double characterization_std = 0.0075;
    bool characterization_per_material = false;

    bool orientation = false;
    double orientation_min_deg = 0.68;
    double orientation_max_deg = 1.72;
    bool orientation_additive = false;  ///< total = deterministic + U[min, max]

    bool position = false;
    double position_half_width = 0.14e-3;  ///< m, on the local u and w axes

    double max_failure_fraction = 0.01;
    double memory_budget_bytes = 2e9;  ///< caps concurrently held interaction matrices

    /// All four sources on; remanence cube 1.421/0.0082 T, long 1.451/0.0038 T.
    static VariabilityConfig reference_defaults();
    void validate() const;
};

/// JSON configuration; see data/configs for examples. Throws ConfigError.
VariabilityConfig parse_variability_config(const std::string& json_text, const std::string& source = "<string>");
VariabilityConfig load_variability_config(const std::string& path);
std::string format_variability_config(const VariabilityConfig& cfg);

/// Deterministic part kept fixed across draws: each magnet's torque sign and
/// the nominal rotation magnitude. An empty sign list means no rotation.
struct McBase {
    std::vector<int> torque_sign;
    double angle_deg = 1.2;
};

struct McStat {
    double expected = 0.0;
    double std = 0.0;        ///< sample standard deviation
    double q025 = 0.0;       ///< empirical 2.5 % quantile
    double q975 = 0.0;
    double expanded = 0.0;   ///< 2 * std, half-width of the 95 % interval
};

struct DrawRecord {
    std::size_t index = 0;
    bool ok = false;
    double mean_bx = 0.0;
    double dis1 = 0.0;
    double dis2 = 0.0;
    int iterations = 0;
    std::string error;
};

struct McResult {
    std::uint64_t seed = 0;
    std::string rng = "mt19937_64/splitmix64(seed, draw, source)";
    std::size_t draws = 0;
    std::size_t failed = 0;
    McStat mean_bx, dis1, dis2;
    std::vector<DrawRecord> records;  ///< one per draw, in draw order
};

McStat summarize(std::vector<double> values);

/// Per-draw perturbed inputs, exposed so the samplers can be checked.
struct DrawInputs {
    std::vector<double> angle_deg;        ///< signed total rotation per magnet
    std::vector<Vec3> displacement;       ///< global frame, m; empty if position is off
    std::vector<double> local_offset_u;   ///< sampled u and w components
    std::vector<double> local_offset_w;
    CharacteristicOverrides overrides;
};

/// Random inputs of draw `draw`; depends only on (seed, draw, array, base).
DrawInputs sample_draw(const ArrayModel& array, const VariabilityConfig& cfg, const McBase& base, std::size_t draw);

/// Runs cfg.draws independent draws. Throws NumericalError when more than
/// cfg.max_failure_fraction of the draws fail.
McResult run_mc(const ArrayModel& array, const VariabilityConfig& cfg, const McBase& base);

struct StabilityRow {
    std::size_t count = 0;
    double mean_bx = 0.0, dis1 = 0.0, dis2 = 0.0;
    double dev_mean_bx = 0.0, dev_dis1 = 0.0, dev_dis2 = 0.0;  ///< relative to the largest count
};

/// One run with max(counts) draws; each row summarizes the first `count`.
std::vector<StabilityRow> mc_stability(const ArrayModel& array, const VariabilityConfig& cfg, const McBase& base,
                                       const std::vector<std::size_t>& counts);
std::vector<StabilityRow> stability_from(const McResult& result, const std::vector<std::size_t>& counts);

std::string format_mc_result(const McResult& r);     ///< JSON
std::string format_mc_raw(const McResult& r);        ///< per-draw table
std::string format_stability(const std::vector<StabilityRow>& rows);

}  // namespace magarray
