#pragma once

#include "magarray/fieldmap.hpp"
#include "magarray/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace magarray {

enum class BudgetPdf { Normal, Uniform };

/// What a component's standard uncertainty applies to and in which unit.
enum class BudgetTarget {
    PointAbsolute,  ///< per-point B_x, tesla
    PointRelative,  ///< per-point B_x, fraction of B_x at that point
    Dis1Relative,   ///< DIS1, fraction of DIS1
    Dis2Relative,   ///< DIS2, fraction of DIS2
};

struct BudgetComponent {
    std::string name;
    BudgetTarget target = BudgetTarget::PointAbsolute;
    double best_estimate = 0.0;
    double standard = 0.0;        ///< u, in the unit implied by `target`
    double coverage_factor = 2.0;
    BudgetPdf pdf = BudgetPdf::Normal;
    bool correlated = false;      ///< point components only: one common draw for all points

    double expanded() const { return coverage_factor * standard; }
    /// Half-width of a uniform component (sqrt(3) u); standard deviation for normal ones.
    double spread() const;
};

inline constexpr double kUniformCoverage = 0.95 * 1.7320508075688772;  // 0.95 * sqrt(3)

struct BudgetDefaults {
    double gradient_max = 13.56e-3;   ///< T/m, maximum |grad B_x| in the DSV
    double position_tolerance = 1e-3; ///< m, full width of the probe positioning interval
    double instrument_relative = 50e-6;
    double noise = 1e-6;              ///< T
    double resolution = 1e-6;         ///< T
    double averaging = 1e-6;          ///< T
    double offset_change_dis1 = 0.048;  ///< max relative DIS1 change over the array-position study
    double offset_change_dis2 = 0.01;
    double k_j = -1.26e-3;            ///< 1/degC
    double t_ref = 18.0;              ///< degC
    bool correlated_temperature = false;
};

/// Instantiates the eight measurement-model components for `map`. Requires
/// temperature and temperature_spread in the map provenance (ConfigError
/// otherwise).
std::vector<BudgetComponent> default_budget(const FieldMap& map, const BudgetDefaults& opt = {});

enum class BudgetMethod { Analytic, McOracle };
std::string to_string(BudgetMethod m);

struct BudgetResult {
    BudgetMethod method = BudgetMethod::Analytic;
    std::vector<double> u_point;   ///< combined standard uncertainty of B_x per point, T
    HomogeneityMetrics nominal;
    double u_dis1 = 0.0, U_dis1 = 0.0;  ///< ppm
    double u_dis2 = 0.0, U_dis2 = 0.0;  ///< ppm
    double dis1_q025 = 0.0, dis1_q975 = 0.0;  ///< MC oracle only
    double dis2_q025 = 0.0, dis2_q975 = 0.0;
    std::size_t draws = 0;
};

/// First-order propagation: extremes of the map treated as independent
/// points, the mean carrying the averaged point variance over N; the DIS2
/// sensitivity is the exact gradient of std/mean. Offset components are
/// added in quadrature. U = 2u.
BudgetResult combine_analytic(const FieldMap& map, const std::vector<BudgetComponent>& budget);

/// Sampling propagation: every point perturbed per component PDF, metrics
/// recomputed per draw, offset components applied multiplicatively.
BudgetResult combine_mc_oracle(const FieldMap& map, const std::vector<BudgetComponent>& budget,
                               std::size_t draws = 100000, std::uint64_t seed = 7);

std::string format_budget(const std::vector<BudgetComponent>& budget);
std::vector<BudgetComponent> parse_budget(const std::string& content, const std::string& source = "<string>");
std::vector<BudgetComponent> load_budget(const std::string& path);
std::string format_budget_result(const BudgetResult& r);  ///< JSON

}  // namespace magarray
