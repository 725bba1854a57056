#include "magarray/monte_carlo.hpp"
#include "magarray/parallel.hpp"
#include "magarray/perturbations.hpp"
#include "magarray/pipeline.hpp"
#include "magarray/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace magarray;

namespace {

ArrayModel small_array() {
    HalbachSpec hs;
    hs.rings = 1;
    hs.per_layer = 12;
    return synthetic_halbach(hs);
}

VariabilityConfig small_config(std::size_t draws) {
    VariabilityConfig c;
    c.draws = draws;
    c.seed = 1234;
    c.grid.diameter = 0.1;
    c.grid.step = 0.02;
    return c;
}

double sample_std(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("summary statistics") {
    const auto s = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(s.expected == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.expanded == doctest::Approx(2 * s.std));
    CHECK(s.q025 == doctest::Approx(1.075));  // linear interpolation between order statistics
    CHECK(s.q975 == doctest::Approx(3.925));
}

TEST_CASE("with every source disabled each draw is the deterministic result") {
    const ArrayModel a = small_array();
    const auto signs = torque_map(a).signs();
    VariabilityConfig cfg = small_config(3);
    const auto r = run_mc(a, cfg, {signs, 1.2});
    const ArrayModel rot = apply_rotations(a, torque_map(a), 1.2);
    const auto det = simulate(rot, make_grid(cfg.grid));
    for (const auto& rec : r.records) {
        CHECK(rec.ok);
        CHECK(rec.mean_bx == det.metrics.mean_bx);
        CHECK(rec.dis1 == det.metrics.dis1);
        CHECK(rec.dis2 == det.metrics.dis2);
    }
    CHECK(r.mean_bx.std < 1e-15 * std::abs(r.mean_bx.expected));
}

TEST_CASE("results do not depend on the thread count") {
    const ArrayModel a = small_array();
    const auto signs = torque_map(a, SolverMode::Linear).signs();
    VariabilityConfig cfg = VariabilityConfig::reference_defaults();
    cfg.draws = 6;
    cfg.seed = 99;
    cfg.mode = SolverMode::Linear;
    cfg.grid = small_config(1).grid;
    set_thread_count(1);
    const auto r1 = run_mc(a, cfg, {signs, 1.2});
    set_thread_count(4);
    const auto r4 = run_mc(a, cfg, {signs, 1.2});
    set_thread_count(0);
    REQUIRE(r1.records.size() == r4.records.size());
    for (std::size_t i = 0; i < r1.records.size(); ++i) {
        CHECK(r1.records[i].mean_bx == r4.records[i].mean_bx);
        CHECK(r1.records[i].dis1 == r4.records[i].dis1);
        CHECK(r1.records[i].dis2 == r4.records[i].dis2);
    }
    CHECK(format_mc_result(r1) == format_mc_result(r4));
}

TEST_CASE("sampled inputs stay within their supports") {
    const ArrayModel a = small_array();
    const std::size_t n = a.magnets.size();
    std::vector<int> signs(n);
    for (std::size_t i = 0; i < n; ++i) signs[i] = static_cast<int>(i % 3) - 1;
    const VariabilityConfig cfg = VariabilityConfig::reference_defaults();
    std::vector<double> rem_cube;
    for (std::size_t d = 0; d < 200; ++d) {
        const auto in = sample_draw(a, cfg, {signs, 1.2}, d);
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(in.angle_deg[i]);
            if (signs[i] == 0) {
                CHECK(in.angle_deg[i] == 0.0);
            } else {
                CHECK(mag >= 0.68);
                CHECK(mag <= 1.72);
                CHECK(in.angle_deg[i] * signs[i] > 0.0);
            }
            CHECK(std::abs(in.local_offset_u[i]) <= 0.14e-3);
            CHECK(std::abs(in.local_offset_w[i]) <= 0.14e-3);
            CHECK(in.displacement[i].norm() == doctest::Approx(std::hypot(in.local_offset_u[i], in.local_offset_w[i])));
            if (a.magnets[i].material_id == "N52-cube") rem_cube.push_back(in.overrides.remanence[i]);
        }
        REQUIRE(in.overrides.curve_scale.size() == a.materials.size());
        CHECK(in.overrides.curve_scale.begin()->second == in.overrides.curve_scale.rbegin()->second);
    }
    double mean = 0.0;
    for (double x : rem_cube) mean += x;
    mean /= static_cast<double>(rem_cube.size());
    CHECK(mean == doctest::Approx(1.421).epsilon(1e-3));
    CHECK(sample_std(rem_cube) == doctest::Approx(0.0082).epsilon(0.05));
    // same draw index gives the same inputs
    const auto x = sample_draw(a, cfg, {signs, 1.2}, 17), y = sample_draw(a, cfg, {signs, 1.2}, 17);
    CHECK(x.angle_deg == y.angle_deg);
    CHECK(x.overrides.remanence == y.overrides.remanence);
}

TEST_CASE("additive orientation adds the nominal angle") {
    const ArrayModel a = small_array();
    std::vector<int> signs(a.magnets.size(), 1);
    VariabilityConfig cfg;
    cfg.orientation = true;
    cfg.orientation_additive = true;
    const auto in = sample_draw(a, cfg, {signs, 1.2}, 0);
    for (double x : in.angle_deg) {
        CHECK(x >= 1.2 + 0.68);
        CHECK(x <= 1.2 + 1.72);
    }
}

TEST_CASE("halving the remanence spread shrinks the output spread") {
    const ArrayModel a = small_array();
    VariabilityConfig cfg = small_config(120);
    cfg.mode = SolverMode::Ideal;
    cfg.remanence = true;
    cfg.remanence_spread["N52-cube"] = {std::nullopt, 0.0082};
    cfg.remanence_spread["N52-long"] = {std::nullopt, 0.0038};
    const auto full = run_mc(a, cfg, {});
    for (auto& [id, s] : cfg.remanence_spread) s.std /= 2;
    const auto half = run_mc(a, cfg, {});
    CHECK(half.dis1.std < full.dis1.std);
    CHECK(half.mean_bx.std < full.mean_bx.std);
    CHECK(half.mean_bx.std == doctest::Approx(full.mean_bx.std / 2).epsilon(1e-6));  // linear in the spread
    for (const auto& r : full.records) CHECK(std::abs(r.dis2) <= std::abs(r.dis1));
}

TEST_CASE("stability rows") {
    const ArrayModel a = small_array();
    VariabilityConfig cfg = small_config(40);
    cfg.mode = SolverMode::Ideal;
    cfg.remanence = true;
    cfg.remanence_spread["N52-cube"] = {std::nullopt, 0.0082};
    const auto r = run_mc(a, cfg, {});
    const auto one = stability_from(r, {40});
    REQUIRE(one.size() == 1);
    CHECK(one[0].dev_mean_bx == 0.0);
    CHECK(one[0].dev_dis1 == 0.0);
    const auto rows = stability_from(r, {10, 20, 40});
    CHECK(rows.size() == 3);
    CHECK(rows[2].dev_dis2 == 0.0);
    CHECK_THROWS(stability_from(r, {80}));
}

TEST_CASE("configuration parsing") {
    const auto c = parse_variability_config(R"({"draws": 50, "seed": 7, "mode": "linear",
        "sources": {"remanence": {"materials": {"N52-cube": {"mean": 1.421, "std": 0.0082}}},
                    "orientation": {"min_deg": 0.5, "max_deg": 1.5}}})");
    CHECK(c.draws == 50);
    CHECK(c.seed == 7);
    CHECK(c.mode == SolverMode::Linear);
    CHECK(c.remanence);
    CHECK(*c.remanence_spread.at("N52-cube").mean == 1.421);
    CHECK(c.orientation);
    CHECK_FALSE(c.position);
    CHECK(parse_variability_config(format_variability_config(c)).remanence_spread.at("N52-cube").std == 0.0082);
    CHECK_THROWS_AS(parse_variability_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_variability_config(R"({"draws": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_variability_config(R"({"sources": {"orientation": {"max_deg": 6}}})"), ConfigError);
    CHECK_THROWS_AS(parse_variability_config(R"({"mode": "cubic"})"), ConfigError);
}

TEST_CASE("too many failed draws abort the run") {
    const ArrayModel a = small_array();
    VariabilityConfig cfg = small_config(4);
    cfg.remanence = true;
    cfg.fp.max_iters = 1;
    CHECK_THROWS_AS(run_mc(a, cfg, {}), NumericalError);
    try {
        run_mc(a, cfg, {});
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("4 of 4 draws failed") != std::string::npos);
    }
    // no successful draw at all is fatal even when failures are tolerated
    cfg.max_failure_fraction = 1.0;
    CHECK_THROWS_AS(run_mc(a, cfg, {}), NumericalError);
}
