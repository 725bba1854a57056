#include "magarray/monte_carlo.hpp"

#include "magarray/parallel.hpp"
#include "magarray/perturbations.hpp"
#include "magarray/pipeline.hpp"
#include "magarray/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace magarray {

using nlohmann::json;

VariabilityConfig VariabilityConfig::reference_defaults() {
    VariabilityConfig c;
    c.remanence = c.characterization = c.orientation = c.position = true;
    c.remanence_spread["N52-cube"] = {1.421, 0.0082};
    c.remanence_spread["N52-long"] = {1.451, 0.0038};
    return c;
}

void VariabilityConfig::validate() const {
    if (draws == 0) throw ConfigError("mc: draws must be positive");
    for (const auto& [id, s] : remanence_spread) {
        if (!(s.std >= 0.0) || !std::isfinite(s.std)) throw ConfigError("mc: remanence std of '" + id + "' must be >= 0");
        if (s.mean && !(*s.mean > 0.0)) throw ConfigError("mc: remanence mean of '" + id + "' must be positive");
    }
    if (!(characterization_std >= 0.0)) throw ConfigError("mc: characterization std must be >= 0");
    if (!(orientation_min_deg >= 0.0) || !(orientation_max_deg >= orientation_min_deg) || orientation_max_deg >= 5.0)
        throw ConfigError("mc: orientation bounds must satisfy 0 <= min <= max < 5 degrees");
    if (!(position_half_width >= 0.0) || position_half_width >= 5e-3) throw ConfigError("mc: position half width must be in [0, 5 mm)");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) throw ConfigError("mc: max_failure_fraction must be in [0, 1]");
    if (!(fp.tol > 0.0) || fp.max_iters < 1) throw ConfigError("mc: invalid fixed-point settings");
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

VariabilityConfig parse_variability_config(const std::string& text_in, const std::string& src) {
    VariabilityConfig c;
    try {
        const json j = json::parse(text_in);
        c.draws = get_or<std::size_t>(j, "draws", c.draws);
        c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
        if (j.contains("mode")) c.mode = solver_mode_from_string(j.at("mode").get<std::string>());
        if (j.contains("fixed_point")) {
            const auto& f = j.at("fixed_point");
            c.fp.tol = get_or(f, "tol", c.fp.tol);
            c.fp.max_iters = get_or(f, "max_iters", c.fp.max_iters);
            if (f.contains("mu_fp")) c.fp.mu_fp = f.at("mu_fp").get<double>();
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            c.grid.shape = get_or<std::string>(g, "shape", c.grid.shape);
            c.grid.diameter = get_or(g, "diameter", c.grid.diameter);
            c.grid.step = get_or(g, "step", c.grid.step);
            if (g.contains("convention")) c.grid.convention = grid_convention_from_string(g.at("convention").get<std::string>());
        }
        const json src_j = j.value("sources", json::object());
        if (src_j.contains("remanence")) {
            const auto& r = src_j.at("remanence");
            c.remanence = get_or(r, "enabled", true);
            const json mats = r.value("materials", json::object());
            for (const auto& [id, v] : mats.items()) {
                RemanenceSpread s;
                if (v.contains("mean")) s.mean = v.at("mean").get<double>();
                s.std = get_or(v, "std", 0.0);
                c.remanence_spread[id] = s;
            }
        }
        if (src_j.contains("characterization")) {
            const auto& r = src_j.at("characterization");
            c.characterization = get_or(r, "enabled", true);
            c.characterization_std = get_or(r, "std", c.characterization_std);
            c.characterization_per_material = get_or(r, "per_material", c.characterization_per_material);
        }
        if (src_j.contains("orientation")) {
            const auto& r = src_j.at("orientation");
            c.orientation = get_or(r, "enabled", true);
            c.orientation_min_deg = get_or(r, "min_deg", c.orientation_min_deg);
            c.orientation_max_deg = get_or(r, "max_deg", c.orientation_max_deg);
            c.orientation_additive = get_or(r, "additive", c.orientation_additive);
        }
        if (src_j.contains("position")) {
            const auto& r = src_j.at("position");
            c.position = get_or(r, "enabled", true);
            c.position_half_width = get_or(r, "half_width", c.position_half_width);
        }
        c.max_failure_fraction = get_or(j, "max_failure_fraction", c.max_failure_fraction);
        c.memory_budget_bytes = get_or(j, "memory_budget_bytes", c.memory_budget_bytes);
    } catch (const json::exception& e) {
        throw ConfigError(src + ": " + e.what());
    }
    c.validate();
    return c;
}

VariabilityConfig load_variability_config(const std::string& path) {
    return parse_variability_config(text::read_file(path), path);
}

std::string format_variability_config(const VariabilityConfig& c) {
    json j;
    j["draws"] = c.draws;
    j["seed"] = c.seed;
    j["mode"] = to_string(c.mode);
    j["fixed_point"] = {{"tol", c.fp.tol}, {"max_iters", c.fp.max_iters}};
    if (c.fp.mu_fp) j["fixed_point"]["mu_fp"] = *c.fp.mu_fp;
    j["grid"] = {{"shape", c.grid.shape}, {"diameter", c.grid.diameter}, {"step", c.grid.step},
                 {"convention", to_string(c.grid.convention)}};
    json mats = json::object();
    for (const auto& [id, s] : c.remanence_spread) {
        mats[id] = {{"std", s.std}};
        if (s.mean) mats[id]["mean"] = *s.mean;
    }
    j["sources"] = {
        {"remanence", {{"enabled", c.remanence}, {"materials", mats}}},
        {"characterization", {{"enabled", c.characterization}, {"std", c.characterization_std}, {"per_material", c.characterization_per_material}}},
        {"orientation", {{"enabled", c.orientation}, {"min_deg", c.orientation_min_deg}, {"max_deg", c.orientation_max_deg}, {"additive", c.orientation_additive}}},
        {"position", {{"enabled", c.position}, {"half_width", c.position_half_width}}},
    };
    j["max_failure_fraction"] = c.max_failure_fraction;
    j["memory_budget_bytes"] = c.memory_budget_bytes;
    return j.dump(2) + "\n";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kRemanence = 1, kCharacterization = 2, kOrientation = 3, kPosition = 4 };

std::mt19937_64 substream(std::uint64_t seed, std::size_t draw, Stream s) {
    return std::mt19937_64(splitmix64(splitmix64(seed ^ splitmix64(draw)) + s));
}

double quantile(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

McStat summarize(std::vector<double> v) {
    McStat s;
    if (v.empty()) throw DomainError("summarize: no values");
    double sum = 0.0;
    for (double x : v) sum += x;
    s.expected = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.expected) * (x - s.expected);
    s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    std::sort(v.begin(), v.end());
    s.q025 = quantile(v, 0.025);
    s.q975 = quantile(v, 0.975);
    s.expanded = 2.0 * s.std;
    return s;
}

DrawInputs sample_draw(const ArrayModel& array, const VariabilityConfig& cfg, const McBase& base, std::size_t draw) {
    const std::size_t n = array.magnets.size();
    if (!base.torque_sign.empty() && base.torque_sign.size() != n) throw StateError("mc: torque signs do not match the array");
    DrawInputs in;

    if (cfg.remanence) {
        auto rng = substream(cfg.seed, draw, kRemanence);
        std::normal_distribution<double> z(0.0, 1.0);
        in.overrides.remanence.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& m = array.magnets[i];
            const Material& mat = array.material_of(m);
            auto it = cfg.remanence_spread.find(m.material_id);
            const double mean = it != cfg.remanence_spread.end() && it->second.mean ? *it->second.mean
                                                                                     : remanence_at(mat, array.temperature);
            const double sd = it != cfg.remanence_spread.end() ? it->second.std : 0.0;
            const double g = z(rng);
            in.overrides.remanence[i] = sd > 0.0 ? mean + sd * g : mean;
        }
    }
    if (cfg.characterization) {
        auto rng = substream(cfg.seed, draw, kCharacterization);
        std::normal_distribution<double> z(0.0, 1.0);
        double shared = 0.0;
        bool first = true;
        for (const auto& [id, mat] : array.materials) {
            if (first || cfg.characterization_per_material) shared = 1.0 + cfg.characterization_std * z(rng);
            first = false;
            in.overrides.curve_scale[id] = shared;
        }
    }

    in.angle_deg.assign(n, 0.0);
    std::vector<double> magnitude(n, base.angle_deg);
    if (cfg.orientation) {
        auto rng = substream(cfg.seed, draw, kOrientation);
        std::uniform_real_distribution<double> u(cfg.orientation_min_deg, cfg.orientation_max_deg);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = std::clamp(u(rng), cfg.orientation_min_deg, cfg.orientation_max_deg);
            magnitude[i] = cfg.orientation_additive ? base.angle_deg + x : x;
        }
    }
    if (!base.torque_sign.empty()) {
        for (std::size_t i = 0; i < n; ++i) in.angle_deg[i] = base.torque_sign[i] * magnitude[i];
    }

    if (cfg.position) {
        auto rng = substream(cfg.seed, draw, kPosition);
        const double hw = cfg.position_half_width;
        std::uniform_real_distribution<double> u(-hw, hw);
        in.displacement.resize(n);
        in.local_offset_u.resize(n);
        in.local_offset_w.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double du = std::clamp(u(rng), -hw, hw);
            const double dw = std::clamp(u(rng), -hw, hw);
            in.local_offset_u[i] = du;
            in.local_offset_w[i] = dw;
            const auto& m = array.magnets[i];
            const Mat3 rz = Eigen::AngleAxisd(in.angle_deg[i] * std::numbers::pi / 180.0, Vec3::UnitZ()).toRotationMatrix();
            in.displacement[i] = rz * (du * m.axis_u() + dw * m.axis_w());
        }
    }
    return in;
}

McResult run_mc(const ArrayModel& array, const VariabilityConfig& cfg, const McBase& base) {
    cfg.validate();
    array.validate();
    const std::size_t n = array.magnets.size();
    if (!base.torque_sign.empty() && base.torque_sign.size() != n) throw StateError("mc: torque signs do not match the array");
    const SampleGrid grid = make_grid(cfg.grid);

    const bool moves = cfg.orientation || cfg.position;
    std::optional<ArrayModel> fixed;
    std::optional<InteractionMatrix> fixed_matrix;
    if (!moves) {
        std::vector<double> angles(n, 0.0);
        if (!base.torque_sign.empty())
            for (std::size_t i = 0; i < n; ++i) angles[i] = base.torque_sign[i] * base.angle_deg;
        fixed = rotate_magnets(array, angles);
        if (cfg.mode != SolverMode::Ideal) fixed_matrix = assemble(*fixed);
    }

    McResult r;
    r.seed = cfg.seed;
    r.draws = cfg.draws;
    r.records.resize(cfg.draws);

    const double per_draw = 16.0 * static_cast<double>(n) * static_cast<double>(n) + 1.0;
    const auto cap = static_cast<unsigned>(std::clamp(cfg.memory_budget_bytes / per_draw, 1.0, 65536.0));

    parallel_for(cfg.draws, [&](std::size_t d) {
        DrawRecord& rec = r.records[d];
        rec.index = d;
        try {
            const DrawInputs in = sample_draw(array, cfg, base, d);
            SimulationOptions opt;
            opt.mode = cfg.mode;
            opt.fp = cfg.fp;
            opt.overrides = &in.overrides;
            SimulationResult sim;
            if (fixed) {
                opt.matrix = fixed_matrix ? &*fixed_matrix : nullptr;
                sim = simulate(*fixed, grid, opt);
            } else {
                ArrayModel a = rotate_magnets(array, in.angle_deg);
                if (cfg.position) a = displace_magnets(a, in.displacement);
                sim = simulate(a, grid, opt);
            }
            rec.ok = true;
            rec.mean_bx = sim.metrics.mean_bx;
            rec.dis1 = sim.metrics.dis1;
            rec.dis2 = sim.metrics.dis2;
            rec.iterations = sim.solution.iterations;
        } catch (const Error& e) {
            rec.ok = false;
            rec.error = e.what();
        }
    }, cap);

    std::vector<double> mb, d1, d2;
    std::string first_errors;
    for (const auto& rec : r.records) {
        if (!rec.ok) {
            if (r.failed++ < 3) first_errors += "\n  draw " + std::to_string(rec.index) + ": " + rec.error;
            continue;
        }
        mb.push_back(rec.mean_bx);
        d1.push_back(rec.dis1);
        d2.push_back(rec.dis2);
    }
    if (static_cast<double>(r.failed) > cfg.max_failure_fraction * static_cast<double>(cfg.draws) || mb.empty()) {
        throw NumericalError("mc: " + std::to_string(r.failed) + " of " + std::to_string(cfg.draws) +
                             " draws failed (seed " + std::to_string(cfg.seed) + ")" + first_errors);
    }
    r.mean_bx = summarize(mb);
    r.dis1 = summarize(d1);
    r.dis2 = summarize(d2);
    return r;
}

std::vector<StabilityRow> stability_from(const McResult& result, const std::vector<std::size_t>& counts) {
    if (counts.empty()) throw DomainError("mc_stability: no draw counts");
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0 || (k > 0 && counts[k] <= counts[k - 1])) throw DomainError("mc_stability: counts must be positive and ascending");
    }
    if (counts.back() > result.records.size()) throw DomainError("mc_stability: count exceeds the number of draws");
    std::vector<StabilityRow> rows;
    for (std::size_t c : counts) {
        std::vector<double> mb, d1, d2;
        for (std::size_t i = 0; i < c; ++i) {
            const auto& rec = result.records[i];
            if (!rec.ok) continue;
            mb.push_back(rec.mean_bx);
            d1.push_back(rec.dis1);
            d2.push_back(rec.dis2);
        }
        if (mb.empty()) throw NumericalError("mc_stability: no successful draws among the first " + std::to_string(c));
        StabilityRow row;
        row.count = c;
        row.mean_bx = summarize(mb).expected;
        row.dis1 = summarize(d1).expected;
        row.dis2 = summarize(d2).expected;
        rows.push_back(row);
    }
    const StabilityRow& ref = rows.back();
    for (auto& row : rows) {
        row.dev_mean_bx = std::abs(row.mean_bx - ref.mean_bx) / std::abs(ref.mean_bx);
        row.dev_dis1 = std::abs(row.dis1 - ref.dis1) / std::abs(ref.dis1);
        row.dev_dis2 = std::abs(row.dis2 - ref.dis2) / std::abs(ref.dis2);
    }
    return rows;
}

std::vector<StabilityRow> mc_stability(const ArrayModel& array, const VariabilityConfig& cfg, const McBase& base,
                                       const std::vector<std::size_t>& counts) {
    if (counts.empty()) throw DomainError("mc_stability: no draw counts");
    VariabilityConfig big = cfg;
    big.draws = *std::max_element(counts.begin(), counts.end());
    return stability_from(run_mc(array, big, base), counts);
}

namespace {

json stat_json(const McStat& s) {
    return {{"expected", s.expected}, {"std", s.std}, {"q025", s.q025}, {"q975", s.q975}, {"expanded", s.expanded}};
}

}  // namespace

std::string format_mc_result(const McResult& r) {
    json j;
    j["seed"] = r.seed;
    j["rng"] = r.rng;
    j["draws"] = r.draws;
    j["failed"] = r.failed;
    j["mean_bx_T"] = stat_json(r.mean_bx);
    j["dis1_ppm"] = stat_json(r.dis1);
    j["dis2_ppm"] = stat_json(r.dis2);
    json fails = json::array();
    for (const auto& rec : r.records)
        if (!rec.ok) fails.push_back({{"draw", rec.index}, {"error", rec.error}});
    j["failures"] = fails;
    return j.dump(2) + "\n";
}

std::string format_mc_raw(const McResult& r) {
    std::string out = "# seed " + std::to_string(r.seed) + "\n# draw ok mean_bx[T] dis1[ppm] dis2[ppm] iterations\n";
    for (const auto& rec : r.records) {
        out += std::to_string(rec.index) + " " + (rec.ok ? "1 " : "0 ") + text::fmt(rec.mean_bx) + " " + text::fmt(rec.dis1) +
               " " + text::fmt(rec.dis2) + " " + std::to_string(rec.iterations) + "\n";
    }
    return out;
}

std::string format_stability(const std::vector<StabilityRow>& rows) {
    std::string out = "# count mean_bx[T] dis1[ppm] dis2[ppm] dev_mean_bx dev_dis1 dev_dis2\n";
    for (const auto& r : rows) {
        out += std::to_string(r.count) + " " + text::fmt(r.mean_bx) + " " + text::fmt(r.dis1) + " " + text::fmt(r.dis2) + " " +
               text::fmt(r.dev_mean_bx) + " " + text::fmt(r.dev_dis1) + " " + text::fmt(r.dev_dis2) + "\n";
    }
    return out;
}

}  // namespace magarray
