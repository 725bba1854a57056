#include "magarray/core.hpp"
#include "magarray/fieldmap.hpp"
#include "magarray/geometry.hpp"
#include "magarray/metrics.hpp"
#include "magarray/monte_carlo.hpp"
#include "magarray/parallel.hpp"
#include "magarray/perturbations.hpp"
#include "magarray/pipeline.hpp"
#include "magarray/synthetic.hpp"
#include "magarray/text.hpp"
#include "magarray/uncertainty_budget.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

using namespace magarray;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 2, kGeometry = 3, kNumerical = 4, kNoConvergence = 5 };

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 || EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

/// Outputs are staged in memory and written only after the command succeeds.
struct Run {
    std::string command;
    json config = json::object();
    json inputs = json::object();
    json timings = json::object();
    std::map<std::string, std::string> files;

    std::string read(const std::string& path) {
        std::string content = text::read_file(path);
        inputs[path] = sha256_hex(content);
        return content;
    }

    void commit(const std::string& out_dir) {
        if (out_dir.empty()) return;
        json manifest;
        manifest["tool"] = "magarray";
        manifest["version"] = MAGARRAY_VERSION;
        manifest["command"] = command;
        manifest["config"] = config;
        manifest["inputs"] = inputs;
        manifest["outputs"] = json::array();
        for (const auto& [name, _] : files) manifest["outputs"].push_back(name);
        files["manifest.json"] = manifest.dump(2) + "\n";
        if (!timings.empty()) files["timings.json"] = timings.dump(2) + "\n";
        for (const auto& [name, content] : files) text::write_file((fs::path(out_dir) / name).string(), content);
    }
};

struct Common {
    std::string geometry;
    bool synthetic = false;
    std::optional<double> temperature;
    std::string materials = "file";
    std::string uniform_id = "N52-cube";
    std::vector<std::string> curves;
    std::string ring_offsets;
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    auto* g = app->add_option("--geometry,-g", c.geometry, "Array geometry file");
    app->add_flag("--synthetic", c.synthetic, "Use the built-in synthetic Halbach array")->excludes(g);
    app->add_option("--temp", c.temperature, "Temperature, degC (default: from the geometry file)");
    app->add_option("--materials", c.materials, "file|two: per-magnet materials; one: every magnet uses --uniform-material")
        ->check(CLI::IsMember({"file", "two", "one"}));
    app->add_option("--uniform-material", c.uniform_id, "Material id used by --materials one");
    app->add_option("--curve", c.curves, "Replace a material's H-J curve: ID=PATH (total convention)");
    app->add_option("--ring-offsets", c.ring_offsets, "Ring z offsets to apply (ring metres per line)");
    app->add_option("--out,-o", c.out, "Output directory");
}

ArrayModel load_model(Run& run, const Common& c) {
    ArrayModel a;
    if (c.synthetic) {
        a = synthetic_halbach();
        run.config["geometry"] = "synthetic";
    } else {
        if (c.geometry.empty()) throw ConfigError("either --geometry or --synthetic is required");
        const std::string content = run.read(c.geometry);
        const auto base = fs::path(c.geometry).parent_path().string();
        a = parse_array(content, c.geometry, base.empty() ? "." : base);
        run.config["geometry"] = c.geometry;
    }
    for (const auto& spec : c.curves) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--curve expects ID=PATH, got '" + spec + "'");
        const std::string id = spec.substr(0, eq), path = spec.substr(eq + 1);
        auto it = a.materials.find(id);
        if (it == a.materials.end()) throw ReferenceError("--curve: unknown material '" + id + "'");
        run.read(path);
        it->second.hj_curve = load_curve(path);
        it->second.curve_convention = CurveConvention::Total;
        it->second.validate();
    }
    if (c.temperature) a.temperature = *c.temperature;
    if (c.materials == "one") a = with_uniform_material(a, c.uniform_id);
    if (!c.ring_offsets.empty()) {
        run.read(c.ring_offsets);
        a = apply_ring_shifts(a, load_ring_offsets(c.ring_offsets));
    }
    run.config["temperature"] = a.temperature;
    run.config["materials"] = c.materials;
    if (c.materials == "one") run.config["uniform_material"] = c.uniform_id;
    run.config["curves"] = c.curves;
    run.config["ring_offsets"] = c.ring_offsets;
    a.validate();
    return a;
}

struct GridOpts {
    std::string shape = "sphere";
    double diameter = 0.2;
    double step = 0.01;
    std::string convention = "auto";
};

void add_grid(CLI::App* app, GridOpts& g) {
    app->add_option("--grid", g.shape, "sphere|zlines")->check(CLI::IsMember({"sphere", "zlines"}));
    app->add_option("--diameter", g.diameter, "Sphere diameter, m (zlines: twice the line radius)");
    app->add_option("--step", g.step, "Lattice step, m");
    app->add_option("--convention", g.convention, "auto|offset|centered");
}

GridSpec grid_spec(Run& run, GridOpts g) {
    if (g.shape == "zlines" && g.diameter == 0.2 && g.step == 0.01) {
        g.diameter = 0.24;
        g.step = 0.005;
    }
    GridSpec s{g.shape, g.diameter, g.step, grid_convention_from_string(g.convention)};
    run.config["grid"] = {{"shape", s.shape}, {"diameter", s.diameter}, {"step", s.step}, {"convention", to_string(s.convention)}};
    return s;
}

json metrics_json(const HomogeneityMetrics& m) {
    return {{"mean_bx_T", m.mean_bx}, {"max_bx_T", m.max_bx}, {"min_bx_T", m.min_bx}, {"std_bx_T", m.std_bx},
            {"dis1_ppm", m.dis1}, {"dis2_ppm", m.dis2}, {"points", m.count}};
}

void print_metrics(const HomogeneityMetrics& m) {
    std::printf("points %zu\nmean_bx %.6f mT\ndis1 %.1f ppm\ndis2 %.1f ppm\n", m.count, m.mean_bx * 1e3, m.dis1, m.dis2);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Permanent-magnet array field simulation and uncertainty analysis"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker cap (0 = all cores); results do not depend on it");
    app.set_version_flag("--version", std::string(MAGARRAY_VERSION));

    Run run;
    Common common;
    GridOpts grid;
    std::string mode = "nonlinear";
    double tol = 1e-7;
    int max_iters = 200;

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Working points, field map and homogeneity metrics");
    add_common(solve_cmd, common);
    add_grid(solve_cmd, grid);
    solve_cmd->add_option("--mode", mode, "ideal|linear|nonlinear")->check(CLI::IsMember({"ideal", "linear", "nonlinear"}));
    solve_cmd->add_option("--tol", tol, "Fixed-point tolerance");
    solve_cmd->add_option("--max-iters", max_iters, "Fixed-point iteration cap");
    std::string torque_file;
    double rotate_deg = 0.0;
    solve_cmd->add_option("--rotate", rotate_deg, "Rotate each magnet by sign(torque) * angle degrees first");
    solve_cmd->add_option("--torque-report", torque_file, "Torque signs to use with --rotate");

    // perturb
    auto* perturb_cmd = app.add_subcommand("perturb", "Apply ring shifts and torque-signed rotations, write the geometry");
    add_common(perturb_cmd, common);
    perturb_cmd->add_option("--rotate", rotate_deg, "Rotation magnitude, degrees");
    perturb_cmd->add_option("--torque-report", torque_file, "Torque signs (default: computed, nonlinear)");

    // torque
    auto* torque_cmd = app.add_subcommand("torque", "Per-magnet torque from same-ring neighbours");
    add_common(torque_cmd, common);
    torque_cmd->add_option("--mode", mode, "ideal|linear|nonlinear")->check(CLI::IsMember({"ideal", "linear", "nonlinear"}));

    // mc
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo propagation of manufacturing variabilities");
    add_common(mc_cmd, common);
    std::string mc_config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> draws;
    double mc_angle = 1.2;
    bool no_rotation = false, additive = false;
    std::vector<std::size_t> stability;
    mc_cmd->add_option("--config,-c", mc_config, "Variability config (JSON)")->required();
    mc_cmd->add_option("--seed", seed, "Override the config seed");
    mc_cmd->add_option("--draws", draws, "Override the number of draws");
    mc_cmd->add_option("--angle", mc_angle, "Deterministic torque-signed rotation, degrees");
    mc_cmd->add_flag("--no-rotation", no_rotation, "Skip the deterministic rotation");
    mc_cmd->add_flag("--additive", additive, "Orientation draw adds to the deterministic angle");
    mc_cmd->add_option("--torque-report", torque_file, "Torque signs (default: computed, nonlinear)");
    mc_cmd->add_option("--stability", stability, "Ascending draw counts for a convergence table")->delimiter(',');

    // budget
    auto* budget_cmd = app.add_subcommand("budget", "Measurement uncertainty of DIS1/DIS2 for a measured map");
    std::string map_path, budget_path, method = "analytic", out;
    double gradient = 13.56e-3, length_scale = 1.0, field_scale = 1.0;
    bool correlated_temp = false;
    std::size_t budget_draws = 100000;
    std::uint64_t budget_seed = 7;
    budget_cmd->add_option("--map", map_path, "Measured field map")->required();
    budget_cmd->add_option("--budget", budget_path, "Budget table (default: instantiated from the map)");
    budget_cmd->add_option("--gradient", gradient, "Maximum |grad B_x| in the DSV, T/m");
    budget_cmd->add_option("--method", method, "analytic|mc|both")->check(CLI::IsMember({"analytic", "mc", "both"}));
    budget_cmd->add_option("--draws", budget_draws, "MC oracle draws");
    budget_cmd->add_option("--seed", budget_seed, "MC oracle seed");
    budget_cmd->add_flag("--correlated-temp", correlated_temp, "Treat C_temp as one common drift");
    budget_cmd->add_option("--length-scale", length_scale, "Map length unit in metres");
    budget_cmd->add_option("--field-scale", field_scale, "Map field unit in tesla");
    budget_cmd->add_option("--out,-o", out, "Output directory");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Homogeneity statistics of a field map");
    bool measured = false;
    metrics_cmd->add_option("map", map_path, "Field map")->required();
    metrics_cmd->add_flag("--measured", measured, "Import as a measured scan");
    metrics_cmd->add_option("--length-scale", length_scale, "Map length unit in metres");
    metrics_cmd->add_option("--field-scale", field_scale, "Map field unit in tesla");
    metrics_cmd->add_option("--budget", budget_path, "Attach an uncertainty budget (analytic)");
    metrics_cmd->add_option("--gradient", gradient, "Maximum |grad B_x| for the default budget, T/m");
    metrics_cmd->add_option("--out,-o", out, "Output directory");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "L2 discrepancy of B_x between two maps");
    std::string map_a, map_b;
    compare_cmd->add_option("a", map_a, "Map under test")->required();
    compare_cmd->add_option("b", map_b, "Reference map")->required();
    compare_cmd->add_option("--out,-o", out, "Output directory");

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "Sample grid");
    add_grid(grid_cmd, grid);
    grid_cmd->add_option("--out,-o", out, "Output directory");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic Halbach array geometry");
    HalbachSpec hs;
    synth_cmd->add_option("--rings", hs.rings);
    synth_cmd->add_option("--layers", hs.layers);
    synth_cmd->add_option("--per-layer", hs.per_layer);
    synth_cmd->add_option("--inner-radius", hs.inner_radius);
    synth_cmd->add_option("--temp", hs.temperature);
    synth_cmd->add_option("--out,-o", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    set_thread_count(threads);

    try {
        auto fixed_point = [&] {
            FixedPointConfig fp;
            fp.tol = tol;
            fp.max_iters = max_iters;
            run.config["fixed_point"] = {{"tol", tol}, {"max_iters", max_iters}};
            return fp;
        };
        auto torque_signs = [&](const ArrayModel& a) {
            if (!torque_file.empty()) return parse_torque_report(run.read(torque_file), torque_file);
            return torque_map(a);
        };

        if (*solve_cmd) {
            run.command = "solve";
            ArrayModel a = load_model(run, common);
            const SolverMode m = solver_mode_from_string(mode);
            run.config["mode"] = mode;
            if (rotate_deg != 0.0) {
                a = apply_rotations(a, torque_signs(a), rotate_deg);
                run.config["rotate_deg"] = rotate_deg;
                run.config["torque_report"] = torque_file;
            }
            const SampleGrid g = make_grid(grid_spec(run, grid));
            SimulationOptions opt;
            opt.mode = m;
            opt.fp = fixed_point();
            const auto r = simulate(a, g, opt);
            json mj = metrics_json(r.metrics);
            mj["isocenter_bx_T"] = r.isocenter_b.x();
            mj["isocenter_b_T"] = {r.isocenter_b.x(), r.isocenter_b.y(), r.isocenter_b.z()};
            mj["mode"] = mode;
            mj["iterations"] = r.solution.iterations;
            mj["mu_fp"] = r.solution.mu_fp;
            run.files["metrics.json"] = mj.dump(2) + "\n";
            run.files["field_map.txt"] = format_fieldmap(r.map);
            run.files["working_points.txt"] = format_working_points(a, r.solution);
            run.timings = {{"assemble_s", r.timings.assemble_s}, {"solve_s", r.timings.solve_s}, {"field_s", r.timings.field_s}};
            std::printf("isocenter_bx %.6f mT\niterations %d\n", r.isocenter_b.x() * 1e3, r.solution.iterations);
            print_metrics(r.metrics);
            run.commit(common.out);
        } else if (*perturb_cmd) {
            run.command = "perturb";
            ArrayModel a = load_model(run, common);
            if (rotate_deg != 0.0) {
                const auto rep = torque_signs(a);
                a = apply_rotations(a, rep, rotate_deg);
                run.files["torque.txt"] = format_torque_report(rep);
            }
            run.config["rotate_deg"] = rotate_deg;
            run.config["torque_report"] = torque_file;
            run.files["geometry.txt"] = format_array(a);
            std::printf("magnets %zu\n", a.magnets.size());
            if (common.out.empty()) std::fputs(run.files["geometry.txt"].c_str(), stdout);
            run.commit(common.out);
        } else if (*torque_cmd) {
            run.command = "torque";
            const ArrayModel a = load_model(run, common);
            run.config["mode"] = mode;
            const auto rep = torque_map(a, solver_mode_from_string(mode));
            run.files["torque.txt"] = format_torque_report(rep);
            if (common.out.empty()) std::fputs(run.files["torque.txt"].c_str(), stdout);
            run.commit(common.out);
        } else if (*mc_cmd) {
            run.command = "mc";
            const ArrayModel a = load_model(run, common);
            VariabilityConfig cfg = parse_variability_config(run.read(mc_config), mc_config);
            if (seed) cfg.seed = *seed;
            if (draws) cfg.draws = *draws;
            if (additive) cfg.orientation_additive = true;
            cfg.validate();
            McBase base;
            base.angle_deg = mc_angle;
            if (!no_rotation) base.torque_sign = torque_signs(a).signs();
            run.config["mc"] = json::parse(format_variability_config(cfg));
            run.config["angle_deg"] = no_rotation ? 0.0 : mc_angle;
            run.config["torque_report"] = torque_file;
            run.config["seed"] = cfg.seed;
            McResult r;
            if (!stability.empty()) {
                VariabilityConfig big = cfg;
                big.draws = std::max(cfg.draws, *std::max_element(stability.begin(), stability.end()));
                r = run_mc(a, big, base);
                run.files["stability.txt"] = format_stability(stability_from(r, stability));
                run.config["stability"] = stability;
            } else {
                r = run_mc(a, cfg, base);
            }
            run.files["mc_result.json"] = format_mc_result(r);
            run.files["mc_raw.txt"] = format_mc_raw(r);
            std::printf("seed %llu\ndraws %zu failed %zu\n", static_cast<unsigned long long>(r.seed), r.draws, r.failed);
            std::printf("mean_bx %.4f +- %.4f mT\ndis1 %.0f +- %.0f ppm\ndis2 %.0f +- %.0f ppm\n", r.mean_bx.expected * 1e3,
                        r.mean_bx.expanded * 1e3, r.dis1.expected, r.dis1.expanded, r.dis2.expected, r.dis2.expanded);
            run.commit(common.out);
        } else if (*budget_cmd || *metrics_cmd) {
            const bool is_budget = static_cast<bool>(*budget_cmd);
            run.command = is_budget ? "budget" : "metrics";
            run.read(map_path);
            FieldMap map;
            if (is_budget || measured) {
                MeasuredImportOptions io;
                io.length_scale = length_scale;
                io.field_scale = field_scale;
                map = import_measured_map(map_path, io);
            } else {
                map = load_fieldmap(map_path);
            }
            run.config["map"] = map_path;
            run.config["length_scale"] = length_scale;
            run.config["field_scale"] = field_scale;
            const auto m = metrics(map);
            json result = metrics_json(m);
            std::vector<BudgetComponent> budget;
            const bool want_budget = is_budget || !budget_path.empty();
            if (want_budget) {
                if (!budget_path.empty()) {
                    budget = parse_budget(run.read(budget_path), budget_path);
                } else {
                    BudgetDefaults d;
                    d.gradient_max = gradient;
                    d.correlated_temperature = correlated_temp;
                    budget = default_budget(map, d);
                }
                run.config["budget"] = budget_path.empty() ? "default" : budget_path;
                run.config["gradient"] = gradient;
                run.config["correlated_temp"] = correlated_temp;
                run.files["budget.txt"] = format_budget(budget);
            }
            if (is_budget) {
                run.config["method"] = method;
                if (method == "analytic" || method == "both") {
                    const auto r = combine_analytic(map, budget);
                    run.files["budget_analytic.json"] = format_budget_result(r);
                    std::printf("analytic u(dis1) %.1f ppm U %.1f ppm\nanalytic u(dis2) %.1f ppm U %.1f ppm\n", r.u_dis1, r.U_dis1, r.u_dis2, r.U_dis2);
                }
                if (method == "mc" || method == "both") {
                    run.config["draws"] = budget_draws;
                    run.config["seed"] = budget_seed;
                    const auto r = combine_mc_oracle(map, budget, budget_draws, budget_seed);
                    run.files["budget_mc.json"] = format_budget_result(r);
                    std::printf("mc u(dis1) %.1f ppm U %.1f ppm\nmc u(dis2) %.1f ppm U %.1f ppm\n", r.u_dis1, r.U_dis1, r.u_dis2, r.U_dis2);
                }
            } else if (want_budget) {
                const auto r = combine_analytic(map, budget);
                result["u_dis1_ppm"] = r.u_dis1;
                result["U_dis1_ppm"] = r.U_dis1;
                result["u_dis2_ppm"] = r.u_dis2;
                result["U_dis2_ppm"] = r.U_dis2;
            }
            run.files["metrics.json"] = result.dump(2) + "\n";
            print_metrics(m);
            run.commit(out);
        } else if (*compare_cmd) {
            run.command = "compare";
            const FieldMap a = parse_fieldmap(run.read(map_a), map_a);
            const FieldMap b = parse_fieldmap(run.read(map_b), map_b);
            const double l2 = l2_discrepancy(a, b);
            run.config["a"] = map_a;
            run.config["b"] = map_b;
            run.files["compare.json"] = json{{"l2_discrepancy", l2}}.dump(2) + "\n";
            std::printf("%s\n", text::fmt(l2).c_str());
            run.commit(out);
        } else if (*grid_cmd) {
            run.command = "grid";
            const SampleGrid g = make_grid(grid_spec(run, grid));
            std::string pts = "# x y z [m]\n";
            for (const auto& p : g.points) pts += text::fmt(p.x()) + " " + text::fmt(p.y()) + " " + text::fmt(p.z()) + "\n";
            run.files["grid.txt"] = pts;
            std::printf("%zu\n", g.size());
            run.commit(out);
        } else if (*synth_cmd) {
            run.command = "synth";
            const ArrayModel a = synthetic_halbach(hs);
            run.config["rings"] = hs.rings;
            run.config["layers"] = hs.layers;
            run.config["per_layer"] = hs.per_layer;
            run.config["inner_radius"] = hs.inner_radius;
            run.config["temperature"] = hs.temperature;
            run.files["geometry.txt"] = format_array(a);
            std::printf("magnets %zu\n", a.magnets.size());
            run.commit(out);
        }
    } catch (const ConvergenceError& e) {
        std::cerr << json{{"error", "non_convergence"}, {"message", e.what()}, {"exit_code", kNoConvergence}}.dump() << "\n";
        return kNoConvergence;
    } catch (const NumericalError& e) {
        std::cerr << json{{"error", "numerical"}, {"message", e.what()}, {"exit_code", kNumerical}}.dump() << "\n";
        return kNumerical;
    } catch (const GeometryError& e) {
        std::cerr << json{{"error", "geometry"}, {"message", e.what()}, {"exit_code", kGeometry}}.dump() << "\n";
        return kGeometry;
    } catch (const Error& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}, {"exit_code", kConfig}}.dump() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}, {"exit_code", kConfig}}.dump() << "\n";
        return kConfig;
    }
    return kOk;
}
