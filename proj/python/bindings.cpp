#include "magarray/field_kernel.hpp"
#include "magarray/monte_carlo.hpp"
#include "magarray/parallel.hpp"
#include "magarray/perturbations.hpp"
#include "magarray/pipeline.hpp"
#include "magarray/synthetic.hpp"
#include "magarray/uncertainty_budget.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace magarray;

namespace {

Eigen::MatrixXd points_matrix(const std::vector<Vec3>& pts) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    return out;
}

std::vector<Vec3> to_points(const Eigen::MatrixXd& m) {
    if (m.cols() != 3) throw DomainError("points must have shape (n, 3)");
    std::vector<Vec3> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m.row(i).transpose();
    return out;
}

py::dict metrics_dict(const HomogeneityMetrics& m) {
    py::dict d;
    d["mean_bx"] = m.mean_bx;
    d["max_bx"] = m.max_bx;
    d["min_bx"] = m.min_bx;
    d["std_bx"] = m.std_bx;
    d["dis1"] = m.dis1;
    d["dis2"] = m.dis2;
    d["count"] = m.count;
    return d;
}

py::dict stat_dict(const McStat& s) {
    py::dict d;
    d["expected"] = s.expected;
    d["std"] = s.std;
    d["q025"] = s.q025;
    d["q975"] = s.q975;
    d["expanded"] = s.expanded;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Permanent-magnet array field simulation";

    // translators registered later are tried first, so bases go first
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ReferenceError>(m, "ReferenceError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    m.attr("MU0") = kMu0;

    py::class_<ArrayModel>(m, "ArrayModel")
        .def_property_readonly("size", [](const ArrayModel& a) { return a.magnets.size(); })
        .def_readwrite("temperature", &ArrayModel::temperature)
        .def_property_readonly("materials", [](const ArrayModel& a) {
            std::vector<std::string> ids;
            for (const auto& [id, _] : a.materials) ids.push_back(id);
            return ids;
        })
        .def("centers", [](const ArrayModel& a) {
            std::vector<Vec3> c;
            for (const auto& mg : a.magnets) c.push_back(mg.center());
            return points_matrix(c);
        })
        .def("to_text", &format_array);

    m.def("load_array", &load_array, py::arg("path"));
    m.def("parse_array", [](const std::string& s) { return parse_array(s); }, py::arg("text"));
    m.def("synthetic_halbach", [](int rings, int layers, int per_layer, double inner_radius, double temperature, bool with_curves) {
        HalbachSpec s;
        s.rings = rings;
        s.layers = layers;
        s.per_layer = per_layer;
        s.inner_radius = inner_radius;
        s.temperature = temperature;
        s.with_curves = with_curves;
        return synthetic_halbach(s);
    }, py::arg("rings") = 6, py::arg("layers") = 2, py::arg("per_layer") = 24, py::arg("inner_radius") = 0.16,
       py::arg("temperature") = 18.0, py::arg("with_curves") = true);

    m.def("demag_factor", [](const Vec3& half_dims) { return demag_factor(half_dims); }, py::arg("half_dims"));
    m.def("bar_field", [](const Vec3& half_dims, double jv, const Vec3& p) { return bar_field_local(half_dims, jv, p).h; },
          py::arg("half_dims"), py::arg("jv"), py::arg("point"), "H (A/m) of a bar polarised along local v, local frame");

    m.def("dsv_grid", [](double diameter, double step, const std::string& convention) {
        return points_matrix(dsv_grid(diameter, step, grid_convention_from_string(convention)).points);
    }, py::arg("diameter") = 0.2, py::arg("step") = 0.01, py::arg("convention") = "auto");

    m.def("simulate", [](const ArrayModel& a, const std::string& mode, double diameter, double step) {
        SimulationOptions opt;
        opt.mode = solver_mode_from_string(mode);
        const auto r = simulate(a, dsv_grid(diameter, step), opt);
        py::dict d;
        d["metrics"] = metrics_dict(r.metrics);
        d["isocenter_b"] = r.isocenter_b;
        d["jv"] = r.solution.jv;
        d["hv"] = r.solution.hv;
        d["iterations"] = r.solution.iterations;
        d["bx"] = r.map.bx();
        return d;
    }, py::arg("array"), py::arg("mode") = "nonlinear", py::arg("diameter") = 0.2, py::arg("step") = 0.01);

    m.def("field", [](const ArrayModel& a, const std::vector<double>& jv, const Eigen::MatrixXd& pts) {
        const auto samples = superpose(a, jv, to_points(pts));
        std::vector<Vec3> b;
        for (const auto& s : samples) b.push_back(s.b);
        return points_matrix(b);
    }, py::arg("array"), py::arg("jv"), py::arg("points"), "B (T) at points of shape (n, 3)");

    m.def("metrics", [](const std::vector<double>& bx) { return metrics_dict(metrics(bx)); }, py::arg("bx"));

    m.def("torque_signs", [](const ArrayModel& a) { return torque_map(a).signs(); }, py::arg("array"));
    m.def("apply_rotations", [](const ArrayModel& a, double angle) { return apply_rotations(a, torque_map(a), angle); },
          py::arg("array"), py::arg("angle_deg"));

    m.def("run_mc", [](const ArrayModel& a, const std::string& config_json, const std::vector<int>& signs, double angle) {
        const auto cfg = parse_variability_config(config_json);
        McBase base{signs, angle};
        const auto r = run_mc(a, cfg, base);
        py::dict d;
        d["seed"] = r.seed;
        d["draws"] = r.draws;
        d["failed"] = r.failed;
        d["mean_bx"] = stat_dict(r.mean_bx);
        d["dis1"] = stat_dict(r.dis1);
        d["dis2"] = stat_dict(r.dis2);
        return d;
    }, py::arg("array"), py::arg("config_json"), py::arg("torque_signs") = std::vector<int>{}, py::arg("angle_deg") = 1.2);

    m.def("budget_analytic", [](const std::string& map_path) {
        const auto map = import_measured_map(map_path);
        const auto r = combine_analytic(map, default_budget(map));
        py::dict d;
        d["u_dis1"] = r.u_dis1;
        d["U_dis1"] = r.U_dis1;
        d["u_dis2"] = r.u_dis2;
        d["U_dis2"] = r.U_dis2;
        return d;
    }, py::arg("map_path"));

    m.def("set_threads", &set_thread_count, py::arg("n"));
}
