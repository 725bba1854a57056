#include "magarray/perturbations.hpp"

#include "magarray/field_kernel.hpp"
#include "magarray/parallel.hpp"
#include "magarray/text.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace magarray {

std::vector<int> TorqueReport::signs() const {
    std::vector<int> out(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) out[i] = entries[i].sign;
    return out;
}

TorqueReport torque_map(const ArrayModel& array, const WorkingPointSolution& sol) {
    const std::size_t n = array.magnets.size();
    if (sol.jv.size() != n) throw StateError("torque_map: working points missing or from a different array");

    std::map<int, std::vector<std::size_t>> rings;
    for (std::size_t i = 0; i < n; ++i) rings[array.magnets[i].ring].push_back(i);

    TorqueReport rep;
    rep.entries.resize(n);
    parallel_for(n, [&](std::size_t i) {
        const BarMagnet& mi = array.magnets[i];
        Vec3 h = Vec3::Zero();
        for (std::size_t p : rings[mi.ring]) {
            if (p == i) continue;
            h += bar_field_global(array.magnets[p], sol.jv[p], mi.center()).h;
        }
        const Vec3 moment = sol.jv[i] * mi.volume() / kMu0 * mi.axis_v();
        const Vec3 b = kMu0 * h;
        const Vec3 tau = moment.cross(b);
        TorqueEntry& e = rep.entries[i];
        e.index = mi.index;
        e.ring = mi.ring;
        e.layer = mi.layer;
        e.torque_z = tau.z();
        const double floor = 1e-10 * moment.norm() * b.norm();
        e.sign = std::abs(tau.z()) <= floor ? 0 : (tau.z() > 0.0 ? 1 : -1);
        if (e.sign == 0) e.torque_z = 0.0;
    });
    return rep;
}

TorqueReport torque_map(const ArrayModel& array, SolverMode mode, const FixedPointConfig& fp) {
    const auto chars = resolve_characteristics(array);
    WorkingPointSolution sol;
    if (mode == SolverMode::Ideal) {
        sol = solve_ideal(array, chars);
    } else {
        const auto matrix = assemble(array);
        sol = solve(mode, array, matrix, chars, fp);
    }
    return torque_map(array, sol);
}

namespace {

void check_overlaps(const ArrayModel& a, const char* what) {
    if (auto pair = find_overlap(a.magnets)) {
        throw GeometryError(std::string(what) + ": magnets " + std::to_string(a.magnets[pair->first].index) + " and " +
                            std::to_string(a.magnets[pair->second].index) + " overlap");
    }
}

}  // namespace

ArrayModel rotate_magnets(const ArrayModel& array, std::span<const double> angles_deg) {
    if (angles_deg.size() != array.magnets.size()) throw DomainError("rotate_magnets: one angle per magnet required");
    ArrayModel out = array;
    for (std::size_t i = 0; i < out.magnets.size(); ++i) {
        if (angles_deg[i] == 0.0) continue;
        const Quat rz(Eigen::AngleAxisd(angles_deg[i] * std::numbers::pi / 180.0, Vec3::UnitZ()));
        out.magnets[i].set_orientation(rz * out.magnets[i].orientation());
    }
    check_overlaps(out, "rotation");
    return out;
}

ArrayModel apply_rotations(const ArrayModel& array, const TorqueReport& report, double angle_deg) {
    if (!(std::abs(angle_deg) < 5.0)) throw DomainError("apply_rotations: |angle| must be below 5 degrees");
    if (report.entries.size() != array.magnets.size()) throw StateError("apply_rotations: torque report does not match the array");
    std::vector<double> angles(array.magnets.size());
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (report.entries[i].index != array.magnets[i].index)
            throw StateError("apply_rotations: torque report order differs from the array");
        angles[i] = report.entries[i].sign * angle_deg;
    }
    return rotate_magnets(array, angles);
}

ArrayModel displace_magnets(const ArrayModel& array, std::span<const Vec3> displacement) {
    if (displacement.size() != array.magnets.size()) throw DomainError("displace_magnets: one displacement per magnet required");
    ArrayModel out = array;
    for (std::size_t i = 0; i < out.magnets.size(); ++i)
        out.magnets[i].set_center(out.magnets[i].center() + displacement[i]);
    check_overlaps(out, "displacement");
    return out;
}

ArrayModel apply_ring_shifts(const ArrayModel& array, const std::map<int, double>& offsets) {
    for (const auto& [ring, dz] : offsets) {
        if (!(std::abs(dz) < 5e-3)) throw DomainError("apply_ring_shifts: offset of ring " + std::to_string(ring) + " exceeds 5 mm");
    }
    ArrayModel out = array;
    for (auto& m : out.magnets) {
        auto it = offsets.find(m.ring);
        if (it == offsets.end() || it->second == 0.0) continue;
        m.set_center(m.center() + Vec3(0.0, 0.0, it->second));
    }
    for (const auto& [ring, dz] : offsets) {
        if (dz != 0.0) out.ring_z_offsets[ring] += dz;
    }
    check_overlaps(out, "ring shift");
    return out;
}

std::string format_torque_report(const TorqueReport& r) {
    std::string out = "# grouping " + r.grouping + "\n# index ring layer torque_z[N*m] sign\n";
    for (const auto& e : r.entries) {
        out += std::to_string(e.index) + " " + std::to_string(e.ring) + " " + std::to_string(e.layer) + " " +
               text::fmt(e.torque_z) + " " + std::to_string(e.sign) + "\n";
    }
    return out;
}

TorqueReport parse_torque_report(const std::string& content, const std::string& src) {
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    TorqueReport r;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = text::strip(line);
        if (body.empty()) continue;
        const auto tok = text::split_ws(body);
        if (tok.size() != 5) throw ParseError(src, lineno, "expected 'index ring layer torque_z sign'");
        try {
            TorqueEntry e;
            e.index = static_cast<int>(text::to_int(tok[0]));
            e.ring = static_cast<int>(text::to_int(tok[1]));
            e.layer = static_cast<int>(text::to_int(tok[2]));
            e.torque_z = text::to_double(tok[3]);
            e.sign = static_cast<int>(text::to_int(tok[4]));
            if (e.sign < -1 || e.sign > 1) throw ParseError(src, lineno, "sign must be -1, 0 or 1");
            r.entries.push_back(e);
        } catch (const std::invalid_argument& ex) {
            throw ParseError(src, lineno, ex.what());
        }
    }
    return r;
}

}  // namespace magarray
