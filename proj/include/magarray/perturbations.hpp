#pragma once

#include "magarray/geometry.hpp"
#include "magarray/interaction.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace magarray {

struct TorqueEntry {
    int index = 0;
    int ring = 0;
    int layer = 0;
    double torque_z = 0.0;  ///< N·m about the global z axis
    int sign = 0;           ///< -1, 0 or +1
};

/// Per-magnet torque from the magnets of the same ring only, in array order.
struct TorqueReport {
    std::vector<TorqueEntry> entries;
    std::string grouping = "same_ring";

    std::vector<int> signs() const;
};

/// Point-dipole torque m x B_ext at each barycentre, with m = J_v V v / mu0
/// and B_ext summed over the other magnets of the same ring. A torque below
/// 1e-10 |m||B_ext| is reported as zero (sign 0).
///
/// Throws StateError when `solution` does not belong to `array`.
TorqueReport torque_map(const ArrayModel& array, const WorkingPointSolution& solution);

/// Solves the working points in `mode` first.
TorqueReport torque_map(const ArrayModel& array, SolverMode mode = SolverMode::Nonlinear,
                        const FixedPointConfig& fp = {});

/// Rotates magnet i about the global z axis through its own barycentre by
/// angles_deg[i]. Returns a new array; throws GeometryError naming the first
/// overlapping pair.
ArrayModel rotate_magnets(const ArrayModel& array, std::span<const double> angles_deg);

/// Each magnet rotated by sign_i * angle_deg; requires |angle_deg| < 5.
ArrayModel apply_rotations(const ArrayModel& array, const TorqueReport& report, double angle_deg);

/// Translates magnet i by displacement[i] (metres, global frame).
ArrayModel displace_magnets(const ArrayModel& array, std::span<const Vec3> displacement);

/// Every magnet of ring r moves by (0, 0, offsets[r]); offsets must be below
/// 5 mm. The applied offsets accumulate into ArrayModel::ring_z_offsets.
ArrayModel apply_ring_shifts(const ArrayModel& array, const std::map<int, double>& offsets);

std::string format_torque_report(const TorqueReport& report);
TorqueReport parse_torque_report(const std::string& content, const std::string& source = "<string>");

}  // namespace magarray
