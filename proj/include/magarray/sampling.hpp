#pragma once

#include "magarray/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace magarray {

enum class GridConvention {
    Auto,      ///< resolves to Offset, the convention giving 4224 points for (0.200 m, 0.010 m)
    Centered,  ///< lattice contains the origin
    Offset,    ///< lattice shifted by half a step on every axis
};

struct GridSpec {
    std::string shape = "sphere";  ///< "sphere" or "zlines"
    double diameter = 0.2;
    double step = 0.01;
    GridConvention convention = GridConvention::Offset;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SampleGrid {
    std::vector<Vec3> points;
    GridSpec spec;

    std::size_t size() const { return points.size(); }
};

std::string to_string(GridConvention c);
GridConvention grid_convention_from_string(const std::string& s);

/// Cartesian lattice points inside (boundary inclusive) a sphere centred on
/// the origin, ordered x-major then y then z.
SampleGrid dsv_grid(double diameter, double step, GridConvention convention = GridConvention::Auto);

/// Eight lines parallel to z at `radius`, azimuths 0, 45, ..., 315 degrees,
/// z from -half_length to +half_length in `step` increments.
SampleGrid zline_grid(double radius = 0.12, double half_length = 0.09, double step = 0.005);

/// Builds the grid named by `spec`: "sphere" -> dsv_grid, "zlines" ->
/// zline_grid with its default preset.
SampleGrid make_grid(const GridSpec& spec);

}  // namespace magarray
