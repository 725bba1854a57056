#include "magarray/sampling.hpp"

#include <cmath>
#include <numbers>

namespace magarray {

std::string to_string(GridConvention c) {
    switch (c) {
        case GridConvention::Auto: return "auto";
        case GridConvention::Centered: return "centered";
        case GridConvention::Offset: return "offset";
    }
    return "?";
}

GridConvention grid_convention_from_string(const std::string& s) {
    if (s == "auto") return GridConvention::Auto;
    if (s == "centered") return GridConvention::Centered;
    if (s == "offset") return GridConvention::Offset;
    throw ConfigError("unknown grid convention '" + s + "' (expected auto|centered|offset)");
}

SampleGrid dsv_grid(double diameter, double step, GridConvention convention) {
    if (!(step > 0.0)) throw DomainError("dsv_grid: step must be positive");
    if (!(diameter > step)) throw DomainError("dsv_grid: diameter must exceed the step");
    if (convention == GridConvention::Auto) convention = GridConvention::Offset;

    SampleGrid g;
    g.spec = {"sphere", diameter, step, convention};
    const double shift = convention == GridConvention::Offset ? 0.5 : 0.0;
    // Work in step units so the inclusion test is exact for lattice sizes.
    const double radius = 0.5 * diameter / step;
    const double r2 = radius * radius * (1.0 + 1e-12);
    const int n = static_cast<int>(std::ceil(radius)) + 1;
    for (int i = -n; i <= n; ++i) {
        const double x = i + shift;
        for (int j = -n; j <= n; ++j) {
            const double y = j + shift;
            for (int k = -n; k <= n; ++k) {
                const double z = k + shift;
                if (x * x + y * y + z * z <= r2) g.points.emplace_back(x * step, y * step, z * step);
            }
        }
    }
    return g;
}

SampleGrid zline_grid(double radius, double half_length, double step) {
    if (!(radius > 0.0) || !(half_length > 0.0) || !(step > 0.0)) throw DomainError("zline_grid: invalid parameters");
    SampleGrid g;
    g.spec = {"zlines", 2.0 * radius, step, GridConvention::Centered};
    const int nz = static_cast<int>(std::lround(half_length / step));
    for (int a = 0; a < 8; ++a) {
        const double alpha = a * std::numbers::pi / 4.0;
        for (int k = -nz; k <= nz; ++k)
            g.points.emplace_back(radius * std::cos(alpha), radius * std::sin(alpha), k * step);
    }
    return g;
}

SampleGrid make_grid(const GridSpec& spec) {
    if (spec.shape == "sphere") return dsv_grid(spec.diameter, spec.step, spec.convention);
    if (spec.shape == "zlines") return zline_grid(0.5 * spec.diameter, 0.09, spec.step);
    throw ConfigError("unknown grid shape '" + spec.shape + "'");
}

}  // namespace magarray
