#pragma once

#include "magarray/geometry.hpp"
#include "magarray/material.hpp"

#include <random>

namespace testutil {

using namespace magarray;

inline Material linear_cube_material() { return reference_material_cube(); }

/// One magnet per entry; polarisation along `mag`, w axis hint z.
inline ArrayModel make_array(const std::vector<Vec3>& centers, const std::vector<Vec3>& mags,
                             Vec3 half = Vec3::Constant(0.006), bool curves = false) {
    ArrayModel a;
    Material m = reference_material_cube();
    if (curves) m.hj_curve = placeholder_curve(m);
    a.materials.emplace(m.id, m);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const Vec3 hint = std::abs(mags[i].normalized().z()) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
        a.magnets.emplace_back(static_cast<int>(i), centers[i], orientation_from_axes(mags[i], hint), half, m.id);
    }
    return a;
}

inline Quat random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Quat q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return q;
}

/// Random point outside the box [-half, half] by at least `gap`, within `reach` of it.
inline Vec3 random_exterior(std::mt19937_64& rng, const Vec3& half, double gap, double reach) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        Vec3 p(u(rng), u(rng), u(rng));
        p = p.cwiseProduct(half + Vec3::Constant(reach));
        const Vec3 excess = p.cwiseAbs() - half;
        if (excess.maxCoeff() > gap) return p;
    }
}

}  // namespace testutil
