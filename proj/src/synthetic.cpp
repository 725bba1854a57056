#include "magarray/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace magarray {

ArrayModel synthetic_halbach(const HalbachSpec& s) {
    if (s.rings < 1 || s.layers < 1 || s.per_layer < 2) throw DomainError("synthetic_halbach: empty layout");
    ArrayModel a;
    a.temperature = s.temperature;
    Material cube = reference_material_cube();
    Material lng = reference_material_long();
    if (s.with_curves) {
        cube.hj_curve = placeholder_curve(cube);
        lng.hj_curve = placeholder_curve(lng);
    }
    a.materials.emplace(cube.id, cube);
    a.materials.emplace(lng.id, lng);

    const double h = 0.5 * s.cube_edge;
    const double z_top = 0.5 * (s.rings - 1) * s.ring_pitch;
    const double end_z = z_top + h + 0.5 * s.long_length + 0.5 * (s.ring_pitch - s.cube_edge);

    int index = 0;
    auto add_ring = [&](int ring, double z, const std::string& mat, const Vec3& half) {
        for (int l = 0; l < s.layers; ++l) {
            const double r = s.inner_radius + l * s.layer_spacing;
            for (int k = 0; k < s.per_layer; ++k) {
                const double phi = 2.0 * std::numbers::pi * k / s.per_layer;
                const Vec3 c(r * std::cos(phi), r * std::sin(phi), z);
                const Vec3 mag(std::cos(2.0 * phi), std::sin(2.0 * phi), 0.0);
                a.magnets.emplace_back(index++, c, orientation_from_axes(mag, Vec3::UnitZ()), half, mat, ring, l);
            }
        }
    };

    int ring = 0;
    if (s.end_rings) add_ring(ring++, -end_z, lng.id, Vec3(h, h, 0.5 * s.long_length));
    for (int r = 0; r < s.rings; ++r) add_ring(ring++, -z_top + r * s.ring_pitch, cube.id, Vec3(h, h, h));
    if (s.end_rings) add_ring(ring++, end_z, lng.id, Vec3(h, h, 0.5 * s.long_length));
    a.validate();
    return a;
}

}  // namespace magarray
