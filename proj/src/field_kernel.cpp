#include "magarray/field_kernel.hpp"

#include "magarray/parallel.hpp"

#include <cmath>
#include <numbers>

namespace magarray {

namespace {

// ln(z + sqrt(rho2 + z^2)) without cancellation for negative z.
inline double log_z_plus_r(double z, double r, double rho2) {
    return z >= 0.0 ? std::log(z + r) : std::log(rho2 / (r - z));
}

// Moves coordinates lying within the guard of a face plane outward.
bool nudge_off_planes(Vec3& p, const Vec3& half) {
    bool moved = false;
    for (int pass = 0; pass < 3; ++pass) {
        bool again = false;
        for (int c = 0; c < 3; ++c) {
            if (std::abs(std::abs(p[c]) - half[c]) < kSingularGuard) {
                p[c] += (p[c] >= 0.0 ? 1.0 : -1.0) * kSingularGuard;
                again = moved = true;
            }
        }
        if (!again) break;
    }
    return moved;
}

}  // namespace

KernelResult bar_field_local(const Vec3& half, double jv, const Vec3& point_local) {
    KernelResult res;
    Vec3 p = point_local;
    res.nudged = nudge_off_planes(p, half);
    if (std::abs(p.x()) < half.x() && std::abs(p.y()) < half.y() && std::abs(p.z()) < half.z())
        throw DomainError("bar_field_local: point inside the bar");
    if (jv == 0.0) return res;

    double hu = 0.0, hv = 0.0, hw = 0.0;
    for (int s = 1; s >= -1; s -= 2) {
        const double y = p.y() - s * half.y();
        const double y2 = y * y;
        for (int a = 1; a >= -1; a -= 2) {
            const double x = p.x() + a * half.x();
            const double x2 = x * x;
            for (int b = 1; b >= -1; b -= 2) {
                const double z = p.z() + b * half.z();
                const double z2 = z * z;
                const double r = std::sqrt(x2 + y2 + z2);
                const double sign = static_cast<double>(s * a * b);
                hu -= sign * log_z_plus_r(z, r, x2 + y2);
                hw -= sign * log_z_plus_r(x, r, z2 + y2);
                hv += sign * std::atan(x * z / (y * r));
            }
        }
    }
    const double scale = jv / (4.0 * std::numbers::pi * kMu0);
    res.h = Vec3(hu, hv, hw) * scale;
    return res;
}

KernelResult bar_field_global(const BarMagnet& magnet, double jv, const Vec3& point_global) {
    KernelResult res = bar_field_local(magnet.half_dims(), jv, magnet.to_local(point_global));
    res.h = magnet.frame() * res.h;
    return res;
}

std::vector<FieldSample> superpose(const ArrayModel& array, std::span<const double> jv,
                                   std::span<const Vec3> points) {
    if (jv.size() != array.magnets.size()) throw DomainError("superpose: one J_v per magnet required");
    std::vector<FieldSample> out(points.size());
    parallel_for(points.size(), [&](std::size_t k) {
        Vec3 h = Vec3::Zero();
        for (std::size_t i = 0; i < array.magnets.size(); ++i)
            h += bar_field_global(array.magnets[i], jv[i], points[k]).h;
        out[k].point = points[k];
        out[k].h = h;
        out[k].b = kMu0 * h;
    });
    return out;
}

Vec3 dipole_field(const Vec3& moment, const Vec3& r) {
    const double d = r.norm();
    const Vec3 n = r / d;
    return (3.0 * moment.dot(n) * n - moment) / (4.0 * std::numbers::pi * d * d * d);
}

}  // namespace magarray
