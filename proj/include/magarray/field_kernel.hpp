#pragma once

#include "magarray/core.hpp"
#include "magarray/geometry.hpp"

#include <span>
#include <vector>

namespace magarray {

/// Points closer than this to a face-plane extension of a bar are moved
/// outward by the same distance before evaluation.
inline constexpr double kSingularGuard = 1e-9;

struct KernelResult {
    Vec3 h = Vec3::Zero();  ///< A/m
    bool nudged = false;    ///< evaluated at a point displaced off a singular locus
};

/// Closed-form exterior field of a bar uniformly polarised along its local v
/// axis, in the bar's local frame.
///
/// The bar is replaced by its surface charges sigma = +-J_v/mu0 on the two
/// v faces; each face integral has an exact primitive, so the field is a
/// signed sum over the eight corners:
///
///   H_u = (M/4pi) sum -ln(Z + R)       H_w = (M/4pi) sum -ln(X + R)
///   H_v = (M/4pi) sum atan(X Z / (Y R))
///
/// with M = J_v/mu0 and (X, Y, Z) the corner-relative coordinates. The
/// prefactor is J_v/(4 pi mu0); with it the dipole far field and the
/// quadrature oracle agree.
///
/// Throws DomainError for points inside the bar deeper than the guard.
KernelResult bar_field_local(const Vec3& half_dims, double jv, const Vec3& point_local);

/// bar_field_local evaluated in the magnet's frame and rotated back to global.
KernelResult bar_field_global(const BarMagnet& magnet, double jv, const Vec3& point_global);

struct FieldSample {
    Vec3 point = Vec3::Zero();  ///< m
    Vec3 h = Vec3::Zero();      ///< A/m
    Vec3 b = Vec3::Zero();      ///< T, mu0*H (points are exterior)
};

/// Superposition of all magnets at each point. Magnets are summed in index
/// order; points are processed in parallel.
std::vector<FieldSample> superpose(const ArrayModel& array, std::span<const double> jv,
                                   std::span<const Vec3> points);

/// Point-dipole field of moment m (A·m²) located at the origin, A/m.
Vec3 dipole_field(const Vec3& moment, const Vec3& r);

}  // namespace magarray
