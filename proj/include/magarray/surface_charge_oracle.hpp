#pragma once

#include "magarray/core.hpp"
#include "magarray/geometry.hpp"

namespace magarray {

struct OracleOptions {
    double rel_tol = 1e-8;
    int max_depth = 22;       ///< panel bisection levels per face
    int order = 8;            ///< Gauss-Legendre points per direction
};

struct OracleResult {
    Vec3 h = Vec3::Zero();
    double achieved_tol = 0.0;  ///< estimated absolute error / |H|
    std::size_t evaluations = 0;
};

/// Exterior field of a bar by direct quadrature of the Coulomb integral over
/// its two charged faces (sigma = +-J_v/mu0), tensor Gauss-Legendre panels
/// with adaptive quad-splitting. Independent of the closed-form kernel.
///
/// Throws NumericalError when a panel cannot be resolved within max_depth.
OracleResult oracle_surface_charge_local(const Vec3& half_dims, double jv, const Vec3& point_local,
                                         const OracleOptions& opt = {});

OracleResult oracle_surface_charge(const BarMagnet& magnet, double jv, const Vec3& point_global,
                                   const OracleOptions& opt = {});

}  // namespace magarray
