#pragma once

#include "magarray/geometry.hpp"

namespace magarray {

/// Parameters of a synthetic dipolar Halbach cylinder. This is a stand-in
/// layout for tests and demonstrations, not a reconstruction of any built
/// magnet.
struct HalbachSpec {
    int rings = 6;                  ///< cube rings, stacked along z
    int layers = 2;                 ///< concentric layers per ring
    int per_layer = 24;             ///< magnets per layer
    double inner_radius = 0.16;     ///< m, barycentre radius of layer 0
    double layer_spacing = 0.03;    ///< m
    double ring_pitch = 0.03;       ///< m
    double cube_edge = 0.012;       ///< m
    bool end_rings = true;          ///< add one ring of long bars at each end
    double long_length = 0.05;      ///< m, long-bar extent along z
    bool with_curves = true;        ///< attach placeholder H-J curves
    double temperature = 18.0;      ///< degC
};

/// Magnet k of a layer sits at azimuth phi_k = 2 pi k / n and is polarised
/// at angle 2 phi_k in the xy plane, giving a transverse field along +x.
/// Cube rings use material "N52-cube"; end rings use "N52-long" with their
/// long edge along z.
ArrayModel synthetic_halbach(const HalbachSpec& spec = {});

}  // namespace magarray
