#pragma once

#include "magarray/fieldmap.hpp"

#include <span>

namespace magarray {

/// Homogeneity statistics of B_x. DIS values are stored as ppm (x1e6) but
/// never rounded.
struct HomogeneityMetrics {
    double mean_bx = 0.0;  ///< T
    double max_bx = 0.0;
    double min_bx = 0.0;
    double std_bx = 0.0;   ///< population (1/N) standard deviation
    double dis1 = 0.0;     ///< (max - min)/mean, ppm
    double dis2 = 0.0;     ///< std/mean, ppm
    std::size_t count = 0;
};

/// Reductions run sequentially in index order, so results are bitwise
/// reproducible. Throws DomainError for an empty input or zero mean.
HomogeneityMetrics metrics(std::span<const double> bx);
HomogeneityMetrics metrics(const FieldMap& map);

/// sum (a - b)^2 / sum b^2 over B_x. This is the squared-norm ratio, not its root.
/// Throws DomainError unless both maps sample the same points.
double l2_discrepancy(const FieldMap& a, const FieldMap& b);

}  // namespace magarray
