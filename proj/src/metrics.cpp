#include "magarray/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace magarray {

HomogeneityMetrics metrics(std::span<const double> bx) {
    if (bx.empty()) throw DomainError("metrics: empty map");
    HomogeneityMetrics m;
    m.count = bx.size();
    double sum = 0.0;
    m.max_bx = m.min_bx = bx[0];
    for (double v : bx) {
        if (!std::isfinite(v)) throw DomainError("metrics: non-finite B_x");
        sum += v;
        m.max_bx = std::max(m.max_bx, v);
        m.min_bx = std::min(m.min_bx, v);
    }
    m.mean_bx = sum / static_cast<double>(bx.size());
    if (m.mean_bx == 0.0) throw DomainError("metrics: mean B_x is zero");
    double ss = 0.0;
    for (double v : bx) ss += (v - m.mean_bx) * (v - m.mean_bx);
    m.std_bx = std::sqrt(ss / static_cast<double>(bx.size()));
    m.dis1 = (m.max_bx - m.min_bx) / m.mean_bx * kPpm;
    m.dis2 = m.std_bx / m.mean_bx * kPpm;
    if (std::abs(m.dis2) > std::abs(m.dis1)) throw NumericalError("metrics: DIS2 exceeds DIS1");
    return m;
}

HomogeneityMetrics metrics(const FieldMap& map) {
    map.validate();
    const auto bx = map.bx();
    return metrics(bx);
}

double l2_discrepancy(const FieldMap& a, const FieldMap& b) {
    if (a.size() != b.size()) throw DomainError("l2_discrepancy: maps have different sizes");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a.grid.points[i] - b.grid.points[i]).cwiseAbs().maxCoeff() > 1e-12)
            throw DomainError("l2_discrepancy: maps sample different points (row " + std::to_string(i) + ")");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.b[i].x() - b.b[i].x();
        num += d * d;
        den += b.b[i].x() * b.b[i].x();
    }
    if (den == 0.0) throw DomainError("l2_discrepancy: reference map has zero B_x everywhere");
    return num / den;
}

}  // namespace magarray
