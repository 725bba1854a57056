#include "magarray/material.hpp"

#include "magarray/text.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magarray {

HJCurve::HJCurve(std::vector<double> h, std::vector<double> j) : h_(std::move(h)), j_(std::move(j)) {
    if (h_.size() != j_.size()) throw DomainError("H-J curve: column lengths differ");
    if (h_.size() < 2) throw DomainError("H-J curve: need at least two points");
    for (std::size_t k = 0; k < h_.size(); ++k) {
        if (!std::isfinite(h_[k]) || !std::isfinite(j_[k]))
            throw DomainError("H-J curve: non-finite entry at row " + std::to_string(k));
        if (k > 0 && !(h_[k] > h_[k - 1]))
            throw DomainError("H-J curve: H not strictly ascending at row " + std::to_string(k));
        if (k > 0 && j_[k] < j_[k - 1])
            throw DomainError("H-J curve: J decreasing at row " + std::to_string(k));
    }
}

std::size_t HJCurve::segment(double h) const {
    // Index of the left end of the segment used for h, clamped to the ends.
    auto it = std::upper_bound(h_.begin(), h_.end(), h);
    std::size_t k = static_cast<std::size_t>(it - h_.begin());
    if (k == 0) return 0;
    return std::min(k - 1, h_.size() - 2);
}

double HJCurve::operator()(double h) const {
    const std::size_t k = segment(h);
    const double t = (h - h_[k]) / (h_[k + 1] - h_[k]);
    return j_[k] + t * (j_[k + 1] - j_[k]);
}

double HJCurve::slope(double h) const {
    const std::size_t k = segment(h);
    return (j_[k + 1] - j_[k]) / (h_[k + 1] - h_[k]);
}

double HJCurve::min_slope() const {
    double s = slope(h_.front());
    for (std::size_t k = 0; k + 1 < h_.size(); ++k)
        s = std::min(s, (j_[k + 1] - j_[k]) / (h_[k + 1] - h_[k]));
    return s;
}

double HJCurve::max_slope() const {
    double s = slope(h_.front());
    for (std::size_t k = 0; k + 1 < h_.size(); ++k)
        s = std::max(s, (j_[k + 1] - j_[k]) / (h_[k + 1] - h_[k]));
    return s;
}

HJCurve HJCurve::transformed(double h_scale, double j_scale, double j_shift) const {
    if (!(h_scale > 0.0) || !(j_scale > 0.0)) throw DomainError("H-J curve: axis scales must be positive");
    std::vector<double> h(h_.size()), j(j_.size());
    for (std::size_t k = 0; k < h_.size(); ++k) {
        h[k] = h_scale * h_[k];
        j[k] = j_scale * j_[k] + j_shift;
    }
    return HJCurve(std::move(h), std::move(j));
}

std::optional<HJCurve> Material::total_curve() const {
    if (!hj_curve) return std::nullopt;
    if (curve_convention == CurveConvention::Total) return hj_curve;
    return hj_curve->transformed(1.0, 1.0, jr0);
}

void Material::validate() const {
    if (!(jr0 > 0.0)) throw DomainError("material '" + id + "': J_r0 must be positive");
    if (!(hc0 < 0.0)) throw DomainError("material '" + id + "': H_c0 must be negative");
    if (!(mu_m >= 0.0)) throw DomainError("material '" + id + "': mu_M must be non-negative");
    if (hj_curve) {
        const HJCurve total = *total_curve();
        const double at_zero = total(0.0);
        if (std::abs(at_zero - jr0) > 1e-3 * jr0)
            throw DomainError("material '" + id + "': H-J curve misses the remanence point (J(0) = " +
                              text::fmt(at_zero) + " T, J_r0 = " + text::fmt(jr0) + " T)");
    }
}

double remanence_at(const Material& m, double t) {
    if (!(t >= kMinSaneTemperature && t <= kMaxSaneTemperature))
        throw DomainError("temperature " + text::fmt(t) + " degC outside [-40, 120]");
    return m.jr0 * (1.0 + m.k_j * (t - m.t_ref));
}

double coercivity_at(const Material& m, double t) {
    if (!(t >= kMinSaneTemperature && t <= kMaxSaneTemperature))
        throw DomainError("temperature " + text::fmt(t) + " degC outside [-40, 120]");
    const double dt = t - m.t_ref;
    return m.hc0 * (1.0 + m.k_h1 * dt + m.k_h2 * dt * dt);
}

MaterialState material_at_temperature(const Material& m, double t) {
    MaterialState s;
    s.jr = remanence_at(m, t);
    s.hc = coercivity_at(m, t);
    if (m.hj_curve) {
        if (!(s.jr > 0.0) || !(s.hc / m.hc0 > 0.0))
            throw DomainError("material '" + m.id + "': temperature law leaves the physical range");
        s.scaled_curve = m.total_curve()->transformed(s.hc / m.hc0, s.jr / m.jr0);
    }
    return s;
}

namespace {

Material n52_common() {
    Material m;
    m.t_ref = 18.0;
    m.k_j = -1.26e-3;
    m.k_h1 = -0.01;
    m.k_h2 = 3.8e-3;
    return m;
}

}  // namespace

Material reference_material_cube() {
    Material m = n52_common();
    m.id = "N52-cube";
    m.jr0 = 1.431;
    m.hc0 = -955.3e3;
    m.mu_m = 0.0223;
    return m;
}

Material reference_material_long() {
    Material m = n52_common();
    m.id = "N52-long";
    m.jr0 = 1.462;
    m.hc0 = -941.2e3;
    m.mu_m = 0.0168;
    return m;
}

HJCurve placeholder_curve(const Material& m, std::size_t samples) {
    if (samples < 9) throw DomainError("placeholder curve: too few samples");
    const double hc = std::abs(m.hc0);
    const double recoil = kMu0 * m.mu_m;
    const double width = 0.06 * hc;
    const double knee0 = std::exp(m.hc0 / width);
    const double beta = (m.jr0 + recoil * m.hc0) / (1.0 - knee0);

    // H from -0.9|Hc0| to +0.1|Hc0|; the sample at 9/10 of the range is H = 0.
    const std::size_t n = samples - (samples - 1) % 10;
    const std::size_t zero = (n - 1) * 9 / 10;
    const double dh = hc / static_cast<double>(n - 1);
    std::vector<double> h(n), j(n);
    for (std::size_t k = 0; k < n; ++k) {
        h[k] = (static_cast<double>(k) - static_cast<double>(zero)) * dh;
        j[k] = m.jr0 + recoil * h[k] - beta * (std::exp((m.hc0 - h[k]) / width) - knee0);
    }
    j[zero] = m.jr0;
    return HJCurve(std::move(h), std::move(j));
}

HJCurve load_curve(const std::string& path) {
    const std::string content = text::read_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> h, j;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = text::strip(line);
        if (body.empty()) continue;
        const auto tok = text::split_ws(body);
        if (tok.size() != 2) throw ParseError(path, lineno, "expected two columns (H J)");
        try {
            h.push_back(text::to_double(tok[0]));
            j.push_back(text::to_double(tok[1]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(path, lineno, e.what());
        }
    }
    try {
        return HJCurve(std::move(h), std::move(j));
    } catch (const DomainError& e) {
        throw ParseError(path, lineno, e.what());
    }
}

void save_curve(const HJCurve& curve, const std::string& path) {
    std::string out = "# H [A/m]  J [T]\n";
    for (std::size_t k = 0; k < curve.size(); ++k)
        out += text::fmt(curve.h()[k]) + " " + text::fmt(curve.j()[k]) + "\n";
    text::write_file(path, out);
}

}  // namespace magarray
