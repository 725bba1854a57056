#include "magarray/surface_charge_oracle.hpp"

#include "magarray/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace magarray {

namespace {

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};

GaussRule make_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.x[i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

const GaussRule& rule(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

struct Panel {
    double u0, u1, w0, w1;
};

class FaceIntegrator {
public:
    FaceIntegrator(const Vec3& p, double face_v, const GaussRule& g, int max_depth)
        : p_(p), v0_(face_v), g_(g), max_depth_(max_depth) {}

    // Integral of (p - r')/|p - r'|^3 over the panel in the plane v = v0.
    Vec3 quad(const Panel& q) {
        const double hu = 0.5 * (q.u1 - q.u0), cu = 0.5 * (q.u1 + q.u0);
        const double hw = 0.5 * (q.w1 - q.w0), cw = 0.5 * (q.w1 + q.w0);
        const double y = p_.y() - v0_;
        Vec3 acc = Vec3::Zero();
        const std::size_t n = g_.x.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double x = p_.x() - (cu + hu * g_.x[i]);
            for (std::size_t j = 0; j < n; ++j) {
                const double z = p_.z() - (cw + hw * g_.x[j]);
                const double r2 = x * x + y * y + z * z;
                const double inv = 1.0 / (r2 * std::sqrt(r2));
                acc += (g_.w[i] * g_.w[j] * inv) * Vec3(x, y, z);
            }
        }
        evaluations += n * n;
        return acc * (hu * hw);
    }

    Vec3 adaptive(const Panel& q, const Vec3& whole, double tol, int depth) {
        const double um = 0.5 * (q.u0 + q.u1), wm = 0.5 * (q.w0 + q.w1);
        const Panel kids[4] = {{q.u0, um, q.w0, wm}, {um, q.u1, q.w0, wm}, {q.u0, um, wm, q.w1}, {um, q.u1, wm, q.w1}};
        Vec3 parts[4];
        Vec3 sum = Vec3::Zero();
        for (int k = 0; k < 4; ++k) {
            parts[k] = quad(kids[k]);
            sum += parts[k];
        }
        const double err = (sum - whole).cwiseAbs().maxCoeff();
        if (err <= tol) {
            error += err;
            return sum;
        }
        if (depth >= max_depth_) {
            failed = true;
            error += err;
            return sum;
        }
        Vec3 out = Vec3::Zero();
        for (int k = 0; k < 4; ++k) out += adaptive(kids[k], parts[k], 0.25 * tol, depth + 1);
        return out;
    }

    std::size_t evaluations = 0;
    double error = 0.0;
    bool failed = false;

private:
    Vec3 p_;
    double v0_;
    const GaussRule& g_;
    int max_depth_;
};

}  // namespace

OracleResult oracle_surface_charge_local(const Vec3& half, double jv, const Vec3& p, const OracleOptions& opt) {
    if (std::abs(p.x()) <= half.x() && std::abs(p.y()) <= half.y() && std::abs(p.z()) <= half.z())
        throw DomainError("oracle_surface_charge: point not exterior to the bar");
    OracleResult res;
    if (jv == 0.0) return res;

    const GaussRule& g = rule(opt.order);
    const Panel face{-half.x(), half.x(), -half.z(), half.z()};

    // Coarse composite estimate fixes the absolute tolerance.
    auto composite = [&](FaceIntegrator& fi) {
        Vec3 acc = Vec3::Zero();
        constexpr int m = 4;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                const double u0 = face.u0 + (face.u1 - face.u0) * a / m, u1 = face.u0 + (face.u1 - face.u0) * (a + 1) / m;
                const double w0 = face.w0 + (face.w1 - face.w0) * b / m, w1 = face.w0 + (face.w1 - face.w0) * (b + 1) / m;
                acc += fi.quad({u0, u1, w0, w1});
            }
        return acc;
    };
    FaceIntegrator top(p, half.y(), g, opt.max_depth), bottom(p, -half.y(), g, opt.max_depth);
    const Vec3 coarse = composite(top) - composite(bottom);
    const double scale = std::max(coarse.norm(), 1e-300);
    const double tol = 0.25 * opt.rel_tol * scale;

    const Vec3 it = top.adaptive(face, top.quad(face), tol, 0);
    const Vec3 ib = bottom.adaptive(face, bottom.quad(face), tol, 0);
    const Vec3 total = it - ib;

    res.evaluations = top.evaluations + bottom.evaluations;
    res.achieved_tol = (top.error + bottom.error) / std::max(total.norm(), 1e-300);
    if (top.failed || bottom.failed) {
        throw NumericalError("oracle_surface_charge: quadrature did not converge (achieved relative tolerance " +
                             text::fmt(res.achieved_tol) + ")");
    }
    res.h = total * (jv / (4.0 * std::numbers::pi * kMu0));
    return res;
}

OracleResult oracle_surface_charge(const BarMagnet& magnet, double jv, const Vec3& point_global,
                                   const OracleOptions& opt) {
    OracleResult res = oracle_surface_charge_local(magnet.half_dims(), jv, magnet.to_local(point_global), opt);
    res.h = magnet.frame() * res.h;
    return res;
}

}  // namespace magarray
