#include "magarray/uncertainty_budget.hpp"

#include "magarray/monte_carlo.hpp"
#include "magarray/parallel.hpp"
#include "magarray/text.hpp"

#include <json.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace magarray {

double BudgetComponent::spread() const { return pdf == BudgetPdf::Uniform ? std::sqrt(3.0) * standard : standard; }

std::string to_string(BudgetMethod m) { return m == BudgetMethod::Analytic ? "analytic" : "mc_oracle"; }

namespace {

bool is_point(BudgetTarget t) { return t == BudgetTarget::PointAbsolute || t == BudgetTarget::PointRelative; }

const char* target_name(BudgetTarget t) {
    switch (t) {
        case BudgetTarget::PointAbsolute: return "point_abs";
        case BudgetTarget::PointRelative: return "point_rel";
        case BudgetTarget::Dis1Relative: return "dis1_rel";
        case BudgetTarget::Dis2Relative: return "dis2_rel";
    }
    return "?";
}

BudgetTarget target_from(std::string_view s) {
    if (s == "point_abs") return BudgetTarget::PointAbsolute;
    if (s == "point_rel") return BudgetTarget::PointRelative;
    if (s == "dis1_rel") return BudgetTarget::Dis1Relative;
    if (s == "dis2_rel") return BudgetTarget::Dis2Relative;
    throw std::invalid_argument("unknown target '" + std::string(s) + "'");
}

void check_budget(const std::vector<BudgetComponent>& budget) {
    for (const auto& c : budget) {
        if (!(c.standard >= 0.0) || !std::isfinite(c.standard)) throw DomainError("budget: component '" + c.name + "' has invalid u");
        if (!(c.coverage_factor > 0.0)) throw DomainError("budget: component '" + c.name + "' has invalid k");
        if (c.correlated && !is_point(c.target)) throw DomainError("budget: only point components can be correlated");
    }
}

/// Standard uncertainty of component c at point i, tesla.
double point_u(const BudgetComponent& c, double b) {
    return c.target == BudgetTarget::PointRelative ? c.standard * std::abs(b) : c.standard;
}

}  // namespace

std::vector<BudgetComponent> default_budget(const FieldMap& map, const BudgetDefaults& o) {
    map.validate();
    const auto& p = map.provenance;
    if (!p.temperature || !p.temperature_spread)
        throw ConfigError("default_budget: the map carries no temperature metadata (mean and spread required)");
    const double ku = kUniformCoverage;
    const double two_sqrt3 = 2.0 * std::sqrt(3.0);
    const double temp_rel = std::abs(o.k_j) * *p.temperature_spread / (1.0 + o.k_j * (*p.temperature - o.t_ref));

    std::vector<BudgetComponent> b;
    b.push_back({"Bx_meas", BudgetTarget::PointRelative, 1.0, o.instrument_relative, 2.0, BudgetPdf::Normal, false});
    b.push_back({"C_noise", BudgetTarget::PointAbsolute, 0.0, o.noise, 2.0, BudgetPdf::Normal, false});
    b.push_back({"C_res", BudgetTarget::PointAbsolute, 0.0, o.resolution, ku, BudgetPdf::Uniform, false});
    b.push_back({"C_avg", BudgetTarget::PointAbsolute, 0.0, o.averaging, ku, BudgetPdf::Uniform, false});
    b.push_back({"C_pos", BudgetTarget::PointAbsolute, 0.0, o.gradient_max * o.position_tolerance / two_sqrt3, ku, BudgetPdf::Uniform, false});
    b.push_back({"C_temp", BudgetTarget::PointRelative, 0.0, temp_rel, ku, BudgetPdf::Uniform, o.correlated_temperature});
    b.push_back({"C_off1", BudgetTarget::Dis1Relative, 1.0, o.offset_change_dis1 / two_sqrt3, ku, BudgetPdf::Uniform, false});
    b.push_back({"C_off2", BudgetTarget::Dis2Relative, 1.0, o.offset_change_dis2 / two_sqrt3, ku, BudgetPdf::Uniform, false});
    return b;
}

BudgetResult combine_analytic(const FieldMap& map, const std::vector<BudgetComponent>& budget) {
    check_budget(budget);
    BudgetResult r;
    r.method = BudgetMethod::Analytic;
    const auto bx = map.bx();
    r.nominal = metrics(bx);
    const std::size_t n = bx.size();
    const double nd = static_cast<double>(n);
    const double mean = r.nominal.mean_bx;
    const double d1 = r.nominal.dis1 / kPpm;
    const double d2 = r.nominal.dis2 / kPpm;
    const double sd = r.nominal.std_bx;

    std::size_t imax = 0, imin = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (bx[i] > bx[imax]) imax = i;
        if (bx[i] < bx[imin]) imin = i;
    }

    // DIS2 gradient; zero when the map is flat.
    std::vector<double> g2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        g2[i] = (sd > 0.0 ? (bx[i] - mean) / (nd * sd * mean) : 0.0) - d2 / (nd * mean);

    r.u_point.assign(n, 0.0);
    double var1 = 0.0, var2 = 0.0;
    for (const auto& c : budget) {
        if (!is_point(c.target) || c.standard == 0.0) continue;
        if (c.correlated) {
            double mean_u = 0.0, lin2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double u = point_u(c, bx[i]);
                mean_u += u / nd;
                lin2 += g2[i] * u;
            }
            const double lin1 = (point_u(c, bx[imax]) - point_u(c, bx[imin])) / mean - d1 / mean * mean_u;
            var1 += lin1 * lin1;
            var2 += lin2 * lin2;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double u = point_u(c, bx[i]);
            r.u_point[i] += u * u;
        }
    }
    // u_point holds variances here; uncorrelated part only for the propagation.
    std::vector<double> var_indep(n, 0.0);
    for (const auto& c : budget) {
        if (!is_point(c.target) || c.correlated) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = point_u(c, bx[i]);
            var_indep[i] += u * u;
        }
    }
    double sum_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_var += var_indep[i];
        var2 += g2[i] * g2[i] * var_indep[i];
    }
    var1 += (var_indep[imax] + var_indep[imin]) / (mean * mean) + (d1 / mean) * (d1 / mean) * sum_var / (nd * nd);

    for (const auto& c : budget) {
        if (c.target == BudgetTarget::Dis1Relative) var1 += (c.standard * d1) * (c.standard * d1);
        if (c.target == BudgetTarget::Dis2Relative) var2 += (c.standard * d2) * (c.standard * d2);
    }
    for (auto& v : r.u_point) v = std::sqrt(v);
    r.u_dis1 = std::sqrt(var1) * kPpm;
    r.u_dis2 = std::sqrt(var2) * kPpm;
    r.U_dis1 = 2.0 * r.u_dis1;
    r.U_dis2 = 2.0 * r.u_dis2;
    return r;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double sample(const BudgetComponent& c, std::mt19937_64& rng) {
    if (c.pdf == BudgetPdf::Normal) return c.standard * std::normal_distribution<double>(0.0, 1.0)(rng);
    const double h = c.spread();
    return std::uniform_real_distribution<double>(-h, h)(rng);
}

}  // namespace

BudgetResult combine_mc_oracle(const FieldMap& map, const std::vector<BudgetComponent>& budget, std::size_t draws,
                               std::uint64_t seed) {
    check_budget(budget);
    if (draws < 2) throw DomainError("combine_mc_oracle: at least two draws required");
    BudgetResult r;
    r.method = BudgetMethod::McOracle;
    r.draws = draws;
    const auto bx = map.bx();
    r.nominal = metrics(bx);
    const std::size_t n = bx.size();
    r.u_point.assign(n, 0.0);
    for (const auto& c : budget) {
        if (!is_point(c.target)) continue;
        for (std::size_t i = 0; i < n; ++i) r.u_point[i] += point_u(c, bx[i]) * point_u(c, bx[i]);
    }
    for (auto& v : r.u_point) v = std::sqrt(v);

    std::vector<double> dis1(draws), dis2(draws);
    parallel_for(draws, [&](std::size_t d) {
        std::mt19937_64 rng(mix(mix(seed) ^ mix(d + 1)));
        std::vector<double> b(bx);
        double off1 = 1.0, off2 = 1.0;
        for (const auto& c : budget) {
            if (c.standard == 0.0) continue;
            switch (c.target) {
                case BudgetTarget::Dis1Relative: off1 += sample(c, rng); break;
                case BudgetTarget::Dis2Relative: off2 += sample(c, rng); break;
                default:
                    if (c.correlated) {
                        const double s = sample(c, rng);
                        for (std::size_t i = 0; i < n; ++i) b[i] += s * (c.target == BudgetTarget::PointRelative ? std::abs(bx[i]) : 1.0);
                    } else {
                        for (std::size_t i = 0; i < n; ++i) b[i] += sample(c, rng) * (c.target == BudgetTarget::PointRelative ? std::abs(bx[i]) : 1.0);
                    }
            }
        }
        const auto m = metrics(b);
        dis1[d] = m.dis1 * off1;
        dis2[d] = m.dis2 * off2;
    });
    const McStat s1 = summarize(dis1);
    const McStat s2 = summarize(dis2);
    r.u_dis1 = s1.std;
    r.u_dis2 = s2.std;
    r.U_dis1 = 2.0 * r.u_dis1;
    r.U_dis2 = 2.0 * r.u_dis2;
    r.dis1_q025 = s1.q025;
    r.dis1_q975 = s1.q975;
    r.dis2_q025 = s2.q025;
    r.dis2_q975 = s2.q975;
    return r;
}

std::string format_budget(const std::vector<BudgetComponent>& budget) {
    using text::fmt;
    std::string out = "# name target best_estimate u k U pdf correlated\n";
    for (const auto& c : budget) {
        out += c.name + " " + target_name(c.target) + " " + fmt(c.best_estimate) + " " + fmt(c.standard) + " " +
               fmt(c.coverage_factor) + " " + fmt(c.expanded()) + " " + (c.pdf == BudgetPdf::Normal ? "normal" : "uniform") +
               " " + (c.correlated ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<BudgetComponent> parse_budget(const std::string& content, const std::string& src) {
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    std::vector<BudgetComponent> out;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = text::strip(line);
        if (body.empty()) continue;
        const auto tok = text::split_ws(body);
        if (tok.size() != 8) throw ParseError(src, lineno, "expected 'name target best_estimate u k U pdf correlated'");
        try {
            BudgetComponent c;
            c.name = std::string(tok[0]);
            c.target = target_from(tok[1]);
            c.best_estimate = text::to_double(tok[2]);
            c.standard = text::to_double(tok[3]);
            c.coverage_factor = text::to_double(tok[4]);
            const double expanded = text::to_double(tok[5]);
            if (tok[6] == "normal") c.pdf = BudgetPdf::Normal;
            else if (tok[6] == "uniform") c.pdf = BudgetPdf::Uniform;
            else throw std::invalid_argument("pdf must be normal or uniform");
            if (tok[7] != "0" && tok[7] != "1") throw std::invalid_argument("correlated must be 0 or 1");
            c.correlated = tok[7] == "1";
            if (std::abs(expanded - c.expanded()) > 1e-12 * std::max(1.0, std::abs(expanded)))
                throw ParseError(src, lineno, "U differs from k*u");
            out.push_back(c);
        } catch (const std::invalid_argument& e) {
            throw ParseError(src, lineno, e.what());
        }
    }
    check_budget(out);
    return out;
}

std::vector<BudgetComponent> load_budget(const std::string& path) { return parse_budget(text::read_file(path), path); }

std::string format_budget_result(const BudgetResult& r) {
    nlohmann::json j;
    j["method"] = to_string(r.method);
    j["nominal"] = {{"mean_bx_T", r.nominal.mean_bx}, {"dis1_ppm", r.nominal.dis1}, {"dis2_ppm", r.nominal.dis2}, {"points", r.nominal.count}};
    j["dis1"] = {{"u_ppm", r.u_dis1}, {"U_ppm", r.U_dis1}, {"k", 2}};
    j["dis2"] = {{"u_ppm", r.u_dis2}, {"U_ppm", r.U_dis2}, {"k", 2}};
    if (r.method == BudgetMethod::McOracle) {
        j["draws"] = r.draws;
        j["dis1"]["q025"] = r.dis1_q025;
        j["dis1"]["q975"] = r.dis1_q975;
        j["dis2"]["q025"] = r.dis2_q025;
        j["dis2"]["q975"] = r.dis2_q975;
    }
    double umax = 0.0;
    for (double u : r.u_point) umax = std::max(umax, u);
    j["u_point_max_T"] = umax;
    return j.dump(2) + "\n";
}

}  // namespace magarray
