#include "magarray/uncertainty_budget.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace magarray;

namespace {

FieldMap ramp_map(std::size_t n, double lo, double hi) {
    FieldMap m;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        m.grid.points.push_back(Vec3(0.001 * static_cast<double>(i), 0, 0));
        m.b.push_back(Vec3(lo + (hi - lo) * t, 0, 0));
    }
    m.provenance.kind = Provenance::Kind::Measured;
    m.provenance.temperature = 23.7;
    m.provenance.temperature_spread = 0.32;
    return m;
}

const BudgetComponent& find(const std::vector<BudgetComponent>& b, const std::string& name) {
    for (const auto& c : b)
        if (c.name == name) return c;
    throw std::runtime_error("no component " + name);
}

double round_to(double x, double unit) { return std::round(x / unit) * unit; }

}  // namespace

TEST_CASE("default component values") {
    const auto b = default_budget(ramp_map(10, 0.0479, 0.0481));
    REQUIRE(b.size() == 8);
    const auto& pos = find(b, "C_pos");
    CHECK(pos.standard == doctest::Approx(3.914e-6).epsilon(1e-3));
    CHECK(round_to(pos.standard * 1e6, 0.1) == doctest::Approx(3.9));
    CHECK(round_to(pos.expanded() * 1e6, 0.1) == doctest::Approx(6.4));
    const auto& temp = find(b, "C_temp");
    CHECK(temp.standard * 1e6 == doctest::Approx(406.1).epsilon(1e-3));
    CHECK(round_to(temp.expanded() * 1e6, 1.0) == doctest::Approx(668.0));
    const auto& off1 = find(b, "C_off1");
    CHECK(off1.standard == doctest::Approx(0.01386).epsilon(1e-3));
    CHECK(round_to(off1.standard, 0.001) == doctest::Approx(0.014));
    CHECK(round_to(off1.expanded(), 0.001) == doctest::Approx(0.023));
    const auto& off2 = find(b, "C_off2");
    CHECK(round_to(off2.standard, 0.001) == doctest::Approx(0.003));
    CHECK(round_to(off2.expanded(), 0.001) == doctest::Approx(0.005));
    CHECK(find(b, "Bx_meas").best_estimate == 1.0);
    CHECK(find(b, "C_noise").best_estimate == 0.0);
    CHECK(find(b, "C_res").coverage_factor == doctest::Approx(1.6454).epsilon(1e-4));
    CHECK(find(b, "C_res").spread() == doctest::Approx(std::sqrt(3.0) * 1e-6));
}

TEST_CASE("instrument component at a 48 mT point") {
    FieldMap m = ramp_map(2, 0.048, 0.048);
    m.b[1].x() = 0.0481;
    const auto b = default_budget(m);
    std::vector<BudgetComponent> only{find(b, "Bx_meas")};
    const auto r = combine_analytic(m, only);
    CHECK(r.u_point[0] * 1e6 == doctest::Approx(2.40).epsilon(1e-9));
}

TEST_CASE("missing temperature metadata") {
    FieldMap m = ramp_map(5, 0.049, 0.051);
    m.provenance.temperature_spread.reset();
    CHECK_THROWS_AS(default_budget(m), ConfigError);
}

TEST_CASE("zero budget gives zero uncertainty") {
    const FieldMap m = ramp_map(20, 0.049, 0.051);
    auto b = default_budget(m);
    for (auto& c : b) c.standard = 0.0;
    const auto r = combine_analytic(m, b);
    CHECK(r.u_dis1 == 0.0);
    CHECK(r.u_dis2 == 0.0);
    CHECK(r.U_dis1 == 0.0);
}

TEST_CASE("scaling and removing components") {
    const FieldMap m = ramp_map(30, 0.049, 0.051);
    const auto b = default_budget(m);
    const auto base = combine_analytic(m, b);
    CHECK(base.U_dis1 == doctest::Approx(2 * base.u_dis1));
    CHECK(base.U_dis2 == doctest::Approx(2 * base.u_dis2));

    std::vector<BudgetComponent> doubled = b;
    for (auto& c : doubled) c.standard *= 2;
    const auto d = combine_analytic(m, doubled);
    CHECK(d.u_dis1 == doctest::Approx(2 * base.u_dis1).epsilon(1e-12));
    CHECK(d.u_dis2 == doctest::Approx(2 * base.u_dis2).epsilon(1e-12));

    for (std::size_t k = 0; k < b.size(); ++k) {
        std::vector<BudgetComponent> less = b;
        less.erase(less.begin() + static_cast<long>(k));
        const auto r = combine_analytic(m, less);
        CHECK(r.u_dis1 <= base.u_dis1);
        CHECK(r.u_dis2 <= base.u_dis2);
    }
}

TEST_CASE("single normal component on three points matches sampling") {
    FieldMap m = ramp_map(3, 0.049, 0.051);
    std::vector<BudgetComponent> b{{"noise", BudgetTarget::PointAbsolute, 0.0, 2e-6, 2.0, BudgetPdf::Normal, false}};
    const auto a = combine_analytic(m, b);
    const auto s = combine_mc_oracle(m, b, 200000, 3);
    CHECK(s.u_dis1 == doctest::Approx(a.u_dis1).epsilon(0.01));
    CHECK(s.u_dis2 == doctest::Approx(a.u_dis2).epsilon(0.01));
    // hand linearisation of (max - min)/mean
    const double mean = 0.05, d1 = 0.04, u = 2e-6;
    const double hand = 1e6 * std::sqrt(2 * u * u / (mean * mean) + d1 * d1 * 3 * u * u / (9 * mean * mean));
    CHECK(a.u_dis1 == doctest::Approx(hand).epsilon(1e-9));
}

TEST_CASE("full default budget: analytic against sampling") {
    const FieldMap m = ramp_map(50, 0.049, 0.051);
    const auto b = default_budget(m);
    const auto a = combine_analytic(m, b);
    const auto s = combine_mc_oracle(m, b, 40000, 11);
    CHECK(s.u_dis1 == doctest::Approx(a.u_dis1).epsilon(0.10));
    CHECK(s.u_dis2 == doctest::Approx(a.u_dis2).epsilon(0.10));
    CHECK(s.dis1_q025 < a.nominal.dis1);
    CHECK(s.dis1_q975 > a.nominal.dis1);
    CHECK(s.draws == 40000);
}

TEST_CASE("budget file round trip") {
    const auto b = default_budget(ramp_map(5, 0.049, 0.051));
    const auto text = format_budget(b);
    const auto back = parse_budget(text);
    REQUIRE(back.size() == b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(back[i].name == b[i].name);
        CHECK(back[i].target == b[i].target);
        CHECK(back[i].standard == b[i].standard);
        CHECK(back[i].coverage_factor == b[i].coverage_factor);
        CHECK(back[i].pdf == b[i].pdf);
    }
    CHECK_THROWS_AS(parse_budget("x point_abs 0 1e-6 2 3e-6 normal 0\n"), ParseError);
}
