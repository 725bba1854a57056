#include "magarray/material.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace magarray;

TEST_CASE("remanence at the reference temperature is the reference value") {
    const Material m = reference_material_cube();
    CHECK(remanence_at(m, 18.0) == 1.431);
}

TEST_CASE("temperature laws at the measurement temperature") {
    const Material m = reference_material_cube();
    // hand evaluation: 1.431 * (1 - 1.26e-3 * 5.7)
    CHECK(remanence_at(m, 23.7) == doctest::Approx(1.431 * (1.0 - 0.007182)).epsilon(1e-14));
    CHECK(remanence_at(m, 23.7) == doctest::Approx(1.4207).epsilon(1e-4));
    // -955.3e3 * (1 - 0.057 + 0.123462)
    CHECK(coercivity_at(m, 23.7) == doctest::Approx(-955.3e3 * 1.066462).epsilon(1e-12));
    CHECK(coercivity_at(m, 23.7) / 1e3 == doctest::Approx(-1018.8).epsilon(1e-4));
}

TEST_CASE("remanence is exactly linear in temperature") {
    const Material m = reference_material_cube();
    const double h = 1.0;
    for (double t : {-20.0, 0.0, 18.0, 40.0, 90.0}) {
        const double slope = (remanence_at(m, t + h) - remanence_at(m, t - h)) / (2.0 * h);
        CHECK(slope == doctest::Approx(m.jr0 * m.k_j).epsilon(1e-12));
    }
    // second difference of H_c is constant: 2 * hc0 * kh2 * h^2
    const double d2 = coercivity_at(m, 31.0) - 2.0 * coercivity_at(m, 30.0) + coercivity_at(m, 29.0);
    CHECK(d2 == doctest::Approx(2.0 * m.hc0 * m.k_h2).epsilon(1e-9));
}

TEST_CASE("temperatures outside the sane range are rejected") {
    const Material m = reference_material_cube();
    CHECK_THROWS_AS(remanence_at(m, 130.0), DomainError);
    CHECK_THROWS_AS(coercivity_at(m, -41.0), DomainError);
}

TEST_CASE("curve validation") {
    CHECK_THROWS_AS(HJCurve({0.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(HJCurve({0.0, 0.0}, {1.0, 1.1}), DomainError);
    CHECK_THROWS_AS(HJCurve({0.0, 1.0}, {1.1, 1.0}), DomainError);
    CHECK_THROWS_AS(HJCurve({0.0, NAN}, {1.0, 1.1}), DomainError);
}

TEST_CASE("curve interpolation and extrapolation") {
    const HJCurve c({-2.0, 0.0, 1.0}, {0.0, 1.0, 1.5});
    CHECK(c(0.0) == 1.0);
    CHECK(c(-1.0) == doctest::Approx(0.5));
    CHECK(c(0.5) == doctest::Approx(1.25));
    CHECK(c(3.0) == doctest::Approx(2.5));    // end slope 0.5
    CHECK(c(-4.0) == doctest::Approx(-1.0));  // end slope 0.5
    CHECK(c.min_slope() == doctest::Approx(0.5));
    CHECK(c.max_slope() == doctest::Approx(0.5));
    const HJCurve r = c.transformed(2.0, 2.0, -1.0);
    CHECK(r.h().front() == -4.0);
    CHECK(r(-4.0) == -1.0);
    CHECK(r(2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(c.transformed(-1.0, 1.0), DomainError);
}

TEST_CASE("temperature scaling of the curve keeps both endpoints of the laws") {
    Material m = reference_material_cube();
    m.hj_curve = placeholder_curve(m);
    const MaterialState st = material_at_temperature(m, 23.7);
    REQUIRE(st.scaled_curve);
    CHECK((*st.scaled_curve)(0.0) == doctest::Approx(st.jr).epsilon(1e-14));
    // the J = 0 crossing of the reference curve at hc0 moves to hc(T)
    const double j_ref_at_hc = (*m.hj_curve)(m.hc0);
    CHECK((*st.scaled_curve)(st.hc) == doctest::Approx(j_ref_at_hc * st.jr / m.jr0).epsilon(1e-9));
}

TEST_CASE("placeholder curve passes through the remanence and is monotone") {
    const Material m = reference_material_long();
    const HJCurve c = placeholder_curve(m);
    CHECK(c(0.0) == m.jr0);
    CHECK(c.min_slope() >= 0.0);
    CHECK(c.min_slope() == doctest::Approx(kMu0 * m.mu_m).epsilon(1e-3));
    Material with = m;
    with.hj_curve = c;
    CHECK_NOTHROW(with.validate());
}

TEST_CASE("offset convention adds the remanence") {
    Material m = reference_material_cube();
    m.hj_curve = HJCurve({-1e5, 0.0, 1e5}, {-0.01, 0.0, 0.002});
    m.curve_convention = CurveConvention::Offset;
    const auto total = m.total_curve();
    REQUIRE(total);
    CHECK((*total)(0.0) == m.jr0);
    CHECK_NOTHROW(m.validate());
    m.curve_convention = CurveConvention::Total;
    CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("curve file round trip") {
    const Material m = reference_material_cube();
    const HJCurve c = placeholder_curve(m);
    const auto path = (std::filesystem::temp_directory_path() / "magarray_curve_rt.txt").string();
    save_curve(c, path);
    CHECK(load_curve(path) == c);
    std::filesystem::remove(path);
}
