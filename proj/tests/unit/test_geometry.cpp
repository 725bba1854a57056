#include "helpers.hpp"

#include "magarray/synthetic.hpp"
#include "magarray/text.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace magarray;
using testutil::make_array;

TEST_CASE("demagnetizing factor") {
    CHECK(demag_factor(Vec3(1, 1, 1)) == 1.0 / 3.0);
    CHECK(demag_factor(Vec3(0.006, 0.006, 0.006)) == 1.0 / 3.0);
    CHECK(demag_factor(Vec3(6, 25, 6)) == doctest::Approx(36.0 / 336.0).epsilon(1e-15));
    CHECK(demag_factor(Vec3(6, 25, 6)) == doctest::Approx(0.10714).epsilon(1e-4));
    CHECK(demag_factor(Vec3(1, 1e9, 1)) < 1e-8);
    CHECK_THROWS_AS(demag_factor(Vec3(1, 0, 1)), DomainError);
}

TEST_CASE("demagnetizing factors cycle to one and are u-w symmetric") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int k = 0; k < 200; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng);
        const double sum = demag_factor(Vec3(b, a, c)) + demag_factor(Vec3(c, b, a)) + demag_factor(Vec3(a, c, b));
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(demag_factor(Vec3(a, b, c)) == demag_factor(Vec3(c, b, a)));
        const double f = demag_factor(Vec3(a, b, c));
        CHECK(f > 0.0);
        CHECK(f < 1.0);
    }
}

TEST_CASE("orientation from axes builds a right-handed frame") {
    const Vec3 mag = Vec3(1, 2, 0.5).normalized();
    BarMagnet m(0, Vec3::Zero(), orientation_from_axes(mag, Vec3::UnitZ()), Vec3::Constant(0.006), "x");
    CHECK((m.axis_v() - mag).norm() < 1e-15);
    CHECK(m.axis_u().cross(m.axis_v()).dot(m.axis_w()) == doctest::Approx(1.0));
    CHECK_NOTHROW(m.validate());
}

namespace {

const char* kMinimal = R"(magarray-geometry 1
temperature 18
material N52-cube jr0=1.431 hc0=-955300 tref=18 kj=-0.00126 kh1=-0.01 kh2=0.0038 mu_m=0.0223
magnet 0 0 0 0.1 0 0 1 0 0 0 0.006 0.006 0.006 N52-cube
)";

}  // namespace

TEST_CASE("minimal geometry file") {
    const ArrayModel a = parse_array(kMinimal);
    REQUIRE(a.magnets.size() == 1);
    CHECK(a.magnets[0].center().x() == 0.1);
    CHECK(a.materials.at("N52-cube").jr0 == 1.431);
}

TEST_CASE("geometry round trip is exact") {
    HalbachSpec s;
    s.rings = 2;
    s.per_layer = 12;
    s.temperature = 23.7;
    ArrayModel a = synthetic_halbach(s);
    // awkward values survive shortest round-trip printing
    a.magnets[3].set_center(a.magnets[3].center() + Vec3(1e-17, 0.1 + 0.2, -1.0 / 3.0 * 1e-3));
    a.ring_z_offsets[1] = 0.0012345678901234567;
    const ArrayModel b = parse_array(format_array(a));
    CHECK(a == b);
    CHECK(format_array(b) == format_array(a));
}

TEST_CASE("parse errors carry the line number") {
    std::string bad = kMinimal;
    bad += "magnet 1 0 0 0.3 0 0 1 0 0 oops 0.006 0.006 0.006 N52-cube\n";
    try {
        parse_array(bad, "bad.geom");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 5);
    }
    CHECK_THROWS_AS(parse_array("magarray-geometry 2\n"), ParseError);
    CHECK_THROWS_AS(parse_array(""), ParseError);
}

TEST_CASE("unknown material is a reference error") {
    std::string bad = kMinimal;
    bad += "magnet 1 0 0 0.3 0 0 1 0 0 0 0.006 0.006 0.006 N99\n";
    CHECK_THROWS_AS(parse_array(bad), ReferenceError);
}

TEST_CASE("overlapping magnets fail validation") {
    std::string bad = kMinimal;
    bad += "magnet 1 0 0 0.105 0 0 1 0 0 0 0.006 0.006 0.006 N52-cube\n";
    CHECK_THROWS_AS(parse_array(bad), GeometryError);
}

TEST_CASE("separating-axis overlap test") {
    const Vec3 h = Vec3::Constant(0.5);
    BarMagnet a(0, Vec3::Zero(), Quat::Identity(), h, "m");
    BarMagnet b(1, Vec3(1.0, 0, 0), Quat::Identity(), h, "m");
    CHECK(overlap_depth(a, b) <= 1e-12);  // touching faces
    b.set_center(Vec3(0.9, 0, 0));
    CHECK(overlap_depth(a, b) == doctest::Approx(0.1));
    // rotated by 45 degrees the corner reaches sqrt(2)/2
    b.set_orientation(Quat(Eigen::AngleAxisd(std::numbers::pi / 4, Vec3::UnitZ())));
    b.set_center(Vec3(1.2, 0, 0));
    CHECK(overlap_depth(a, b) > 0.0);
    b.set_center(Vec3(1.25, 0, 0));
    CHECK(overlap_depth(a, b) < 0.0);
    std::vector<BarMagnet> v{a, b};
    CHECK_FALSE(find_overlap(v));
    v[1].set_center(Vec3(1.0, 0.1, 0));
    auto pair = find_overlap(v);
    REQUIRE(pair);
    CHECK(pair->first == 0);
    CHECK(pair->second == 1);
}

TEST_CASE("array extents") {
    const ArrayModel a = make_array({Vec3(0.2, 0, 0), Vec3(-0.2, 0, 0.05)}, {Vec3::UnitX(), Vec3::UnitX()});
    const auto e = array_extents(a);
    CHECK(e.bore_diameter == doctest::Approx(2 * std::hypot(0.194, 0.006)));
    CHECK(e.axial_length == doctest::Approx(0.062));
}

TEST_CASE("ring offset file round trip") {
    const auto path = (std::filesystem::temp_directory_path() / "magarray_offsets.txt").string();
    std::map<int, double> o{{0, 1e-3}, {3, -0.00025}};
    save_ring_offsets(o, path);
    CHECK(load_ring_offsets(path) == o);
    std::filesystem::remove(path);
}

TEST_CASE("synthetic array is valid and symmetric") {
    const ArrayModel a = synthetic_halbach();
    CHECK(a.magnets.size() == 8 * 2 * 24);
    CHECK_NOTHROW(a.validate());
    Vec3 sum = Vec3::Zero();
    for (const auto& m : a.magnets) sum += m.center();
    CHECK(sum.norm() < 1e-12);
}
