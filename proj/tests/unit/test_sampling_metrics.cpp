#include "helpers.hpp"

#include "magarray/field_kernel.hpp"
#include "magarray/metrics.hpp"
#include "magarray/pipeline.hpp"
#include "magarray/surface_charge_oracle.hpp"
#include "magarray/text.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <tuple>

using namespace magarray;

TEST_CASE("smallest centred grid has seven points") {
    const auto g = dsv_grid(0.02, 0.01, GridConvention::Centered);
    CHECK(g.size() == 7);
    CHECK(std::count(g.points.begin(), g.points.end(), Vec3::Zero()) == 1);
}

TEST_CASE("default sphere grid has 4224 points") {
    const auto g = dsv_grid(0.2, 0.01);
    CHECK(g.size() == 4224);
    CHECK(g.spec.convention == GridConvention::Offset);
    for (const auto& p : g.points) CHECK(p.norm() <= 0.1 + 1e-12);
    // brute-force count of half-integer lattice points within radius 10 steps
    std::size_t brute = 0;
    for (int i = -10; i < 10; ++i)
        for (int j = -10; j < 10; ++j)
            for (int k = -10; k < 10; ++k) {
                const double x = i + 0.5, y = j + 0.5, z = k + 0.5;
                if (x * x + y * y + z * z <= 100.0) ++brute;
            }
    CHECK(brute == 4224);
    CHECK(dsv_grid(0.2, 0.01, GridConvention::Centered).size() != 4224);
}

TEST_CASE("sphere grid is closed under the cube symmetry group") {
    const auto g = dsv_grid(0.2, 0.01);
    std::set<std::tuple<long, long, long>> keys;
    auto key = [](const Vec3& p) {
        return std::make_tuple(std::lround(p.x() * 2e3), std::lround(p.y() * 2e3), std::lround(p.z() * 2e3));
    };
    for (const auto& p : g.points) keys.insert(key(p));
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& perm : perms)
        for (int signs = 0; signs < 8; ++signs)
            for (const auto& p : g.points) {
                Vec3 q(p[perm[0]], p[perm[1]], p[perm[2]]);
                for (int a = 0; a < 3; ++a)
                    if (signs & (1 << a)) q[a] = -q[a];
                REQUIRE(keys.count(key(q)) == 1);
            }
}

TEST_CASE("z-line grid") {
    const auto g = zline_grid();
    CHECK(g.size() == 8 * 37);
    for (const auto& p : g.points) CHECK(std::hypot(p.x(), p.y()) == doctest::Approx(0.12));
    GridSpec s;
    s.shape = "zlines";
    s.diameter = 0.24;
    s.step = 0.005;
    CHECK(make_grid(s).size() == 8 * 37);
    s.shape = "cube";
    CHECK_THROWS_AS(make_grid(s), ConfigError);
    CHECK_THROWS_AS(dsv_grid(0.2, 0.0), DomainError);
}

TEST_CASE("homogeneity metrics by hand") {
    const std::vector<double> bx{0.049, 0.050, 0.051};
    const auto m = metrics(bx);
    CHECK(m.mean_bx == doctest::Approx(0.05));
    CHECK(m.dis1 == doctest::Approx(40000.0).epsilon(1e-12));
    CHECK(m.dis2 == doctest::Approx(1e6 * std::sqrt(2.0 / 3.0) * 1e-3 / 0.05).epsilon(1e-12));
    CHECK(m.dis2 == doctest::Approx(16330.0).epsilon(1e-5));
    CHECK(m.count == 3);
}

TEST_CASE("metrics are scale and order invariant") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.05, 1e-4);
    std::vector<double> v(500);
    for (auto& x : v) x = n(rng);
    const auto m = metrics(v);
    std::vector<double> s = v;
    for (auto& x : s) x *= -3.7;
    const auto ms = metrics(s);
    CHECK(ms.dis1 == doctest::Approx(-m.dis1).epsilon(1e-12));  // DIS carries the sign of the mean
    CHECK(ms.dis2 == doctest::Approx(-m.dis2).epsilon(1e-12));
    std::shuffle(s.begin(), s.end(), rng);
    std::vector<double> t = v;
    std::shuffle(t.begin(), t.end(), rng);
    CHECK(metrics(t).dis1 == doctest::Approx(m.dis1).epsilon(1e-12));
    CHECK(metrics(t).dis2 == doctest::Approx(m.dis2).epsilon(1e-12));
}

TEST_CASE("metric errors") {
    CHECK_THROWS_AS(metrics(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(metrics(std::vector<double>{1.0, -1.0}), DomainError);
}

namespace {

FieldMap toy_map(const SampleGrid& g, double bx) {
    FieldMap m;
    m.grid = g;
    m.b.assign(g.size(), Vec3(bx, 0, 0));
    return m;
}

}  // namespace

TEST_CASE("L2 discrepancy is the squared norm ratio") {
    const auto g = dsv_grid(0.04, 0.01);
    const FieldMap a = toy_map(g, 1.0);
    FieldMap b = toy_map(g, 1.0);
    CHECK(l2_discrepancy(a, b) == 0.0);
    for (auto& v : b.b) v.x() = 1.001;
    CHECK(l2_discrepancy(b, a) == doctest::Approx(1e-6).epsilon(1e-9));
    const FieldMap c = toy_map(dsv_grid(0.06, 0.01), 1.0);
    CHECK_THROWS_AS(l2_discrepancy(a, c), DomainError);
}

TEST_CASE("kernel map agrees with the oracle map on a toy array") {
    const auto a = testutil::make_array({Vec3(0.08, 0, 0), Vec3(-0.08, 0.01, 0), Vec3(0, 0.09, 0.02)},
                                        {Vec3(0, 1, 0), Vec3(0, -1, 0.1), Vec3(1, 0, 0)});
    const std::vector<double> jv{1.40, 1.42, 1.38};
    const auto g = dsv_grid(0.06, 0.01);
    const FieldMap km = field_map(a, jv, g, "linear");
    FieldMap om = km;
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 h = Vec3::Zero();
        for (std::size_t p = 0; p < a.magnets.size(); ++p) h += oracle_surface_charge(a.magnets[p], jv[p], g.points[i]).h;
        om.b[i] = kMu0 * h;
    }
    CHECK(l2_discrepancy(km, om) < 1e-10);
}

TEST_CASE("field map text round trip") {
    FieldMap m = toy_map(dsv_grid(0.04, 0.01), 0.0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 0.02);
    for (auto& b : m.b) b = Vec3(n(rng), n(rng), n(rng));
    m.provenance.solver_mode = "nonlinear";
    m.provenance.temperature = 23.7;
    const FieldMap r = parse_fieldmap(format_fieldmap(m));
    CHECK(r == m);

    m.point_temperature.assign(m.size(), 23.5);
    m.provenance.kind = Provenance::Kind::Measured;
    m.provenance.solver_mode.clear();
    m.provenance.instrument = "probe";
    CHECK(parse_fieldmap(format_fieldmap(m)) == m);
}

TEST_CASE("field map parse errors") {
    CHECK_THROWS_AS(parse_fieldmap("x y z Bx By Bz\n0 0 0 nan 0 0\n"), ParseError);
    CHECK_THROWS_AS(parse_fieldmap("0 0 0 1 0\n"), ParseError);
    try {
        parse_fieldmap("#@ magarray-fieldmap 1\n0 0 0 1 0 0\n0 0 0 1 x 0\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("measured import scales units and summarises temperature") {
    const auto path = (std::filesystem::temp_directory_path() / "magarray_measured.txt").string();
    text::write_file(path, "# scan\nx y z Bx By Bz T\n0 0 0 50 0.1 0 23.5\n10 0 0 50.01 0 0 23.9\n");
    MeasuredImportOptions opt;
    opt.length_scale = 1e-3;
    opt.field_scale = 1e-3;
    opt.instrument = "gaussmeter";
    const FieldMap m = import_measured_map(path, opt);
    std::filesystem::remove(path);
    REQUIRE(m.size() == 2);
    CHECK(m.grid.points[1].x() == doctest::Approx(0.01));
    CHECK(m.b[1].x() == doctest::Approx(0.05001));
    CHECK(m.provenance.kind == Provenance::Kind::Measured);
    CHECK(*m.provenance.temperature == doctest::Approx(23.7));
    CHECK(*m.provenance.temperature_spread == doctest::Approx(0.2));
}
