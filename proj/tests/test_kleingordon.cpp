#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "doctest.h"
#include "kgc/error.hpp"
#include "kgc/kleingordon.hpp"

using namespace kgc;

namespace {

double eigenmode_error(int M, double m, double t_max) {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    const FieldGrid g = picard_solve(maps, make_mode(1.0, 1, 1.0), m, {M, t_max});
    const double w = std::sqrt(M_PI * M_PI + m * m);
    double err = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double t = t_max * i / 100.0;
        for (int j = 1; j < 20; ++j) {
            const double x = j / 20.0;
            err = std::max(err, std::abs(g.value(t, x) - std::sin(M_PI * x) * std::cos(w * t)));
        }
    }
    return err;
}

}  // namespace

TEST_CASE("static eigenmode converges at second order") {
    const double e1 = eigenmode_error(32, 1.0, 2.0);
    const double e2 = eigenmode_error(64, 1.0, 2.0);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("static eigenmode energy is omega^2 / 4") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    const double m = 0.5;
    const FieldGrid g = picard_solve(maps, make_mode(1.0, 1, 1.0), m, {128, 3.0});
    const double target = (M_PI * M_PI + m * m) / 4.0;
    for (double t : {0.0, 1.1, 2.9}) CHECK(g.energy(t).E == doctest::Approx(target).epsilon(1e-4));
    CHECK_THROWS_AS(g.energy(3.5), Error);
}

TEST_CASE("zero data give a zero field") {
    const CharacteristicMaps maps(validate_motion({1.0, SinusoidalProfile{1.0, 0.1}}));
    const FieldGrid g = picard_solve(maps, make_zero(1.0), 0.8, {32, 2.0});
    CHECK(g.converged);
    CHECK(g.value(1.3, 0.4) == 0.0);
    CHECK(g.energy(1.0).E == 0.0);
}

TEST_CASE("massless runs need one iteration") {
    const CharacteristicMaps maps(validate_motion({1.0, SinusoidalProfile{1.0, 0.1}}));
    const auto data = make_bump(1.0, 0.5, 0.2, 1.0, Direction::Right);
    const FieldGrid g = picard_solve(maps, data, 0.0, {32, 2.0});
    CHECK(g.iterations == 1);
    CHECK(g.changes == std::vector<double>{0.0});
    const MasslessProfile exact(maps, data);
    CHECK(g.value(1.4, 0.3) == doctest::Approx(exact.value(1.4, 0.3)).epsilon(1e-13));
    CHECK(g.energy(1.5).E == doctest::Approx(exact.energy(1.5)).epsilon(1e-6));
}

TEST_CASE("Picard changes respect the factorial bound and the field bound holds") {
    const CharacteristicMaps maps(validate_motion({1.0, SinusoidalProfile{0.5, 0.02}}));
    const FieldGrid g = picard_solve(maps, make_bump(0.5, 0.2, 0.1, 1.0, Direction::Right), 1.0, {64, 4.0});
    CHECK(g.converged);
    CHECK(g.iterations > 2);
    CHECK(g.picard_bound_holds());
    const auto bound = g.picard_bound();
    const double B = 0.5 * g.a_max * g.xi_max;
    CHECK(bound[2] == doctest::Approx(g.changes[0] * B * B / 2.0));
    CHECK(g.field_bound_ratio <= 1.1);
}

TEST_CASE("failure to converge is reported") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    PicardOptions opts;
    opts.max_iter = 2;
    CHECK_THROWS_AS(picard_solve(maps, make_mode(1.0, 1, 1.0), 1.0, {32, 2.0}, opts), Error);
    opts.throw_on_failure = false;
    const FieldGrid g = picard_solve(maps, make_mode(1.0, 1, 1.0), 1.0, {32, 2.0}, opts);
    CHECK_FALSE(g.converged);
    CHECK(g.changes.size() == 2);
}

TEST_CASE("backward-characteristic geometry on a static wall") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    const CharGeometry geo(maps);
    CHECK(CharGeometry::theta(0) == -1);
    CHECK(CharGeometry::theta(1) == 1);
    // P = (t, x) = (2.5, 0.3): B = (eta, xi - 2)
    const double xi = 2.8;
    const double eta = 2.2;
    const CharPoint b = geo.lowest_vertex(xi, eta);
    CHECK(b.xi == doctest::Approx(2.2));
    CHECK(b.eta == doctest::Approx(0.8));
    const Rect q = geo.rectangle(xi, eta);
    CHECK(q.area() == doctest::Approx(0.6 * 1.4));
    // chain B^n until T < 0; count by hand: (2.2, 0.8) T=1.5, (0.8, 0.2) T=0.5, (0.2, -1.2) T<0
    CHECK(geo.depth(xi, eta) == 2);
    const auto regions = geo.union_M(xi, eta);
    REQUIRE(regions.size() == 3);
    CHECK(regions[2].clipped);
    double sum = 0.0;
    for (const auto& r : regions) sum += r.area;
    CHECK(geo.measure_M(xi, eta) == doctest::Approx(sum));
    // 0.84 + 0.84 + int_{0.2}^{0.8} (0.2 + y) dy
    CHECK(geo.measure_M(xi, eta) == doctest::Approx(2.1).epsilon(1e-12));
    CHECK(geo.measure_M(xi, eta) <= 2.0 * 1.0 * 2.5);
    CHECK_THROWS_AS(geo.depth(1.0, 1.5), Error);
}

TEST_CASE("geometry and identity probes on a moving wall") {
    const CharacteristicMaps maps(validate_motion({1.0, SinusoidalProfile{1.0, 0.1}}));
    const IdentityReport m = verify_measure_bound(maps, 4.0, 2000, 7);
    CHECK(m.failures == 0);
    CHECK(m.samples == 2000);
    const FieldGrid g = picard_solve(maps, make_bump(1.0, 0.5, 0.2, 1.0, Direction::Right), 0.7, {64, 2.0});
    const IdentityReport r = verify_reflection(g, 500, 11);
    CHECK(r.failures == 0);
    const IdentityReport i = verify_integral_identity(g, 500, 13);
    CHECK(i.failures == 0);
    CHECK(i.max_residual > 0.0);
}

TEST_CASE("field export formats") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    const FieldGrid g = picard_solve(maps, make_mode(1.0, 1, 1.0), 0.5, {8, 1.0});
    const std::size_t n = g.profile->lattice().size();
    std::ostringstream bin;
    g.export_binary(bin);
    const std::string b = bin.str();
    CHECK(b.size() == 16 + 24 * n);
    CHECK(b.substr(0, 8) == "KGCFLD01");
    std::uint64_t count = 0;
    for (int i = 7; i >= 0; --i) count = (count << 8) | static_cast<unsigned char>(b[8 + i]);
    CHECK(count == n);
    std::ostringstream txt;
    g.export_text(txt);
    const std::string s = txt.str();
    CHECK(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) == n + 1);
}
