#include <cmath>

#include "doctest.h"
#include "kgc/boundary.hpp"
#include "kgc/error.hpp"

using namespace kgc;

namespace {

// h^-1 by plain bisection; h is strictly increasing
double h_inverse_bisect(const BoundaryMotion& m, double y) {
    double lo = y - 10.0;
    double hi = y + 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid - m.a(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("constant wall gives a rigid translation") {
    const auto m = validate_motion({1.0, ConstantProfile{0.75}});
    const CharacteristicMaps maps(m);
    for (double x : {-0.75, -0.2, 0.0, 0.4, 3.1}) {
        CHECK(maps.F(x) == doctest::Approx(x + 1.5).epsilon(1e-14));
        CHECK(maps.dF(x) == doctest::Approx(1.0));
    }
    CHECK(m.max_speed() == 0.0);
}

TEST_CASE("F matches k composed with a bisected h inverse") {
    const auto m = validate_motion({1.0, SinusoidalProfile{1.0, 0.1}});
    const CharacteristicMaps maps(m);
    for (double x = -1.0; x < 1.0; x += 0.173) {
        const double t = h_inverse_bisect(m, x);
        CHECK(maps.F(x) == doctest::Approx(t + m.a(t)).epsilon(1e-12));
        CHECK(maps.F(x) == doctest::Approx(x + 2.0 * m.a(t)).epsilon(1e-12));
        CHECK(maps.F_inverse(maps.F(x)) == doctest::Approx(x).epsilon(1e-12));
        const double d = 1e-5;
        const double fd = (maps.F(x + d) - maps.F(x - d)) / (2 * d);
        CHECK(maps.dF(x) == doctest::Approx(fd).epsilon(1e-7));
        CHECK(maps.dF(x) * maps.dF_inverse(maps.F(x)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("iterate accumulates the chain-rule derivative") {
    const auto m = validate_motion({1.0, SinusoidalProfile{0.5, 0.02}});
    const CharacteristicMaps maps(m);
    const double x = 0.137;
    const OrbitPoint p = maps.iterate(x, 5);
    double y = x;
    double d = 1.0;
    for (int i = 0; i < 5; ++i) {
        d *= maps.dF(y);
        y = maps.F(y);
    }
    CHECK(p.x == doctest::Approx(y).epsilon(1e-13));
    CHECK(p.derivative == doctest::Approx(d).epsilon(1e-12));
    const OrbitPoint back = maps.iterate(p.x, -5);
    CHECK(back.x == doctest::Approx(x).epsilon(1e-12));
    CHECK(back.derivative * p.derivative == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("validation rejects non-positive walls and superluminal motion") {
    CHECK_THROWS_AS(validate_motion({1.0, SinusoidalProfile{0.1, 0.2}}), Error);
    CHECK_THROWS_AS(validate_motion({1.0, SinusoidalProfile{1.0, 0.2}}), Error);  // 2 pi 0.2 > 1
    CHECK_THROWS_AS(validate_motion({0.0, ConstantProfile{1.0}}), Error);
    try {
        validate_motion({1.0, SinusoidalProfile{1.0, 0.2}});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RejectedMotion);
    }
    const auto m = validate_motion({2.0, FourierProfile{1.0, {0.05}, {0.1}}});
    CHECK(m.a_max() == doctest::Approx(1.0 + std::hypot(0.05, 0.1)).epsilon(1e-9));
    CHECK(m.max_speed() == doctest::Approx(M_PI * std::hypot(0.05, 0.1)).epsilon(1e-9));
}
