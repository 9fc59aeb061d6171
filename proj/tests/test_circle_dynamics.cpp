#include <cmath>
#include <random>

#include "doctest.h"
#include "kgc/circle_dynamics.hpp"
#include "kgc/error.hpp"

using namespace kgc;

namespace {

CharacteristicMaps sinusoidal(double alpha, double beta, double period = 1.0) {
    return CharacteristicMaps(validate_motion({period, SinusoidalProfile{alpha, beta}}));
}

}  // namespace

TEST_CASE("rotation number of a rigid translation is exact") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{0.6}}));
    const auto r = rotation_number(maps, 1000);
    CHECK(r.value == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(r.half_width == doctest::Approx(1e-3));
}

TEST_CASE("rotation estimates stay within T/n for random motions") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> alpha(0.3, 1.5);
    std::uniform_real_distribution<double> beta(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double a = alpha(rng);
        const double b = beta(rng) * std::min(a * 0.9, 0.9 / (2 * M_PI));
        const auto maps = sinusoidal(a, b);
        const auto coarse = rotation_number(maps, 500, 0.1);
        const auto fine = rotation_number(maps, 50000, 0.1);
        CHECK(std::abs(coarse.value - fine.value) < coarse.half_width + fine.half_width);
    }
}

TEST_CASE("resonance detection") {
    auto r = detect_resonance(1.0 + 1e-9, 1e-6, 1.0, 20);
    REQUIRE(r.has_value());
    CHECK(r->p == 1);
    CHECK(r->q == 1);
    r = detect_resonance(2.0 / 3.0, 1e-6, 1.0, 20);
    REQUIRE(r.has_value());
    CHECK(*r == Resonance{2, 3});
    CHECK_FALSE(detect_resonance(std::sqrt(2.0), 1e-9, 1.0, 20).has_value());
    CHECK_THROWS_AS(detect_resonance(0.5, 0.2, 1.0, 20), Error);
}

TEST_CASE("periodic points are roots found by an independent sign scan") {
    const auto maps = sinusoidal(1.0, 0.1);
    const Resonance res{2, 1};
    const auto pts = find_periodic_points(maps, res);
    const double a0 = maps.motion().a(0.0);
    // oracle: sign changes of g on a dense uniform grid
    auto g = [&](double x) { return maps.iterate(x, 1).x - x - 2.0; };
    int changes = 0;
    const int n = 10000;
    double prev = g(-a0);
    int roots_on_grid = prev == 0.0 ? 1 : 0;
    for (int i = 1; i < n; ++i) {
        const double x = -a0 + 2 * a0 * i / n;
        const double v = g(x);
        if (v == 0.0) {
            ++roots_on_grid;
        } else if (prev != 0.0 && (v > 0) != (prev > 0)) {
            ++changes;
        }
        prev = v;
    }
    CHECK(static_cast<int>(pts.size()) == changes + roots_on_grid);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(std::abs(g(pts[i].x)) <= 1e-9);
        if (i > 0) CHECK(pts[i].kind != pts[i - 1].kind);
        const double d = 1e-6;
        const double fd = (maps.F(pts[i].x + d) - maps.F(pts[i].x - d)) / (2 * d);
        CHECK(pts[i].multiplier == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("growth exponent from the smallest attracting multiplier") {
    const auto maps = sinusoidal(0.5, 0.02);
    MapAnalysis an = analyze_map(maps);
    REQUIRE(an.resonance.has_value());
    CHECK(*an.resonance == Resonance{1, 1});
    CHECK(an.alternating);
    const double gamma = growth_exponent(an);
    // multiplier by finite differences at the attracting fixed point of F - T
    const double x = an.attractors[an.i0];
    const double d = 1e-6;
    const double mu = (maps.F(x + d) - maps.F(x - d)) / (2 * d);
    CHECK(gamma == doctest::Approx(-std::log(mu)).epsilon(1e-6));
    CHECK(an.m0_heuristic == doctest::Approx(std::sqrt(gamma / an.a_max)));
}

TEST_CASE("rigid maps are degenerate and non-resonant maps have no attractor") {
    const CharacteristicMaps rigid(validate_motion({1.0, ConstantProfile{0.5}}));
    CHECK_THROWS_AS(analyze_map(rigid), Error);
    try {
        analyze_map(rigid);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateMap);
    }
    MapAnalysis an = analyze_map(sinusoidal(0.47, 0.02));
    CHECK_FALSE(an.resonance.has_value());
    CHECK_THROWS_AS(growth_exponent(an), Error);
}

TEST_CASE("weighted integrals approach the asymptotic sum") {
    const auto maps = sinusoidal(1.0, 0.1);
    MapAnalysis an = analyze_map(maps);
    growth_exponent(an);
    auto f = [](double x) { return 1.0 + 0.3 * std::cos(3 * x); };
    const auto ac = asymptotic_coefficients(maps, an, f);
    auto rel_err = [&](int n) {
        double sum = 0.0;
        for (std::size_t i = 0; i < ac.coefficients.size(); ++i) sum += ac.coefficients[i] * std::pow(ac.multipliers[i], -n);
        return std::abs(weighted_orbit_integral(maps, an, f, n) / sum - 1.0);
    };
    const double early = rel_err(1);
    const double late = rel_err(8);
    CHECK(late < early);
    CHECK(late < 1e-3);
}

TEST_CASE("S_0 is the slice length") {
    const auto maps = sinusoidal(1.0, 0.1);
    for (double t : {0.0, 0.3, 1.7}) CHECK(weighted_integral(maps, t, 0) == doctest::Approx(2 * maps.motion().a(t)));
}
