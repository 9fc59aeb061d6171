#include <cmath>

#include "doctest.h"
#include "kgc/characteristics.hpp"
#include "kgc/error.hpp"
#include "kgc/oracle_fdm.hpp"

using namespace kgc;

namespace {

// Slices of 0.8991 keep dt/dy fixed at 0.8991 for every ny tried.
double mode_error(int ny, double m, double t_max) {
    const auto motion = validate_motion({1.0, ConstantProfile{1.0}});
    OracleOptions o;
    o.ny = ny;
    o.t_max = t_max;
    o.slices = 2;
    const OracleRun run = solve_oracle(motion, make_mode(1.0, 1, 1.0), m, o);
    const double w = std::sqrt(M_PI * M_PI + m * m);
    return compare(run, [w](double t, double x) { return std::sin(M_PI * x) * std::cos(w * t); }, t_max).sup_error;
}

}  // namespace

TEST_CASE("static eigenmode error drops fourfold per refinement") {
    const double e1 = mode_error(64, 0.5, 1.7982);
    const double e2 = mode_error(128, 0.5, 1.7982);
    const double e3 = mode_error(256, 0.5, 1.7982);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("static wall energy drifts by less than 0.1% over ten periods") {
    const auto motion = validate_motion({1.0, ConstantProfile{1.0}});
    OracleOptions o;
    o.ny = 512;
    o.t_max = 10.0;
    o.slices = 40;
    const OracleRun run = solve_oracle(motion, make_bump(1.0, 0.4, 0.2, 1.0, Direction::Right), 1.0, o);
    const double e0 = run.slices.front().energy;
    for (const auto& s : run.slices) CHECK(std::abs(s.energy / e0 - 1.0) < 1e-3);
}

TEST_CASE("zero data stay zero and boundary rows are pinned") {
    const auto motion = validate_motion({1.0, SinusoidalProfile{1.0, 0.1}});
    OracleOptions o;
    o.ny = 64;
    o.t_max = 1.0;
    const OracleRun zero = solve_oracle(motion, make_zero(1.0), 0.5, o);
    for (const auto& s : zero.slices) {
        for (double v : s.phi) CHECK(v == 0.0);
    }
    const OracleRun run = solve_oracle(motion, make_bump(1.0, 0.5, 0.2, 1.0, Direction::Right), 0.5, o);
    for (const auto& s : run.slices) {
        CHECK(s.phi.front() == 0.0);
        CHECK(s.phi.back() == 0.0);
        CHECK(s.x.back() == doctest::Approx(motion.a(s.t)));
    }
}

TEST_CASE("moving-wall massless run agrees with characteristics at second order") {
    const auto motion = validate_motion({1.0, SinusoidalProfile{1.0, 0.1}});
    const CharacteristicMaps maps(motion);
    const auto data = make_bump(1.0, 0.5, 0.3, 1.0, Direction::Right);
    const MasslessProfile exact(maps, data);
    double prev = 0.0;
    for (int ny : {128, 256, 512}) {
        OracleOptions o;
        o.ny = ny;
        o.t_max = 0.5;
        o.slices = 10;
        const OracleRun run = solve_oracle(motion, data, 0.0, o);
        const double err = compare(run, [&](double t, double x) { return exact.value(t, x); }, 0.5).sup_error;
        const double C = err * ny * ny;
        MESSAGE("n_y = " << ny << ": sup error " << err << ", C = " << C);
        if (prev > 0.0) CHECK(prev / err > 3.0);
        prev = err;
    }
}

TEST_CASE("error paths") {
    const auto motion = validate_motion({1.0, ConstantProfile{1.0}});
    OracleOptions o;
    o.ny = 64;
    o.blowup = 1e-3;  // any step exceeds this growth factor
    CHECK_THROWS_AS(solve_oracle(motion, make_mode(1.0, 1, 1.0), 0.0, o), Error);
    o.blowup = 1e6;
    CHECK_THROWS_AS(solve_oracle(motion, make_mode(2.0, 1, 1.0), 0.0, o), Error);
    OracleRun empty;
    CHECK_THROWS_AS(compare(empty, [](double, double) { return 0.0; }, 1.0), Error);
}
