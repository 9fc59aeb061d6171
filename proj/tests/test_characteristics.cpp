#include <cmath>
#include <memory>

#include "doctest.h"
#include "kgc/characteristics.hpp"
#include "kgc/error.hpp"

using namespace kgc;

namespace {

// odd, 2-periodic extension of phi0 on [0, 1]
double odd_extension(const CauchyData& d, double x) {
    double y = std::fmod(x, 2.0);
    if (y < 0) y += 2.0;
    return y <= 1.0 ? d.phi0(y) : -d.phi0(2.0 - y);
}

// zero data, source 4c on a static unit cavity: sine series of the response
double constant_source_response(double c, double t, double x) {
    double sum = 0.0;
    for (int k = 1; k < 40000; k += 2) {
        const double w = k * M_PI;
        sum += 16.0 * c / w * (1.0 - std::cos(w * t)) / (w * w) * std::sin(w * x);
    }
    return sum;
}

}  // namespace

TEST_CASE("prolongation index and reflection count on a static wall") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    CHECK(prolongation_index(maps, -1.0) == 0);
    CHECK(prolongation_index(maps, 0.99) == 0);
    CHECK(prolongation_index(maps, 1.01) == 1);
    CHECK(prolongation_index(maps, 6.5) == 3);
    CHECK_THROWS_AS(prolongation_index(maps, -1.5), Error);
    CHECK(reflection_count(maps, 2.5) == prolongation_index(maps, 3.5));
}

TEST_CASE("massless field on a static wall is d'Alembert's solution") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    const auto data = make_bump(1.0, 0.4, 0.25, 1.0, Direction::Standing);
    const MasslessProfile prof(maps, data);
    for (double t : {0.0, 0.3, 1.7, 4.2}) {
        for (double x = 0.05; x < 1.0; x += 0.1) {
            const double exact = 0.5 * (odd_extension(data, x + t) + odd_extension(data, x - t));
            CHECK(prof.value(t, x) == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
        }
    }
    CHECK_THROWS_AS(prof.value(0.5, 1.2), Error);
}

TEST_CASE("massless energy is conserved by a static wall and matches the slice integral") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    const auto data = make_bump(1.0, 0.5, 0.3, 1.0, Direction::Right);
    const MasslessProfile prof(maps, data);
    const double e0 = prof.energy(0.0);
    // E(0) = 1/2 int (phi1^2 + phi0'^2)
    double direct = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) / n;
        direct += 0.5 * (data.phi1(x) * data.phi1(x) + data.dphi0(x) * data.dphi0(x)) / n;
    }
    CHECK(e0 == doctest::Approx(direct).epsilon(1e-8));
    CHECK(prof.energy(3.3) == doctest::Approx(e0).epsilon(1e-10));
}

TEST_CASE("G satisfies the prolongation identity for f = 0") {
    const CharacteristicMaps maps(validate_motion({1.0, SinusoidalProfile{1.0, 0.1}}));
    const MasslessProfile prof(maps, make_bump(1.0, 0.5, 0.2, 1.0, Direction::Right));
    for (double eta = -0.9; eta < 3.0; eta += 0.37) CHECK(prof.G(maps.F(eta)) == doctest::Approx(prof.G(eta)).epsilon(1e-11));
}

TEST_CASE("lattice response to a constant source matches the sine series") {
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    auto base = std::make_shared<const MasslessProfile>(maps, make_zero(1.0));
    auto lat = std::make_shared<const CharLattice>(maps, 64, maps.k(1.5));
    const double c = 0.7;
    const LatticeProfile prof = build_profile(lat, base, [c](double, double) { return c; });
    // the series is the weak solution, which the lattice integrates exactly at nodes
    double worst = 0.0;
    for (int u = 0; u <= lat->columns(); u += 7) {
        for (int v = lat->lo(u); v <= u; v += 5) {
            const double t = 0.5 * (lat->s(u) + lat->s(v));
            const double x = 0.5 * (lat->s(u) - lat->s(v));
            if (t > 1.5) continue;
            worst = std::max(worst, std::abs(prof.phi_node(u, v) - constant_source_response(c, t, x)));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("mixed difference of psi equals the cell integral of f") {
    const CharacteristicMaps maps(validate_motion({1.0, SinusoidalProfile{1.0, 0.1}}));
    auto base = std::make_shared<const MasslessProfile>(maps, make_zero(1.0));
    auto lat = std::make_shared<const CharLattice>(maps, 32, maps.k(2.0));
    const LatticeProfile prof = build_profile(lat, base, [](double, double) { return 1.0; });
    int checked = 0;
    for (int u = 1; u <= lat->columns(); u += 3) {
        for (int v = lat->lo(u) + 1; v < u; v += 2) {
            if (v - 1 < lat->lo(u - 1) || v > u - 1) continue;
            const double mixed =
                prof.psi_node(u, v) - prof.psi_node(u, v - 1) - prof.psi_node(u - 1, v) + prof.psi_node(u - 1, v - 1);
            const double area = (lat->s(u) - lat->s(u - 1)) * (lat->s(v) - lat->s(v - 1));
            CHECK(mixed == doctest::Approx(area).epsilon(1e-9).scale(1e-3));
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("psi vanishes on both walls and at t = 0") {
    const CharacteristicMaps maps(validate_motion({1.0, SinusoidalProfile{0.5, 0.02}}));
    auto base = std::make_shared<const MasslessProfile>(maps, make_zero(0.5));
    auto lat = std::make_shared<const CharLattice>(maps, 32, maps.k(3.0));
    const LatticeProfile prof = build_profile(lat, base, [](double xi, double eta) { return std::sin(xi) + eta; });
    for (int u = 0; u <= lat->columns(); ++u) {
        CHECK(prof.psi_node(u, u) == 0.0);
        CHECK(prof.psi_node(u, lat->lo(u)) == 0.0);
    }
    for (double t : {0.4, 1.3, 2.6}) {
        CHECK(prof.value(t, 0.0) == doctest::Approx(0.0).scale(1e-12));
        // off the nodes the wall cuts linear boundary cells
        CHECK(std::abs(prof.value(t, maps.motion().a(t))) < 1e-4);
    }
}
