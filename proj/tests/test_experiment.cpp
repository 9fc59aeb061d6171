#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "kgc/error.hpp"
#include "kgc/experiment.hpp"

using namespace kgc;

namespace {

void series(double (*E)(double), double t_max, int per_unit, std::vector<double>& t, std::vector<double>& e) {
    t.clear();
    e.clear();
    for (int i = 0; i <= static_cast<int>(t_max * per_unit); ++i) {
        t.push_back(static_cast<double>(i) / per_unit);
        e.push_back(E(t.back()));
    }
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no exception");
    return ErrorKind::InvalidArgument;
}

Config parse(const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in);
}

}  // namespace

TEST_CASE("fit of an exact exponential") {
    std::vector<double> t, e;
    series([](double x) { return std::exp(0.3 * x); }, 12.0, 64, t, e);
    const ExponentFit f = fit_exponent(t, e, 1.0);
    CHECK(f.gamma == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(f.half_width < 1e-10);
    CHECK(f.windows == 12);
}

TEST_CASE("fit of a constant") {
    std::vector<double> t, e;
    series([](double) { return 7.0; }, 8.0, 16, t, e);
    CHECK(std::abs(fit_exponent(t, e, 1.0).gamma) < 1e-14);
}

TEST_CASE("window averaging removes the periodic factor") {
    std::vector<double> t, e;
    series([](double x) { return std::exp(0.3 * x) * (2.0 + std::sin(2 * M_PI * x)); }, 10.0, 256, t, e);
    const ExponentFit f = fit_exponent(t, e, 1.0, 1);
    CHECK(f.gamma == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(f.windows == 9);
}

TEST_CASE("fit errors") {
    std::vector<double> t, e;
    series([](double x) { return 1.0 + x; }, 4.0, 8, t, e);
    CHECK(kind_of([&] { fit_exponent(t, e, 1.0); }) == ErrorKind::TooFewWindows);
    series([](double x) { return std::cos(x); }, 10.0, 8, t, e);
    CHECK(kind_of([&] { fit_exponent(t, e, 1.0); }) == ErrorKind::NonpositiveEnergy);
}

TEST_CASE("config grammar") {
    const Config c = parse("# comment\nboundary.alpha = 0.5  # trailing\n\nfield.masses = 0, 0.25,1\n");
    CHECK(c.number("boundary.alpha", 0.0) == 0.5);
    CHECK(c.numbers("field.masses") == std::vector<double>{0.0, 0.25, 1.0});
    CHECK(c.text("missing", "x") == "x");
    CHECK(kind_of([] { parse("boundary.alpha 0.5\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse("a = 1\na = 2\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_experiment(parse("boundary.alpah = 1\n")); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_experiment(parse("boundary.alpha = one\n")); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_experiment(parse("grid.periods = 1\n")); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { load_experiment(parse("picard.tol = -1\n")); }) == ErrorKind::ConfigError);
    Config o = parse("boundary.alpha = 0.5\n");
    o.set("boundary.alpha=0.75");
    CHECK(load_experiment(o).motion.period == 1.0);
    CHECK(std::get<SinusoidalProfile>(load_experiment(o).motion.profile).alpha == 0.75);
}

TEST_CASE("empty scan range gives a header-only CSV") {
    const ExperimentConfig x = load_experiment(parse("scan.points = 0\n"));
    std::ostringstream out;
    write_scan_csv(out, scan(x));
    CHECK(out.str() == "param,rho,rho_err,p,q,gamma,gamma_fit,status\n");
}

TEST_CASE("scan flags the rigid map and is independent of the worker count") {
    const ExperimentConfig x = load_experiment(parse(
        "boundary.alpha = 0.5\nscan.param = beta\nscan.from = 0\nscan.to = 0.02\nscan.points = 5\n"
        "data.center = 0.25\ndata.width = 0.1\nscan.fit_periods = 8\nanalysis.rotation_iterations = 20000\n"));
    const auto rows = scan(x, 1);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].status == "DegenerateMap");
    CHECK(rows[4].status == "ok");
    CHECK(rows[4].gamma_fit.has_value());
    std::ostringstream a, b;
    write_scan_csv(a, rows);
    write_scan_csv(b, scan(x, 4));
    CHECK(a.str() == b.str());
}

TEST_CASE("growth exponent varies continuously inside a resonance") {
    const ExperimentConfig x = load_experiment(
        parse("boundary.alpha = 0.5\nscan.param = beta\nscan.from = 0.02\nscan.to = 0.0201\nscan.points = 2\n"));
    const auto rows = scan(x);
    REQUIRE(rows[0].gamma.has_value());
    REQUIRE(rows[1].gamma.has_value());
    CHECK(rows[0].resonance == rows[1].resonance);
    CHECK(std::abs(*rows[0].gamma - *rows[1].gamma) < 0.01 * *rows[0].gamma);
}

TEST_CASE("constant wall with a standing bump has flat energy") {
    const ExperimentConfig x = load_experiment(
        parse("boundary.profile = constant\nboundary.alpha = 1\ndata.direction = standing\ngrid.half_nodes = 32\n"
              "grid.periods = 8\nfit.skip_windows = 0\n"));
    const ExperimentReport r = run_experiment(x);
    CHECK_FALSE(r.analysis_error.empty());
    REQUIRE(r.runs.size() == 1);
    const auto& s = r.runs[0].series;
    CHECK_FALSE(s.gamma.has_value());
    REQUIRE(s.fit.has_value());
    CHECK(std::abs(s.fit->gamma) < 1e-6);
    std::ostringstream csv;
    write_energy_csv(csv, s);
    CHECK(csv.str().rfind("t,E,E_mass_share,E_window_avg\n", 0) == 0);
}

TEST_CASE("verify output does not depend on the worker count") {
    const ExperimentConfig x = load_experiment(
        parse("boundary.alpha = 0.5\nboundary.beta = 0.02\ndata.center = 0.25\ndata.width = 0.15\n"
              "field.masses = 0.5\ngrid.half_nodes = 32\ngrid.periods = 2\nverify.geometry_samples = 1200\n"
              "verify.identity_samples = 700\n"));
    std::ostringstream a, b;
    const VerifyReport r1 = verify(x, 1);
    write_verify_json(a, r1);
    write_verify_json(b, verify(x, 3));
    CHECK(a.str() == b.str());
    CHECK(r1.all_pass());
}
