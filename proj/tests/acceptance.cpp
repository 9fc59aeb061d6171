// End-to-end acceptance run. One PASS/FAIL line per criterion; exit status 1
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kgc/boundary.hpp"
#include "kgc/cauchy.hpp"
#include "kgc/characteristics.hpp"
#include "kgc/circle_dynamics.hpp"
#include "kgc/error.hpp"
#include "kgc/experiment.hpp"
#include "kgc/format.hpp"
#include "kgc/kleingordon.hpp"
#include "kgc/oracle_fdm.hpp"

using namespace kgc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << o.detail << std::endl;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

CharacteristicMaps sinusoidal(double alpha, double beta, double period = 1.0) {
    return CharacteristicMaps(validate_motion({period, SinusoidalProfile{alpha, beta}}));
}

// Massive runs collected for the Picard and field-bound criteria.
struct MassiveRun {
    std::string label;
    bool converged = false;
    bool picard_holds = false;
    double field_ratio = 0.0;
};
std::vector<MassiveRun> massive;

void record(const std::string& label, const FieldGrid& g) {
    massive.push_back({label, g.converged, g.picard_bound_holds(), g.field_bound_ratio});
}

Outcome massless_oracle() {
    const auto start = Clock::now();
    const auto maps = sinusoidal(1.0, 0.1);
    const auto data = make_bump(1.0, 0.5, 0.3, 1.0, Direction::Right);
    const MasslessProfile exact(maps, data);
    const double t_max = 5.0;
    std::vector<double> errors;
    std::string detail = "sup error";
    for (int ny : {128, 256, 512, 1024}) {
        OracleOptions o;
        o.ny = ny;
        o.t_max = t_max;
        o.slices = 100;
        const OracleRun run = solve_oracle(maps.motion(), data, 0.0, o);
        errors.push_back(compare(run, [&](double t, double x) { return exact.value(t, x); }, t_max).sup_error);
        detail += " " + std::to_string(ny) + ":" + num(errors.back());
    }
    bool second_order = true;
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const double order = std::log2(errors[i - 1] / errors[i]);
        detail += (i == 1 ? "; order " : " ") + num(order);
        if (order < 1.8) second_order = false;
    }
    const double elapsed = seconds_since(start);
    detail += "; " + num(elapsed) + " s";
    return {second_order && errors.back() <= 1e-3 && elapsed <= 60.0, detail};
}

Outcome static_eigenmode() {
    const auto start = Clock::now();
    const CharacteristicMaps maps(validate_motion({1.0, ConstantProfile{1.0}}));
    bool ok = true;
    std::string detail;
    for (double m : {0.5, 1.0}) {
        const double w = std::sqrt(M_PI * M_PI + m * m);
        const double t_max = 5.0 * 2.0 * M_PI / w;
        const FieldGrid g = picard_solve(maps, make_mode(1.0, 1, 1.0), m, {512, t_max});
        record("static m=" + num(m), g);
        double err = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double t = t_max * i / 400.0;
            for (int j = 1; j < 64; ++j) {
                const double x = j / 64.0;
                err = std::max(err, std::abs(g.value(t, x) - std::sin(M_PI * x) * std::cos(w * t)));
            }
        }
        const double target = w * w / 4.0;
        double drift = 0.0;
        for (int i = 0; i <= 50; ++i) {
            const double t = t_max * i / 50.0;
            drift = std::max(drift, std::abs(g.energy(t).E / target - 1.0));
        }
        ok = ok && err <= 1e-4 && drift <= 1e-3;
        detail += "m=" + num(m) + " sup error " + num(err) + ", energy drift " + num(drift) + "; ";
    }
    const double elapsed = seconds_since(start);
    detail += num(elapsed) + " s";
    return {ok && elapsed <= 60.0, detail};
}

Outcome rotation_bracket() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const long n = 1000;
    int tried = 0;
    int violations = 0;
    double worst = 0.0;
    while (tried < 20) {
        const double period = 0.5 + 1.5 * U(rng);
        const double alpha = 0.3 + 1.7 * U(rng);
        const double beta = U(rng) * std::min(0.5 * alpha, 0.9 * period / (2.0 * M_PI));
        CharacteristicMaps maps = sinusoidal(alpha, beta, period);
        const double x0 = (2.0 * U(rng) - 1.0) * alpha;
        const RotationEstimate coarse = rotation_number(maps, n, x0);
        const RotationEstimate fine = rotation_number(maps, 10 * n, x0);
        const double gap = std::abs(coarse.value - fine.value) / (period / static_cast<double>(n));
        worst = std::max(worst, gap);
        if (gap >= 1.0) ++violations;
        ++tried;
    }
    return {violations == 0,
            std::to_string(tried) + " motions, worst |rho_n - rho_10n| / (T/n) = " + num(worst)};
}

Outcome growth_rate() {
    const auto start = Clock::now();
    Config scan_cfg;
    scan_cfg.set("boundary.profile", "sinusoidal");
    scan_cfg.set("boundary.alpha", "0.5");
    scan_cfg.set("boundary.beta", "0.02");
    scan_cfg.set("data.kind", "bump");
    scan_cfg.set("data.center", "0.15");
    scan_cfg.set("data.width", "0.1");
    scan_cfg.set("scan.param", "alpha");
    scan_cfg.set("scan.from", "0.46");
    scan_cfg.set("scan.to", "0.54");
    scan_cfg.set("scan.points", "17");
    const auto rows = scan(load_experiment(scan_cfg));
    const ScanRow* best = nullptr;
    for (const auto& r : rows) {
        if (r.status != "ok" || !r.min_multiplier || *r.min_multiplier > 0.9) continue;
        if (!best || *r.min_multiplier < *best->min_multiplier) best = &r;
    }
    if (!best) return {false, "scan found no attracting resonance with multiplier <= 0.9"};

    Config run_cfg = scan_cfg;
    run_cfg.set("boundary.alpha", format_number(best->param));
    run_cfg.set("field.masses", "0");
    run_cfg.set("field.mass_factors", "0.5");
    run_cfg.set("grid.half_nodes", "128");
    run_cfg.set("grid.periods", "22");
    run_cfg.set("fit.skip_windows", "2");
    const ExperimentReport rep = run_experiment(load_experiment(run_cfg));
    std::string detail = "alpha=" + num(best->param) + " (p,q)=(" + std::to_string(best->resonance->p) + "," +
                         std::to_string(best->resonance->q) + ") multiplier " + num(*best->min_multiplier);
    bool ok = rep.runs.size() == 2;
    for (const auto& run : rep.runs) {
        if (run.mass > 0.0) {
            massive.push_back({"resonant m=" + num(run.mass), run.converged, run.picard_bound_holds,
                               run.field_bound_ratio});
        }
        if (!run.error.empty() || !run.series.fit || !run.series.gamma) {
            ok = false;
            detail += "; m=" + num(run.mass) + " failed: " + run.error + run.series.fit_error;
            continue;
        }
        const double gamma = *run.series.gamma;
        const double rel = std::abs(run.series.fit->gamma - gamma) / gamma;
        const double slope = std::abs(run.series.residual_slope) / gamma;
        ok = ok && rel <= 0.05 && slope <= 0.05;
        detail += "; m=" + num(run.mass) + " gamma " + num(gamma) + " fit " + num(run.series.fit->gamma) +
                  " rel " + num(rel) + " slope/gamma " + num(slope);
    }
    const double elapsed = seconds_since(start);
    detail += "; " + num(elapsed) + " s";
    return {ok && elapsed <= 600.0, detail};
}

Outcome geometry() {
    const auto maps = sinusoidal(1.0, 0.1);
    const double t_max = 3.0;
    const IdentityReport measure = verify_measure_bound(maps, t_max, 10000, 11);
    const FieldGrid g = picard_solve(maps, make_bump(1.0, 0.5, 0.3, 1.0, Direction::Right), 1.0, {128, t_max});
    record("geometry m=1", g);
    const IdentityReport refl = verify_reflection(g, 10000, 12);
    return {measure.failures == 0 && refl.failures == 0 && measure.samples == 10000 && refl.samples == 10000,
            "measure worst ratio " + num(measure.worst_ratio) + " (" + std::to_string(measure.failures) +
                " over), reflection worst residual/budget " + num(refl.worst_ratio) + " (" +
                std::to_string(refl.failures) + " over)"};
}

Outcome asymptotics() {
    const auto maps = sinusoidal(1.0, 0.1);
    MapAnalysis an = analyze_map(maps);
    growth_exponent(an);
    auto one = [](double) { return 1.0; };
    const auto ac = asymptotic_coefficients(maps, an, one);
    const int n = 15;
    double sum = 0.0;
    for (std::size_t i = 0; i < ac.coefficients.size(); ++i) sum += ac.coefficients[i] * std::pow(ac.multipliers[i], -n);
    const double ratio = weighted_orbit_integral(maps, an, one, n) / sum;
    return {ratio >= 0.99 && ratio <= 1.01, "ratio at n=15 " + std::to_string(ratio)};
}

Outcome determinism() {
    Config c;
    c.set("boundary.profile", "sinusoidal");
    c.set("boundary.alpha", "0.5");
    c.set("boundary.beta", "0.02");
    c.set("data.kind", "bump");
    c.set("data.center", "0.25");
    c.set("data.width", "0.15");
    c.set("field.masses", "0.5, 1");
    c.set("grid.half_nodes", "128");
    c.set("grid.periods", "4");
    c.set("oracle.ny", "512");
    c.set("oracle.t_max", "1");
    c.set("seed", "20261015");
    const ExperimentConfig x = load_experiment(c);
    std::ostringstream one, eight;
    write_verify_json(one, verify(x, 1));
    write_verify_json(eight, verify(x, 8));
    const bool same = one.str() == eight.str();
    return {same, std::to_string(one.str().size()) + " bytes, " + (same ? "identical" : "different")};
}

Outcome picard_bound() {
    bool ok = !massive.empty();
    std::string detail;
    for (const auto& r : massive) {
        ok = ok && r.picard_holds;
        detail += r.label + (r.picard_holds ? " ok; " : " violated; ");
    }
    return {ok, detail + std::to_string(massive.size()) + " runs"};
}

Outcome field_bound() {
    bool ok = true;
    int checked = 0;
    std::string detail;
    for (const auto& r : massive) {
        if (!r.converged) continue;
        ++checked;
        ok = ok && r.field_ratio <= 1.1;
        detail += r.label + " " + num(r.field_ratio) + "; ";
    }
    return {ok && checked > 0, detail + std::to_string(checked) + " converged runs"};
}

}  // namespace

int main() {
    report(1, "massless oracle equivalence", massless_oracle);
    report(2, "static cavity eigenmode", static_eigenmode);
    report(3, "rotation number bracket", rotation_bracket);
    report(4, "growth exponent at a resonance", growth_rate);
    report(7, "geometry invariants", geometry);
    report(5, "Picard change bound", picard_bound);
    report(6, "field bound", field_bound);
    report(8, "asymptotic weighted integrals", asymptotics);
    report(9, "verify determinism", determinism);
    return failures == 0 ? 0 : 1;
}
