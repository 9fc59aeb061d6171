#include "kgc/experiment.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "kgc/characteristics.hpp"
#include "kgc/error.hpp"
#include "kgc/format.hpp"
#include "kgc/parallel.hpp"

namespace kgc {

namespace {

constexpr const char* kModule = "experiment";

using json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, kModule, what); }

double parse_double(const std::string& key, std::string_view s) {
    s = std::string_view(s.data() + (s.size() && s.front() == '+' ? 1 : 0), s.size() - (s.size() && s.front() == '+'));
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        config_error(key + ": not a number: '" + std::string(s) + "'");
    }
    return v;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "boundary.profile", "boundary.period", "boundary.alpha", "boundary.beta", "boundary.mean", "boundary.cos",
        "boundary.sin", "analysis.rotation_iterations", "analysis.rotation_start", "analysis.max_q",
        "analysis.samples_per_q", "analysis.neutral_tolerance", "analysis.root_tolerance", "data.kind",
        "data.center", "data.width", "data.amplitude", "data.direction", "data.mode", "data.phi0_table",
        "data.phi1_table", "data.dphi0_0", "data.dphi0_a", "data.d2phi0_0", "data.d2phi0_a", "data.dphi1_0",
        "data.dphi1_a", "field.masses", "field.mass_factors", "grid.half_nodes", "grid.periods", "picard.tol",
        "picard.max_iter", "oracle.ny", "oracle.cfl", "oracle.slices", "oracle.t_max", "fit.skip_windows",
        "fit.confidence", "fit.samples_per_window", "scan.param", "scan.from", "scan.to", "scan.points",
        "scan.fit_periods", "verify.geometry_samples", "verify.identity_samples", "verify.oracle_tolerance",
        "verify.field_bound", "seed", "output.dir", "output.field"};
    return keys;
}

void require_positive(const std::string& key, double v) {
    if (!(v > 0.0)) config_error(key + " must be positive");
}

// splitmix64 step; decorrelates chunk seeds
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (f.intercept + f.slope * x[i]);
            ss += r * r;
        }
        f.slope_se = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json intervals_json(const IntervalSet& set) {
    json out = json::array();
    for (const auto& i : set) out.push_back({{"lo", i.lo}, {"hi", i.hi}});
    return out;
}

json analysis_json(const MapAnalysis& an) {
    json j;
    j["period"] = an.period;
    j["a0"] = an.a0;
    j["a_max"] = an.a_max;
    j["rotation"] = {{"value", an.rotation.value},
                     {"half_width", an.rotation.half_width},
                     {"iterations", an.rotation.iterations},
                     {"start", an.rotation.start}};
    j["rotation_convention"] = "rho = lim (F^n(x) - x) / n, resonant when rho = (p/q) T";
    j["resonance"] = an.resonance ? json{{"p", an.resonance->p}, {"q", an.resonance->q}} : json(nullptr);
    json pts = json::array();
    for (const auto& p : an.periodic_points) {
        pts.push_back({{"x", p.x},
                       {"multiplier", p.multiplier},
                       {"kind", p.kind == PointKind::Attracting ? "attracting" : "repelling"}});
    }
    j["periodic_points"] = pts;
    j["repellers"] = an.repellers;
    j["attractors"] = an.attractors;
    j["attractor_multipliers"] = an.attractor_multipliers;
    j["alternating"] = an.alternating;
    json iv = json::array();
    for (const auto& s : an.intervals) iv.push_back(intervals_json(s));
    j["intervals"] = iv;
    j["gamma"] = number_or_null(an.gamma);
    j["i0"] = an.i0;
    j["J"] = intervals_json(an.J);
    j["m0_heuristic"] = an.m0_heuristic;
    return j;
}

// nlohmann writes shortest round-trip doubles; NaN and inf become null
void dump(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

std::string csv_field(double v) { return std::isfinite(v) ? format_number(v) : std::string(); }

std::string csv_field(const std::optional<double>& v) { return v ? csv_field(*v) : std::string(); }

// Energy samples on [0, t_max] with `per_window` samples per window.
std::vector<double> sample_times(double window, double periods, int per_window) {
    const long n = std::lround(periods * per_window);
    std::vector<double> t(static_cast<std::size_t>(n + 1));
    for (long i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = window * static_cast<double>(i) / per_window;
    return t;
}

void finish_series(EnergySeries& s, const FitSettings& fit) {
    s.window_avg.assign(s.t.size(), std::numeric_limits<double>::quiet_NaN());
    try {
        ExponentFit f = fit_exponent(s.t, s.E, s.window, fit.skip_windows, fit.confidence);
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            const auto k = static_cast<std::size_t>(std::floor(s.t[i] / s.window + 1e-9));
            if (k < f.average.size()) s.window_avg[i] = f.average[k];
        }
        if (s.gamma) {
            const double g = *s.gamma;
            std::vector<double> x;
            std::vector<double> r;
            for (std::size_t k = static_cast<std::size_t>(fit.skip_windows); k < f.mid.size(); ++k) {
                x.push_back(f.mid[k]);
                r.push_back(std::log(f.average[k]) - g * f.mid[k]);
            }
            s.residual_slope = least_squares(x, r).slope;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            const double t0 = fit.skip_windows * s.window;
            for (std::size_t i = 0; i < s.t.size(); ++i) {
                if (s.t[i] < t0 || !(s.E[i] > 0.0)) continue;
                const double v = std::log(s.E[i]) - g * s.t[i];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            s.residual_min = lo;
            s.residual_max = hi;
        }
        s.fit = std::move(f);
    } catch (const Error& e) {
        s.fit_error = e.what();
    }
}

}  // namespace

// ---------------------------------------------------------------- config

Config Config::parse(std::istream& in, const std::string& source) {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) config_error(where + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) config_error(where + ": empty key");
        if (c.has(key)) config_error(where + ": duplicate key '" + key + "'");
        c.entries_[key] = value;
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config file '" + path + "'");
    return parse(in, path);
}

void Config::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) config_error("override '" + assignment + "' is not key=value");
    const std::string key = trim(std::string_view(assignment).substr(0, eq));
    if (key.empty()) config_error("override '" + assignment + "' has an empty key");
    entries_[key] = trim(std::string_view(assignment).substr(eq + 1));
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double Config::number(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : parse_double(key, it->second);
}

long Config::integer(const std::string& key, long fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    long v = 0;
    const std::string& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) config_error(key + ": not an integer: '" + s + "'");
    return v;
}

bool Config::flag(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    config_error(key + ": expected true or false");
}

std::vector<double> Config::numbers(const std::string& key) const {
    std::vector<double> out;
    const auto it = entries_.find(key);
    if (it == entries_.end()) return out;
    std::string_view rest = it->second;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string item = trim(rest.substr(0, comma));
        if (!item.empty()) out.push_back(parse_double(key, item));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

ExperimentConfig load_experiment(const Config& c) {
    for (const auto& [key, value] : c.entries()) {
        if (!known_keys().count(key)) config_error("unknown key '" + key + "'");
    }
    ExperimentConfig x;

    x.motion.period = c.number("boundary.period", 1.0);
    require_positive("boundary.period", x.motion.period);
    const std::string profile = c.text("boundary.profile", "sinusoidal");
    if (profile == "constant") {
        x.motion.profile = ConstantProfile{c.number("boundary.alpha", 1.0)};
    } else if (profile == "sinusoidal") {
        x.motion.profile = SinusoidalProfile{c.number("boundary.alpha", 1.0), c.number("boundary.beta", 0.0)};
    } else if (profile == "fourier") {
        FourierProfile f;
        f.mean = c.number("boundary.mean", 1.0);
        f.cos_coeffs = c.numbers("boundary.cos");
        f.sin_coeffs = c.numbers("boundary.sin");
        x.motion.profile = f;
    } else {
        config_error("boundary.profile must be constant, sinusoidal or fourier");
    }

    x.analysis.rotation_iterations = c.integer("analysis.rotation_iterations", 100000);
    x.analysis.rotation_start = c.number("analysis.rotation_start", 0.0);
    x.analysis.max_q = static_cast<int>(c.integer("analysis.max_q", 20));
    x.analysis.scan.samples_per_q = static_cast<int>(c.integer("analysis.samples_per_q", 10000));
    x.analysis.scan.neutral_tolerance = c.number("analysis.neutral_tolerance", 1e-8);
    x.analysis.scan.root_tolerance = c.number("analysis.root_tolerance", 1e-12);
    if (x.analysis.rotation_iterations < 1 || x.analysis.max_q < 1 || x.analysis.scan.samples_per_q < 2) {
        config_error("analysis counts must be positive");
    }
    require_positive("analysis.neutral_tolerance", x.analysis.scan.neutral_tolerance);
    require_positive("analysis.root_tolerance", x.analysis.scan.root_tolerance);

    DataSpec& d = x.data;
    d.kind = c.text("data.kind", "bump");
    d.center = c.number("data.center", 0.5);
    d.width = c.number("data.width", 0.2);
    d.amplitude = c.number("data.amplitude", 1.0);
    const std::string dir = c.text("data.direction", "right");
    if (dir == "right") {
        d.direction = Direction::Right;
    } else if (dir == "left") {
        d.direction = Direction::Left;
    } else if (dir == "standing") {
        d.direction = Direction::Standing;
    } else {
        config_error("data.direction must be right, left or standing");
    }
    d.mode = static_cast<int>(c.integer("data.mode", 1));
    d.phi0_table = c.text("data.phi0_table", "");
    d.phi1_table = c.text("data.phi1_table", "");
    d.endpoints = {c.number("data.dphi0_0", 0.0),  c.number("data.dphi0_a", 0.0), c.number("data.d2phi0_0", 0.0),
                   c.number("data.d2phi0_a", 0.0), c.number("data.dphi1_0", 0.0), c.number("data.dphi1_a", 0.0)};
    if (d.kind != "bump" && d.kind != "mode" && d.kind != "zero" && d.kind != "table") {
        config_error("data.kind must be bump, mode, zero or table");
    }
    if (d.kind == "table" && (d.phi0_table.empty() || d.phi1_table.empty())) {
        config_error("data.kind = table needs data.phi0_table and data.phi1_table");
    }

    if (c.has("field.masses")) x.masses = c.numbers("field.masses");
    x.mass_factors = c.numbers("field.mass_factors");
    for (double m : x.masses) {
        if (!(m >= 0.0)) config_error("field.masses must be >= 0");
    }
    for (double f : x.mass_factors) {
        if (!(f >= 0.0)) config_error("field.mass_factors must be >= 0");
    }

    x.half_nodes = static_cast<int>(c.integer("grid.half_nodes", 256));
    if (x.half_nodes < 4) config_error("grid.half_nodes must be >= 4");
    x.periods = c.number("grid.periods", 4.0);
    require_positive("grid.periods", x.periods);

    x.picard.tol = c.number("picard.tol", 0.0);
    if (c.has("picard.tol")) require_positive("picard.tol", x.picard.tol);
    x.picard.max_iter = static_cast<int>(c.integer("picard.max_iter", 40));
    if (x.picard.max_iter < 1) config_error("picard.max_iter must be >= 1");

    x.oracle.ny = static_cast<int>(c.integer("oracle.ny", 0));
    if (x.oracle.ny != 0 && x.oracle.ny < 64) config_error("oracle.ny must be 0 or >= 64");
    x.oracle.cfl = c.number("oracle.cfl", 0.9);
    if (!(x.oracle.cfl > 0.0 && x.oracle.cfl <= 0.9)) config_error("oracle.cfl must lie in (0, 0.9]");
    x.oracle.slices = static_cast<int>(c.integer("oracle.slices", 50));
    if (x.oracle.slices < 1) config_error("oracle.slices must be >= 1");
    x.oracle.t_max = c.number("oracle.t_max", x.motion.period);
    require_positive("oracle.t_max", x.oracle.t_max);

    x.fit.skip_windows = static_cast<int>(c.integer("fit.skip_windows", 2));
    if (x.fit.skip_windows < 0) config_error("fit.skip_windows must be >= 0");
    x.fit.confidence = c.number("fit.confidence", 0.95);
    if (!(x.fit.confidence > 0.0 && x.fit.confidence < 1.0)) config_error("fit.confidence must lie in (0, 1)");
    x.fit.samples_per_window = static_cast<int>(c.integer("fit.samples_per_window", 32));
    if (x.fit.samples_per_window < 2) config_error("fit.samples_per_window must be >= 2");
    if (x.periods < 2.0) config_error("grid.periods must be >= 2 for exponent fitting");

    x.scan.param = c.text("scan.param", "alpha");
    if (x.scan.param != "alpha" && x.scan.param != "beta" && x.scan.param != "period" && x.scan.param != "mean") {
        config_error("scan.param must be alpha, beta, period or mean");
    }
    x.scan.from = c.number("scan.from", 0.0);
    x.scan.to = c.number("scan.to", 0.0);
    x.scan.points = static_cast<int>(c.integer("scan.points", 0));
    if (x.scan.points < 0 || x.scan.points > 10000) config_error("scan.points must lie in [0, 10000]");
    x.scan.fit_periods = c.number("scan.fit_periods", 0.0);
    if (x.scan.fit_periods < 0.0) config_error("scan.fit_periods must be >= 0");

    x.verify.geometry_samples = static_cast<int>(c.integer("verify.geometry_samples", 10000));
    x.verify.identity_samples = static_cast<int>(c.integer("verify.identity_samples", 2000));
    if (x.verify.geometry_samples < 0 || x.verify.identity_samples < 0) config_error("verify sample counts must be >= 0");
    x.verify.oracle_tolerance = c.number("verify.oracle_tolerance", 1e-3);
    require_positive("verify.oracle_tolerance", x.verify.oracle_tolerance);
    x.verify.field_bound = c.number("verify.field_bound", 1.1);
    require_positive("verify.field_bound", x.verify.field_bound);

    x.seed = static_cast<std::uint64_t>(c.integer("seed", 1));
    x.output_dir = c.text("output.dir", ".");
    x.field_export = c.text("output.field", "none");
    if (x.field_export != "none" && x.field_export != "text" && x.field_export != "binary") {
        config_error("output.field must be none, text or binary");
    }
    return x;
}

BoundaryMotion build_motion(const ExperimentConfig& config) { return validate_motion(config.motion); }

CauchyData build_data(const ExperimentConfig& config, double length) {
    const DataSpec& d = config.data;
    if (d.kind == "zero") return make_zero(length);
    if (d.kind == "mode") return make_mode(length, d.mode, d.amplitude);
    if (d.kind == "table") {
        std::vector<double> x0, v0, x1, v1;
        read_table(d.phi0_table, x0, v0);
        read_table(d.phi1_table, x1, v1);
        return make_tabulated(length, x0, v0, x1, v1, d.endpoints);
    }
    return make_bump(length, d.center, d.width, d.amplitude, d.direction);
}

// ---------------------------------------------------------------- fitting

ExponentFit fit_exponent(const std::vector<double>& t, const std::vector<double>& E, double window, int skip,
                         double confidence) {
    if (t.size() != E.size() || t.size() < 2) throw Error(ErrorKind::InvalidArgument, kModule, "bad energy series");
    if (!(window > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "window must be positive");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) throw Error(ErrorKind::InvalidArgument, kModule, "times must increase");
    }
    for (double e : E) {
        if (!(e > 0.0)) throw Error(ErrorKind::NonpositiveEnergy, kModule, "energy sample is not positive");
    }
    // cumulative trapezoid integral
    std::vector<double> cum(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) cum[i] = cum[i - 1] + 0.5 * (E[i] + E[i - 1]) * (t[i] - t[i - 1]);
    auto integral_to = [&](double x) {
        const auto it = std::upper_bound(t.begin(), t.end(), x);
        std::size_t i = static_cast<std::size_t>(it - t.begin());
        if (i == 0) return 0.0;
        if (i == t.size()) return cum.back();
        --i;
        const double dx = x - t[i];
        const double slope = (E[i + 1] - E[i]) / (t[i + 1] - t[i]);
        return cum[i] + dx * (E[i] + 0.5 * slope * dx);
    };
    const double span = t.back() - t.front();
    const int windows = static_cast<int>(std::floor(span / window * (1.0 + 1e-12)));
    ExponentFit f;
    for (int k = 0; k < windows; ++k) {
        const double a = t.front() + k * window;
        const double b = a + window;
        f.mid.push_back(0.5 * (a + b));
        f.average.push_back((integral_to(b) - integral_to(a)) / window);
    }
    const int used = windows - skip;
    if (used < 5) {
        throw Error(ErrorKind::TooFewWindows, kModule,
                    "need at least 5 fitted windows, have " + std::to_string(std::max(used, 0)));
    }
    std::vector<double> x(f.mid.begin() + skip, f.mid.end());
    std::vector<double> y;
    for (std::size_t k = static_cast<std::size_t>(skip); k < f.average.size(); ++k) y.push_back(std::log(f.average[k]));
    const LineFit lf = least_squares(x, y);
    boost::math::students_t dist(static_cast<double>(used - 2));
    const double q = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
    f.gamma = lf.slope;
    f.intercept = lf.intercept;
    f.half_width = q * lf.slope_se;
    f.windows = used;
    return f;
}

// ---------------------------------------------------------------- runs

MapAnalysis analyze(const CharacteristicMaps& maps, const AnalysisOptions& options) {
    MapAnalysis an = analyze_map(maps, options);
    if (an.resonance && !an.attractors.empty()) {
        try {
            growth_exponent(an);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoAttractor) throw;
        }
    }
    return an;
}

double fit_window(const MapAnalysis* analysis, double period) {
    if (analysis && analysis->resonance) return analysis->resonance->p * period;
    return period;
}

ExperimentReport run_experiment(const ExperimentConfig& config, int workers) {
    const BoundaryMotion motion = build_motion(config);
    const CharacteristicMaps maps(motion);
    ExperimentReport rep;
    rep.motion = motion.describe();
    try {
        rep.analysis = analyze(maps, config.analysis);
    } catch (const Error& e) {
        rep.analysis_error = e.what();
    }
    const MapAnalysis* an = rep.analysis ? &*rep.analysis : nullptr;
    const double window = fit_window(an, motion.period());
    const std::optional<double> gamma = an ? an->gamma : std::nullopt;

    const CauchyData data = build_data(config, motion.a(0.0));
    rep.compatibility = check_compatibility(data, motion);
    if (an && !an->J.empty()) rep.hypothesis_J = check_hypothesis_J(data, *an);
    if (!rep.compatibility.all_pass()) {
        throw Error(ErrorKind::IncompatibleData, "cauchy", rep.compatibility.failures());
    }

    std::vector<double> masses = config.masses;
    for (double f : config.mass_factors) {
        if (!gamma) throw Error(ErrorKind::NoAttractor, kModule, "field.mass_factors needs a growth exponent");
        masses.push_back(f * std::sqrt(*gamma / motion.a_max()));
    }

    const double t_max = config.periods * window;
    const auto times = sample_times(window, config.periods, config.fit.samples_per_window);
    rep.runs.resize(masses.size());
    const int outer = static_cast<int>(std::min<std::size_t>(masses.size(), static_cast<std::size_t>(std::max(workers, 1))));
    const int inner = std::max(1, std::max(workers, 1) / std::max(outer, 1));
    parallel_for(masses.size(), outer, [&](std::size_t i) {
        MassRun& run = rep.runs[i];
        run.mass = masses[i];
        try {
            PicardOptions opts = config.picard;
            opts.throw_on_failure = false;
            auto grid = std::make_shared<FieldGrid>(
                picard_solve(maps, data, run.mass, {config.half_nodes, t_max}, opts));
            run.iterations = grid->iterations;
            run.converged = grid->converged;
            run.changes = grid->changes;
            run.picard_bound_holds = grid->picard_bound_holds();
            run.field_bound_ratio = grid->field_bound_ratio;
            EnergySeries& s = run.series;
            s.window = window;
            s.gamma = gamma;
            s.t = times;
            s.E.resize(times.size());
            s.mass_share.resize(times.size());
            parallel_for(times.size(), inner, [&](std::size_t k) {
                const EnergySample e = grid->energy(times[k]);
                s.E[k] = e.E;
                s.mass_share[k] = e.E > 0.0 ? e.mass_part / e.E : 0.0;
            });
            finish_series(s, config.fit);
            run.grid = std::move(grid);
            if (!run.converged) run.error = "Picard iteration did not reach the tolerance";
        } catch (const Error& e) {
            run.error = e.what();
        }
    });

    if (config.oracle.ny > 0 && !masses.empty()) {
        try {
            const OracleRun orun = solve_oracle(motion, data, masses.front(), config.oracle);
            const FieldGrid* g = rep.runs.front().grid.get();
            if (!g) throw Error(ErrorKind::NoOverlap, "oracle_fdm", "no characteristic field to compare with");
            rep.oracle = compare(orun, [g](double t, double x) { return g->value(t, x); }, t_max);
        } catch (const Error& e) {
            rep.oracle_error = e.what();
        }
    }
    return rep;
}

// ---------------------------------------------------------------- scan

std::vector<ScanRow> scan(const ExperimentConfig& config, int workers) {
    const int n = config.scan.points;
    std::vector<ScanRow> rows(static_cast<std::size_t>(n));
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        ScanRow& row = rows[i];
        const double v = n == 1 ? config.scan.from
                                : (config.scan.from * static_cast<double>(n - 1 - static_cast<int>(i)) +
                                   config.scan.to * static_cast<double>(i)) /
                                      (n - 1);
        row.param = v;
        ExperimentConfig c = config;
        const std::string& p = config.scan.param;
        if (p == "period") {
            c.motion.period = v;
        } else if (auto* s = std::get_if<SinusoidalProfile>(&c.motion.profile)) {
            (p == "beta" ? s->beta : s->alpha) = v;
        } else if (auto* k = std::get_if<ConstantProfile>(&c.motion.profile)) {
            if (p == "beta") {
                c.motion.profile = SinusoidalProfile{k->alpha, v};
            } else {
                k->alpha = v;
            }
        } else if (auto* f = std::get_if<FourierProfile>(&c.motion.profile)) {
            if (p == "beta") {
                row.status = "ConfigError";
                return;
            }
            f->mean = v;
        }
        try {
            const BoundaryMotion motion = build_motion(c);
            const CharacteristicMaps maps(motion);
            row.rho = rotation_number(maps, c.analysis.rotation_iterations, c.analysis.rotation_start).value;
            row.rho_err = motion.period() / static_cast<double>(c.analysis.rotation_iterations);
            const MapAnalysis an = analyze(maps, c.analysis);
            row.resonance = an.resonance;
            if (!an.resonance) {
                row.status = "no_resonance";
                return;
            }
            if (!an.attractor_multipliers.empty()) {
                row.min_multiplier = *std::min_element(an.attractor_multipliers.begin(), an.attractor_multipliers.end());
            }
            row.gamma = an.gamma;
            if (!an.gamma) {
                row.status = "NoAttractor";
                return;
            }
            row.status = "ok";
            if (c.scan.fit_periods > 0.0) {
                const double w = fit_window(&an, motion.period());
                const MasslessProfile base(maps, build_data(c, motion.a(0.0)));
                EnergySeries s;
                s.window = w;
                s.t = sample_times(w, c.scan.fit_periods, c.fit.samples_per_window);
                for (double t : s.t) s.E.push_back(base.energy(t));
                finish_series(s, c.fit);
                if (s.fit) {
                    row.gamma_fit = s.fit->gamma;
                } else {
                    row.status = "fit_failed";
                }
            }
        } catch (const Error& e) {
            row.status = std::string(to_string(e.kind()));
        }
    });
    return rows;
}

// ---------------------------------------------------------------- verify

bool VerifyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

VerifyReport verify(const ExperimentConfig& config, int workers) {
    VerifyReport rep;
    const BoundaryMotion motion = build_motion(config);
    const CharacteristicMaps maps(motion);
    std::optional<MapAnalysis> an;
    try {
        an = analyze(maps, config.analysis);
    } catch (const Error&) {
    }
    const double window = fit_window(an ? &*an : nullptr, motion.period());
    const double t_max = config.periods * window;
    const CauchyData data = build_data(config, motion.a(0.0));

    const CompatibilityReport compat = check_compatibility(data, motion);
    double worst = 0.0;
    for (const auto& c : compat.conditions) worst = std::max(worst, std::abs(c.residual));
    rep.checks.push_back({"compatibility", compat.all_pass(), worst, 1e-10, compat.failures()});
    if (!compat.all_pass()) return rep;

    // geometry probe, chunked so that the sample set does not depend on the worker count
    constexpr int kChunk = 500;
    auto chunked = [&](int samples, auto&& probe) {
        const int chunks = (samples + kChunk - 1) / kChunk;
        std::vector<IdentityReport> parts(static_cast<std::size_t>(chunks));
        parallel_for(parts.size(), workers, [&](std::size_t k) {
            const int count = std::min(kChunk, samples - static_cast<int>(k) * kChunk);
            parts[k] = probe(count, mix_seed(config.seed, k));
        });
        IdentityReport total;
        for (const auto& p : parts) {
            total.samples += p.samples;
            total.failures += p.failures;
            total.max_residual = std::max(total.max_residual, p.max_residual);
            total.max_budget = std::max(total.max_budget, p.max_budget);
            total.worst_ratio = std::max(total.worst_ratio, p.worst_ratio);
        }
        return total;
    };
    auto identity_check = [](const std::string& name, const IdentityReport& r) {
        return Check{name, r.failures == 0, r.worst_ratio, 1.0,
                     std::to_string(r.failures) + " of " + std::to_string(r.samples) + " samples over budget"};
    };

    rep.checks.push_back(identity_check(
        "measure_bound", chunked(config.verify.geometry_samples, [&](int n, std::uint64_t s) {
            return verify_measure_bound(maps, t_max, n, s);
        })));

    std::vector<double> masses = config.masses;
    if (an && an->gamma) {
        for (double f : config.mass_factors) masses.push_back(f * std::sqrt(*an->gamma / motion.a_max()));
    }
    for (std::size_t i = 0; i < masses.size(); ++i) {
        const double m = masses[i];
        const std::string tag = "[m=" + format_number(m) + "]";
        PicardOptions opts = config.picard;
        opts.throw_on_failure = false;
        const FieldGrid grid = picard_solve(maps, data, m, {config.half_nodes, t_max}, opts);
        rep.checks.push_back({"picard_converged" + tag, grid.converged, grid.changes.back(), grid.tol,
                              std::to_string(grid.iterations) + " iterations"});
        const auto bound = grid.picard_bound();
        double ratio = 0.0;
        for (std::size_t n = 1; n < bound.size(); ++n) {
            if (bound[n] > 0.0) ratio = std::max(ratio, grid.changes[n] / bound[n]);
        }
        rep.checks.push_back({"picard_bound" + tag, grid.picard_bound_holds(), ratio, 1.0,
                              "largest change / bound ratio past the first iterate"});
        rep.checks.push_back({"field_bound" + tag, grid.field_bound_ratio <= config.verify.field_bound,
                              grid.field_bound_ratio, config.verify.field_bound, ""});
        if (m > 0.0) {
            rep.checks.push_back(identity_check(
                "reflection_identity" + tag, chunked(config.verify.identity_samples, [&](int n, std::uint64_t s) {
                    return verify_reflection(grid, n, s);
                })));
            rep.checks.push_back(identity_check(
                "integral_identity" + tag, chunked(config.verify.identity_samples, [&](int n, std::uint64_t s) {
                    return verify_integral_identity(grid, n, s);
                })));
        }
        // energy stays positive on the sample grid
        const auto times = sample_times(window, config.periods, config.fit.samples_per_window);
        std::vector<double> E(times.size());
        parallel_for(times.size(), workers, [&](std::size_t k) { E[k] = grid.energy(times[k]).E; });
        const double emin = *std::min_element(E.begin(), E.end());
        rep.checks.push_back({"energy_positive" + tag, emin > 0.0, emin, 0.0, ""});

        if (config.oracle.ny > 0) {
            OracleOptions o = config.oracle;
            o.t_max = std::min(o.t_max, t_max);
            try {
                const OracleRun orun = solve_oracle(motion, data, m, o);
                const OracleComparison cmp =
                    compare(orun, [&grid](double t, double x) { return grid.value(t, x); }, o.t_max);
                rep.checks.push_back({"oracle" + tag, cmp.sup_error <= config.verify.oracle_tolerance, cmp.sup_error,
                                      config.verify.oracle_tolerance, "worst slice t = " + format_number(cmp.worst_t)});
            } catch (const Error& e) {
                rep.checks.push_back({"oracle" + tag, false, 0.0, config.verify.oracle_tolerance, e.what()});
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------- output

void write_analysis_json(std::ostream& out, const MapAnalysis& analysis, const std::string& motion) {
    json j = analysis_json(analysis);
    j["motion"] = motion;
    dump(out, j);
}

void write_energy_csv(std::ostream& out, const EnergySeries& s) {
    std::string buf = "t,E,E_mass_share,E_window_avg\n";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        buf += csv_field(s.t[i]);
        buf += ',';
        buf += csv_field(s.E[i]);
        buf += ',';
        buf += csv_field(s.mass_share[i]);
        buf += ',';
        buf += csv_field(i < s.window_avg.size() ? s.window_avg[i] : std::numeric_limits<double>::quiet_NaN());
        buf += '\n';
    }
    out << buf;
}

void write_report_json(std::ostream& out, const ExperimentReport& rep) {
    json j;
    j["motion"] = rep.motion;
    j["analysis"] = rep.analysis ? analysis_json(*rep.analysis) : json(nullptr);
    j["analysis_error"] = rep.analysis_error;
    json compat = json::array();
    for (const auto& c : rep.compatibility.conditions) {
        compat.push_back({{"name", c.name}, {"residual", c.residual}, {"pass", c.pass}});
    }
    j["compatibility"] = compat;
    j["hypothesis_J"] = number_or_null(rep.hypothesis_J);
    json runs = json::array();
    for (const auto& r : rep.runs) {
        json jr;
        jr["mass"] = r.mass;
        jr["iterations"] = r.iterations;
        jr["converged"] = r.converged;
        jr["changes"] = r.changes;
        jr["picard_bound_holds"] = r.picard_bound_holds;
        jr["field_bound_ratio"] = r.field_bound_ratio;
        // above m0 the fitted exponent is reported without a predicted bound
        jr["above_m0"] = rep.analysis && rep.analysis->gamma ? json(r.mass > rep.analysis->m0_heuristic) : json(nullptr);
        jr["window"] = r.series.window;
        jr["gamma"] = number_or_null(r.series.gamma);
        if (r.series.fit) {
            jr["gamma_fit"] = r.series.fit->gamma;
            jr["gamma_half_width"] = r.series.fit->half_width;
            jr["windows"] = r.series.fit->windows;
        } else {
            jr["gamma_fit"] = nullptr;
            jr["gamma_half_width"] = nullptr;
            jr["windows"] = 0;
        }
        jr["residual_slope"] = r.series.residual_slope;
        jr["residual_min"] = r.series.residual_min;
        jr["residual_max"] = r.series.residual_max;
        jr["fit_error"] = r.series.fit_error;
        jr["error"] = r.error;
        runs.push_back(jr);
    }
    j["runs"] = runs;
    if (rep.oracle) {
        j["oracle"] = {{"sup_error", rep.oracle->sup_error},
                       {"l2_error", rep.oracle->l2_error},
                       {"worst_t", rep.oracle->worst_t},
                       {"slices", rep.oracle->slices}};
    } else {
        j["oracle"] = nullptr;
    }
    j["oracle_error"] = rep.oracle_error;
    dump(out, j);
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
    std::string buf = "param,rho,rho_err,p,q,gamma,gamma_fit,status\n";
    for (const auto& r : rows) {
        buf += csv_field(r.param);
        buf += ',';
        buf += csv_field(r.rho);
        buf += ',';
        buf += csv_field(r.rho_err);
        buf += ',';
        if (r.resonance) buf += std::to_string(r.resonance->p);
        buf += ',';
        if (r.resonance) buf += std::to_string(r.resonance->q);
        buf += ',';
        buf += csv_field(r.gamma);
        buf += ',';
        buf += csv_field(r.gamma_fit);
        buf += ',';
        buf += r.status;
        buf += '\n';
    }
    out << buf;
}

void write_verify_json(std::ostream& out, const VerifyReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back(
            {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}, {"detail", c.detail}});
    }
    dump(out, json{{"pass", report.all_pass()}, {"checks", checks}});
}

}  // namespace kgc
