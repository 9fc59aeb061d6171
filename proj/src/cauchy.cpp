#include "kgc/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "kgc/error.hpp"
#include "kgc/quadrature.hpp"

namespace kgc {

namespace {

constexpr const char* kModule = "cauchy";

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

ScalarFn zero_fn() {
    return [](double) { return 0.0; };
}

EndpointDerivatives endpoints_from(const CauchyData& d) {
    EndpointDerivatives e;
    const double a = d.length;
    e.dphi0_0 = d.dphi0(0.0);
    e.dphi0_a = d.dphi0(a);
    e.d2phi0_0 = d.d2phi0(0.0);
    e.d2phi0_a = d.d2phi0(a);
    e.dphi1_0 = d.dphi1(0.0);
    e.dphi1_a = d.dphi1(a);
    return e;
}

}  // namespace

double CauchyData::dG0(double eta) const {
    const double r = std::abs(eta);
    return -0.5 * (dphi0(r) + phi1(r) * sgn(eta));
}

double CauchyData::G0(double eta) const {
    const double r = std::abs(eta);
    return -0.5 * phi0(r) * sgn(eta) - 0.5 * int_phi1(r);
}

CauchyData make_zero(double length) {
    if (!(length > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "interval length must be positive");
    CauchyData d;
    d.length = length;
    d.phi0 = d.dphi0 = d.d2phi0 = d.phi1 = d.dphi1 = d.int_phi1 = zero_fn();
    d.tag = "zero";
    return d;
}

CauchyData make_bump(double length, double center, double width, double amplitude, Direction direction) {
    if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "bump width must be positive");
    if (!(center - width > 0.0) || !(center + width < length)) {
        throw Error(ErrorKind::BumpOutOfRange, kModule, "bump support [" + std::to_string(center - width) + ", " +
                                                            std::to_string(center + width) +
                                                            "] must lie strictly inside (0, a(0))");
    }
    const double c = center;
    const double w = width;
    const double A = amplitude;
    auto inside = [c, w](double x, double& r) {
        r = (x - c) / w;
        return std::abs(r) < 1.0;
    };
    ScalarFn f0 = [=](double x) {
        double r;
        if (!inside(x, r)) return 0.0;
        const double q = 1.0 - r * r;
        return A * q * q * q;
    };
    ScalarFn f1 = [=](double x) {
        double r;
        if (!inside(x, r)) return 0.0;
        const double q = 1.0 - r * r;
        return -6.0 * A * r * q * q / w;
    };
    ScalarFn f2 = [=](double x) {
        double r;
        if (!inside(x, r)) return 0.0;
        return -6.0 * A * (1.0 - r * r) * (1.0 - 5.0 * r * r) / (w * w);
    };

    CauchyData d;
    d.length = length;
    d.phi0 = f0;
    d.dphi0 = f1;
    d.d2phi0 = f2;
    d.breakpoints = {c - w, c + w};
    switch (direction) {
        case Direction::Right:
            d.phi1 = [f1](double x) { return -f1(x); };
            d.dphi1 = [f2](double x) { return -f2(x); };
            d.int_phi1 = [f0](double x) { return -f0(x); };
            d.tag = "bump-right";
            break;
        case Direction::Left:
            d.phi1 = f1;
            d.dphi1 = f2;
            d.int_phi1 = f0;
            d.tag = "bump-left";
            break;
        case Direction::Standing:
            d.phi1 = d.dphi1 = d.int_phi1 = zero_fn();
            d.tag = "bump-standing";
            break;
    }
    d.endpoints = endpoints_from(d);
    return d;
}

CauchyData make_mode(double length, int k, double amplitude) {
    if (!(length > 0.0) || k < 1) throw Error(ErrorKind::InvalidArgument, kModule, "mode needs length > 0, k >= 1");
    const double kappa = k * std::numbers::pi / length;
    const double A = amplitude;
    CauchyData d;
    d.length = length;
    // sin(k pi) is not exactly zero in floating point.
    d.phi0 = [=](double x) { return x <= 0.0 || x >= length ? 0.0 : A * std::sin(kappa * x); };
    d.dphi0 = [=](double x) { return A * kappa * std::cos(kappa * x); };
    d.d2phi0 = [=](double x) { return -A * kappa * kappa * std::sin(kappa * x); };
    d.phi1 = d.dphi1 = d.int_phi1 = zero_fn();
    d.tag = "mode-" + std::to_string(k);
    d.endpoints = endpoints_from(d);
    return d;
}

CauchyData make_tabulated(double length, std::vector<double> x0, std::vector<double> v0, std::vector<double> x1,
                          std::vector<double> v1, const EndpointDerivatives& endpoints) {
    auto check = [length](const std::vector<double>& x, const char* what) {
        if (x.size() < 3) throw Error(ErrorKind::ConfigError, kModule, std::string(what) + " table needs >= 3 rows");
        for (std::size_t i = 1; i < x.size(); ++i) {
            if (!(x[i] > x[i - 1])) {
                throw Error(ErrorKind::ConfigError, kModule, std::string(what) + " table x must increase");
            }
        }
        const double tol = 1e-12 * (1.0 + length);
        if (std::abs(x.front()) > tol || std::abs(x.back() - length) > tol) {
            throw Error(ErrorKind::ConfigError, kModule, std::string(what) + " table must span [0, a(0)]");
        }
    };
    check(x0, "phi0");
    check(x1, "phi1");
    auto p0 = std::make_shared<quad::Pchip>(std::move(x0), std::move(v0));
    auto p1 = std::make_shared<quad::Pchip>(std::move(x1), std::move(v1));
    CauchyData d;
    d.length = length;
    d.phi0 = [p0](double x) { return (*p0)(x); };
    d.dphi0 = [p0](double x) { return p0->derivative(x); };
    d.d2phi0 = [p0, length](double x) {
        const double h = 1e-6 * length;
        const double lo = std::max(x - h, 0.0);
        const double hi = std::min(x + h, length);
        return (p0->derivative(hi) - p0->derivative(lo)) / (hi - lo);
    };
    d.phi1 = [p1](double x) { return (*p1)(x); };
    d.dphi1 = [p1](double x) { return p1->derivative(x); };
    d.int_phi1 = [p1](double x) { return p1->integral(x); };
    d.tag = "table";
    d.endpoints = endpoints;
    return d;
}

void read_table(const std::string& path, std::vector<double>& x, std::vector<double>& v) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, kModule, "cannot open table " + path);
    x.clear();
    v.clear();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        ss.imbue(std::locale::classic());
        double a;
        double b;
        if (!(ss >> a)) continue;
        if (!(ss >> b)) {
            throw Error(ErrorKind::ConfigError, kModule, path + ":" + std::to_string(lineno) + ": expected two columns");
        }
        x.push_back(a);
        v.push_back(b);
    }
}

bool CompatibilityReport::all_pass() const {
    for (const auto& c : conditions) {
        if (!c.pass) return false;
    }
    return true;
}

std::string CompatibilityReport::failures() const {
    std::string out;
    for (const auto& c : conditions) {
        if (c.pass) continue;
        if (!out.empty()) out += "; ";
        out += c.name + " (residual " + std::to_string(c.residual) + ")";
    }
    return out;
}

CompatibilityReport check_compatibility(const CauchyData& data, const BoundaryMotion& motion, double tolerance) {
    const double a = data.length;
    const double da = motion.da(0.0);
    const double d2a = motion.d2a(0.0);
    const auto& e = data.endpoints;
    CompatibilityReport rep;
    auto add = [&](const char* name, double r) { rep.conditions.push_back({name, r, std::abs(r) <= tolerance}); };
    add("phi0(0) = 0", data.phi0(0.0));
    add("phi0(a0) = 0", data.phi0(a));
    add("phi1(0) = 0", data.phi1(0.0));
    add("phi1(a0) + a'(0) phi0'(a0) = 0", data.phi1(a) + da * e.dphi0_a);
    add("phi0''(0) = 0", e.d2phi0_0);
    add("(1 + a'^2) phi0''(a0) + a'' phi0'(a0) + 2 a' phi1'(a0) = 0",
        (1.0 + da * da) * e.d2phi0_a + d2a * e.dphi0_a + 2.0 * da * e.dphi1_a);
    return rep;
}

double check_hypothesis_J(const CauchyData& data, const MapAnalysis& analysis, int panels) {
    if (!analysis.gamma) throw Error(ErrorKind::MissingAnalysis, kModule, "J is only available after growth_exponent");
    double sum = 0.0;
    for (const auto& iv : analysis.J) {
        std::vector<double> breaks{iv.lo};
        std::vector<double> interior{0.0};
        for (double b : data.breakpoints) {
            interior.push_back(b);
            interior.push_back(-b);
        }
        std::sort(interior.begin(), interior.end());
        for (double b : interior) {
            if (b > iv.lo && b < iv.hi) breaks.push_back(b);
        }
        breaks.push_back(iv.hi);
        sum += quad::simpson_pieces(
            [&](double x) {
                const double r = std::abs(x);
                const double g = data.dphi0(r) + data.phi1(r) * sgn(x);
                return g * g;
            },
            breaks, panels);
    }
    return std::sqrt(sum);
}

}  // namespace kgc
