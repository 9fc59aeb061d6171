#include "kgc/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kgc/error.hpp"

namespace kgc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Evaluator {
    double period;
    int derivative;

    double operator()(const ConstantProfile& p, double) const {
        return derivative == 0 ? p.alpha : 0.0;
    }

    double operator()(const SinusoidalProfile& p, double t) const {
        const double w = kTwoPi / period;
        const double phase = w * t;
        switch (derivative) {
            case 0: return p.alpha + p.beta * std::sin(phase);
            case 1: return p.beta * w * std::cos(phase);
            default: return -p.beta * w * w * std::sin(phase);
        }
    }

    double operator()(const FourierProfile& p, double t) const {
        const double w = kTwoPi / period;
        double sum = derivative == 0 ? p.mean : 0.0;
        const std::size_t n = std::max(p.cos_coeffs.size(), p.sin_coeffs.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double kw = w * static_cast<double>(i + 1);
            const double c = i < p.cos_coeffs.size() ? p.cos_coeffs[i] : 0.0;
            const double s = i < p.sin_coeffs.size() ? p.sin_coeffs[i] : 0.0;
            const double cs = std::cos(kw * t);
            const double sn = std::sin(kw * t);
            switch (derivative) {
                case 0: sum += c * cs + s * sn; break;
                case 1: sum += kw * (-c * sn + s * cs); break;
                default: sum += -kw * kw * (c * cs + s * sn); break;
            }
        }
        return sum;
    }
};

[[noreturn]] void reject(const std::string& reason) {
    throw Error(ErrorKind::RejectedMotion, "boundary", reason);
}

// Golden-section maximisation of g on [lo, hi].
template <class G>
double golden_max(G&& g, double lo, double hi) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - r * (hi - lo);
    double x2 = lo + r * (hi - lo);
    double g1 = g(x1);
    double g2 = g(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        if (g1 < g2) {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + r * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - r * (hi - lo);
            g1 = g(x1);
        }
    }
    return std::max(g1, g2);
}

// Sample g densely over one period and refine the maximum around the best sample.
template <class G>
double refined_max(G&& g, double period, int samples) {
    const double dt = period / samples;
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double v = g(i * dt);
        if (!std::isfinite(v)) reject("profile is not finite on [0, period]");
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double refined = golden_max(g, (best - 1) * dt, (best + 1) * dt);
    return std::max(best_val, refined);
}

}  // namespace

double BoundaryMotion::a(double t) const noexcept {
    return std::visit([&](const auto& p) { return Evaluator{period_, 0}(p, t); }, profile_);
}

double BoundaryMotion::da(double t) const noexcept {
    return std::visit([&](const auto& p) { return Evaluator{period_, 1}(p, t); }, profile_);
}

double BoundaryMotion::d2a(double t) const noexcept {
    return std::visit([&](const auto& p) { return Evaluator{period_, 2}(p, t); }, profile_);
}

int BoundaryMotion::order() const noexcept {
    if (std::holds_alternative<ConstantProfile>(profile_)) return 0;
    if (std::holds_alternative<SinusoidalProfile>(profile_)) return 1;
    const auto& f = std::get<FourierProfile>(profile_);
    return static_cast<int>(std::max(f.cos_coeffs.size(), f.sin_coeffs.size()));
}

std::string BoundaryMotion::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (const auto* c = std::get_if<ConstantProfile>(&profile_)) {
        os << "constant(alpha=" << c->alpha << ")";
    } else if (const auto* s = std::get_if<SinusoidalProfile>(&profile_)) {
        os << "sinusoidal(alpha=" << s->alpha << ",beta=" << s->beta << ")";
    } else {
        const auto& f = std::get<FourierProfile>(profile_);
        os << "fourier(mean=" << f.mean << ",order=" << order() << ")";
    }
    os << ",period=" << period_;
    return os.str();
}

BoundaryMotion validate_motion(const MotionSpec& spec) {
    if (!(spec.period > 0.0) || !std::isfinite(spec.period)) reject("period must be positive and finite");

    BoundaryMotion m(spec.period, spec.profile);
    const int samples = 10000 * (m.order() + 1);
    const double T = spec.period;

    m.a_max_ = refined_max([&](double t) { return m.a(t); }, T, samples);
    m.a_min_ = -refined_max([&](double t) { return -m.a(t); }, T, samples);
    m.max_speed_ = refined_max([&](double t) { return std::abs(m.da(t)); }, T, samples);

    double mean = 0.0;
    double worst_period_defect = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = i * (T / samples);
        mean += m.a(t);
        worst_period_defect = std::max(worst_period_defect, std::abs(m.a(t + T) - m.a(t)));
    }
    m.a_mean_ = mean / samples;

    if (!(m.a_min_ > 0.0)) reject("inf a must be positive (got " + std::to_string(m.a_min_) + ")");
    if (!(m.max_speed_ < 1.0)) {
        reject("sup|a'| must be below 1 (got " + std::to_string(m.max_speed_) + ")");
    }
    if (worst_period_defect > 1e-12 * m.a_max_) reject("profile is not periodic with the given period");
    return m;
}

CharacteristicMaps::CharacteristicMaps(BoundaryMotion motion)
    : motion_(std::move(motion)),
      slope_min_((1.0 - motion_.max_speed()) / (1.0 + motion_.max_speed())),
      slope_max_((1.0 + motion_.max_speed()) / (1.0 - motion_.max_speed())) {}

// Solves t + sign * a(t) = y for t. The root lies in [y - sign*a_max, y - sign*a_min]
// (sign = -1 gives h^-1, sign = +1 gives k^-1).
double CharacteristicMaps::invert(double y, double sign) const {
    const double amin = motion_.a_min();
    const double amax = motion_.a_max();
    double lo = sign < 0 ? y + amin : y - amax;
    double hi = sign < 0 ? y + amax : y - amin;
    const double pad = 1e-12 * (1.0 + std::abs(y));
    lo -= pad;
    hi += pad;
    double t = y - sign * motion_.a_mean();
    t = std::clamp(t, lo, hi);
    const double tol = 1e-12 * (1.0 + std::abs(y));
    for (int it = 0; it < 100; ++it) {
        const double g = t + sign * motion_.a(t) - y;
        if (g == 0.0) return t;
        if (g > 0.0) hi = t; else lo = t;
        const double dg = 1.0 + sign * motion_.da(t);
        double next = t - g / dg;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - t);
        t = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(t))) {
            if (std::abs(t + sign * motion_.a(t) - y) <= tol) return t;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(t))) return t;
    }
    throw Error(ErrorKind::NoConvergence, "boundary", "characteristic inversion did not converge");
}

double CharacteristicMaps::h_inverse(double y) const { return invert(y, -1.0); }
double CharacteristicMaps::k_inverse(double y) const { return invert(y, +1.0); }

double CharacteristicMaps::F(double x) const { return x + 2.0 * motion_.a(h_inverse(x)); }

double CharacteristicMaps::F_inverse(double x) const { return x - 2.0 * motion_.a(k_inverse(x)); }

double CharacteristicMaps::dF(double x) const {
    const double v = motion_.da(h_inverse(x));
    return (1.0 + v) / (1.0 - v);
}

double CharacteristicMaps::dF_inverse(double x) const {
    const double v = motion_.da(k_inverse(x));
    return (1.0 - v) / (1.0 + v);
}

OrbitPoint CharacteristicMaps::iterate(double x, int n) const {
    OrbitPoint p{x, 1.0};
    if (n >= 0) {
        for (int i = 0; i < n; ++i) {
            const double t = h_inverse(p.x);
            const double v = motion_.da(t);
            p.derivative *= (1.0 + v) / (1.0 - v);
            p.x += 2.0 * motion_.a(t);
        }
    } else {
        for (int i = 0; i < -n; ++i) {
            const double s = k_inverse(p.x);
            const double v = motion_.da(s);
            p.derivative *= (1.0 - v) / (1.0 + v);
            p.x -= 2.0 * motion_.a(s);
        }
    }
    return p;
}

}  // namespace kgc
