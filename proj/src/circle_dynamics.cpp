#include "kgc/circle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kgc/error.hpp"
#include "kgc/quadrature.hpp"

namespace kgc {

namespace {

constexpr const char* kModule = "circle_dynamics";

double g_value(const CharacteristicMaps& maps, Resonance r, double x) {
    return maps.iterate(x, r.q).x - x - r.p * maps.period();
}

IntervalSet normalize(IntervalSet set) {
    std::erase_if(set, [](const Interval& iv) { return !(iv.hi > iv.lo); });
    std::sort(set.begin(), set.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    IntervalSet merged;
    for (const auto& iv : set) {
        if (!merged.empty() && iv.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        } else {
            merged.push_back(iv);
        }
    }
    return merged;
}

// l(x) = prod_{k>=0} mu / DF^q(F^{kq}(x)), truncated once the orbit sits within
// 1e-10 of the attracting cycle. Returns the product and a bound on |log tail|.
struct Weight {
    double value;
    double tail;
};

Weight orbit_weight(const CharacteristicMaps& maps, Resonance r, double mu, double x) {
    double log_prod = 0.0;
    double y = x;
    const double shift = r.p * maps.period();
    for (int k = 0; k < 10000; ++k) {
        const OrbitPoint step = maps.iterate(y, r.q);
        log_prod += std::log(mu) - std::log(step.derivative);
        const double defect = step.x - y - shift;
        // |y - a| ~ |defect| / (1 - mu) near the attractor
        const double dist = std::abs(defect) / std::max(1.0 - mu, 1e-12);
        const double d = std::abs(std::log(step.derivative) - std::log(mu));
        y = step.x - shift;
        if (dist < 1e-10) {
            // Local linearisation: |log DF^q(y) - log mu| <= C |y - a| with C estimated from
            // the current step, and the remaining distances decay geometrically by mu.
            const double C = dist > 0.0 ? d / dist : 0.0;
            const double tail = C * dist * mu / std::max(1.0 - mu, 1e-12);
            return {std::exp(log_prod), tail};
        }
    }
    return {std::exp(log_prod), std::numeric_limits<double>::infinity()};
}

}  // namespace

RotationEstimate rotation_number(const CharacteristicMaps& maps, long iterations, double start) {
    if (iterations < 1) throw Error(ErrorKind::InvalidArgument, kModule, "rotation_number needs n >= 1");
    const double T = maps.period();
    // F commutes with translation by T, so iterate a reduced representative and
    // count the lattice shifts separately to keep the sum well conditioned.
    double x = start;
    double shifted = 0.0;
    for (long i = 0; i < iterations; ++i) {
        x = maps.F(x);
        const double s = std::floor((x - start) / T);
        if (s != 0.0) {
            x -= s * T;
            shifted += s;
        }
    }
    RotationEstimate est;
    est.value = ((x - start) + shifted * T) / static_cast<double>(iterations);
    est.half_width = T / static_cast<double>(iterations);
    est.iterations = iterations;
    est.start = start;
    return est;
}

std::optional<Resonance> detect_resonance(double value, double half_width, double period, int max_q) {
    if (max_q < 1) throw Error(ErrorKind::InvalidArgument, kModule, "max_q must be >= 1");
    const double lo = (value - half_width) / period;
    const double hi = (value + half_width) / period;
    std::optional<Resonance> found;
    for (int q = 1; q <= max_q; ++q) {
        const long p_lo = std::max<long>(1, static_cast<long>(std::ceil(lo * q - 1e-12)));
        const long p_hi = static_cast<long>(std::floor(hi * q + 1e-12));
        for (long p = p_lo; p <= p_hi; ++p) {
            if (std::gcd(p, static_cast<long>(q)) != 1) continue;
            if (std::abs(value - static_cast<double>(p) / q * period) > half_width) continue;
            if (found) {
                throw Error(ErrorKind::AmbiguousResonance, kModule,
                            "both " + std::to_string(found->p) + "/" + std::to_string(found->q) + " and " +
                                std::to_string(p) + "/" + std::to_string(q) + " fit the rotation estimate");
            }
            found = Resonance{static_cast<int>(p), q};
        }
    }
    return found;
}

std::optional<Resonance> detect_resonance(const RotationEstimate& estimate, double period, int max_q) {
    return detect_resonance(estimate.value, estimate.half_width, period, max_q);
}

std::vector<PeriodicPoint> find_periodic_points(const CharacteristicMaps& maps, Resonance res,
                                                const ScanOptions& options) {
    if (res.p < 1 || res.q < 1 || std::gcd(res.p, res.q) != 1) {
        throw Error(ErrorKind::InvalidArgument, kModule, "resonance must be a coprime positive pair");
    }
    const double a0 = maps.motion().a(0.0);
    const int n = options.samples_per_q * res.q;
    const double dx = 2.0 * a0 / n;
    const double scale = 1.0 + a0 + res.p * maps.period();
    const double zero_tol = 1e-13 * scale;

    std::vector<double> xs(n + 1);
    std::vector<double> gs(n + 1);
    double gmax = 0.0;
    for (int i = 0; i <= n; ++i) {
        xs[i] = i == n ? a0 : -a0 + i * dx;
        gs[i] = g_value(maps, res, xs[i]);
        gmax = std::max(gmax, std::abs(gs[i]));
    }
    if (gmax <= 1e-10 * scale) {
        throw Error(ErrorKind::DegenerateMap, kModule, "F^q - Id - pT vanishes on the whole fundamental interval");
    }

    std::vector<double> roots;
    for (int i = 0; i <= n; ++i) {
        if (std::abs(gs[i]) <= zero_tol) {
            roots.push_back(xs[i]);
            continue;
        }
        if (i == n || std::abs(gs[i + 1]) <= zero_tol) continue;
        if ((gs[i] < 0.0) == (gs[i + 1] < 0.0)) continue;
        double lo = xs[i];
        double hi = xs[i + 1];
        double glo = gs[i];
        while (hi - lo > options.root_tolerance) {
            const double mid = 0.5 * (lo + hi);
            const double gm = g_value(maps, res, mid);
            if (gm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        roots.push_back(0.5 * (lo + hi));
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots) {
        if (r >= a0 - 1e-12 * (1.0 + a0)) continue;
        if (!unique.empty() && r - unique.back() < 1e-9) continue;
        unique.push_back(r);
    }

    std::vector<PeriodicPoint> points;
    points.reserve(unique.size());
    for (double r : unique) {
        const double mu = maps.iterate(r, res.q).derivative;
        if (std::abs(mu - 1.0) <= options.neutral_tolerance) {
            throw Error(ErrorKind::NeutralPoint, kModule, "neutral periodic point at x = " + std::to_string(r));
        }
        points.push_back({r, mu, mu < 1.0 ? PointKind::Attracting : PointKind::Repelling});
    }
    return points;
}

void build_structure(const CharacteristicMaps& maps, MapAnalysis& an) {
    an.repellers.clear();
    an.attractors.clear();
    an.attractor_multipliers.clear();
    an.intervals.clear();
    an.alternating = false;

    const auto& pts = an.periodic_points;
    auto first_rep = std::find_if(pts.begin(), pts.end(),
                                  [](const PeriodicPoint& p) { return p.kind == PointKind::Repelling; });
    if (pts.empty() || first_rep == pts.end()) return;

    const double b0 = first_rep->x;
    struct Entry {
        double x;
        double mu;
        PointKind kind;
    };
    std::vector<Entry> seq;
    for (const auto& p : pts) {
        if (p.x >= b0) seq.push_back({p.x, p.multiplier, p.kind});
        else seq.push_back({maps.F(p.x), p.multiplier, p.kind});
    }
    std::sort(seq.begin(), seq.end(), [](const Entry& a, const Entry& b) { return a.x < b.x; });

    bool ok = seq.size() % 2 == 0 && !seq.empty();
    for (std::size_t i = 0; ok && i < seq.size(); ++i) {
        const PointKind expected = i % 2 == 0 ? PointKind::Repelling : PointKind::Attracting;
        ok = seq[i].kind == expected;
    }
    an.alternating = ok;
    if (!ok) return;

    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i % 2 == 0) {
            an.repellers.push_back(seq[i].x);
        } else {
            an.attractors.push_back(seq[i].x);
            an.attractor_multipliers.push_back(seq[i].mu);
        }
    }
    an.repellers.push_back(maps.F(b0));

    const double a0 = an.a0;
    for (std::size_t i = 0; i < an.attractors.size(); ++i) {
        const double lo = an.repellers[i];
        const double hi = an.repellers[i + 1];
        IntervalSet set;
        for (int j = -1; j <= 1; ++j) {
            const double l = maps.iterate(lo, j).x;
            const double h = maps.iterate(hi, j).x;
            set.push_back({std::max(l, -a0), std::min(h, a0)});
        }
        an.intervals.push_back(normalize(std::move(set)));
    }
}

MapAnalysis analyze_map(const CharacteristicMaps& maps, const AnalysisOptions& options) {
    MapAnalysis an;
    an.period = maps.period();
    an.a0 = maps.motion().a(0.0);
    an.a_max = maps.motion().a_max();
    an.rotation = rotation_number(maps, options.rotation_iterations, options.rotation_start);
    an.resonance = detect_resonance(an.rotation, maps.period(), options.max_q);
    if (an.resonance) {
        an.periodic_points = find_periodic_points(maps, *an.resonance, options.scan);
        build_structure(maps, an);
    }
    return an;
}

double growth_exponent(MapAnalysis& an) {
    if (!an.resonance || an.attractors.empty()) {
        throw Error(ErrorKind::NoAttractor, kModule, "no attracting periodic point");
    }
    const auto it = std::min_element(an.attractor_multipliers.begin(), an.attractor_multipliers.end());
    const double mu = *it;
    if (!(mu < 1.0)) throw Error(ErrorKind::NoAttractor, kModule, "no attracting multiplier below one");
    an.i0 = static_cast<int>(it - an.attractor_multipliers.begin());
    const double pT = an.resonance->p * an.period;
    const double gamma = -std::log(mu) / pT;
    IntervalSet J;
    for (std::size_t i = 0; i < an.attractors.size(); ++i) {
        if (std::abs(an.attractor_multipliers[i] - mu) <= 1e-8 * mu) {
            J.insert(J.end(), an.intervals[i].begin(), an.intervals[i].end());
        }
    }
    an.J = normalize(std::move(J));
    an.gamma = gamma;
    an.m0_heuristic = std::sqrt(gamma / an.a_max);
    return gamma;
}

AsymptoticCoefficients asymptotic_coefficients(const CharacteristicMaps& maps, const MapAnalysis& an,
                                               const Profile1D& f, int panels) {
    if (!an.resonance || !an.alternating || an.attractors.empty()) {
        throw Error(ErrorKind::NotHyperbolic, kModule, "attractor/repeller structure is absent");
    }
    const Resonance r = *an.resonance;
    const std::size_t N = an.attractors.size();
    const double a1 = an.attractors.front();
    const double Fa1 = maps.F(a1);

    // On [a_1, F(a_1)): J_1 = [a_1, b_1) u (b_N, F(a_1)), J_i = (b_{i-1}, b_i).
    std::vector<std::vector<Interval>> pieces(N);
    pieces[0].push_back({a1, an.repellers[1]});
    pieces[0].push_back({an.repellers[N], Fa1});
    for (std::size_t i = 1; i < N; ++i) pieces[i].push_back({an.repellers[i], an.repellers[i + 1]});

    AsymptoticCoefficients out;
    out.base = a1;
    out.multipliers = an.attractor_multipliers;
    for (std::size_t i = 0; i < N; ++i) {
        const double mu = an.attractor_multipliers[i];
        double sum = 0.0;
        for (const auto& iv : pieces[i]) {
            if (!(iv.hi > iv.lo)) continue;
            sum += quad::simpson(
                [&](double x) {
                    const double fx = f(x);
                    if (fx == 0.0) return 0.0;
                    const Weight w = orbit_weight(maps, r, mu, x);
                    out.tail_bound = std::max(out.tail_bound, w.tail);
                    return w.value * fx * fx;
                },
                iv.lo, iv.hi, panels);
        }
        out.coefficients.push_back(sum);
    }
    return out;
}

double weighted_orbit_integral(const CharacteristicMaps& maps, const MapAnalysis& an, const Profile1D& f, int n,
                               int panels) {
    if (!an.resonance || !an.alternating || an.attractors.empty()) {
        throw Error(ErrorKind::NotHyperbolic, kModule, "attractor/repeller structure is absent");
    }
    const double a1 = an.attractors.front();
    std::vector<double> breaks{a1};
    for (std::size_t i = 1; i < an.repellers.size(); ++i) breaks.push_back(an.repellers[i]);
    breaks.push_back(maps.F(a1));
    const int steps = n * an.resonance->q;
    return quad::simpson_pieces(
        [&](double x) {
            const double fx = f(x);
            if (fx == 0.0) return 0.0;
            return fx * fx / maps.iterate(x, steps).derivative;
        },
        breaks, panels);
}

double weighted_integral(const CharacteristicMaps& maps, double t, int j, int panels) {
    if (j < 0) throw Error(ErrorKind::InvalidArgument, kModule, "S_j needs j >= 0");
    return quad::simpson(
        [&](double y) {
            const double d = maps.iterate(y, -j).derivative;
            return d * d;
        },
        maps.h(t), maps.k(t), panels);
}

}  // namespace kgc
