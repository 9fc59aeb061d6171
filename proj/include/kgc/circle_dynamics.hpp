#pragma once

// The lift F viewed as a circle map: rotation number with a guaranteed error bar,
// resonance detection, periodic orbits and their multipliers, the growth
// exponent gamma = -ln(min DF^q(a_i)) / (pT), and the asymptotic coefficients
// of the weighted integrals  int f^2 / DF^{nq}.

#include <functional>
#include <optional>
#include <vector>

#include "kgc/boundary.hpp"

namespace kgc {

struct RotationEstimate {
    double value = 0.0;       ///< (F^n(x) - x) / n
    double half_width = 0.0;  ///< guaranteed: |value - rho| < T / n
    long iterations = 0;
    double start = 0.0;
};

RotationEstimate rotation_number(const CharacteristicMaps& maps, long iterations, double start = 0.0);

/// Resonance rho = (p/q) T with p, q coprime and positive.
struct Resonance {
    int p = 0;
    int q = 0;
    bool operator==(const Resonance&) const = default;
};

/// Returns the unique coprime (p, q), q <= max_q, with |value - (p/q) T| <= half_width.
/// Throws AmbiguousResonance when more than one fraction fits.
std::optional<Resonance> detect_resonance(double value, double half_width, double period, int max_q);
std::optional<Resonance> detect_resonance(const RotationEstimate& estimate, double period, int max_q);

enum class PointKind { Attracting, Repelling };

struct PeriodicPoint {
    double x = 0.0;
    double multiplier = 1.0;  ///< DF^q(x)
    PointKind kind = PointKind::Repelling;
};

struct ScanOptions {
    int samples_per_q = 10000;
    double neutral_tolerance = 1e-8;
    double root_tolerance = 1e-12;
};

/// Simple roots of g(x) = F^q(x) - x - pT on [-a(0), a(0)), ordered by x.
/// Throws DegenerateMap when g vanishes identically, NeutralPoint when a root
/// has |DF^q - 1| within the neutral tolerance.
std::vector<PeriodicPoint> find_periodic_points(const CharacteristicMaps& maps, Resonance resonance,
                                                const ScanOptions& options = {});

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const noexcept { return hi > lo ? hi - lo : 0.0; }
};

/// Union of disjoint open intervals.
using IntervalSet = std::vector<Interval>;

struct MapAnalysis {
    double period = 0.0;
    double a0 = 0.0;
    double a_max = 0.0;
    RotationEstimate rotation;
    std::optional<Resonance> resonance;
    std::vector<PeriodicPoint> periodic_points;  ///< in [-a(0), a(0))

    // Ordered structure b_0 < a_1 < b_1 < ... < a_N < b_N = F(b_0); empty when absent.
    std::vector<double> repellers;             ///< b_0 .. b_N
    std::vector<double> attractors;            ///< a_1 .. a_N
    std::vector<double> attractor_multipliers; ///< DF^q(a_i)
    bool alternating = false;
    std::vector<IntervalSet> intervals;        ///< J_i inside (-a(0), a(0))

    // Filled by growth_exponent.
    std::optional<double> gamma;
    int i0 = -1;                               ///< 0-based index into attractors
    IntervalSet J;
    double m0_heuristic = 0.0;
};

struct AnalysisOptions {
    long rotation_iterations = 100000;
    double rotation_start = 0.0;
    int max_q = 20;
    ScanOptions scan;
};

/// Rotation number, resonance, periodic points and their interval structure.
/// Does not compute gamma; see growth_exponent.
MapAnalysis analyze_map(const CharacteristicMaps& maps, const AnalysisOptions& options = {});

/// Orders periodic points into b_0 < a_1 < ... < b_N = F(b_0) and builds the J_i.
void build_structure(const CharacteristicMaps& maps, MapAnalysis& analysis);

/// gamma from the smallest attracting multiplier; also fills i0, J and m0_heuristic.
/// Throws NoAttractor when no attracting periodic point exists.
double growth_exponent(MapAnalysis& analysis);

struct AsymptoticCoefficients {
    std::vector<double> coefficients;  ///< A_i, ordered as the attractors a_1..a_N
    std::vector<double> multipliers;   ///< mu_i = DF^q(a_i)
    double base = 0.0;                 ///< a_1; the profile lives on [a_1, F(a_1))
    double tail_bound = 0.0;           ///< largest bound on |log| of the dropped product tail
};

using Profile1D = std::function<double(double)>;

/// A_i = || sqrt(l_i) f ||^2 over J_i, with l_i the infinite product
/// prod_k DF^q(a_i) / DF^q(F^{kq}(x)). Throws NotHyperbolic when the
/// attractor/repeller structure is absent.
AsymptoticCoefficients asymptotic_coefficients(const CharacteristicMaps& maps, const MapAnalysis& analysis,
                                               const Profile1D& f, int panels = 1024);

/// int_{a_1}^{F(a_1)} f(x)^2 / DF^{nq}(x) dx, evaluated by direct n-fold iteration.
double weighted_orbit_integral(const CharacteristicMaps& maps, const MapAnalysis& analysis, const Profile1D& f,
                               int n, int panels = 4096);

/// S_j(t) = int_{h(t)}^{k(t)} (DF^{-j}(y))^2 dy
double weighted_integral(const CharacteristicMaps& maps, double t, int j, int panels = 1024);

}  // namespace kgc
