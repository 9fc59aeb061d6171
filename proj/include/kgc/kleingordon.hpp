#pragma once

// Massive field by Picard iteration f^(n) = -(m^2/4) phi^(n-1) on the
// characteristic lattice, plus the backward-characteristic geometry
// (T, B, Q, N, M, theta) used to cross-check the solution.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <vector>

#include "kgc/boundary.hpp"
#include "kgc/cauchy.hpp"
#include "kgc/characteristics.hpp"

namespace kgc {

struct CharPoint {
    double xi = 0.0;
    double eta = 0.0;
};

/// Axis-aligned rectangle [y_lo, y_hi] x [z_lo, z_hi] in (xi, eta) coordinates.
struct Rect {
    double y_lo = 0.0;
    double y_hi = 0.0;
    double z_lo = 0.0;
    double z_hi = 0.0;
    double area() const { return (y_hi - y_lo) * (z_hi - z_lo); }
};

struct SignedRegion {
    Rect rect;
    int sign = -1;         ///< theta = (-1)^(n+1)
    bool clipped = false;  ///< restricted to z >= -y
    double area = 0.0;
};

class CharGeometry {
public:
    explicit CharGeometry(CharacteristicMaps maps) : maps_(std::move(maps)) {}

    const CharacteristicMaps& maps() const noexcept { return maps_; }

    static double time_of(double xi, double eta) { return 0.5 * (xi + eta); }
    static int theta(int n) { return n % 2 == 0 ? -1 : 1; }

    bool in_domain(double xi, double eta, double tol = 1e-12) const;
    /// B(xi, eta) = (eta, F^-1(xi))
    CharPoint lowest_vertex(double xi, double eta) const;
    /// Q(xi, eta) = [eta, xi] x [F^-1(xi), eta]
    Rect rectangle(double xi, double eta) const;
    /// Largest n with B^n(xi, eta) in the domain. Throws OutsideDomain.
    int depth(double xi, double eta) const;
    /// Q(B^n) for n < N, then Q(B^N) clipped to t >= 0.
    std::vector<SignedRegion> union_M(double xi, double eta) const;
    double measure_M(double xi, double eta) const;

private:
    CharacteristicMaps maps_;
};

struct LatticeSpec {
    int half_nodes = 256;  ///< M: the initial interval carries 2M cells
    double t_max = 1.0;
};

struct PicardOptions {
    double tol = 0.0;  ///< <= 0 selects 1e-9 sup|phi^(0)|
    int max_iter = 40;
    bool throw_on_failure = true;
};

struct EnergySample {
    double t = 0.0;
    double E = 0.0;
    double xi_part = 0.0;
    double eta_part = 0.0;
    double mass_part = 0.0;
};

struct FieldGrid {
    std::shared_ptr<LatticeProfile> profile;
    double mass = 0.0;
    double t_max = 0.0;
    double xi_max = 0.0;
    double a_max = 0.0;
    int iterations = 0;
    std::vector<double> changes;  ///< sup |phi^(n) - phi^(n-1)|, n = 1, 2, ...
    bool converged = false;
    double tol = 0.0;
    double phi0_sup = 0.0;
    /// sup |phi| exp(-a_max m^2 xi / 2) / sup |phi^(0)|
    double field_bound_ratio = 0.0;

    double phi(double xi, double eta) const { return profile->phi(xi, eta); }
    double value(double t, double x) const { return profile->value(t, x); }
    /// Throws SliceUnavailable when the slice leaves the lattice.
    EnergySample energy(double t) const;
    /// (a_max m^2 xi_max / 2)^n / n! * changes[0], aligned with changes[n].
    std::vector<double> picard_bound() const;
    bool picard_bound_holds() const;

    /// Rows "t x phi" for every lattice node.
    void export_text(std::ostream& out) const;
    /// "KGCFLD01", uint64 row count, then rows of three little-endian float64.
    void export_binary(std::ostream& out) const;
};

/// Throws IncompatibleData, NotConverged (when requested).
FieldGrid picard_solve(const CharacteristicMaps& maps, const CauchyData& data, double mass, const LatticeSpec& spec,
                       const PicardOptions& options = {});

struct IdentityReport {
    int samples = 0;
    double max_residual = 0.0;
    double max_budget = 0.0;
    double worst_ratio = 0.0;  ///< max residual / budget
    int failures = 0;          ///< samples with residual > budget
};

/// phi - phi^(0) against (m^2/4) sum theta int_M phi at random interior points.
IdentityReport verify_integral_identity(const FieldGrid& grid, int samples, std::uint64_t seed);

/// phi(P) + phi(B(P)) + (m^2/4) int_Q phi at random interior points with T(B) >= 0.
IdentityReport verify_reflection(const FieldGrid& grid, int samples, std::uint64_t seed);

/// measure(M) against 2 a_max T(xi, eta) at random interior points up to t_max.
IdentityReport verify_measure_bound(const CharacteristicMaps& maps, double t_max, int samples, std::uint64_t seed);

/// Uniform random interior point: t in [0, t_max], 0 < x < a(t).
CharPoint random_interior_point(const CharacteristicMaps& maps, double t_max, std::mt19937_64& rng);

}  // namespace kgc
