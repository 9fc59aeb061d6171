#include "kgc/kleingordon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <ostream>

#include "kgc/error.hpp"
#include "kgc/format.hpp"
#include "kgc/simd/kernels.hpp"

namespace kgc {

namespace {

constexpr const char* kModule = "kleingordon";

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// area of [y_lo, y_hi] x [max(L, -y), z_hi] with L = z_lo
double clipped_area(const Rect& r) {
    const double L = r.z_lo;
    const double eta = r.z_hi;
    double area = 0.0;
    // part with -y <= L: full height eta - L
    const double ya = std::max(r.y_lo, -L);
    if (r.y_hi > ya) area += (eta - L) * (r.y_hi - ya);
    // part with -y > L: height (eta + y)^+
    const double yb = std::max(r.y_lo, -eta);
    const double yc = std::min(r.y_hi, -L);
    if (yc > yb) area += eta * (yc - yb) + 0.5 * (yc * yc - yb * yb);
    return area;
}

}  // namespace

bool CharGeometry::in_domain(double xi, double eta, double tol) const {
    const double t = tol * (1.0 + std::abs(xi));
    return eta <= xi + t && eta >= -xi - t && eta >= maps_.F_inverse(xi) - t;
}

CharPoint CharGeometry::lowest_vertex(double xi, double eta) const { return {eta, maps_.F_inverse(xi)}; }

Rect CharGeometry::rectangle(double xi, double eta) const { return {eta, xi, maps_.F_inverse(xi), eta}; }

int CharGeometry::depth(double xi, double eta) const {
    if (!in_domain(xi, eta)) throw Error(ErrorKind::OutsideDomain, kModule, "depth of a point outside the domain");
    int n = 0;
    CharPoint p{xi, eta};
    for (;;) {
        const CharPoint b = lowest_vertex(p.xi, p.eta);
        if (time_of(b.xi, b.eta) < 0.0) return n;
        p = b;
        ++n;
    }
}

std::vector<SignedRegion> CharGeometry::union_M(double xi, double eta) const {
    const int N = depth(xi, eta);
    std::vector<SignedRegion> out;
    CharPoint p{xi, eta};
    for (int n = 0; n <= N; ++n) {
        SignedRegion r;
        r.rect = rectangle(p.xi, p.eta);
        r.sign = theta(n);
        r.clipped = n == N;
        r.area = r.clipped ? clipped_area(r.rect) : r.rect.area();
        out.push_back(r);
        p = lowest_vertex(p.xi, p.eta);
    }
    return out;
}

double CharGeometry::measure_M(double xi, double eta) const {
    double sum = 0.0;
    for (const auto& r : union_M(xi, eta)) sum += r.area;
    return sum;
}

EnergySample FieldGrid::energy(double t) const {
    const auto split = profile->energy(t, mass);
    return {t, split.total(), split.xi_part, split.eta_part, split.mass_part};
}

std::vector<double> FieldGrid::picard_bound() const {
    std::vector<double> out;
    if (changes.empty()) return out;
    const double B = 0.5 * a_max * mass * mass * xi_max;
    double term = changes.front();
    for (std::size_t n = 0; n < changes.size(); ++n) {
        if (n > 0) term *= B / static_cast<double>(n);
        out.push_back(term);
    }
    return out;
}

bool FieldGrid::picard_bound_holds() const {
    const auto bound = picard_bound();
    for (std::size_t n = 0; n < changes.size(); ++n) {
        // rounding floor: changes cannot drop below a few ulps of the field
        const double floor = 64.0 * 0x1.0p-52 * std::max(phi0_sup, 1e-300);
        if (changes[n] > std::max(bound[n], floor)) return false;
    }
    return true;
}

void FieldGrid::export_text(std::ostream& out) const {
    const CharLattice& L = profile->lattice();
    out << "# t x phi\n";
    std::string line;
    for (int u = 0; u <= L.columns(); ++u) {
        for (int v = L.lo(u); v <= u; ++v) {
            line.clear();
            append_number(line, 0.5 * (L.s(u) + L.s(v)));
            line += ' ';
            append_number(line, 0.5 * (L.s(u) - L.s(v)));
            line += ' ';
            append_number(line, profile->phi_node(u, v));
            line += '\n';
            out << line;
        }
    }
}

void FieldGrid::export_binary(std::ostream& out) const {
    const CharLattice& L = profile->lattice();
    auto put = [&out](auto value) {
        unsigned char bytes[sizeof(value)];
        std::memcpy(bytes, &value, sizeof(value));
        if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
        out.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
    };
    out.write("KGCFLD01", 8);
    put(static_cast<std::uint64_t>(L.size()));
    for (int u = 0; u <= L.columns(); ++u) {
        for (int v = L.lo(u); v <= u; ++v) {
            put(0.5 * (L.s(u) + L.s(v)));
            put(0.5 * (L.s(u) - L.s(v)));
            put(profile->phi_node(u, v));
        }
    }
}

FieldGrid picard_solve(const CharacteristicMaps& maps, const CauchyData& data, double mass, const LatticeSpec& spec,
                       const PicardOptions& options) {
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw Error(ErrorKind::InvalidArgument, kModule, "mass must be >= 0");
    if (!(spec.t_max > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "horizon must be positive");
    if (options.max_iter < 1) throw Error(ErrorKind::InvalidArgument, kModule, "max_iter must be >= 1");

    auto base = std::make_shared<const MasslessProfile>(maps, data);
    auto lattice = std::make_shared<const CharLattice>(maps, spec.half_nodes, maps.k(spec.t_max));
    FieldGrid grid;
    grid.profile = std::make_shared<LatticeProfile>(lattice, base);
    grid.mass = mass;
    grid.t_max = spec.t_max;
    grid.xi_max = lattice->xi_max();
    grid.a_max = maps.motion().a_max();

    LatticeProfile& prof = *grid.profile;
    const CharLattice& L = *lattice;
    const int M = L.M();
    double sup0 = 0.0;
    for (int u = 0; u <= L.columns(); ++u) {
        for (int v = L.lo(u); v <= u; ++v) sup0 = std::max(sup0, std::abs(prof.phi0_node(u, v)));
    }
    grid.phi0_sup = sup0;
    grid.tol = options.tol > 0.0 ? options.tol : 1e-9 * sup0;

    const simd::Kernels& kern = simd::active();
    if (mass == 0.0) {
        grid.iterations = 1;
        grid.changes = {0.0};
        grid.converged = true;
    } else {
        const double s = -0.25 * mass * mass;
        const auto g0 = prof.g0_values();
        std::vector<double> f(L.size());
        std::vector<double> old(L.size(), 0.0);
        for (int n = 1; n <= options.max_iter; ++n) {
            std::vector<double>& psi = prof.psi_storage();
            old.swap(psi);  // psi now holds stale values and is fully rewritten by solve
            for (int u = 0; u <= L.columns(); ++u) {
                const int lo = L.lo(u);
                kern.source(&g0[static_cast<std::size_t>(lo + M)], g0[static_cast<std::size_t>(u + M)],
                            &old[L.index(u, lo)], s, &f[L.index(u, lo)], static_cast<std::size_t>(u - lo + 1));
                if (u <= M) f[L.index(u, -u)] = s * (prof.phi0_node(u, -u) + old[L.index(u, -u)]);
            }
            prof.solve(f, kern);
            const double change = kern.max_abs_diff(prof.psi_values().data(), old.data(), L.size());
            grid.changes.push_back(change);
            grid.iterations = n;
            if (!std::isfinite(change)) break;
            if (change <= grid.tol) {
                grid.converged = true;
                break;
            }
        }
        if (!grid.converged && options.throw_on_failure) {
            std::string seq;
            for (double c : grid.changes) {
                if (!seq.empty()) seq += ", ";
                append_number(seq, c);
            }
            throw Error(ErrorKind::NotConverged, kModule, "Picard changes: " + seq);
        }
    }

    double ratio = 0.0;
    const double k = 0.5 * grid.a_max * mass * mass;
    for (int u = 0; u <= L.columns(); ++u) {
        const double w = std::exp(-k * L.s(u));
        for (int v = L.lo(u); v <= u; ++v) ratio = std::max(ratio, std::abs(prof.phi_node(u, v)) * w);
    }
    grid.field_bound_ratio = sup0 > 0.0 ? ratio / sup0 : 0.0;
    return grid;
}

CharPoint random_interior_point(const CharacteristicMaps& maps, double t_max, std::mt19937_64& rng) {
    const double t = t_max * unit(rng);
    const double x = maps.motion().a(t) * (0.001 + 0.998 * unit(rng));
    return {t + x, t - x};
}

IdentityReport verify_integral_identity(const FieldGrid& grid, int samples, std::uint64_t seed) {
    const LatticeProfile& prof = *grid.profile;
    const CharacteristicMaps& maps = prof.base().maps();
    const CharGeometry geo(maps);
    std::mt19937_64 rng(seed);
    const double q = 0.25 * grid.mass * grid.mass;
    IdentityReport rep;
    for (int i = 0; i < samples; ++i) {
        const CharPoint p = random_interior_point(maps, grid.t_max, rng);
        const auto regions = geo.union_M(p.xi, p.eta);
        double rhs = 0.0;
        double measure = 0.0;
        for (const auto& r : regions) {
            rhs += r.sign * prof.integrate_phi(r.rect.y_lo, r.rect.y_hi, r.rect.z_lo, r.rect.z_hi, r.clipped);
            measure += r.area;
        }
        const double lhs = prof.psi(p.xi, p.eta);
        const double residual = std::abs(lhs - q * rhs);
        double budget = 0.0;
        CharPoint b = p;
        for (std::size_t n = 0; n < regions.size(); ++n) {
            budget += 2.0 * prof.interpolation_error(b.xi, b.eta);
            b = geo.lowest_vertex(b.xi, b.eta);
        }
        budget += grid.tol * (1.0 + q * measure) + 1e-12 * grid.phi0_sup * static_cast<double>(regions.size());
        ++rep.samples;
        rep.max_residual = std::max(rep.max_residual, residual);
        rep.max_budget = std::max(rep.max_budget, budget);
        if (budget > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, residual / budget);
        if (residual > budget) ++rep.failures;
    }
    return rep;
}

IdentityReport verify_measure_bound(const CharacteristicMaps& maps, double t_max, int samples, std::uint64_t seed) {
    const CharGeometry geo(maps);
    const double a_max = maps.motion().a_max();
    std::mt19937_64 rng(seed);
    IdentityReport rep;
    for (int i = 0; i < samples; ++i) {
        const CharPoint p = random_interior_point(maps, t_max, rng);
        const double measure = geo.measure_M(p.xi, p.eta);
        const double bound = 2.0 * a_max * CharGeometry::time_of(p.xi, p.eta);
        ++rep.samples;
        rep.max_residual = std::max(rep.max_residual, measure);
        rep.max_budget = std::max(rep.max_budget, bound);
        if (bound > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, measure / bound);
        if (measure > bound * (1.0 + 1e-12)) ++rep.failures;
    }
    return rep;
}

IdentityReport verify_reflection(const FieldGrid& grid, int samples, std::uint64_t seed) {
    const LatticeProfile& prof = *grid.profile;
    const CharacteristicMaps& maps = prof.base().maps();
    const CharGeometry geo(maps);
    std::mt19937_64 rng(seed);
    const double q = 0.25 * grid.mass * grid.mass;
    IdentityReport rep;
    int attempts = 0;
    while (rep.samples < samples && attempts < 100 * samples) {
        ++attempts;
        const CharPoint p = random_interior_point(maps, grid.t_max, rng);
        const CharPoint b = geo.lowest_vertex(p.xi, p.eta);
        if (CharGeometry::time_of(b.xi, b.eta) < 0.0) continue;
        const Rect r = geo.rectangle(p.xi, p.eta);
        const double integral = prof.integrate_phi(r.y_lo, r.y_hi, r.z_lo, r.z_hi, false);
        // phi0(P) + phi0(B) vanishes identically, so only psi enters pointwise
        const double residual = std::abs(prof.psi(p.xi, p.eta) + prof.psi(b.xi, b.eta) + q * integral);
        const double budget = 2.0 * (prof.interpolation_error(p.xi, p.eta) + prof.interpolation_error(b.xi, b.eta)) +
                              grid.tol * (2.0 + q * r.area()) + 1e-12 * grid.phi0_sup;
        ++rep.samples;
        rep.max_residual = std::max(rep.max_residual, residual);
        rep.max_budget = std::max(rep.max_budget, budget);
        if (budget > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, residual / budget);
        if (residual > budget) ++rep.failures;
    }
    return rep;
}

}  // namespace kgc
