#include "kgc/characteristics.hpp"

#include <algorithm>
#include <cmath>

#include "kgc/error.hpp"
#include "kgc/quadrature.hpp"

namespace kgc {

namespace {

constexpr const char* kModule = "characteristics";
constexpr int kMaxReductions = 1000000;

double domain_tol(double xi) { return 1e-10 * (1.0 + std::abs(xi)); }

// Three-point derivative at the middle (or an end) of nonuniform nodes.
double diff3(double x0, double x1, double x2, double f0, double f1, double f2, int at) {
    const double h1 = x1 - x0;
    const double h2 = x2 - x1;
    const double hs = h1 + h2;
    switch (at) {
        case 0: return -(2.0 * h1 + h2) / (h1 * hs) * f0 + hs / (h1 * h2) * f1 - h1 / (h2 * hs) * f2;
        case 1: return -h2 / (h1 * hs) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * hs) * f2;
        default: return h2 / (h1 * hs) * f0 - hs / (h1 * h2) * f1 + (2.0 * h2 + h1) / (h2 * hs) * f2;
    }
}

}  // namespace

int prolongation_index(const CharacteristicMaps& maps, double eta) {
    const double a0 = maps.motion().a(0.0);
    if (eta < -a0 - domain_tol(a0)) throw Error(ErrorKind::OutsideDomain, kModule, "eta below -a(0)");
    int n = 0;
    double x = eta;
    while (x >= a0) {
        x = maps.F_inverse(x);
        if (++n > kMaxReductions) throw Error(ErrorKind::NoConvergence, kModule, "prolongation index runaway");
    }
    return n;
}

int reflection_count(const CharacteristicMaps& maps, double t) {
    return prolongation_index(maps, t + maps.motion().a_max());
}

MasslessProfile::MasslessProfile(CharacteristicMaps maps, CauchyData data, double tolerance)
    : maps_(std::move(maps)), data_(std::move(data)), a0_(maps_.motion().a(0.0)) {
    if (std::abs(data_.length - a0_) > 1e-12 * (1.0 + a0_)) {
        throw Error(ErrorKind::IncompatibleData, kModule, "data interval length differs from a(0)");
    }
    const CompatibilityReport rep = check_compatibility(data_, maps_.motion(), tolerance);
    if (!rep.all_pass()) throw Error(ErrorKind::IncompatibleData, kModule, rep.failures());
    kinks_ = {-a0_, 0.0, a0_};
    for (double b : data_.breakpoints) {
        if (b > 0.0 && b < a0_) {
            kinks_.push_back(b);
            kinks_.push_back(-b);
        }
    }
    std::sort(kinks_.begin(), kinks_.end());
}

MasslessProfile::Reduced MasslessProfile::reduce(double eta) const {
    if (eta < -a0_ - domain_tol(a0_)) throw Error(ErrorKind::OutsideDomain, kModule, "eta below -a(0)");
    Reduced r{eta, 0, 1.0};
    while (r.x >= a0_) {
        r.jac *= maps_.dF_inverse(r.x);
        r.x = maps_.F_inverse(r.x);
        if (++r.n > kMaxReductions) throw Error(ErrorKind::NoConvergence, kModule, "reduction runaway");
    }
    r.x = std::max(r.x, -a0_);
    return r;
}

double MasslessProfile::G(double eta) const { return data_.G0(reduce(eta).x); }

double MasslessProfile::dG(double eta) const {
    const Reduced r = reduce(eta);
    return data_.dG0(r.x) * r.jac;
}

double MasslessProfile::phi(double xi, double eta) const {
    const double tol = domain_tol(xi);
    if (eta > xi + tol || eta < -xi - tol || eta < maps_.F_inverse(xi) - tol) {
        throw Error(ErrorKind::OutsideDomain, kModule,
                    "(xi, eta) = (" + std::to_string(xi) + ", " + std::to_string(eta) + ") outside the domain");
    }
    if (eta >= xi) return 0.0;
    return G(eta) - G(xi);
}

double MasslessProfile::energy(double t, int panels) const {
    if (t < 0.0) throw Error(ErrorKind::OutsideDomain, kModule, "energy needs t >= 0");
    return energy_between(maps_.h(t), maps_.k(t), panels);
}

double MasslessProfile::energy_between(double lo, double hi, int panels) const {
    if (!(hi > lo)) return 0.0;
    auto piece = [&](double x0, double x1, int n) {
        if (!(x1 > x0)) return 0.0;
        std::vector<double> breaks{x0};
        for (double k : kinks_) {
            if (k > x0 && k < x1) breaks.push_back(k);
        }
        breaks.push_back(x1);
        return quad::simpson_pieces(
            [&](double x) {
                const double g = data_.dG0(x);
                if (g == 0.0) return 0.0;
                return g * g / maps_.iterate(x, n).derivative;
            },
            breaks, panels);
    };
    const Reduced a = reduce(lo);
    const Reduced b = reduce(hi);
    if (a.n == b.n) return piece(a.x, b.x, a.n);
    double sum = piece(a.x, a0_, a.n);
    for (int n = a.n + 1; n < b.n; ++n) sum += piece(-a0_, a0_, n);
    return sum + piece(-a0_, b.x, b.n);
}

CharLattice::CharLattice(const CharacteristicMaps& maps, int half_nodes, double xi_max) : M_(half_nodes) {
    if (M_ < 2) throw Error(ErrorKind::InvalidArgument, kModule, "lattice needs at least 2 half nodes");
    const double a0 = maps.motion().a(0.0);
    if (!(xi_max > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "xi_max must be positive");
    for (int c = -M_; c <= M_; ++c) {
        s_.push_back(c == M_ ? a0 : (c == -M_ ? -a0 : a0 * c / M_));
        jac_.push_back(1.0);
    }
    jac_.back() = maps.dF(-a0);
    int c = M_;
    while (s_.back() < xi_max || c < 1) {
        ++c;
        const std::size_t prev = static_cast<std::size_t>(c - 2 * M_ + M_);
        const double y = s_[prev];
        s_.push_back(maps.F(y));
        jac_.push_back(jac_[prev] * maps.dF(y));
        if (!(s_.back() > s_[s_.size() - 2])) {
            throw Error(ErrorKind::NoConvergence, kModule, "lattice nodes lost monotonicity");
        }
    }
    U_ = c;
    ds_.assign(s_.size(), 0.0);
    for (std::size_t i = 1; i < s_.size(); ++i) ds_[i] = s_[i] - s_[i - 1];
    offset_.assign(static_cast<std::size_t>(U_) + 2, 0);
    for (int u = 0; u <= U_; ++u) {
        offset_[static_cast<std::size_t>(u) + 1] = offset_[static_cast<std::size_t>(u)] +
                                                   static_cast<std::size_t>(u - lo(u) + 1);
    }
}

int CharLattice::base(int c) const noexcept {
    if (c < M_) return c;
    const int period = 2 * M_;
    return ((c + M_) % period) - M_;
}

int CharLattice::locate(double y) const {
    const auto it = std::upper_bound(s_.begin(), s_.end(), y);
    int c = static_cast<int>(it - s_.begin()) - 1 - M_;
    return std::clamp(c, -M_, U_ - 1);
}

LatticeProfile::LatticeProfile(std::shared_ptr<const CharLattice> lattice, std::shared_ptr<const MasslessProfile> base)
    : lattice_(std::move(lattice)), base_(std::move(base)) {
    const CharLattice& L = *lattice_;
    const auto& data = base_->data();
    const std::size_t count = static_cast<std::size_t>(L.columns() + L.M() + 1);
    g0_.resize(count);
    dg0_.resize(count);
    for (int c = -L.M(); c <= L.columns(); ++c) {
        const double x = L.s(L.base(c));
        g0_[static_cast<std::size_t>(c + L.M())] = data.G0(x);
        dg0_[static_cast<std::size_t>(c + L.M())] = data.dG0(x) / L.jac(c);
    }
    gf_.assign(count, 0.0);
    psi_.assign(L.size(), 0.0);
}

double LatticeProfile::phi0_node(int u, int v) const {
    const int M = lattice_->M();
    if (v == u || v == u - 2 * M) return 0.0;
    if (v == -u) return base_->data().phi0(lattice_->s(u));
    return G0_node(v) - G0_node(u);
}

bool LatticeProfile::valid(int u, int v) const noexcept {
    return u >= 0 && u <= lattice_->columns() && v <= u && v >= lattice_->lo(u);
}

bool LatticeProfile::in_domain(double xi, double eta, double tol) const {
    const double t = tol * (1.0 + std::abs(xi));
    if (xi < -t || xi > lattice_->xi_max() + t) return false;
    if (eta > xi + t || eta < -xi - t) return false;
    return eta >= base_->maps().F_inverse(xi) - t;
}

LatticeProfile::CellRef LatticeProfile::cell_of(double xi, double eta) const {
    const CharLattice& L = *lattice_;
    const int u = std::clamp(L.locate(xi) + 1, 1, L.columns());
    const int vmin = u <= L.M() ? L.lo(u) + 1 : L.lo(u);
    const int v = std::clamp(L.locate(eta) + 1, vmin, u);
    return {u, v};
}

template <class NodeFn>
double LatticeProfile::interpolate(double xi, double eta, NodeFn&& node) const {
    return interpolate_in(cell_of(xi, eta), xi, eta, node);
}

template <class NodeFn>
double LatticeProfile::interpolate_in(CellRef cell, double xi, double eta, NodeFn&& node) const {
    const CharLattice& L = *lattice_;
    const int u = cell.u;
    const int v = cell.v;
    const double x0 = L.s(u - 1);
    const double x1 = L.s(u);
    const double y0 = L.s(v - 1);
    const double y1 = L.s(v);
    struct Corner {
        double x, y;
        int u, v;
    };
    const Corner corners[4] = {{x0, y0, u - 1, v - 1}, {x1, y0, u, v - 1}, {x0, y1, u - 1, v}, {x1, y1, u, v}};
    bool ok[4];
    int nvalid = 0;
    for (int i = 0; i < 4; ++i) {
        ok[i] = valid(corners[i].u, corners[i].v);
        nvalid += ok[i];
    }
    if (nvalid == 4) {
        const double lx = (xi - x0) / (x1 - x0);
        const double ly = (eta - y0) / (y1 - y0);
        const double f00 = node(u - 1, v - 1);
        const double f10 = node(u, v - 1);
        const double f01 = node(u - 1, v);
        const double f11 = node(u, v);
        return (1.0 - ly) * ((1.0 - lx) * f00 + lx * f10) + ly * ((1.0 - lx) * f01 + lx * f11);
    }
    if (nvalid < 3) {
        for (int i = 0; i < 4; ++i) {
            if (ok[i]) return node(corners[i].u, corners[i].v);
        }
        return 0.0;
    }
    const Corner* p[3];
    int k = 0;
    for (int i = 0; i < 4; ++i) {
        if (ok[i]) p[k++] = &corners[i];
    }
    const double det = (p[1]->x - p[0]->x) * (p[2]->y - p[0]->y) - (p[2]->x - p[0]->x) * (p[1]->y - p[0]->y);
    const double l1 = ((xi - p[0]->x) * (p[2]->y - p[0]->y) - (p[2]->x - p[0]->x) * (eta - p[0]->y)) / det;
    const double l2 = ((p[1]->x - p[0]->x) * (eta - p[0]->y) - (xi - p[0]->x) * (p[1]->y - p[0]->y)) / det;
    const double f0 = node(p[0]->u, p[0]->v);
    const double f1 = node(p[1]->u, p[1]->v);
    const double f2 = node(p[2]->u, p[2]->v);
    return f0 + l1 * (f1 - f0) + l2 * (f2 - f0);
}

double LatticeProfile::psi(double xi, double eta) const {
    return interpolate(xi, eta, [this](int u, int v) { return psi_node(u, v); });
}

double LatticeProfile::phi(double xi, double eta) const {
    if (!in_domain(xi, eta, 1e-10)) {
        throw Error(ErrorKind::OutsideDomain, kModule,
                    "(xi, eta) = (" + std::to_string(xi) + ", " + std::to_string(eta) + ") outside the lattice domain");
    }
    return base_->phi(xi, eta) + psi(xi, eta);
}

double LatticeProfile::psi_xi_node(int u, int v) const {
    const CharLattice& L = *lattice_;
    const int umin = std::max(v, -v);
    const int umax = std::min(v + 2 * L.M(), L.columns());
    if (umax - umin < 2) {
        if (umax == umin) return 0.0;
        return (psi_node(umax, v) - psi_node(umin, v)) / (L.s(umax) - L.s(umin));
    }
    const int c = std::clamp(u, umin + 1, umax - 1);
    const int at = u - c + 1;
    return diff3(L.s(c - 1), L.s(c), L.s(c + 1), psi_node(c - 1, v), psi_node(c, v), psi_node(c + 1, v), at);
}

double LatticeProfile::psi_eta_node(int u, int v) const {
    const CharLattice& L = *lattice_;
    const int vmin = L.lo(u);
    const int vmax = u;
    if (vmax - vmin < 2) {
        if (vmax == vmin) return 0.0;
        return (psi_node(u, vmax) - psi_node(u, vmin)) / (L.s(vmax) - L.s(vmin));
    }
    const int c = std::clamp(v, vmin + 1, vmax - 1);
    const int at = v - c + 1;
    return diff3(L.s(c - 1), L.s(c), L.s(c + 1), psi_node(u, c - 1), psi_node(u, c), psi_node(u, c + 1), at);
}

double LatticeProfile::psi_xi(double xi, double eta) const {
    return interpolate(xi, eta, [this](int u, int v) { return psi_xi_node(u, v); });
}

double LatticeProfile::psi_eta(double xi, double eta) const {
    return interpolate(xi, eta, [this](int u, int v) { return psi_eta_node(u, v); });
}

double LatticeProfile::interpolation_error(double xi, double eta) const {
    const CharLattice& L = *lattice_;
    const auto [u, v] = cell_of(xi, eta);
    const double hx = L.s(u) - L.s(u - 1);
    const double hy = L.s(v) - L.s(v - 1);
    double fxx = 0.0;
    double fyy = 0.0;
    double fxy = 0.0;
    int nvalid = 0;
    for (int du = -1; du <= 0; ++du) {
        for (int dv = -1; dv <= 0; ++dv) nvalid += valid(u + du, v + dv);
    }
    // second differences from derivative differences across the cell
    for (int vv : {v - 1, v}) {
        if (valid(u - 1, vv) && valid(u, vv)) {
            fxx = std::max(fxx, std::abs(psi_xi_node(u, vv) - psi_xi_node(u - 1, vv)) / hx);
        }
    }
    for (int uu : {u - 1, u}) {
        if (valid(uu, v - 1) && valid(uu, v)) {
            fyy = std::max(fyy, std::abs(psi_eta_node(uu, v) - psi_eta_node(uu, v - 1)) / hy);
            fxy = std::max(fxy, std::abs(psi_xi_node(uu, v) - psi_xi_node(uu, v - 1)) / hy);
        }
    }
    if (nvalid == 4) return (hx * hx * fxx + hy * hy * fyy) / 8.0;
    return 0.5 * (hx * hx * fxx + 2.0 * hx * hy * fxy + hy * hy * fyy);
}

double LatticeProfile::integrate_phi(double y0, double y1, double z0, double z1, bool clip_t0) const {
    const CharLattice& L = *lattice_;
    if (!(y1 > y0) || !(z1 > z0)) return 0.0;
    auto node = [this](int u, int v) { return phi_node(u, v); };
    const int u_first = std::clamp(L.locate(y0) + 1, 1, L.columns());
    const int u_last = std::clamp(L.locate(y1) + 1, 1, L.columns());
    double sum = 0.0;
    for (int u = u_first; u <= u_last; ++u) {
        const double ya = std::max(y0, L.s(u - 1));
        const double yb = std::min(y1, L.s(u));
        if (!(yb > ya)) continue;
        const int vmin = u <= L.M() ? L.lo(u) + 1 : L.lo(u);
        const int v_first = std::clamp(L.locate(z0) + 1, vmin, u);
        const int v_last = std::clamp(L.locate(z1) + 1, vmin, u);
        for (int v = v_first; v <= v_last; ++v) {
            const double za = std::max(z0, L.s(v - 1));
            const double zb = std::min(z1, L.s(v));
            if (!(zb > za)) continue;
            if (!clip_t0 || za + ya >= 0.0) {
                // bilinear and linear integrands integrate exactly at the centroid
                sum += (yb - ya) * (zb - za) * interpolate_in({u, v}, 0.5 * (ya + yb), 0.5 * (za + zb), node);
                continue;
            }
            if (zb + yb <= 0.0) continue;
            // clip the rectangle by z >= -y; the cell is then a linear triangle cell
            double px[8];
            double py[8];
            int n = 0;
            const double rx[4] = {ya, yb, yb, ya};
            const double ry[4] = {za, za, zb, zb};
            for (int i = 0; i < 4; ++i) {
                const int j = (i + 1) % 4;
                const double di = rx[i] + ry[i];
                const double dj = rx[j] + ry[j];
                if (di >= 0.0) {
                    px[n] = rx[i];
                    py[n] = ry[i];
                    ++n;
                }
                if ((di >= 0.0) != (dj >= 0.0)) {
                    const double tcut = di / (di - dj);
                    px[n] = rx[i] + tcut * (rx[j] - rx[i]);
                    py[n] = ry[i] + tcut * (ry[j] - ry[i]);
                    ++n;
                }
            }
            double area2 = 0.0;
            double cx = 0.0;
            double cy = 0.0;
            for (int i = 0; i < n; ++i) {
                const int j = (i + 1) % n;
                const double cr = px[i] * py[j] - px[j] * py[i];
                area2 += cr;
                cx += (px[i] + px[j]) * cr;
                cy += (py[i] + py[j]) * cr;
            }
            if (std::abs(area2) <= 0.0) continue;
            cx /= 3.0 * area2;
            cy /= 3.0 * area2;
            sum += 0.5 * std::abs(area2) * interpolate_in({u, v}, cx, cy, node);
        }
    }
    return sum;
}

LatticeProfile::EnergySplit LatticeProfile::energy(double t, double mass) const {
    const CharLattice& L = *lattice_;
    const auto& maps = base_->maps();
    const double h = maps.h(t);
    const double k = maps.k(t);
    if (t < 0.0 || k > L.xi_max()) {
        throw Error(ErrorKind::SliceUnavailable, kModule, "time slice t = " + std::to_string(t) + " exceeds the lattice");
    }
    const double m2 = mass * mass;

    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ms;
    EnergySplit out;

    // G0'^2 exactly through the pullback; the lattice quadrature only carries the psi terms
    // right-moving half: xi in [t, k(t)], eta = 2t - xi
    auto xi_sample = [&](double xi, double g0p) {
        const double eta = std::min(2.0 * t - xi, xi);
        const double d = psi_xi(xi, eta);
        xs.push_back(xi);
        ys.push_back(d * (d - 2.0 * g0p));
        if (m2 > 0.0) {
            const double p = (eta >= xi ? 0.0 : base_->G(eta) - base_->G(xi)) + psi(xi, eta);
            ms.push_back(p * p);
        }
    };
    xi_sample(t, base_->dG(t));
    for (int c = L.locate(t) + 1; c <= L.columns() && L.s(c) < k; ++c) {
        if (L.s(c) > t) xi_sample(L.s(c), dG0_node(c));
    }
    xi_sample(k, base_->dG(k));
    out.xi_part = base_->energy_between(t, k) + quad::simpson_nonuniform(xs, ys);
    if (m2 > 0.0) out.mass_part = 0.5 * m2 * quad::simpson_nonuniform(xs, ms);

    xs.clear();
    ys.clear();
    auto eta_sample = [&](double eta, double g0p) {
        const double xi = 2.0 * t - eta;
        const double d = psi_eta(xi, eta);
        xs.push_back(eta);
        ys.push_back(d * (d + 2.0 * g0p));
    };
    eta_sample(h, base_->dG(h));
    for (int c = L.locate(h) + 1; c <= L.columns() && L.s(c) < t; ++c) {
        if (L.s(c) > h) eta_sample(L.s(c), dG0_node(c));
    }
    eta_sample(t, base_->dG(t));
    out.eta_part = base_->energy_between(h, t) + quad::simpson_nonuniform(xs, ys);
    return out;
}

void LatticeProfile::solve(std::span<const double> f, const simd::Kernels& kern) {
    const CharLattice& L = *lattice_;
    const int M = L.M();
    const int U = L.columns();
    if (f.size() != L.size()) throw Error(ErrorKind::InvalidArgument, kModule, "inhomogeneity size mismatch");
    const std::size_t count = static_cast<std::size_t>(U + M + 1);
    auto at = [M](int c) { return static_cast<std::size_t>(c + M); };
    auto fval = [&](int u, int v) { return f[L.index(u, v)]; };
    const auto ds = L.spacing();

    std::vector<double> Iprev(count, 0.0);
    std::vector<double> Icur(count, 0.0);
    std::vector<double> R(count, 0.0);
    std::vector<double> C(count, 0.0);
    std::fill(gf_.begin(), gf_.end(), 0.0);
    psi_[L.index(0, 0)] = 0.0;
    double P = 0.0;

    for (int u = 1; u <= U; ++u) {
        const int cl = u <= M ? -u + 2 : u - 2 * M + 1;
        const int nc = u - cl;
        const double dxi = ds[at(u)];
        if (nc > 0) {
            kern.cell_integrals(&f[L.index(u, cl - 1)], &f[L.index(u - 1, cl - 1)], &ds[at(cl)], 0.25 * dxi,
                                &C[at(cl)], static_cast<std::size_t>(nc));
        }
        const double D = dxi * dxi / 6.0 * (fval(u - 1, u - 1) + fval(u, u - 1) + fval(u, u));
        R[at(u - 1)] = D;
        for (int v = u - 2; v >= cl - 1; --v) R[at(v)] = R[at(v + 1)] + C[at(v + 1)];

        const int rows = u - cl + 1;  // v in [cl - 1, u - 1]
        kern.add(&Iprev[at(cl - 1)], &R[at(cl - 1)], &Icur[at(cl - 1)], static_cast<std::size_t>(rows));
        Icur[at(u)] = 0.0;

        double gu;
        if (u <= M) {
            Icur[at(-u)] = 0.0;
            const double Dp = dxi * ds[at(-u + 1)] / 6.0 * (fval(u - 1, -u + 1) + fval(u, -u + 1) + fval(u, -u));
            P += R[at(-u + 1)] + Dp;
            gu = -P;
            gf_[at(-u)] = gu;
        } else {
            gu = gf_[at(u - 2 * M)] - Icur[at(u - 2 * M)];
        }
        gf_[at(u)] = gu;

        double* out = &psi_[L.index(u, cl - 1)];
        kern.field(&gf_[at(cl - 1)], gu, &Icur[at(cl - 1)], out, static_cast<std::size_t>(rows));
        psi_[L.index(u, u)] = 0.0;
        if (u <= M) {
            psi_[L.index(u, -u)] = 0.0;
        } else {
            psi_[L.index(u, u - 2 * M)] = 0.0;
        }
        std::swap(Iprev, Icur);
    }
}

LatticeProfile build_profile(std::shared_ptr<const CharLattice> lattice, std::shared_ptr<const MasslessProfile> base,
                             const Inhomogeneity& f) {
    LatticeProfile prof(std::move(lattice), std::move(base));
    const CharLattice& L = prof.lattice();
    std::vector<double> fv(L.size());
    for (int u = 0; u <= L.columns(); ++u) {
        for (int v = L.lo(u); v <= u; ++v) fv[L.index(u, v)] = f(L.s(u), L.s(v));
    }
    prof.solve(fv);
    return prof;
}

}  // namespace kgc
