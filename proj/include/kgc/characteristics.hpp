#pragma once

// Solution machinery in characteristic coordinates xi = t + x, eta = t - x:
//   phi(xi, eta) = G(eta) - G(xi) - I(xi, eta),
//   I(xi, eta)   = int_{|eta|}^{xi} dy int_eta^y f(y, z) dz,
// with G built from the data on [-a(0), a(0)) and prolonged by
//   G(F(eta)) = G(eta) - I(F(eta), eta).

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "kgc/boundary.hpp"
#include "kgc/cauchy.hpp"
#include "kgc/simd/kernels.hpp"

namespace kgc {

/// n(eta): eta lies in F^n([-a(0), a(0))). Throws OutsideDomain for eta < -a(0).
int prolongation_index(const CharacteristicMaps& maps, double eta);

/// K(t) = n(t + a_max)
int reflection_count(const CharacteristicMaps& maps, double t);

/// Exact solution for f = 0. G is evaluated by pulling eta back into the
/// initial interval, G'(F^n x) = G'(x) / DF^n(x).
class MasslessProfile {
public:
    /// Throws IncompatibleData when the data violate the corner conditions.
    MasslessProfile(CharacteristicMaps maps, CauchyData data, double tolerance = 1e-10);

    const CharacteristicMaps& maps() const noexcept { return maps_; }
    const CauchyData& data() const noexcept { return data_; }
    double a0() const noexcept { return a0_; }

    struct Reduced {
        double x;     ///< F^{-n}(eta) in [-a(0), a(0))
        int n;
        double jac;   ///< D(F^{-n})(eta)
    };
    Reduced reduce(double eta) const;

    double G(double eta) const;
    double dG(double eta) const;

    /// Throws OutsideDomain unless max(-xi, F^-1(xi)) <= eta <= xi.
    double phi(double xi, double eta) const;
    double value(double t, double x) const { return phi(t + x, t - x); }

    /// E_0(t) = int_{h(t)}^{k(t)} G'(y)^2 dy, pulled back onto the initial interval.
    double energy(double t, int panels = 256) const;
    /// int_lo^hi G'(y)^2 dy by the same pullback.
    double energy_between(double lo, double hi, int panels = 256) const;

    /// Points of [-a(0), a(0)] where G0' is not smooth: 0 and +-breakpoints of the data.
    const std::vector<double>& kinks() const noexcept { return kinks_; }

private:
    CharacteristicMaps maps_;
    CauchyData data_;
    double a0_;
    std::vector<double> kinks_;
};

/// Nodes s_c: uniform on [-a(0), a(0)] for |c| <= M, then s_{c+2M} = F(s_c).
/// Lattice points (u, v) with max(-u, u - 2M) <= v <= u cover the domain;
/// v = u is the wall x = 0, v = u - 2M the moving wall, v = -u the line t = 0.
class CharLattice {
public:
    CharLattice(const CharacteristicMaps& maps, int half_nodes, double xi_max);

    int M() const noexcept { return M_; }
    int columns() const noexcept { return U_; }  ///< largest u
    double xi_max() const noexcept { return s(U_); }

    double s(int c) const { return s_[static_cast<std::size_t>(c + M_)]; }
    /// DF^j at the base node, where c = c0 + 2M j with c0 in [-M, M).
    double jac(int c) const { return jac_[static_cast<std::size_t>(c + M_)]; }
    int base(int c) const noexcept;

    int lo(int u) const noexcept { return u <= M_ ? -u : u - 2 * M_; }
    std::size_t offset(int u) const { return offset_[static_cast<std::size_t>(u)]; }
    std::size_t index(int u, int v) const { return offset(u) + static_cast<std::size_t>(v - lo(u)); }
    std::size_t size() const noexcept { return offset_.back(); }

    /// Largest c with s_c <= y, clamped to [-M, U-1].
    int locate(double y) const;

    std::span<const double> nodes() const noexcept { return s_; }
    /// s_c - s_{c-1}, indexed like s (entry for c = -M is 0).
    std::span<const double> spacing() const noexcept { return ds_; }

private:
    int M_;
    int U_;
    std::vector<double> s_;
    std::vector<double> ds_;
    std::vector<double> jac_;
    std::vector<std::size_t> offset_;
};

/// G and phi on a lattice for an inhomogeneity sampled at the nodes.
/// phi = phi0 + psi, with phi0 the exact massless field (evaluated through
/// MasslessProfile) and psi the response to f with zero data.
class LatticeProfile {
public:
    LatticeProfile(std::shared_ptr<const CharLattice> lattice, std::shared_ptr<const MasslessProfile> base);

    const CharLattice& lattice() const noexcept { return *lattice_; }
    const MasslessProfile& base() const noexcept { return *base_; }
    std::shared_ptr<const CharLattice> lattice_ptr() const noexcept { return lattice_; }
    std::shared_ptr<const MasslessProfile> base_ptr() const noexcept { return base_; }

    /// G0 at node c (exact, from the base interval).
    double G0_node(int c) const { return g0_[static_cast<std::size_t>(c + lattice_->M())]; }
    double dG0_node(int c) const { return dg0_[static_cast<std::size_t>(c + lattice_->M())]; }
    /// Full G at node c: G0 plus the inhomogeneous part.
    double G_node(int c) const { return G0_node(c) + gf_[static_cast<std::size_t>(c + lattice_->M())]; }

    double phi0_node(int u, int v) const;
    double psi_node(int u, int v) const { return psi_[lattice_->index(u, v)]; }
    double phi_node(int u, int v) const { return phi0_node(u, v) + psi_node(u, v); }

    /// Interpolated psi (bilinear in full cells, linear in boundary triangles).
    double psi(double xi, double eta) const;
    /// Throws OutsideDomain.
    double phi(double xi, double eta) const;
    double value(double t, double x) const { return phi(t + x, t - x); }

    /// psi derivatives at a node by three-point differences along lattice lines.
    double psi_xi_node(int u, int v) const;
    double psi_eta_node(int u, int v) const;
    double psi_xi(double xi, double eta) const;
    double psi_eta(double xi, double eta) const;

    /// Local bilinear interpolation error estimate of psi at (xi, eta).
    double interpolation_error(double xi, double eta) const;

    struct EnergySplit {
        double xi_part = 0.0;    ///< int phi_xi^2 over the right-moving half
        double eta_part = 0.0;   ///< int phi_eta^2 over the left-moving half
        double mass_part = 0.0;  ///< (m^2 / 2) int phi^2 dx
        double total() const { return xi_part + eta_part + mass_part; }
    };
    /// Throws SliceUnavailable when k(t) lies beyond the lattice.
    EnergySplit energy(double t, double mass) const;

    /// Replaces psi and the inhomogeneous part of G by the response to f (node values).
    void solve(std::span<const double> f, const simd::Kernels& kernels = simd::active());

    /// Integral of the interpolant of the nodal phi over [y0, y1] x [z0, z1],
    /// optionally restricted to z >= -y (the part above t = 0).
    double integrate_phi(double y0, double y1, double z0, double z1, bool clip_t0) const;

    std::span<const double> psi_values() const noexcept { return psi_; }
    /// G0 at the nodes, indexed by c + M.
    std::span<const double> g0_values() const noexcept { return g0_; }
    std::vector<double>& psi_storage() noexcept { return psi_; }

    bool in_domain(double xi, double eta, double tol = 1e-12) const;

private:
    struct CellRef {
        int u;
        int v;
    };
    CellRef cell_of(double xi, double eta) const;
    template <class NodeFn>
    double interpolate(double xi, double eta, NodeFn&& node) const;
    template <class NodeFn>
    double interpolate_in(CellRef cell, double xi, double eta, NodeFn&& node) const;
    bool valid(int u, int v) const noexcept;

    std::shared_ptr<const CharLattice> lattice_;
    std::shared_ptr<const MasslessProfile> base_;
    std::vector<double> g0_;
    std::vector<double> dg0_;
    std::vector<double> gf_;
    std::vector<double> psi_;
};

using Inhomogeneity = std::function<double(double xi, double eta)>;

/// Builds G from the data, prolongs it across the lattice and evaluates phi for the
/// given inhomogeneity f (sampled at the nodes).
LatticeProfile build_profile(std::shared_ptr<const CharLattice> lattice, std::shared_ptr<const MasslessProfile> base,
                             const Inhomogeneity& f);

}  // namespace kgc
