#include "kgc/oracle_fdm.hpp"

#include <algorithm>
#include <cmath>

#include "kgc/error.hpp"

namespace kgc {

namespace {

constexpr const char* kModule = "oracle_fdm";

struct Coefficients {
    std::vector<double> beta;
    std::vector<double> c;
    std::vector<double> d;
};

void coefficients(const BoundaryMotion& motion, double t, double dt, double dy, Coefficients& out) {
    const double a = motion.a(t);
    const double da = motion.da(t);
    const double d2a = motion.d2a(t);
    const std::size_t n = out.c.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double y = static_cast<double>(j) * dy;
        const double b = -y * da / a;
        out.beta[j] = b * dt / (2.0 * dy);
        out.c[j] = (y * y * da * da - 1.0) / (a * a);
        out.d[j] = y * (2.0 * da * da - a * d2a) / (a * a);
    }
}

// 1/2 int (phi_t^2 + phi_x^2 + m^2 phi^2) dx from u at the middle level and
// the centered time difference.
double slice_energy(const BoundaryMotion& motion, double t, double mass, const std::vector<double>& um,
                    const std::vector<double>& u, const std::vector<double>& up, double dt, double dy) {
    const double a = motion.a(t);
    const double da = motion.da(t);
    const std::size_t J = u.size() - 1;
    auto density = [&](std::size_t j, double uy) {
        const double y = static_cast<double>(j) * dy;
        const double ut = (up[j] - um[j]) / (2.0 * dt);
        const double phit = ut - da * y / a * uy;
        const double phix = uy / a;
        return 0.5 * (phit * phit + phix * phix + mass * mass * u[j] * u[j]);
    };
    // trapezoid over cells with the y-derivative taken at cell midpoints
    double sum = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
        const double uy = (u[j + 1] - u[j]) / dy;
        sum += 0.5 * (density(j, uy) + density(j + 1, uy));
    }
    return sum * dy * a;
}

// (1 + beta D) x = r with D the centered difference and x = 0 at both ends.
void tridiagonal(const std::vector<double>& beta, const std::vector<double>& rhs, std::vector<double>& x,
                 std::vector<double>& cprime, std::vector<double>& dprime) {
    const std::size_t J = x.size() - 1;
    x[0] = 0.0;
    x[J] = 0.0;
    if (J < 2) return;
    cprime[1] = beta[1];
    dprime[1] = rhs[1];
    for (std::size_t j = 2; j < J; ++j) {
        const double denom = 1.0 + beta[j] * cprime[j - 1];
        cprime[j] = beta[j] / denom;
        dprime[j] = (rhs[j] + beta[j] * dprime[j - 1]) / denom;
    }
    x[J - 1] = dprime[J - 1];
    for (std::size_t j = J - 1; j-- > 1;) x[j] = dprime[j] - cprime[j] * x[j + 1];
}

}  // namespace

OracleRun solve_oracle(const BoundaryMotion& motion, const CauchyData& data, double mass, const OracleOptions& opt,
                       const simd::Kernels& kern) {
    if (opt.ny < 4) throw Error(ErrorKind::InvalidArgument, kModule, "need at least 4 cells");
    if (!(opt.t_max > 0.0) || opt.slices < 1) throw Error(ErrorKind::InvalidArgument, kModule, "bad output range");
    if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw Error(ErrorKind::InvalidArgument, kModule, "cfl must lie in (0, 1]");
    const double a0 = motion.a(0.0);
    if (std::abs(data.length - a0) > 1e-12 * (1.0 + a0)) {
        throw Error(ErrorKind::IncompatibleData, kModule, "data length differs from a(0)");
    }

    const std::size_t J = static_cast<std::size_t>(opt.ny);
    const double dy = 1.0 / static_cast<double>(J);
    const double dt_max = opt.cfl * dy * motion.a_min() / (1.0 + motion.max_speed());
    const double dt_out = opt.t_max / opt.slices;
    const long per_slice = static_cast<long>(std::ceil(dt_out / dt_max - 1e-12));
    const double dt = dt_out / static_cast<double>(per_slice);

    OracleRun run;
    run.dt = dt;
    run.dy = dy;
    run.mass = mass;

    std::vector<double> um(J + 1), u(J + 1), up(J + 1), rhs(J + 1, 0.0), cp(J + 1), dp(J + 1);
    std::vector<double> before(J + 1, 0.0);
    Coefficients co{std::vector<double>(J + 1), std::vector<double>(J + 1), std::vector<double>(J + 1)};

    // Taylor start from the data at t = 0
    {
        const double da = motion.da(0.0);
        coefficients(motion, 0.0, dt, dy, co);
        um[0] = um[J] = 0.0;
        u[0] = u[J] = 0.0;
        for (std::size_t j = 1; j < J; ++j) {
            const double y = static_cast<double>(j) * dy;
            const double x = a0 * y;
            const double u0 = data.phi0(x);
            const double ut = data.phi1(x) + y * da * data.dphi0(x);
            const double uy = a0 * data.dphi0(x);
            const double uyy = a0 * a0 * data.d2phi0(x);
            const double uty = a0 * data.dphi1(x) + da * data.dphi0(x) + y * da * a0 * data.d2phi0(x);
            const double b = 2.0 * co.beta[j] * dy / dt;
            const double utt = -(2.0 * b * uty + co.c[j] * uyy + co.d[j] * uy + mass * mass * u0);
            um[j] = u0;
            u[j] = u0 + dt * ut + 0.5 * dt * dt * utt;
            before[j] = u0 - dt * ut + 0.5 * dt * dt * utt;
        }
    }

    auto record = [&](double t, const std::vector<double>& lvl, double energy) {
        OracleSlice s;
        s.t = t;
        s.x.resize(J + 1);
        const double a = motion.a(t);
        for (std::size_t j = 0; j <= J; ++j) s.x[j] = a * static_cast<double>(j) * dy;
        s.phi = lvl;
        s.energy = energy;
        run.slices.push_back(std::move(s));
    };

    const long total = per_slice * opt.slices;
    double e0 = 0.0;
    // um = level n-1, u = level n; step computes level n+1
    for (long n = 1; n <= total; ++n) {
        const double t = static_cast<double>(n) * dt;
        coefficients(motion, t, dt, dy, co);
        simd::OracleRowArgs args{u.data() + 1,    um.data() + 1, co.beta.data() + 1, co.c.data() + 1,
                                 co.d.data() + 1, dt * dt,       1.0 / (dy * dy),    1.0 / (2.0 * dy),
                                 mass * mass,     rhs.data() + 1, J - 1};
        kern.oracle_rhs(args);
        tridiagonal(co.beta, rhs, up, cp, dp);

        if (n == 1) {
            e0 = slice_energy(motion, 0.0, mass, before, um, u, dt, dy);
            record(0.0, um, e0);
        }
        const double e = slice_energy(motion, t, mass, um, u, up, dt, dy);
        if (!std::isfinite(e) || (t <= motion.period() && e0 > 0.0 && e > opt.blowup * e0)) {
            throw Error(ErrorKind::Unstable, kModule, "energy blow-up at t = " + std::to_string(t));
        }
        if (n % per_slice == 0) record(t, u, e);
        um.swap(u);
        u.swap(up);
    }
    run.steps = total;
    return run;
}

OracleComparison compare(const OracleRun& run, const FieldFn& field, double t_limit) {
    OracleComparison out;
    for (const auto& s : run.slices) {
        if (s.t > t_limit) continue;
        const std::size_t J = s.x.size() - 1;
        double sup = 0.0;
        double l2 = 0.0;
        for (std::size_t j = 1; j < J; ++j) {
            const double err = std::abs(field(s.t, s.x[j]) - s.phi[j]);
            sup = std::max(sup, err);
            l2 += err * err;
        }
        l2 = std::sqrt(l2 * (s.x[1] - s.x[0]));
        ++out.slices;
        if (sup > out.sup_error) {
            out.sup_error = sup;
            out.worst_t = s.t;
        }
        out.l2_error = std::max(out.l2_error, l2);
    }
    if (out.slices == 0) throw Error(ErrorKind::NoOverlap, kModule, "no oracle slice inside the solution range");
    return out;
}

}  // namespace kgc
