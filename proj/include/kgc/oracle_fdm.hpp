#pragma once

// Independent finite-difference solver on the fixed interval y = x / a(t) in [0, 1]:
//   u_tt + 2b u_ty + c u_yy + d u_y + m^2 u = 0,
//   b = -y a'/a,  c = (y^2 a'^2 - 1)/a^2,  d = y (2a'^2 - a a'')/a^2.
// Centered in time and space; the mixed term is taken at the outer levels,
// which makes each step a tridiagonal solve.

#include <functional>
#include <vector>

#include "kgc/boundary.hpp"
#include "kgc/cauchy.hpp"
#include "kgc/simd/kernels.hpp"

namespace kgc {

struct OracleOptions {
    int ny = 256;             ///< cells in y
    double cfl = 0.9;
    double t_max = 1.0;
    int slices = 100;         ///< output slices after t = 0, uniformly spaced
    double blowup = 1e6;      ///< energy growth that counts as unstable within the first period
};

struct OracleSlice {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> phi;
    double energy = 0.0;
};

struct OracleRun {
    double dt = 0.0;
    double dy = 0.0;
    long steps = 0;
    double mass = 0.0;
    std::vector<OracleSlice> slices;
};

/// Throws Unstable, IncompatibleData, InvalidArgument.
OracleRun solve_oracle(const BoundaryMotion& motion, const CauchyData& data, double mass, const OracleOptions& options,
                       const simd::Kernels& kernels = simd::active());

struct OracleComparison {
    double sup_error = 0.0;
    double l2_error = 0.0;  ///< max over slices of (int err^2 dx)^(1/2)
    double worst_t = 0.0;
    int slices = 0;
};

using FieldFn = std::function<double(double t, double x)>;

/// Compares every slice with t <= t_limit at the interior oracle nodes. Throws NoOverlap.
OracleComparison compare(const OracleRun& run, const FieldFn& field, double t_limit);

}  // namespace kgc
