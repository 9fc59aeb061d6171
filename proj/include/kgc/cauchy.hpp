#pragma once

// Initial data (phi0, phi1) on [0, a(0)], the corner compatibility conditions,
// and the built-in data families.

#include <functional>
#include <string>
#include <vector>

#include "kgc/boundary.hpp"
#include "kgc/circle_dynamics.hpp"

namespace kgc {

using ScalarFn = std::function<double(double)>;

/// Endpoint derivatives that tabulated data must supply explicitly.
struct EndpointDerivatives {
    double dphi0_0 = 0.0;
    double dphi0_a = 0.0;
    double d2phi0_0 = 0.0;
    double d2phi0_a = 0.0;
    double dphi1_0 = 0.0;
    double dphi1_a = 0.0;
};

struct CauchyData {
    double length = 0.0;  ///< a(0)
    ScalarFn phi0;
    ScalarFn dphi0;
    ScalarFn d2phi0;  ///< may be empty for tabulated data
    ScalarFn phi1;
    ScalarFn dphi1;
    ScalarFn int_phi1;  ///< x -> int_0^x phi1
    /// Interior points of (0, a(0)) where phi0'' or phi1' lose smoothness.
    std::vector<double> breakpoints;
    std::string tag;
    EndpointDerivatives endpoints;  ///< authoritative for the compatibility check

    /// G0'(eta) = -1/2 [phi0'(|eta|) + phi1(|eta|) sgn(eta)] on [-a(0), a(0)].
    double dG0(double eta) const;
    /// G0(eta) = -1/2 phi0(|eta|) sgn(eta) - 1/2 int_0^{|eta|} phi1.
    double G0(double eta) const;
};

enum class Direction { Left, Right, Standing };

CauchyData make_zero(double length);

/// amplitude * (1 - ((x - center)/width)^2)^3 on its support; phi1 = -phi0' (right),
/// +phi0' (left) or 0 (standing). Throws BumpOutOfRange when the support reaches an endpoint.
CauchyData make_bump(double length, double center, double width, double amplitude, Direction direction);

/// phi0 = amplitude * sin(k pi x / length), phi1 = 0.
CauchyData make_mode(double length, int k, double amplitude);

/// Two-column (x, value) tables for phi0 and phi1, interpolated by PCHIP.
CauchyData make_tabulated(double length, std::vector<double> x0, std::vector<double> v0, std::vector<double> x1,
                          std::vector<double> v1, const EndpointDerivatives& endpoints);

/// Reads whitespace-separated (x, value) rows; '#' starts a comment.
void read_table(const std::string& path, std::vector<double>& x, std::vector<double>& v);

struct CompatibilityCondition {
    std::string name;
    double residual = 0.0;
    bool pass = false;
};

struct CompatibilityReport {
    std::vector<CompatibilityCondition> conditions;
    bool all_pass() const;
    std::string failures() const;
};

CompatibilityReport check_compatibility(const CauchyData& data, const BoundaryMotion& motion,
                                        double tolerance = 1e-10);

/// || phi0'(|x|) + phi1(|x|) sgn(x) || in L2(J). Throws MissingAnalysis when J was not computed.
double check_hypothesis_J(const CauchyData& data, const MapAnalysis& analysis, int panels = 1024);

}  // namespace kgc
