#pragma once

// Moving-wall trajectory a(t) and the characteristic maps built from it:
//   h = Id - a,  k = Id + a,  F = k o h^-1 = Id + 2 a o h^-1,
//   F^-1 = Id - 2 a o k^-1.
// F is an increasing lift of a circle diffeomorphism: F(x + T) = F(x) + T.

#include <string>
#include <variant>
#include <vector>

namespace kgc {

struct ConstantProfile {
    double alpha = 1.0;
};

/// a(t) = alpha + beta sin(2 pi t / T)
struct SinusoidalProfile {
    double alpha = 1.0;
    double beta = 0.0;
};

/// a(t) = mean + sum_k [cos_k cos(2 pi k t / T) + sin_k sin(2 pi k t / T)]
struct FourierProfile {
    double mean = 1.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
};

using Profile = std::variant<ConstantProfile, SinusoidalProfile, FourierProfile>;

/// Unvalidated description of a wall motion.
struct MotionSpec {
    double period = 1.0;
    Profile profile = ConstantProfile{};
};

class BoundaryMotion {
public:
    double period() const noexcept { return period_; }
    const Profile& profile() const noexcept { return profile_; }

    double a(double t) const noexcept;
    double da(double t) const noexcept;
    double d2a(double t) const noexcept;

    double a_min() const noexcept { return a_min_; }
    double a_max() const noexcept { return a_max_; }
    double a_mean() const noexcept { return a_mean_; }
    /// sup |a'(t)| over one period.
    double max_speed() const noexcept { return max_speed_; }
    /// Trigonometric order of the profile (0 for constant).
    int order() const noexcept;

    /// Short human-readable profile description, e.g. "sinusoidal(alpha=1,beta=0.1)".
    std::string describe() const;

private:
    friend BoundaryMotion validate_motion(const MotionSpec& spec);
    BoundaryMotion(double period, Profile profile) : period_(period), profile_(std::move(profile)) {}

    double period_;
    Profile profile_;
    double a_min_ = 0.0;
    double a_max_ = 0.0;
    double a_mean_ = 0.0;
    double max_speed_ = 0.0;
};

/// Checks period > 0, inf a > 0 and sup|a'| < 1 by dense sampling with
/// extremum refinement. Throws Error{RejectedMotion} otherwise.
BoundaryMotion validate_motion(const MotionSpec& spec);

/// Value and accumulated derivative of an iterated map.
struct OrbitPoint {
    double x;
    double derivative;
};

class CharacteristicMaps {
public:
    explicit CharacteristicMaps(BoundaryMotion motion);

    const BoundaryMotion& motion() const noexcept { return motion_; }
    double period() const noexcept { return motion_.period(); }

    double h(double t) const noexcept { return t - motion_.a(t); }
    double k(double t) const noexcept { return t + motion_.a(t); }
    double h_inverse(double y) const;
    double k_inverse(double y) const;

    double F(double x) const;
    double F_inverse(double x) const;
    double dF(double x) const;
    /// Derivative of F^-1 at x.
    double dF_inverse(double x) const;

    /// F^n(x) together with DF^n(x); negative n iterates F^-1 and returns D(F^-|n|)(x).
    OrbitPoint iterate(double x, int n) const;

    /// (1 - sup|a'|) / (1 + sup|a'|)
    double slope_min() const noexcept { return slope_min_; }
    /// (1 + sup|a'|) / (1 - sup|a'|)
    double slope_max() const noexcept { return slope_max_; }

private:
    double invert(double y, double sign) const;

    BoundaryMotion motion_;
    double slope_min_;
    double slope_max_;
};

}  // namespace kgc
