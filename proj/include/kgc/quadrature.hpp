#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace kgc::quad {

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
template <class Fn>
double simpson(Fn&& f, double a, double b, int panels) {
    if (panels < 2) panels = 2;
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double odd = 0.0;
    double even = 0.0;
    for (int i = 1; i < panels; ++i) {
        const double v = f(a + i * h);
        if (i % 2) odd += v; else even += v;
    }
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

/// Simpson over consecutive pieces [breaks[i], breaks[i+1]], `panels` per piece.
template <class Fn>
double simpson_pieces(Fn&& f, std::span<const double> breaks, int panels) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i]) sum += simpson(f, breaks[i], breaks[i + 1], panels);
    }
    return sum;
}

struct SimpsonEstimate {
    double value;
    /// |S(2n) - S(n)| / 15, the Richardson error indicator.
    double error;
};

template <class Fn>
SimpsonEstimate simpson_richardson(Fn&& f, double a, double b, int panels) {
    const double coarse = simpson(f, a, b, panels);
    const double fine = simpson(f, a, b, 2 * panels);
    return {fine, std::abs(fine - coarse) / 15.0};
}

/// Composite Simpson on arbitrary increasing nodes (exact for quadratics).
double simpson_nonuniform(std::span<const double> x, std::span<const double> y);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

template <class Fn>
double gauss(Fn&& f, double a, double b, const GaussRule& rule) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

/// Pairwise (cascade) summation; order-fixed for reproducible reductions.
double pairwise_sum(std::span<const double> values);

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson).
class Pchip {
public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;
    double derivative(double t) const;
    /// Integral of the interpolant from front() to t.
    double integral(double t) const;
    bool empty() const noexcept { return x_.empty(); }
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

private:
    std::size_t locate(double t) const;
    void build_integral();

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
    std::vector<double> cum_;
};

}  // namespace kgc::quad
