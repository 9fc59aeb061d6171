#include "kgc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kgc::quad {

double simpson_nonuniform(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw std::invalid_argument("simpson_nonuniform: size mismatch");
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * (x[1] - x[0]) * (y[0] + y[1]);

    const std::size_t intervals = n - 1;
    const std::size_t paired = intervals - intervals % 2;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < paired; i += 2) {
        const double h0 = x[i + 1] - x[i];
        const double h1 = x[i + 2] - x[i + 1];
        if (h0 <= 0.0 || h1 <= 0.0) {
            sum += 0.5 * h0 * (y[i] + y[i + 1]) + 0.5 * h1 * (y[i + 1] + y[i + 2]);
            continue;
        }
        const double hs = h0 + h1;
        sum += hs / 6.0 *
               ((2.0 - h1 / h0) * y[i] + hs * hs / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
    }
    if (intervals % 2) {
        const std::size_t m = n - 1;
        const double h1 = x[m] - x[m - 1];
        const double h0 = x[m - 1] - x[m - 2];
        if (h0 <= 0.0 || h1 <= 0.0) {
            sum += 0.5 * h1 * (y[m] + y[m - 1]);
        } else {
            const double alpha = (2.0 * h1 * h1 + 3.0 * h1 * h0) / (6.0 * (h0 + h1));
            const double beta = (h1 * h1 + 3.0 * h1 * h0) / (6.0 * h0);
            const double eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
            sum += alpha * y[m] + beta * y[m - 1] - eta * y[m - 2];
        }
    }
    return sum;
}

namespace {

GaussRule build_gauss(int order) {
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = z;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) {
                p1 = z;
                p0 = 1.0;
            }
            dp = order * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        rule.nodes[i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_gauss(order)).first;
    return it->second;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || n != y_.size()) throw std::invalid_argument("Pchip: need at least two matching samples");
    std::vector<double> h(n - 1);
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
        d_[0] = d_[1] = delta[0];
        build_integral();
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] > 0.0) {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(d) > std::abs(3.0 * d0)) return 3.0 * d0;
        return d;
    };
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    build_integral();
}

void Pchip::build_integral() {
    cum_.assign(x_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
        const double h = x_[i + 1] - x_[i];
        cum_[i + 1] = cum_[i] + 0.5 * h * (y_[i] + y_[i + 1]) + h * h * (d_[i] - d_[i + 1]) / 12.0;
    }
}

double Pchip::integral(double t) const {
    const std::size_t i = locate(t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double s4 = s3 * s;
    const double part = h * (y_[i] * (0.5 * s4 - s3 + s) + y_[i + 1] * (-0.5 * s4 + s3)) +
                        h * h * (d_[i] * (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) + d_[i + 1] * (0.25 * s4 - s3 / 3.0));
    return cum_[i] + part;
}

std::size_t Pchip::locate(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double Pchip::operator()(double t) const {
    const std::size_t i = locate(t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * d_[i] + (-2 * s3 + 3 * s2) * y_[i + 1] +
           (s3 - s2) * h * d_[i + 1];
}

double Pchip::derivative(double t) const {
    const std::size_t i = locate(t);
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y_[i] + (-6 * s2 + 6 * s) * y_[i + 1]) / h + (3 * s2 - 4 * s + 1) * d_[i] +
           (3 * s2 - 2 * s) * d_[i + 1];
}

}  // namespace kgc::quad
