#include "mvsde/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mvsde {

double bounded_ratio(double u) { return u / (1.0 + u * u); }

double bounded_ratio_deriv(double u) {
    const double q = 1.0 + u * u;
    return (1.0 - u * u) / (q * q);
}

EmpiricalMeasureView::EmpiricalMeasureView(std::span<const double> samples)
    : samples_(samples) {
    if (samples_.empty()) {
        throw std::invalid_argument("empirical measure needs at least one sample");
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const double x : samples_) {
        sum += x;
        sum_sq += x * x;
        stats_.sum_sin += std::sin(x);
        stats_.sum_cos += std::cos(x);
        const double g = bounded_ratio(x);
        stats_.sum_g += g;
        stats_.sum_g2 += g * g;
    }
    const double n = static_cast<double>(samples_.size());
    stats_.mean = sum / n;
    stats_.second_moment = sum_sq / n;
}

double EmpiricalMeasureView::integrate(const std::function<double(double)>& f) const {
    double sum = 0.0;
    for (const double x : samples_) sum += f(x);
    const double value = sum / static_cast<double>(samples_.size());
    if (!std::isfinite(value)) {
        throw std::runtime_error("integrand produced a non-finite value");
    }
    return value;
}

double EmpiricalMeasureView::double_integrate(
    const std::function<double(double, double)>& g) const {
    double sum = 0.0;
    for (const double u : samples_) {
        for (const double v : samples_) sum += g(u, v);
    }
    const double n = static_cast<double>(samples_.size());
    const double value = sum / (n * n);
    if (!std::isfinite(value)) {
        throw std::runtime_error("integrand produced a non-finite value");
    }
    return value;
}

double EmpiricalMeasureView::variance_of(const std::function<double(double)>& g) const {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const double x : samples_) {
        const double v = g(x);
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(samples_.size());
    const double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    if (!std::isfinite(var)) {
        throw std::runtime_error("integrand produced a non-finite value");
    }
    // empirical variance can round slightly negative for constant g
    if (var < 0.0) var = 0.0;
    return var;
}

double wasserstein2_1d(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("wasserstein2_1d requires equal sample counts");
    }
    if (a.empty()) {
        throw std::invalid_argument("wasserstein2_1d requires non-empty samples");
    }
    std::vector<double> xs(a.begin(), a.end());
    std::vector<double> ys(b.begin(), b.end());
    std::stable_sort(xs.begin(), xs.end());
    std::stable_sort(ys.begin(), ys.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double d = xs[j] - ys[j];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(xs.size()));
}

double wasserstein2_1d(const EmpiricalMeasureView& a, const EmpiricalMeasureView& b) {
    return wasserstein2_1d(a.samples(), b.samples());
}

}  // namespace mvsde
