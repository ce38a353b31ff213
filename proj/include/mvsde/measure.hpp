#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace mvsde {

// Sufficient statistics shared by the built-in models, accumulated in a
// single fixed left-to-right pass over the samples so that repeated
// evaluation is bit-reproducible.
struct MeasureStats {
    double mean = 0.0;
    double second_moment = 0.0;
    double sum_sin = 0.0;  // sum of sin(x_j)
    double sum_cos = 0.0;  // sum of cos(x_j)
    double sum_g = 0.0;    // sum of g(x_j) with g(u) = u / (1 + u^2)
    double sum_g2 = 0.0;   // sum of g(x_j)^2
};

double bounded_ratio(double u);        // g(u)  = u / (1 + u^2)
double bounded_ratio_deriv(double u);  // g'(u) = (1 - u^2) / (1 + u^2)^2

// Uniform empirical measure (1/N) sum of Dirac atoms over one time-slice of
// particle positions. Non-owning view; the sample storage must outlive it.
class EmpiricalMeasureView {
public:
    explicit EmpiricalMeasureView(std::span<const double> samples);

    std::size_t size() const noexcept { return samples_.size(); }
    std::span<const double> samples() const noexcept { return samples_; }
    const MeasureStats& stats() const noexcept { return stats_; }

    double mean() const noexcept { return stats_.mean; }

    // (1/N) sum f(x_j); throws if f produces a non-finite value.
    double integrate(const std::function<double(double)>& f) const;

    // (1/N^2) sum_i sum_j g(x_i, x_j), direct double loop.
    double double_integrate(const std::function<double(double, double)>& g) const;

    // (1/N) sum g(x_j)^2 - ((1/N) sum g(x_j))^2, clamped at zero.
    double variance_of(const std::function<double(double)>& g) const;

private:
    std::span<const double> samples_;
    MeasureStats stats_;
};

// Exact Wasserstein-2 distance between two equal-size one-dimensional
// empirical measures (sorted-sample matching realises the optimal coupling).
double wasserstein2_1d(std::span<const double> a, std::span<const double> b);
double wasserstein2_1d(const EmpiricalMeasureView& a, const EmpiricalMeasureView& b);

}  // namespace mvsde
