#include "mvsde/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mvsde {

double tame_drift(double b_value, double delta, TamingVariant variant) {
    if (!std::isfinite(b_value) || !std::isfinite(delta)) {
        throw std::invalid_argument("tame_drift requires finite inputs");
    }
    if (delta <= 0.0) {
        throw std::invalid_argument("tame_drift requires delta > 0");
    }
    switch (variant) {
        case TamingVariant::None:
            return b_value;
        case TamingVariant::Scheme1:
            return b_value / (1.0 + delta * std::abs(b_value));
        case TamingVariant::Scheme2:
            return b_value / (1.0 + delta * b_value * b_value);
    }
    throw std::invalid_argument("unknown taming variant");
}

TamingVariant taming_from_name(const std::string& name) {
    if (name == "none") return TamingVariant::None;
    if (name == "s1") return TamingVariant::Scheme1;
    if (name == "s2") return TamingVariant::Scheme2;
    throw std::invalid_argument("unknown taming '" + name + "' (expected none|s1|s2)");
}

std::string taming_name(TamingVariant variant) {
    switch (variant) {
        case TamingVariant::None: return "none";
        case TamingVariant::Scheme1: return "s1";
        case TamingVariant::Scheme2: return "s2";
    }
    return "?";
}

BuiltinModel builtin_from_name(const std::string& name) {
    if (name == "ex1") return BuiltinModel::Ex1;
    if (name == "ex2") return BuiltinModel::Ex2;
    if (name == "ex3") return BuiltinModel::Ex3;
    if (name == "ex4") return BuiltinModel::Ex4;
    if (name == "ex5") return BuiltinModel::Ex5;
    throw std::invalid_argument("unknown model '" + name + "' (expected ex1..ex5)");
}

std::string builtin_name(BuiltinModel which) {
    switch (which) {
        case BuiltinModel::Ex1: return "ex1";
        case BuiltinModel::Ex2: return "ex2";
        case BuiltinModel::Ex3: return "ex3";
        case BuiltinModel::Ex4: return "ex4";
        case BuiltinModel::Ex5: return "ex5";
    }
    return "?";
}

namespace {

// sin(x - y) integrated over the measure, via the cached angle sums:
// sin(x - y) = sin x cos y - cos x sin y.
double sin_coupling(double x, const EmpiricalMeasureView& mu) {
    const double n = static_cast<double>(mu.size());
    return (std::sin(x) * mu.stats().sum_cos - std::cos(x) * mu.stats().sum_sin) / n;
}

// cos(x - y) integrated over the measure.
double cos_coupling(double x, const EmpiricalMeasureView& mu) {
    const double n = static_cast<double>(mu.size());
    return (std::cos(x) * mu.stats().sum_cos + std::sin(x) * mu.stats().sum_sin) / n;
}

double g_variance(const EmpiricalMeasureView& mu) {
    const double n = static_cast<double>(mu.size());
    const double mean_g = mu.stats().sum_g / n;
    double var = mu.stats().sum_g2 / n - mean_g * mean_g;
    if (var < 0.0) var = 0.0;
    return var;
}

}  // namespace

McKeanVlasovModel make_builtin(BuiltinModel which, const BuiltinModelParams& params) {
    if (!(params.sigma_param > 0.0) || !std::isfinite(params.sigma_param) ||
        !std::isfinite(params.c) || !std::isfinite(params.x0)) {
        throw std::invalid_argument("invalid builtin model parameters");
    }
    const double a = 0.5 * params.sigma_param * params.sigma_param;
    const double c = params.c;

    McKeanVlasovModel model;
    model.initial_value = params.x0;
    model.name = builtin_name(which);

    switch (which) {
        case BuiltinModel::Ex1:
            model.drift = [a, c](double x, const EmpiricalMeasureView& mu) {
                return a * x - x * x * x + c * mu.mean();
            };
            model.diffusion = [](double, const EmpiricalMeasureView& mu) { return mu.mean(); };
            model.diffusion_state_gradient = [](double, const EmpiricalMeasureView&) {
                return 0.0;
            };
            model.diffusion_lions_derivative = [](double, const EmpiricalMeasureView&,
                                                  double) { return 1.0; };
            break;

        case BuiltinModel::Ex2:
            model.drift = [a, c](double x, const EmpiricalMeasureView& mu) {
                return a * x - x * x * x + c * mu.mean();
            };
            model.diffusion = [](double x, const EmpiricalMeasureView&) { return x; };
            model.diffusion_state_gradient = [](double, const EmpiricalMeasureView&) {
                return 1.0;
            };
            model.diffusion_lions_derivative = [](double, const EmpiricalMeasureView&,
                                                  double) { return 0.0; };
            break;

        case BuiltinModel::Ex3:
            model.drift = [a](double x, const EmpiricalMeasureView& mu) {
                return a * x - x * x * x + sin_coupling(x, mu);
            };
            model.diffusion = [](double x, const EmpiricalMeasureView& mu) {
                return x + sin_coupling(x, mu);
            };
            model.diffusion_state_gradient = [](double x, const EmpiricalMeasureView& mu) {
                return 1.0 + cos_coupling(x, mu);
            };
            model.diffusion_lions_derivative = [](double x, const EmpiricalMeasureView&,
                                                  double y) { return -std::cos(x - y); };
            break;

        case BuiltinModel::Ex4:
            model.drift = [a](double x, const EmpiricalMeasureView& mu) {
                return a * x - x * x * x + mu.mean();
            };
            // int int sin(u + v) mu(dv) mu(du) = 2 (mean sin)(mean cos)
            model.diffusion = [](double, const EmpiricalMeasureView& mu) {
                const double n = static_cast<double>(mu.size());
                return 2.0 * (mu.stats().sum_sin / n) * (mu.stats().sum_cos / n);
            };
            model.diffusion_state_gradient = [](double, const EmpiricalMeasureView&) {
                return 0.0;
            };
            // 2 int cos(u + y) mu(du)
            model.diffusion_lions_derivative = [](double, const EmpiricalMeasureView& mu,
                                                  double y) {
                const double n = static_cast<double>(mu.size());
                return 2.0 * (std::cos(y) * mu.stats().sum_cos / n -
                              std::sin(y) * mu.stats().sum_sin / n);
            };
            break;

        case BuiltinModel::Ex5:
            model.drift = [a](double x, const EmpiricalMeasureView& mu) {
                return a * x - x * x * x + mu.mean();
            };
            model.diffusion = [](double, const EmpiricalMeasureView& mu) {
                return std::exp(-g_variance(mu));
            };
            model.diffusion_state_gradient = [](double, const EmpiricalMeasureView&) {
                return 0.0;
            };
            model.diffusion_lions_derivative = [](double, const EmpiricalMeasureView& mu,
                                                  double y) {
                const double n = static_cast<double>(mu.size());
                const double mean_g = mu.stats().sum_g / n;
                return std::exp(-g_variance(mu)) * 2.0 * bounded_ratio_deriv(y) *
                       (mean_g - bounded_ratio(y));
            };
            break;
    }
    return model;
}

AssumptionProbeReport probe_assumptions(const McKeanVlasovModel& model,
                                        std::span<const double> sample_states,
                                        std::span<const EmpiricalMeasureView> sample_measures,
                                        double tolerance) {
    if (sample_states.size() < 2 || sample_measures.empty()) {
        throw std::invalid_argument(
            "probe_assumptions requires at least 2 states and 1 measure");
    }
    AssumptionProbeReport report;
    report.tolerance = tolerance;
    bool first = true;
    for (std::size_t m = 0; m < sample_measures.size(); ++m) {
        const auto& mu = sample_measures[m];
        for (std::size_t i = 0; i < sample_states.size(); ++i) {
            for (std::size_t j = i + 1; j < sample_states.size(); ++j) {
                const double x = sample_states[i];
                const double y = sample_states[j];
                if (x == y) continue;  // degenerate pair
                const double dx = x - y;
                AssumptionProbePair row;
                row.x = x;
                row.y = y;
                row.measure_index = m;
                row.one_sided_ratio =
                    dx * (model.drift(x, mu) - model.drift(y, mu)) / (dx * dx);
                row.diffusion_ratio =
                    std::abs(model.diffusion(x, mu) - model.diffusion(y, mu)) / std::abs(dx);
                if (first || row.one_sided_ratio > report.max_one_sided) {
                    report.max_one_sided = row.one_sided_ratio;
                }
                if (first || row.diffusion_ratio > report.max_diffusion) {
                    report.max_diffusion = row.diffusion_ratio;
                }
                first = false;
                if (row.one_sided_ratio > tolerance || row.diffusion_ratio > tolerance) {
                    report.violations = true;
                }
                report.pairs.push_back(row);
            }
        }
    }
    return report;
}

}  // namespace mvsde
