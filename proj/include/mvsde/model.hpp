#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvsde/measure.hpp"

namespace mvsde {

enum class TamingVariant { None, Scheme1, Scheme2 };

// Scheme1 divides by 1 + delta|b|, Scheme2 by 1 + delta|b|^2, None is the
// identity. Output keeps the sign of b and never exceeds it in magnitude.
double tame_drift(double b_value, double delta, TamingVariant variant);

TamingVariant taming_from_name(const std::string& name);  // none | s1 | s2
std::string taming_name(TamingVariant variant);

// Scalar McKean-Vlasov model. Coefficients see the current state and the
// empirical measure of the whole ensemble; derivatives of the diffusion in
// the state (state_gradient) and in the measure (lions_derivative, evaluated
// at a probe atom y) are supplied explicitly. All coefficients must be pure
// functions of their arguments.
struct McKeanVlasovModel {
    using Coefficient = std::function<double(double, const EmpiricalMeasureView&)>;
    using MeasureDerivative =
        std::function<double(double, const EmpiricalMeasureView&, double)>;

    Coefficient drift;
    Coefficient diffusion;
    Coefficient diffusion_state_gradient;
    MeasureDerivative diffusion_lions_derivative;
    double initial_value = 1.0;
    std::string name;
};

enum class BuiltinModel { Ex1, Ex2, Ex3, Ex4, Ex5 };

struct BuiltinModelParams {
    double sigma_param = 1.5;  // sigma constant of the (sigma^2/2) x drift term
    double c = 0.5;            // mean-coupling weight (enters Ex1 and Ex2 only)
    double x0 = 1.0;
};

BuiltinModel builtin_from_name(const std::string& name);  // "ex1" .. "ex5"
std::string builtin_name(BuiltinModel which);

// The five benchmark models with their closed-form diffusion derivatives.
// Measure functionals are evaluated through the cached one-pass statistics
// of the view, so every coefficient costs O(1) per particle.
McKeanVlasovModel make_builtin(BuiltinModel which, const BuiltinModelParams& params = {});

// Numerical spot-check of the one-sided Lipschitz bound of the drift and the
// Lipschitz bound of the diffusion over sampled state pairs.
struct AssumptionProbePair {
    double x = 0.0;
    double y = 0.0;
    std::size_t measure_index = 0;
    double one_sided_ratio = 0.0;   // <x-y, b(x,mu)-b(y,mu)> / |x-y|^2
    double diffusion_ratio = 0.0;   // |sigma(x,mu)-sigma(y,mu)| / |x-y|
};

struct AssumptionProbeReport {
    std::vector<AssumptionProbePair> pairs;
    double max_one_sided = 0.0;
    double max_diffusion = 0.0;
    double tolerance = 0.0;
    bool violations = false;
};

AssumptionProbeReport probe_assumptions(const McKeanVlasovModel& model,
                                        std::span<const double> sample_states,
                                        std::span<const EmpiricalMeasureView> sample_measures,
                                        double tolerance);

}  // namespace mvsde
