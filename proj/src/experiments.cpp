#include "mvsde/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvsde/parallel.hpp"

namespace mvsde {

double rmse_pathwise(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("rmse_pathwise requires equal non-empty ensembles");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.size()));
}

double rmse_pathwise(const EnsembleState& a, const EnsembleState& b) {
    return rmse_pathwise(std::span<const double>(a.positions),
                         std::span<const double>(b.positions));
}

SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) {
        throw std::invalid_argument("fit_loglog_slope requires at least 2 points");
    }
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, value] : points) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw std::invalid_argument("fit_loglog_slope requires positive values");
        }
        sx += x;
        sy += std::log2(value);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, value] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (std::log2(value) - my);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("fit_loglog_slope requires distinct levels");
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    if (points.size() > 2) {
        double sse = 0.0;
        for (const auto& [x, value] : points) {
            const double r = std::log2(value) - my - fit.slope * (x - mx);
            sse += r * r;
        }
        fit.std_error = std::sqrt(sse / (n - 2.0) / sxx);
    }
    return fit;
}

double phi(std::uint64_t n_particles, unsigned dimension) {
    if (n_particles == 0 || dimension == 0) {
        throw std::invalid_argument("phi requires positive arguments");
    }
    const double n = static_cast<double>(n_particles);
    if (dimension < 4) return 1.0 / std::sqrt(n);
    if (dimension == 4) {
        if (n_particles < 2) {
            throw std::invalid_argument("phi with d = 4 requires N >= 2");
        }
        return std::log(n) / std::sqrt(n);
    }
    return std::pow(n, -2.0 / static_cast<double>(dimension));
}

namespace {

struct RepOutcome {
    double rmse_sq = 0.0;
    bool diverged = false;
};

// Runs R independent repetitions with (level, repetition)-derived seeds and
// reduces rmse^2 in repetition order, independent of scheduling.
template <typename RepFn>
LevelRow run_level(int level, std::uint64_t scale, int repetitions, int workers,
                   const RepFn& rep_fn) {
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(repetitions));
    const int outer = std::min<int>(repetitions, workers);
    const int inner = std::max(1, workers / std::max(1, outer));
    parallel_for(static_cast<std::size_t>(repetitions), outer,
                 [&](std::size_t begin, std::size_t end) {
                     for (std::size_t r = begin; r < end; ++r) {
                         try {
                             outcomes[r].rmse_sq = rep_fn(r, inner);
                         } catch (const SimulationDiverged&) {
                             outcomes[r].diverged = true;
                         }
                     }
                 });
    LevelRow row;
    row.level = level;
    row.scale = scale;
    row.repetitions = repetitions;
    double sum = 0.0;
    for (const auto& o : outcomes) {
        if (o.diverged) row.diverged = true;
        sum += o.rmse_sq;
    }
    row.rmse = row.diverged ? std::numeric_limits<double>::quiet_NaN()
                            : std::sqrt(sum / static_cast<double>(repetitions));
    return row;
}

void validate_levels(const std::vector<int>& levels, int min_level) {
    if (levels.empty()) {
        throw std::invalid_argument("experiment requires at least one level");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < min_level) {
            throw std::invalid_argument("level below the smallest legal value");
        }
        if (i > 0 && levels[i] <= levels[i - 1]) {
            throw std::invalid_argument("levels must be strictly increasing");
        }
    }
}

void finish_result(ExperimentResult& result) {
    std::vector<std::pair<double, double>> points;
    for (const auto& row : result.rows) {
        if (row.diverged) {
            result.partial = true;
        } else {
            points.emplace_back(static_cast<double>(row.level), row.rmse);
        }
    }
    // a slope needs 3 surviving levels, and all-zero tables have no slope
    const bool positive = std::all_of(points.begin(), points.end(),
                                      [](const auto& p) { return p.second > 0.0; });
    if (points.size() >= 3 && positive) {
        const SlopeFit fit = fit_loglog_slope(points);
        result.has_slope = true;
        result.slope = fit.slope;
        result.slope_std_error = fit.std_error;
    }
}

std::uint64_t time_scale(double horizon) {
    const auto scale = static_cast<std::uint64_t>(std::llround(std::max(1.0, horizon)));
    return scale == 0 ? 1 : scale;
}

}  // namespace

ExperimentResult run_convergence_ladder(const McKeanVlasovModel& model,
                                        const ConvergenceLadderConfig& config) {
    validate_scheme(config.scheme);
    validate_levels(config.levels, 1);
    if (config.repetitions < 1) {
        throw std::invalid_argument("run_convergence_ladder requires repetitions >= 1");
    }
    const std::uint64_t scale = time_scale(config.horizon);

    ExperimentResult result;
    result.base_seed = config.base_seed;
    for (const int level : config.levels) {
        const std::uint64_t steps = scale << level;
        const TimeGrid grid(config.horizon, steps);
        result.rows.push_back(run_level(
            level, steps, config.repetitions, config.workers,
            [&](std::size_t rep, int inner_workers) {
                SimulationOptions opts;
                opts.levy_terms = config.levy_terms;
                opts.workers = inner_workers;
                const std::uint64_t seed = derive_seed(
                    config.base_seed, static_cast<std::uint64_t>(level), rep);
                const auto [fine, coarse] =
                    simulate_coupled_pair(model, config.scheme, grid, config.particles,
                                          seed, opts);
                const double rmse = rmse_pathwise(fine, coarse);
                return rmse * rmse;
            }));
    }
    finish_result(result);
    return result;
}

ExperimentResult run_lderiv_decay(const McKeanVlasovModel& model, const SchemeSpec& scheme_a,
                                  const SchemeSpec& scheme_b,
                                  const ParticleDecayConfig& config) {
    validate_scheme(scheme_a);
    validate_scheme(scheme_b);
    validate_levels(config.particle_levels, 0);
    if (config.repetitions < 1) {
        throw std::invalid_argument("run_lderiv_decay requires repetitions >= 1");
    }
    ExperimentResult result;
    result.base_seed = config.base_seed;
    for (const int level : config.particle_levels) {
        const std::size_t particles = std::size_t{1} << level;
        const TimeGrid grid(config.horizon, config.steps);
        result.rows.push_back(run_level(
            level, particles, config.repetitions, config.workers,
            [&](std::size_t rep, int inner_workers) {
                SimulationOptions opts;
                opts.levy_terms = config.levy_terms;
                opts.workers = inner_workers;
                const std::uint64_t seed = derive_seed(
                    config.base_seed, static_cast<std::uint64_t>(level), rep);
                const EnsembleState a =
                    simulate_terminal(model, scheme_a, grid, particles, seed, opts);
                const EnsembleState b =
                    simulate_terminal(model, scheme_b, grid, particles, seed, opts);
                const double rmse = rmse_pathwise(a, b);
                return rmse * rmse;
            }));
    }
    finish_result(result);
    return result;
}

ExperimentResult run_poc_split(const McKeanVlasovModel& model, const SchemeSpec& scheme,
                               const ParticleDecayConfig& config) {
    validate_scheme(scheme);
    validate_levels(config.particle_levels, 1);  // N_l must be even
    if (config.repetitions < 1) {
        throw std::invalid_argument("run_poc_split requires repetitions >= 1");
    }
    ExperimentResult result;
    result.base_seed = config.base_seed;
    for (const int level : config.particle_levels) {
        const std::size_t particles = std::size_t{1} << level;
        const std::size_t half = particles / 2;
        const TimeGrid grid(config.horizon, config.steps);
        result.rows.push_back(run_level(
            level, particles, config.repetitions, config.workers,
            [&](std::size_t rep, int inner_workers) {
                SimulationOptions opts;
                opts.levy_terms = config.levy_terms;
                opts.workers = inner_workers;
                const std::uint64_t seed = derive_seed(
                    config.base_seed, static_cast<std::uint64_t>(level), rep);
                const EnsembleState full =
                    simulate_terminal(model, scheme, grid, particles, seed, opts);
                SimulationOptions opts_second = opts;
                opts_second.first_particle = half;
                const EnsembleState first_half =
                    simulate_terminal(model, scheme, grid, half, seed, opts);
                const EnsembleState second_half =
                    simulate_terminal(model, scheme, grid, half, seed, opts_second);
                double sum = 0.0;
                for (std::size_t i = 0; i < half; ++i) {
                    const double d = full.positions[i] - first_half.positions[i];
                    sum += d * d;
                }
                for (std::size_t i = 0; i < half; ++i) {
                    const double d = full.positions[half + i] - second_half.positions[i];
                    sum += d * d;
                }
                return sum / static_cast<double>(particles);
            }));
    }
    finish_result(result);
    return result;
}

McKeanVlasovModel make_mean_field_ou(double a, double c, double s, double x0) {
    McKeanVlasovModel model;
    model.name = "mean-field-ou";
    model.initial_value = x0;
    model.drift = [a, c](double x, const EmpiricalMeasureView& mu) {
        return a * x + c * mu.mean();
    };
    model.diffusion = [s](double, const EmpiricalMeasureView&) { return s; };
    model.diffusion_state_gradient = [](double, const EmpiricalMeasureView&) { return 0.0; };
    model.diffusion_lions_derivative = [](double, const EmpiricalMeasureView&, double) {
        return 0.0;
    };
    return model;
}

OuValidationReport run_meanfield_ou_oracle(double a, double c, double s, double x0,
                                           double horizon, std::uint64_t steps,
                                           std::size_t particles, std::uint64_t seed,
                                           int workers) {
    if (!std::isfinite(a) || !std::isfinite(c) || !std::isfinite(s) || !std::isfinite(x0)) {
        throw std::invalid_argument("run_meanfield_ou_oracle requires finite parameters");
    }
    if (steps % 2 != 0) {
        throw std::invalid_argument("run_meanfield_ou_oracle requires an even step count");
    }
    const McKeanVlasovModel model = make_mean_field_ou(a, c, s, x0);
    // constant diffusion, so the untamed Milstein scheme has no correction terms
    const SchemeSpec scheme = milstein_spec(TamingVariant::None, true, false);
    const TimeGrid grid(horizon, steps);
    SimulationOptions opts;
    opts.workers = workers;
    const auto [fine, coarse] = simulate_coupled_pair(model, scheme, grid, particles, seed, opts);

    const double n = static_cast<double>(particles);
    double sum = 0.0;
    for (const double y : fine.positions) sum += y;
    const double mean_fine = sum / n;
    double sum_sq = 0.0;
    for (const double y : fine.positions) {
        const double d = y - mean_fine;
        sum_sq += d * d;
    }
    double sum_coarse = 0.0;
    for (const double y : coarse.positions) sum_coarse += y;
    const double mean_coarse = sum_coarse / n;

    OuValidationReport report;
    report.measured_mean = mean_fine;
    report.target = x0 * std::exp((a + c) * horizon);
    report.mc_std_error = std::sqrt(sum_sq / n) / std::sqrt(n);
    // the coupled two-grid mean difference estimates the O(delta) weak bias;
    // the 1.5 factor absorbs the higher-order Richardson remainder
    report.bias_allowance = 1.5 * std::abs(mean_fine - mean_coarse);
    report.abs_error = std::abs(mean_fine - report.target);
    report.pass = report.abs_error <= 3.0 * report.mc_std_error + report.bias_allowance;
    return report;
}

}  // namespace mvsde
