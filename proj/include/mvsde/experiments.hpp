#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mvsde/schemes.hpp"

namespace mvsde {

// sqrt((1/N) sum (a_i - b_i)^2) over pathwise-coupled particles.
double rmse_pathwise(std::span<const double> a, std::span<const double> b);
double rmse_pathwise(const EnsembleState& a, const EnsembleState& b);

struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
};

// Ordinary least squares of log2(value) against level.
SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

// Propagation-of-chaos rate in the particle count for state dimension d.
double phi(std::uint64_t n_particles, unsigned dimension);

struct LevelRow {
    int level = 0;
    std::uint64_t scale = 0;  // M for time ladders, N for particle ladders
    double rmse = 0.0;
    int repetitions = 0;
    bool diverged = false;
};

struct ExperimentResult {
    std::vector<LevelRow> rows;
    bool has_slope = false;
    double slope = 0.0;
    double slope_std_error = 0.0;
    bool partial = false;  // at least one level diverged
    std::uint64_t base_seed = 0;
};

struct ConvergenceLadderConfig {
    SchemeSpec scheme;
    std::size_t particles = 1000;
    std::vector<int> levels;  // strictly increasing, each >= 1; M_l = t_scale 2^l
    int repetitions = 1;
    std::uint64_t base_seed = 0;
    double horizon = 1.0;
    std::optional<std::size_t> levy_terms;
    int workers = 1;
};

// Strong-convergence ladder: at each level the fine solution (M_l steps) is
// compared with the coarse one (M_l / 2 steps) driven by the aggregated
// fine noise; RMSE^2 is averaged over repetitions with level- and
// repetition-indexed seeds. Diverged levels are flagged and skipped by the
// slope fit, which needs at least 3 surviving levels.
ExperimentResult run_convergence_ladder(const McKeanVlasovModel& model,
                                        const ConvergenceLadderConfig& config);

struct ParticleDecayConfig {
    std::uint64_t steps = 64;
    std::vector<int> particle_levels;  // strictly increasing; N_l = 2^l
    int repetitions = 100;
    std::uint64_t base_seed = 0;
    double horizon = 1.0;
    std::optional<std::size_t> levy_terms;
    int workers = 1;
};

// RMSE at the final time between two schemes driven by identical Brownian
// streams, per particle count N_l = 2^l. With scheme_a = tamed Euler and
// scheme_b = the full tamed Milstein scheme this isolates the correction
// terms, whose size decays like N^{-1/2}.
ExperimentResult run_lderiv_decay(const McKeanVlasovModel& model, const SchemeSpec& scheme_a,
                                  const SchemeSpec& scheme_b,
                                  const ParticleDecayConfig& config);

// Propagation-of-chaos probe: the N_l-particle system against two
// independent half systems driven by the same Brownian streams, matched
// particle by particle.
ExperimentResult run_poc_split(const McKeanVlasovModel& model, const SchemeSpec& scheme,
                               const ParticleDecayConfig& config);

// Mean-field Ornstein-Uhlenbeck model dX = (a X + c E[X]) dt + s dW with
// closed-form mean x0 exp((a+c) t), used as an independent oracle.
McKeanVlasovModel make_mean_field_ou(double a, double c, double s, double x0);

struct OuValidationReport {
    double measured_mean = 0.0;
    double target = 0.0;
    double mc_std_error = 0.0;    // ensemble stddev / sqrt(N)
    double bias_allowance = 0.0;  // O(delta) allowance fitted from two grids
    double abs_error = 0.0;
    bool pass = false;
};

OuValidationReport run_meanfield_ou_oracle(double a, double c, double s, double x0,
                                           double horizon, std::uint64_t steps,
                                           std::size_t particles, std::uint64_t seed,
                                           int workers = 1);

}  // namespace mvsde
