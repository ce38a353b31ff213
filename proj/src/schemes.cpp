#include "mvsde/schemes.hpp"

#include <cmath>
#include <stdexcept>

#include "mvsde/parallel.hpp"

namespace mvsde {

TimeGrid::TimeGrid(double horizon_, std::uint64_t steps_)
    : horizon(horizon_), steps(steps_) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("TimeGrid requires a positive finite horizon");
    }
    if (steps == 0) {
        throw std::invalid_argument("TimeGrid requires at least one step");
    }
    delta = horizon / static_cast<double>(steps);
}

SchemeKind scheme_kind_from_name(const std::string& name) {
    if (name == "tamed-euler") return SchemeKind::TamedEuler;
    if (name == "milstein") return SchemeKind::Milstein;
    throw std::invalid_argument("unknown scheme '" + name +
                                "' (expected tamed-euler|milstein)");
}

std::string scheme_kind_name(SchemeKind kind) {
    return kind == SchemeKind::TamedEuler ? "tamed-euler" : "milstein";
}

void validate_scheme(const SchemeSpec& spec) {
    if (spec.kind == SchemeKind::TamedEuler &&
        (spec.include_state_gradient_term || spec.include_lions_term)) {
        throw std::invalid_argument(
            "tamed-euler scheme cannot carry Milstein correction terms");
    }
}

SchemeSpec tamed_euler_spec(TamingVariant taming) {
    return SchemeSpec{SchemeKind::TamedEuler, taming, false, false};
}

SchemeSpec milstein_spec(TamingVariant taming, bool gradient, bool lions) {
    return SchemeSpec{SchemeKind::Milstein, taming, gradient, lions};
}

EnsembleState step_ensemble(const EnsembleState& state, const McKeanVlasovModel& model,
                            const SchemeSpec& spec, const NoiseBlock& noise, int workers) {
    validate_scheme(spec);
    const std::size_t n = state.positions.size();
    if (n == 0 || noise.size() != n) {
        throw std::invalid_argument("step_ensemble: state and noise sizes differ");
    }
    if (noise.delta != state.grid.delta) {
        throw std::invalid_argument("step_ensemble: noise step size does not match the grid");
    }
    if (noise.has_cross() != spec.include_lions_term) {
        throw std::invalid_argument(
            "step_ensemble: cross iterated integrals must be present exactly when the "
            "Lions term is enabled");
    }

    const double delta = state.grid.delta;
    const EmpiricalMeasureView mu(state.positions);

    // freeze per-particle diffusion values once; the Lions sum reads sigma at
    // every atom, which would otherwise cost O(N^2) coefficient evaluations
    std::vector<double> sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        sigma[i] = model.diffusion(state.positions[i], mu);
    }

    EnsembleState out{std::vector<double>(n), state.step_index + 1, state.grid};

    const double inv_n = 1.0 / static_cast<double>(n);
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double y = state.positions[i];
            const double b = model.drift(y, mu);
            if (!std::isfinite(b) || !std::isfinite(sigma[i])) {
                throw SimulationDiverged(state.step_index, i);
            }
            double next = y + tame_drift(b, delta, spec.taming) * delta +
                          sigma[i] * noise.increments[i];
            if (spec.include_state_gradient_term) {
                next += model.diffusion_state_gradient(y, mu) * sigma[i] * noise.diagonal[i];
            }
            if (spec.include_lions_term) {
                double sum = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double iterated =
                        j == i ? noise.diagonal[i] : noise.cross_at(j, i);
                    sum += model.diffusion_lions_derivative(y, mu, state.positions[j]) *
                           sigma[j] * iterated;
                }
                next += inv_n * sum;
            }
            if (!std::isfinite(next) || std::abs(next) > kDivergenceLimit) {
                throw SimulationDiverged(state.step_index, i);
            }
            out.positions[i] = next;
        }
    });
    return out;
}

namespace {

LevyAreaConfig resolve_levy(const SimulationOptions& opts, std::uint64_t steps) {
    return LevyAreaConfig{opts.levy_terms.value_or(default_levy_terms(steps))};
}

EnsembleState initial_state(const McKeanVlasovModel& model, const TimeGrid& grid,
                            std::size_t n_particles) {
    if (n_particles == 0) {
        throw std::invalid_argument("simulation requires at least one particle");
    }
    EnsembleState state{std::vector<double>(n_particles, model.initial_value), 0, grid};
    return state;
}

}  // namespace

std::vector<EnsembleState> simulate_path(const McKeanVlasovModel& model,
                                         const SchemeSpec& spec, const TimeGrid& grid,
                                         std::size_t n_particles, std::uint64_t seed,
                                         const SimulationOptions& opts) {
    validate_scheme(spec);
    const LevyAreaConfig levy = resolve_levy(opts, grid.steps);
    std::vector<EnsembleState> trajectory;
    trajectory.reserve(grid.steps + 1);
    trajectory.push_back(initial_state(model, grid, n_particles));
    for (std::uint64_t n = 0; n < grid.steps; ++n) {
        const NoiseBlock block =
            sample_noise_block(seed, n, n_particles, grid.delta, spec.include_lions_term,
                               levy, opts.first_particle, opts.workers);
        trajectory.push_back(step_ensemble(trajectory.back(), model, spec, block, opts.workers));
    }
    return trajectory;
}

EnsembleState simulate_terminal(const McKeanVlasovModel& model, const SchemeSpec& spec,
                                const TimeGrid& grid, std::size_t n_particles,
                                std::uint64_t seed, const SimulationOptions& opts) {
    validate_scheme(spec);
    const LevyAreaConfig levy = resolve_levy(opts, grid.steps);
    EnsembleState state = initial_state(model, grid, n_particles);
    for (std::uint64_t n = 0; n < grid.steps; ++n) {
        const NoiseBlock block =
            sample_noise_block(seed, n, n_particles, grid.delta, spec.include_lions_term,
                               levy, opts.first_particle, opts.workers);
        state = step_ensemble(state, model, spec, block, opts.workers);
    }
    return state;
}

std::pair<EnsembleState, EnsembleState> simulate_coupled_pair(
    const McKeanVlasovModel& model, const SchemeSpec& spec, const TimeGrid& grid_fine,
    std::size_t n_particles, std::uint64_t seed, const SimulationOptions& opts) {
    validate_scheme(spec);
    if (grid_fine.steps % 2 != 0) {
        throw std::invalid_argument("simulate_coupled_pair requires an even fine step count");
    }
    const LevyAreaConfig levy = resolve_levy(opts, grid_fine.steps);
    const TimeGrid grid_coarse(grid_fine.horizon, grid_fine.steps / 2);

    EnsembleState fine = initial_state(model, grid_fine, n_particles);
    EnsembleState coarse = initial_state(model, grid_coarse, n_particles);
    for (std::uint64_t c = 0; c < grid_coarse.steps; ++c) {
        const NoiseBlock first =
            sample_noise_block(seed, 2 * c, n_particles, grid_fine.delta,
                               spec.include_lions_term, levy, opts.first_particle, opts.workers);
        const NoiseBlock second =
            sample_noise_block(seed, 2 * c + 1, n_particles, grid_fine.delta,
                               spec.include_lions_term, levy, opts.first_particle, opts.workers);
        fine = step_ensemble(fine, model, spec, first, opts.workers);
        fine = step_ensemble(fine, model, spec, second, opts.workers);
        coarse = step_ensemble(coarse, model, spec, coarsen_iterated(first, second),
                               opts.workers);
    }
    return {std::move(fine), std::move(coarse)};
}

}  // namespace mvsde
