#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mvsde/errors.hpp"
#include "mvsde/model.hpp"
#include "mvsde/noise.hpp"

namespace mvsde {

struct TimeGrid {
    double horizon = 1.0;
    std::uint64_t steps = 1;
    double delta = 1.0;

    TimeGrid(double horizon, std::uint64_t steps);
    double node(std::uint64_t n) const { return static_cast<double>(n) * delta; }
};

enum class SchemeKind { TamedEuler, Milstein };

SchemeKind scheme_kind_from_name(const std::string& name);  // tamed-euler | milstein
std::string scheme_kind_name(SchemeKind kind);

// A tamed Euler step is the Milstein step with both correction terms off;
// the standard (untamed) Milstein scheme is Milstein with taming None.
struct SchemeSpec {
    SchemeKind kind = SchemeKind::Milstein;
    TamingVariant taming = TamingVariant::Scheme1;
    bool include_state_gradient_term = true;
    bool include_lions_term = false;
};

// Throws if a TamedEuler spec carries Milstein correction flags.
void validate_scheme(const SchemeSpec& spec);

SchemeSpec tamed_euler_spec(TamingVariant taming = TamingVariant::Scheme1);
SchemeSpec milstein_spec(TamingVariant taming = TamingVariant::Scheme1,
                         bool gradient = true, bool lions = false);

struct EnsembleState {
    std::vector<double> positions;
    std::uint64_t step_index = 0;
    TimeGrid grid;
};

// Any position beyond this magnitude (or non-finite) aborts the simulation,
// separating taming failures from quiet NaN propagation.
inline constexpr double kDivergenceLimit = 1e150;

// One step of the interacting-particle scheme. All particles read the frozen
// input measure; per-particle updates are data-parallel and bit-reproducible
// for any worker count. Requires noise.delta == state.grid.delta and cross
// iterated integrals exactly when the Lions term is enabled.
EnsembleState step_ensemble(const EnsembleState& state, const McKeanVlasovModel& model,
                            const SchemeSpec& spec, const NoiseBlock& noise, int workers = 1);

struct SimulationOptions {
    std::optional<std::size_t> levy_terms;  // default ceil(sqrt(M))
    int workers = 1;
    std::size_t first_particle = 0;  // offset of the Brownian streams
};

// Full trajectory (M+1 states) from the deterministic initial value.
std::vector<EnsembleState> simulate_path(const McKeanVlasovModel& model,
                                         const SchemeSpec& spec, const TimeGrid& grid,
                                         std::size_t n_particles, std::uint64_t seed,
                                         const SimulationOptions& opts = {});

EnsembleState simulate_terminal(const McKeanVlasovModel& model, const SchemeSpec& spec,
                                const TimeGrid& grid, std::size_t n_particles,
                                std::uint64_t seed, const SimulationOptions& opts = {});

// Fine path on grid_fine plus the coarse path on M/2 steps whose noise is
// derived from the fine blocks by exact aggregation, so each particle is
// driven by the same Brownian stream on both levels.
std::pair<EnsembleState, EnsembleState> simulate_coupled_pair(
    const McKeanVlasovModel& model, const SchemeSpec& spec, const TimeGrid& grid_fine,
    std::size_t n_particles, std::uint64_t seed, const SimulationOptions& opts = {});

}  // namespace mvsde
