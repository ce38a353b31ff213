#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mvsde {

// Address of one standard normal draw. Distinct keys give independent draws;
// the same key always reproduces the same draw, independent of call order,
// so sampling can be fanned out across workers without a shared generator.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t particle = 0;
    std::uint64_t step = 0;
    std::uint64_t channel = 0;
};

// Channel layout of a (seed, particle, step) stream.
inline constexpr std::uint64_t kIncrementChannel = 0;
inline std::uint64_t bridge_zeta_channel(std::size_t k) { return 1 + 2 * static_cast<std::uint64_t>(k); }
inline std::uint64_t bridge_eta_channel(std::size_t k) { return 2 + 2 * static_cast<std::uint64_t>(k); }

std::uint64_t mix64(std::uint64_t z);  // splitmix64 finaliser
std::uint64_t key_hash(const StreamKey& key, std::uint64_t lane);
double normal_draw(const StreamKey& key);  // standard normal via Box-Muller

// Seed for repetition r at ladder level l, derived from the base seed so that
// repetitions are addressable in any order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t level, std::uint64_t repetition);

struct LevyAreaConfig {
    std::size_t truncation_terms = 1;  // K >= 1 bridge modes per particle
};

// K = ceil(sqrt(M)), balancing the area truncation error against the
// order-1 time discretisation error at M steps.
std::size_t default_levy_terms(std::uint64_t steps);

// Brownian increments and iterated Ito integrals for one time-step of the
// whole ensemble.
//
//   increments[i]  = dW^i over the step
//   diagonal[i]    = (increments[i]^2 - delta) / 2, the exact same-particle
//                    double integral
//   cross[j*N + i] = I(j,i) = int_{t_n}^{t_{n+1}} (W^j_s - W^j_{t_n}) dW^i_s
//                    for j != i; diagonal cells mirror diagonal[i]
//
// Cross entries are built as I(j,i) = dW^j dW^i / 2 + A(j,i) with A an
// antisymmetric truncated-series Levy area, so I(i,j) + I(j,i) recovers
// dW^i dW^j up to a few ulp.
struct NoiseBlock {
    double delta = 0.0;
    std::vector<double> increments;
    std::vector<double> diagonal;
    std::optional<std::vector<double>> cross;

    std::size_t size() const noexcept { return increments.size(); }
    bool has_cross() const noexcept { return cross.has_value(); }
    double cross_at(std::size_t j, std::size_t i) const {
        return (*cross)[j * increments.size() + i];
    }
};

// N draws distributed Normal(0, delta) for particles
// [first_particle, first_particle + n).
std::vector<double> sample_increments(std::uint64_t seed, std::uint64_t step_index,
                                      std::size_t n_particles, double delta,
                                      std::size_t first_particle = 0);

double diagonal_iterated(double increment, double delta);

// The Levy-area matrix A(j,i) alone, antisymmetric by construction, from a
// truncated Fourier expansion of the Brownian bridges with
// config.truncation_terms modes per particle. Diagonal entries are zero.
std::vector<double> sample_levy_areas(std::uint64_t seed, std::uint64_t step_index,
                                      std::span<const double> increments, double delta,
                                      const LevyAreaConfig& config,
                                      std::size_t first_particle = 0, int workers = 1);

// I(j,i) = dW^j dW^i / 2 + A(j,i) for all ordered pairs; diagonal cells carry
// the exact closed form. Var I(j,i) -> delta^2/2 as the truncation level
// grows.
std::vector<double> sample_cross_iterated(std::uint64_t seed, std::uint64_t step_index,
                                          std::span<const double> increments, double delta,
                                          const LevyAreaConfig& config,
                                          std::size_t first_particle = 0, int workers = 1);

NoiseBlock sample_noise_block(std::uint64_t seed, std::uint64_t step_index,
                              std::size_t n_particles, double delta, bool with_cross,
                              const LevyAreaConfig& config, std::size_t first_particle = 0,
                              int workers = 1);

// Exact aggregation of two consecutive fine steps into one coarse step:
// increments add, and iterated integrals chain by the Ito identity
// I_c(j,i) = I_1(j,i) + I_2(j,i) + dW_1^j dW_2^i.
double coarsen_increments(double fine_a, double fine_b);
NoiseBlock coarsen_iterated(const NoiseBlock& first, const NoiseBlock& second);

}  // namespace mvsde
