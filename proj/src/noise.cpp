#include "mvsde/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mvsde/parallel.hpp"

namespace mvsde {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t key_hash(const StreamKey& key, std::uint64_t lane) {
    std::uint64_t h = mix64(key.seed);
    h = mix64(h ^ key.particle);
    h = mix64(h ^ key.step);
    h = mix64(h ^ key.channel);
    h = mix64(h ^ lane);
    return h;
}

double normal_draw(const StreamKey& key) {
    const std::uint64_t h0 = key_hash(key, 0);
    const std::uint64_t h1 = key_hash(key, 1);
    // u1 in (0,1] keeps the log finite, u2 in [0,1)
    const double u1 = static_cast<double>((h0 >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(h1 >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t level, std::uint64_t repetition) {
    return base ^ mix64((level << 32) ^ repetition);
}

std::size_t default_levy_terms(std::uint64_t steps) {
    const auto k = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(steps))));
    return k < 1 ? 1 : k;
}

std::vector<double> sample_increments(std::uint64_t seed, std::uint64_t step_index,
                                      std::size_t n_particles, double delta,
                                      std::size_t first_particle) {
    if (n_particles == 0) {
        throw std::invalid_argument("sample_increments requires at least one particle");
    }
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw std::invalid_argument("sample_increments requires delta > 0");
    }
    const double scale = std::sqrt(delta);
    std::vector<double> out(n_particles);
    for (std::size_t i = 0; i < n_particles; ++i) {
        out[i] = scale * normal_draw({seed, first_particle + i, step_index, kIncrementChannel});
    }
    return out;
}

double diagonal_iterated(double increment, double delta) {
    return (increment * increment - delta) / 2.0;
}

std::vector<double> sample_levy_areas(std::uint64_t seed, std::uint64_t step_index,
                                      std::span<const double> increments, double delta,
                                      const LevyAreaConfig& config,
                                      std::size_t first_particle, int workers) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw std::invalid_argument("sample_levy_areas requires delta > 0");
    }
    if (config.truncation_terms < 1) {
        throw std::invalid_argument("LevyAreaConfig requires at least one term");
    }
    const std::size_t n = increments.size();
    const std::size_t terms = config.truncation_terms;
    if (n == 0) {
        throw std::invalid_argument("sample_levy_areas requires at least one particle");
    }

    // Bridge mode coefficients per particle: zeta_k drives the cosine modes,
    // v_k = eta_k - sqrt(2) dW/sqrt(delta) combines the sine modes with the
    // endpoint coupling of the expansion.
    const double sqrt_delta = std::sqrt(delta);
    const double sqrt2 = std::numbers::sqrt2;
    std::vector<double> zeta(n * terms);
    std::vector<double> v(n * terms);
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double xi = increments[i] / sqrt_delta;
            for (std::size_t k = 0; k < terms; ++k) {
                const StreamKey zk{seed, first_particle + i, step_index, bridge_zeta_channel(k)};
                const StreamKey ek{seed, first_particle + i, step_index, bridge_eta_channel(k)};
                zeta[i * terms + k] = normal_draw(zk);
                v[i * terms + k] = normal_draw(ek) - sqrt2 * xi;
            }
        }
    });

    std::vector<double> inv_mode(terms);
    for (std::size_t k = 0; k < terms; ++k) inv_mode[k] = 1.0 / static_cast<double>(k + 1);
    const double area_scale = delta / (2.0 * std::numbers::pi);

    std::vector<double> areas(n * n, 0.0);
    // each unordered pair owns exactly its two cells, so rows may be
    // processed concurrently
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double* zi = zeta.data() + i * terms;
            const double* vi = v.data() + i * terms;
            for (std::size_t j = 0; j < i; ++j) {
                const double* zj = zeta.data() + j * terms;
                const double* vj = v.data() + j * terms;
                double sum = 0.0;
                for (std::size_t k = 0; k < terms; ++k) {
                    sum += inv_mode[k] * (zj[k] * vi[k] - zi[k] * vj[k]);
                }
                const double area = area_scale * sum;
                areas[j * n + i] = area;
                areas[i * n + j] = -area;
            }
        }
    });
    return areas;
}

std::vector<double> sample_cross_iterated(std::uint64_t seed, std::uint64_t step_index,
                                          std::span<const double> increments, double delta,
                                          const LevyAreaConfig& config,
                                          std::size_t first_particle, int workers) {
    const std::size_t n = increments.size();
    std::vector<double> cross = sample_levy_areas(seed, step_index, increments, delta,
                                                  config, first_particle, workers);
    for (std::size_t i = 0; i < n; ++i) {
        cross[i * n + i] = diagonal_iterated(increments[i], delta);
        for (std::size_t j = 0; j < i; ++j) {
            const double half = 0.5 * increments[j] * increments[i];
            cross[j * n + i] = half + cross[j * n + i];
            cross[i * n + j] = half + cross[i * n + j];
        }
    }
    return cross;
}

NoiseBlock sample_noise_block(std::uint64_t seed, std::uint64_t step_index,
                              std::size_t n_particles, double delta, bool with_cross,
                              const LevyAreaConfig& config, std::size_t first_particle,
                              int workers) {
    NoiseBlock block;
    block.delta = delta;
    block.increments = sample_increments(seed, step_index, n_particles, delta, first_particle);
    block.diagonal.resize(n_particles);
    for (std::size_t i = 0; i < n_particles; ++i) {
        block.diagonal[i] = diagonal_iterated(block.increments[i], delta);
    }
    if (with_cross) {
        block.cross = sample_cross_iterated(seed, step_index, block.increments, delta, config,
                                            first_particle, workers);
    }
    return block;
}

double coarsen_increments(double fine_a, double fine_b) { return fine_a + fine_b; }

NoiseBlock coarsen_iterated(const NoiseBlock& first, const NoiseBlock& second) {
    const std::size_t n = first.size();
    if (n == 0 || n != second.size()) {
        throw std::invalid_argument("coarsen_iterated requires matching particle counts");
    }
    if (first.delta != second.delta) {
        throw std::invalid_argument("coarsen_iterated requires matching step sizes");
    }
    if (first.has_cross() != second.has_cross()) {
        throw std::invalid_argument("coarsen_iterated requires matching cross storage");
    }

    NoiseBlock coarse;
    coarse.delta = first.delta + second.delta;
    coarse.increments.resize(n);
    coarse.diagonal.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        coarse.increments[i] = coarsen_increments(first.increments[i], second.increments[i]);
        // closed form keeps the diagonal invariant exact; it agrees with the
        // chained form I_1 + I_2 + dW_1 dW_2 up to rounding
        coarse.diagonal[i] = diagonal_iterated(coarse.increments[i], coarse.delta);
    }
    if (first.has_cross()) {
        std::vector<double> cross(n * n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                if (i == j) {
                    cross[j * n + i] = coarse.diagonal[i];
                } else {
                    cross[j * n + i] = first.cross_at(j, i) + second.cross_at(j, i) +
                                       first.increments[j] * second.increments[i];
                }
            }
        }
        coarse.cross = std::move(cross);
    }
    return coarse;
}

}  // namespace mvsde
