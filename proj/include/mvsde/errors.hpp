#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvsde {

// Raised when a particle position leaves the finite range during stepping.
class SimulationDiverged : public std::runtime_error {
public:
    SimulationDiverged(std::size_t step, std::size_t particle)
        : std::runtime_error("simulation diverged at step " + std::to_string(step) +
                             ", particle " + std::to_string(particle)),
          step_(step),
          particle_(particle) {}

    std::size_t step() const noexcept { return step_; }
    std::size_t particle() const noexcept { return particle_; }

private:
    std::size_t step_;
    std::size_t particle_;
};

}  // namespace mvsde
