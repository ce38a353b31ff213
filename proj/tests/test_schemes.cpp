#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mvsde/schemes.hpp"

using namespace mvsde;

namespace {

McKeanVlasovModel constant_model(double drift, double diffusion, double gradient) {
    McKeanVlasovModel model;
    model.name = "constant";
    model.drift = [drift](double, const EmpiricalMeasureView&) { return drift; };
    model.diffusion = [diffusion](double, const EmpiricalMeasureView&) { return diffusion; };
    model.diffusion_state_gradient = [gradient](double, const EmpiricalMeasureView&) {
        return gradient;
    };
    model.diffusion_lions_derivative = [](double, const EmpiricalMeasureView&, double) {
        return 0.0;
    };
    return model;
}

// classical scalar SDE coefficients, no measure dependence
McKeanVlasovModel cubic_state_model() {
    McKeanVlasovModel model;
    model.name = "cubic";
    model.drift = [](double x, const EmpiricalMeasureView&) { return x - x * x * x; };
    model.diffusion = [](double x, const EmpiricalMeasureView&) { return 0.5 * x; };
    model.diffusion_state_gradient = [](double, const EmpiricalMeasureView&) { return 0.5; };
    model.diffusion_lions_derivative = [](double, const EmpiricalMeasureView&, double) {
        return 0.0;
    };
    return model;
}

NoiseBlock manual_block(double delta, std::vector<double> increments, bool with_cross,
                        std::vector<double> areas = {}) {
    NoiseBlock block;
    block.delta = delta;
    block.increments = std::move(increments);
    const std::size_t n = block.increments.size();
    block.diagonal.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        block.diagonal[i] = diagonal_iterated(block.increments[i], delta);
    }
    if (with_cross) {
        std::vector<double> cross(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            cross[i * n + i] = block.diagonal[i];
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) {
                    const double area = areas.empty() ? 0.0 : areas[j * n + i];
                    cross[j * n + i] =
                        0.5 * block.increments[j] * block.increments[i] + area;
                }
            }
        }
        block.cross = std::move(cross);
    }
    return block;
}

EnsembleState make_state(std::vector<double> positions, const TimeGrid& grid) {
    return EnsembleState{std::move(positions), 0, grid};
}

}  // namespace

TEST_SUITE("schemes") {

TEST_CASE("time grid validation and node layout") {
    CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(-1.0, 4), std::invalid_argument);
    const TimeGrid grid(1.0, 640);
    CHECK(grid.node(0) == 0.0);
    const double end = grid.node(grid.steps);
    CHECK(std::abs(end - grid.horizon) <=
          std::nextafter(grid.horizon, 2.0) - grid.horizon);
    CHECK(grid.delta * static_cast<double>(grid.steps) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("scheme spec validation") {
    CHECK_THROWS_AS(validate_scheme(SchemeSpec{SchemeKind::TamedEuler,
                                               TamingVariant::Scheme1, true, false}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate_scheme(SchemeSpec{SchemeKind::TamedEuler,
                                               TamingVariant::Scheme1, false, true}),
                    std::invalid_argument);
    CHECK_NOTHROW(validate_scheme(tamed_euler_spec()));
    CHECK_NOTHROW(validate_scheme(milstein_spec(TamingVariant::None, true, true)));
}

TEST_CASE("zero noise keeps only the diagonal correction") {
    const TimeGrid grid(1.0, 2);  // delta = 0.5
    const McKeanVlasovModel model = constant_model(0.0, 1.0, 1.0);
    const auto state = make_state({0.7, -0.2, 1.4}, grid);
    const auto block = manual_block(grid.delta, {0.0, 0.0, 0.0}, false);
    const auto next =
        step_ensemble(state, model, milstein_spec(TamingVariant::Scheme1, true, false), block);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(next.positions[i] == state.positions[i] + 1.0 * 1.0 * (-grid.delta / 2.0));
    }
    CHECK(next.step_index == 1);
}

TEST_CASE("hand-evaluated ex1 step") {
    BuiltinModelParams params;  // sigma = 1.5, c = 0.5
    const McKeanVlasovModel ex1 = make_builtin(BuiltinModel::Ex1, params);
    const TimeGrid grid(1.0, 2);  // delta = 0.5
    const auto state = make_state({1.0, 1.0}, grid);

    // drift = sigma^2/2 - 1 + c = 0.625, tamed by 1 + 0.3125
    const double expected = 1.0 + 0.625 / (1.0 + 0.5 * 0.625) * 0.5;
    SUBCASE("without the measure-derivative term") {
        const auto block = manual_block(grid.delta, {0.0, 0.0}, false);
        const auto next = step_ensemble(
            state, ex1, milstein_spec(TamingVariant::Scheme1, true, false), block);
        CHECK(next.positions[0] == doctest::Approx(1.2380952380952381).epsilon(1e-15));
        CHECK(next.positions[0] == expected);
        CHECK(next.positions[1] == expected);
    }
    SUBCASE("with the measure-derivative term and zero cross areas") {
        const auto block = manual_block(grid.delta, {0.0, 0.0}, true);
        const auto next = step_ensemble(
            state, ex1, milstein_spec(TamingVariant::Scheme1, true, true), block);
        // the j = i summand contributes (1/N) * 1 * mean * (-delta/2) = -0.125
        CHECK(next.positions[0] == doctest::Approx(expected - 0.125).epsilon(1e-14));
        CHECK(next.positions[1] == next.positions[0]);
    }
}

TEST_CASE("single-particle ex3 step matches the displayed scheme") {
    const McKeanVlasovModel ex3 = make_builtin(BuiltinModel::Ex3);
    const TimeGrid grid(1.0, 4);  // delta = 0.25
    const double y = 1.3;
    const double dw = 0.4;
    const auto state = make_state({y}, grid);
    const auto block = manual_block(grid.delta, {dw}, true);
    const auto next = step_ensemble(
        state, ex3, milstein_spec(TamingVariant::Scheme1, true, true), block);

    // with N = 1 every measure integral collapses onto the particle itself
    const double a = 0.5 * 1.5 * 1.5;
    const double b = a * y - y * y * y + std::sin(y - y);
    const double sigma = y + std::sin(y - y);
    const double dd = (dw * dw - grid.delta) / 2.0;
    const double reference = y + b / (1.0 + grid.delta * std::abs(b)) * grid.delta +
                             sigma * dw + (1.0 + std::cos(y - y)) * sigma * dd -
                             std::cos(y - y) * sigma * dd;
    CHECK(next.positions[0] == doctest::Approx(reference).epsilon(1e-14));
}

TEST_CASE("stepper matches a straight-line classical Milstein loop") {
    const McKeanVlasovModel model = cubic_state_model();
    const TimeGrid grid(0.75, 3);  // delta = 0.25
    const std::size_t n = 3;
    const std::uint64_t seed = 505;

    for (const TamingVariant variant : {TamingVariant::Scheme1, TamingVariant::None}) {
        SimulationOptions opts;
        const auto trajectory = simulate_path(
            model, milstein_spec(variant, true, false), grid, n, seed, opts);
        REQUIRE(trajectory.size() == 4);

        for (std::size_t i = 0; i < n; ++i) {
            double x = 1.0;
            for (std::uint64_t step = 0; step < grid.steps; ++step) {
                const auto inc = sample_increments(seed, step, n, grid.delta);
                const double dw = inc[i];
                const double b = x - x * x * x;
                const double s = 0.5 * x;
                double next = x + tame_drift(b, grid.delta, variant) * grid.delta + s * dw;
                next += 0.5 * s * diagonal_iterated(dw, grid.delta);
                x = next;
            }
            CHECK(trajectory.back().positions[i] == x);  // exact agreement
        }
    }
}

TEST_CASE("permutation equivariance with exactly representable values") {
    BuiltinModelParams params;
    const McKeanVlasovModel ex1 = make_builtin(BuiltinModel::Ex1, params);
    const TimeGrid grid(1.0, 2);  // delta = 0.5
    const std::vector<double> positions{1.0, 2.0, 0.5, 0.25};
    const std::vector<double> increments{0.5, -0.25, 0.0, 1.0};
    const std::size_t n = positions.size();
    std::vector<double> areas(n * n, 0.0);
    const auto set_area = [&](std::size_t j, std::size_t i, double a) {
        areas[j * n + i] = a;
        areas[i * n + j] = -a;
    };
    set_area(0, 1, 0.125);
    set_area(0, 2, -0.0625);
    set_area(1, 3, 0.25);
    set_area(2, 3, 0.0625);

    const auto spec = milstein_spec(TamingVariant::Scheme1, true, true);
    const auto base = step_ensemble(make_state(positions, grid), ex1,
                                    spec, manual_block(grid.delta, increments, true, areas));

    const std::vector<std::size_t> perm{2, 0, 3, 1};
    std::vector<double> p_positions(n), p_increments(n), p_areas(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        p_positions[k] = positions[perm[k]];
        p_increments[k] = increments[perm[k]];
        for (std::size_t l = 0; l < n; ++l) {
            p_areas[k * n + l] = areas[perm[k] * n + perm[l]];
        }
    }
    const auto permuted =
        step_ensemble(make_state(p_positions, grid), ex1, spec,
                      manual_block(grid.delta, p_increments, true, p_areas));
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(permuted.positions[k] == base.positions[perm[k]]);
    }
}

TEST_CASE("permutation equivariance for ex3 up to rounding") {
    const McKeanVlasovModel ex3 = make_builtin(BuiltinModel::Ex3);
    const TimeGrid grid(1.0, 4);
    const std::vector<double> positions{0.9, -0.3, 1.7, 0.2};
    const std::vector<double> increments{0.21, -0.43, 0.05, 0.37};
    const std::size_t n = positions.size();
    const auto spec = milstein_spec(TamingVariant::Scheme1, true, false);
    const auto base = step_ensemble(make_state(positions, grid), ex3, spec,
                                    manual_block(grid.delta, increments, false));
    const std::vector<std::size_t> perm{3, 1, 0, 2};
    std::vector<double> p_positions(n), p_increments(n);
    for (std::size_t k = 0; k < n; ++k) {
        p_positions[k] = positions[perm[k]];
        p_increments[k] = increments[perm[k]];
    }
    const auto permuted = step_ensemble(make_state(p_positions, grid), ex3, spec,
                                        manual_block(grid.delta, p_increments, false));
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(permuted.positions[k] ==
              doctest::Approx(base.positions[perm[k]]).epsilon(1e-12));
    }
}

TEST_CASE("terminal ensembles are bit-identical across worker counts") {
    const McKeanVlasovModel ex3 = make_builtin(BuiltinModel::Ex3);
    const TimeGrid grid(1.0, 8);
    SimulationOptions one;
    one.workers = 1;
    SimulationOptions many;
    many.workers = 4;
    const auto spec = milstein_spec(TamingVariant::Scheme1, true, true);
    const auto a = simulate_terminal(ex3, spec, grid, 8, 321, one);
    const auto b = simulate_terminal(ex3, spec, grid, 8, 321, many);
    CHECK(a.positions == b.positions);
}

TEST_CASE("coupled pair with degenerate noise and drift") {
    McKeanVlasovModel still = constant_model(0.0, 0.0, 0.0);
    still.initial_value = 0.8;
    const TimeGrid grid(1.0, 8);
    const auto [fine, coarse] =
        simulate_coupled_pair(still, milstein_spec(TamingVariant::None, true, false),
                              grid, 5, 7);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(fine.positions[i] == 0.8);
        CHECK(coarse.positions[i] == 0.8);
    }
}

TEST_CASE("coupled pair reproduces the deterministic Euler error") {
    const double a = 0.7;
    McKeanVlasovModel linear = constant_model(0.0, 0.0, 0.0);
    linear.drift = [a](double x, const EmpiricalMeasureView&) { return a * x; };
    const TimeGrid grid(1.0, 16);
    const auto [fine, coarse] = simulate_coupled_pair(
        linear, milstein_spec(TamingVariant::None, true, false), grid, 1, 1);
    const double fine_expected = std::pow(1.0 + a * grid.delta, 16.0);
    const double coarse_expected = std::pow(1.0 + 2.0 * a * grid.delta, 8.0);
    CHECK(fine.positions[0] == doctest::Approx(fine_expected).epsilon(1e-12));
    CHECK(coarse.positions[0] == doctest::Approx(coarse_expected).epsilon(1e-12));
}

TEST_CASE("coupled pair requires an even fine grid") {
    const McKeanVlasovModel model = constant_model(0.0, 0.0, 0.0);
    CHECK_THROWS_AS(simulate_coupled_pair(model, tamed_euler_spec(), TimeGrid(1.0, 7), 2, 1),
                    std::invalid_argument);
}

TEST_CASE("divergence reports step and particle") {
    McKeanVlasovModel explosive = constant_model(0.0, 0.0, 0.0);
    explosive.drift = [](double x, const EmpiricalMeasureView&) { return x * x * x; };
    explosive.initial_value = 1e60;
    const TimeGrid grid(1.0, 2);
    try {
        simulate_terminal(explosive, milstein_spec(TamingVariant::None, true, false),
                          grid, 3, 9);
        FAIL("expected divergence");
    } catch (const SimulationDiverged& e) {
        CHECK(e.step() == 0);
        CHECK(e.particle() == 0);
    }
}

TEST_CASE("preconditions of step_ensemble") {
    const McKeanVlasovModel model = constant_model(0.0, 1.0, 0.0);
    const TimeGrid grid(1.0, 4);
    const auto state = make_state({1.0, 2.0}, grid);
    const auto wrong_delta = manual_block(0.5, {0.0, 0.0}, false);
    CHECK_THROWS_AS(step_ensemble(state, model, tamed_euler_spec(), wrong_delta),
                    std::invalid_argument);
    const auto wrong_size = manual_block(grid.delta, {0.0}, false);
    CHECK_THROWS_AS(step_ensemble(state, model, tamed_euler_spec(), wrong_size),
                    std::invalid_argument);
    const auto no_cross = manual_block(grid.delta, {0.0, 0.0}, false);
    CHECK_THROWS_AS(step_ensemble(state, model,
                                  milstein_spec(TamingVariant::Scheme1, true, true), no_cross),
                    std::invalid_argument);
    const auto with_cross = manual_block(grid.delta, {0.0, 0.0}, true);
    CHECK_THROWS_AS(step_ensemble(state, model,
                                  milstein_spec(TamingVariant::Scheme1, true, false),
                                  with_cross),
                    std::invalid_argument);
}

TEST_CASE("tamed ex2 ensemble keeps bounded fourth moments") {
    const McKeanVlasovModel ex2 = make_builtin(BuiltinModel::Ex2);
    const TimeGrid grid(1.0, 256);
    SimulationOptions opts;
    opts.workers = 2;
    const auto trajectory = simulate_path(
        ex2, milstein_spec(TamingVariant::Scheme1, true, false), grid, 300, 2024, opts);
    double worst = 0.0;
    for (const auto& state : trajectory) {
        double m4 = 0.0;
        for (const double y : state.positions) m4 += y * y * y * y;
        m4 /= static_cast<double>(state.positions.size());
        worst = std::max(worst, m4);
    }
    CHECK(worst < 1000.0);
    CHECK(std::isfinite(worst));
}

TEST_CASE("constant trajectory for the motionless model") {
    McKeanVlasovModel still = constant_model(0.0, 0.0, 0.0);
    still.initial_value = 1.0;
    const auto trajectory =
        simulate_path(still, tamed_euler_spec(), TimeGrid(1.0, 16), 4, 3);
    for (const auto& state : trajectory) {
        for (const double y : state.positions) CHECK(y == 1.0);
    }
}

}  // TEST_SUITE
