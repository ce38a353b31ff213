#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mvsde/model.hpp"

using namespace mvsde;

namespace {

std::vector<double> random_states(std::mt19937_64& rng, std::size_t n, double lo = -2.0,
                                  double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> out(n);
    for (auto& x : out) x = u(rng);
    return out;
}

// Centered finite difference of the lifted diffusion in atom j; the measure
// derivative of an empirical functional satisfies
// d/dx_j sigma(x, mu^N) = (1/N) D sigma(x, mu^N)(x_j).
double lions_fd(const McKeanVlasovModel& model, double x, std::vector<double> atoms,
                std::size_t j, double h = 1e-5) {
    const double original = atoms[j];
    atoms[j] = original + h;
    const double up = model.diffusion(x, EmpiricalMeasureView(atoms));
    atoms[j] = original - h;
    const double down = model.diffusion(x, EmpiricalMeasureView(atoms));
    return static_cast<double>(atoms.size()) * (up - down) / (2.0 * h);
}

double gradient_fd(const McKeanVlasovModel& model, double x,
                   const std::vector<double>& atoms, double h = 1e-5) {
    const EmpiricalMeasureView mu(atoms);
    return (model.diffusion(x + h, mu) - model.diffusion(x - h, mu)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("tame_drift hand values") {
    CHECK(tame_drift(0.0, 0.37, TamingVariant::Scheme1) == 0.0);
    CHECK(tame_drift(4.0, 0.25, TamingVariant::Scheme1) == 2.0);
    CHECK(tame_drift(4.0, 0.25, TamingVariant::Scheme2) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(tame_drift(-4.0, 0.25, TamingVariant::Scheme1) == -2.0);
    CHECK(tame_drift(123.456, 0.5, TamingVariant::None) == 123.456);
}

TEST_CASE("tame_drift rejects bad input") {
    CHECK_THROWS_AS(tame_drift(std::nan(""), 0.1, TamingVariant::Scheme1),
                    std::invalid_argument);
    CHECK_THROWS_AS(tame_drift(1.0, std::numeric_limits<double>::infinity(),
                               TamingVariant::Scheme1),
                    std::invalid_argument);
    CHECK_THROWS_AS(tame_drift(1.0, 0.0, TamingVariant::Scheme1), std::invalid_argument);
    CHECK_THROWS_AS(tame_drift(1.0, -0.5, TamingVariant::Scheme2), std::invalid_argument);
}

TEST_CASE("taming magnitude bounds on randomized inputs") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> bu(-1e6, 1e6);
    std::uniform_real_distribution<double> du(1e-6, 2.0);
    long violations = 0;
    for (int trial = 0; trial < 1000000; ++trial) {
        const double b = bu(rng);
        const double delta = du(rng);
        const double t1 = tame_drift(b, delta, TamingVariant::Scheme1);
        const double t2 = tame_drift(b, delta, TamingVariant::Scheme2);
        if (std::abs(t1) > std::abs(b)) ++violations;
        if (std::abs(t2) > std::abs(b)) ++violations;
        if (std::abs(t1) > 1.0 / delta) ++violations;             // <= min(|b|, M/T)
        if (std::abs(t2) > 1.0 / std::sqrt(delta)) ++violations;  // <= min(|b|, sqrt(M/T))
        if (t1 != 0.0 && std::signbit(t1) != std::signbit(b)) ++violations;
        if (t2 != 0.0 && std::signbit(t2) != std::signbit(b)) ++violations;
        // vanishing-step consistency for Scheme 1
        if (std::abs(t1 - b) > delta * b * b * (1.0 + 1e-14)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("builtin hand values") {
    const McKeanVlasovModel ex1 = make_builtin(BuiltinModel::Ex1);
    const std::vector<double> ones{1.0, 1.0, 1.0};
    const EmpiricalMeasureView dirac(ones);
    CHECK(ex1.drift(1.0, dirac) == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(ex1.diffusion(0.3, dirac) == 1.0);
    CHECK(ex1.diffusion_state_gradient(0.3, dirac) == 0.0);
    CHECK(ex1.diffusion_lions_derivative(0.3, dirac, -2.0) == 1.0);

    const McKeanVlasovModel ex2 = make_builtin(BuiltinModel::Ex2);
    CHECK(ex2.diffusion(0.7, dirac) == 0.7);
    CHECK(ex2.diffusion_state_gradient(0.7, dirac) == 1.0);
    CHECK(ex2.diffusion_lions_derivative(0.7, dirac, 0.1) == 0.0);

    const McKeanVlasovModel ex3 = make_builtin(BuiltinModel::Ex3);
    CHECK(ex3.diffusion_lions_derivative(0.4, dirac, 0.4) == -1.0);

    const McKeanVlasovModel ex5 = make_builtin(BuiltinModel::Ex5);
    CHECK(ex5.diffusion(1.7, dirac) == 1.0);  // variance of a constant is zero
}

TEST_CASE("builtin parameter validation") {
    BuiltinModelParams params;
    params.sigma_param = 0.0;
    CHECK_THROWS_AS(make_builtin(BuiltinModel::Ex1, params), std::invalid_argument);
    CHECK_THROWS_AS(builtin_from_name("ex6"), std::invalid_argument);
}

TEST_CASE("ex3 cached trigonometric coupling matches direct sums") {
    std::mt19937_64 rng(22);
    const McKeanVlasovModel ex3 = make_builtin(BuiltinModel::Ex3);
    const auto atoms = random_states(rng, 41);
    const EmpiricalMeasureView mu(atoms);
    for (const double x : {0.0, 0.5, -1.3, 2.2}) {
        const double direct_sin =
            mu.integrate([x](double y) { return std::sin(x - y); });
        const double direct_cos =
            mu.integrate([x](double y) { return std::cos(x - y); });
        const double a = 0.5 * 1.5 * 1.5;
        const double drift_direct = a * x - x * x * x + direct_sin;
        CHECK(ex3.drift(x, mu) == doctest::Approx(drift_direct).epsilon(1e-12));
        CHECK(ex3.diffusion(x, mu) == doctest::Approx(x + direct_sin).epsilon(1e-12));
        CHECK(ex3.diffusion_state_gradient(x, mu) ==
              doctest::Approx(1.0 + direct_cos).epsilon(1e-12));
    }
}

TEST_CASE("ex4 factored diffusion matches the direct double integral") {
    std::mt19937_64 rng(23);
    const McKeanVlasovModel ex4 = make_builtin(BuiltinModel::Ex4);
    const auto atoms = random_states(rng, 33);
    const EmpiricalMeasureView mu(atoms);
    const double direct = mu.double_integrate(
        [](double u, double v) { return std::sin(u + v); });
    CHECK(ex4.diffusion(0.0, mu) == doctest::Approx(direct).epsilon(1e-12));
    const double y = 0.8;
    const double dl_direct =
        2.0 * mu.integrate([y](double u) { return std::cos(u + y); });
    CHECK(ex4.diffusion_lions_derivative(0.0, mu, y) ==
          doctest::Approx(dl_direct).epsilon(1e-12));
}

TEST_CASE("measure derivatives match finite differences of the lifted diffusion") {
    std::mt19937_64 rng(24);
    for (const BuiltinModel which : {BuiltinModel::Ex1, BuiltinModel::Ex2, BuiltinModel::Ex3,
                                     BuiltinModel::Ex4, BuiltinModel::Ex5}) {
        const McKeanVlasovModel model = make_builtin(which);
        const auto atoms = random_states(rng, 8);
        const EmpiricalMeasureView mu(atoms);
        const double x = 0.6;
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            const double fd = lions_fd(model, x, atoms, j);
            const double closed = model.diffusion_lions_derivative(x, mu, atoms[j]);
            CHECK(closed == doctest::Approx(fd).epsilon(1e-5));
        }
        const double grad_fd = gradient_fd(model, x, atoms);
        CHECK(model.diffusion_state_gradient(x, mu) ==
              doctest::Approx(grad_fd).epsilon(1e-5));
    }
}

TEST_CASE("coefficients are invariant under sample permutation") {
    std::mt19937_64 rng(25);
    for (const BuiltinModel which : {BuiltinModel::Ex1, BuiltinModel::Ex2, BuiltinModel::Ex3,
                                     BuiltinModel::Ex4, BuiltinModel::Ex5}) {
        const McKeanVlasovModel model = make_builtin(which);
        auto atoms = random_states(rng, 19);
        const double x = -0.4;
        const EmpiricalMeasureView mu(atoms);
        const double b = model.drift(x, mu);
        const double s = model.diffusion(x, mu);
        const double dl = model.diffusion_lions_derivative(x, mu, atoms[3]);
        const double probe = atoms[3];
        auto shuffled = atoms;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const EmpiricalMeasureView nu(shuffled);
        CHECK(model.drift(x, nu) == doctest::Approx(b).epsilon(1e-12));
        CHECK(model.diffusion(x, nu) == doctest::Approx(s).epsilon(1e-12));
        CHECK(model.diffusion_lions_derivative(x, nu, probe) ==
              doctest::Approx(dl).epsilon(1e-12));
    }
}

TEST_CASE("ex1, ex4 and ex5 diffusions do not depend on the state") {
    std::mt19937_64 rng(26);
    for (const BuiltinModel which :
         {BuiltinModel::Ex1, BuiltinModel::Ex4, BuiltinModel::Ex5}) {
        const McKeanVlasovModel model = make_builtin(which);
        const auto atoms = random_states(rng, 11);
        const EmpiricalMeasureView mu(atoms);
        CHECK(model.diffusion(-1.9, mu) == model.diffusion(2.4, mu));
    }
}

TEST_CASE("coefficient evaluation does not mutate the view") {
    std::mt19937_64 rng(27);
    const auto atoms = random_states(rng, 9);
    const McKeanVlasovModel model = make_builtin(BuiltinModel::Ex3);
    const EmpiricalMeasureView mu(atoms);
    const MeasureStats before = mu.stats();
    (void)model.drift(0.2, mu);
    (void)model.diffusion(0.2, mu);
    (void)model.diffusion_lions_derivative(0.2, mu, atoms[0]);
    CHECK(mu.stats().mean == before.mean);
    CHECK(mu.stats().sum_sin == before.sum_sin);
    // identical inputs give bit-identical outputs
    CHECK(model.drift(0.2, mu) == model.drift(0.2, mu));
}

TEST_CASE("probe_assumptions hand values") {
    const McKeanVlasovModel ex1 = make_builtin(BuiltinModel::Ex1);
    const std::vector<double> atoms{0.5, 1.5};
    std::vector<EmpiricalMeasureView> measures;
    measures.emplace_back(atoms);
    const std::vector<double> states{0.0, 1.0};
    const auto report = probe_assumptions(ex1, states, measures, 2.5);
    REQUIRE(report.pairs.size() == 1);
    // b(0) - b(1) = -(sigma^2/2 - 1) with the cubic term, so the ratio is 0.125
    CHECK(report.pairs[0].one_sided_ratio == doctest::Approx(0.125).epsilon(1e-13));
    CHECK_FALSE(report.violations);

    const McKeanVlasovModel ex2 = make_builtin(BuiltinModel::Ex2);
    std::mt19937_64 rng(28);
    const auto states2 = random_states(rng, 6);
    const auto report2 = probe_assumptions(ex2, states2, measures, 2.5);
    for (const auto& row : report2.pairs) {
        CHECK(row.diffusion_ratio == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("probe_assumptions skips degenerate pairs and validates input") {
    const McKeanVlasovModel ex1 = make_builtin(BuiltinModel::Ex1);
    const std::vector<double> atoms{1.0, 2.0};
    std::vector<EmpiricalMeasureView> measures;
    measures.emplace_back(atoms);
    const std::vector<double> same{0.7, 0.7};
    CHECK(probe_assumptions(ex1, same, measures, 2.5).pairs.empty());
    const std::vector<double> single{0.7};
    CHECK_THROWS_AS(probe_assumptions(ex1, single, measures, 2.5), std::invalid_argument);
    CHECK_THROWS_AS(probe_assumptions(ex1, same, {}, 2.5), std::invalid_argument);
}

TEST_CASE("built-ins satisfy the probed bounds on a moderate range") {
    std::mt19937_64 rng(29);
    const auto states = random_states(rng, 12);
    std::vector<double> atoms = random_states(rng, 15);
    std::vector<EmpiricalMeasureView> measures;
    measures.emplace_back(atoms);
    for (const BuiltinModel which : {BuiltinModel::Ex1, BuiltinModel::Ex2, BuiltinModel::Ex3,
                                     BuiltinModel::Ex4, BuiltinModel::Ex5}) {
        const auto report = probe_assumptions(make_builtin(which), states, measures, 2.5);
        CHECK_FALSE(report.violations);
    }
}

}  // TEST_SUITE
