#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mvsde/cli.hpp"
#include "mvsde/experiments.hpp"

namespace py = pybind11;

namespace {

using namespace mvsde;

McKeanVlasovModel model_by_name(const std::string& name, double sigma, double c, double x0) {
    BuiltinModelParams params;
    params.sigma_param = sigma;
    params.c = c;
    params.x0 = x0;
    return make_builtin(builtin_from_name(name), params);
}

SchemeSpec scheme_from_args(const std::string& scheme, const std::string& taming,
                            bool gradient, bool lions) {
    SchemeSpec spec{scheme_kind_from_name(scheme), taming_from_name(taming), gradient, lions};
    validate_scheme(spec);
    return spec;
}

py::dict result_to_dict(const ExperimentResult& result) {
    py::list levels, scales, rmse, reps, diverged;
    for (const auto& row : result.rows) {
        levels.append(row.level);
        scales.append(row.scale);
        rmse.append(row.rmse);
        reps.append(row.repetitions);
        diverged.append(row.diverged);
    }
    py::dict d;
    d["levels"] = levels;
    d["scale"] = scales;
    d["rmse"] = rmse;
    d["repetitions"] = reps;
    d["diverged"] = diverged;
    d["has_slope"] = result.has_slope;
    d["slope"] = result.slope;
    d["slope_stderr"] = result.slope_std_error;
    d["partial"] = result.partial;
    d["seed"] = result.base_seed;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tamed Milstein / tamed Euler schemes for interacting particle systems "
              "approximating McKean-Vlasov SDEs";

    m.def("tame_drift",
          [](double b, double delta, const std::string& taming) {
              return tame_drift(b, delta, taming_from_name(taming));
          },
          py::arg("b"), py::arg("delta"), py::arg("taming") = "s1");

    m.def("phi", &phi, py::arg("particles"), py::arg("dimension"),
          "Propagation-of-chaos rate in the particle count");

    m.def("wasserstein2_1d",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              return wasserstein2_1d(std::span<const double>(a),
                                     std::span<const double>(b));
          },
          py::arg("a"), py::arg("b"));

    m.def("simulate_terminal",
          [](const std::string& model, const std::string& scheme, const std::string& taming,
             bool gradient, bool lions, double horizon, std::uint64_t steps,
             std::size_t particles, std::uint64_t seed, double sigma, double c, double x0,
             std::optional<std::size_t> levy_terms, int workers) {
              const auto m_ = model_by_name(model, sigma, c, x0);
              const auto spec = scheme_from_args(scheme, taming, gradient, lions);
              SimulationOptions opts;
              opts.levy_terms = levy_terms;
              opts.workers = workers;
              const TimeGrid grid(horizon, steps);
              return simulate_terminal(m_, spec, grid, particles, seed, opts).positions;
          },
          py::arg("model"), py::arg("scheme") = "milstein", py::arg("taming") = "s1",
          py::arg("gradient") = true, py::arg("lions") = false, py::arg("horizon") = 1.0,
          py::arg("steps") = 256, py::arg("particles") = 1000, py::arg("seed") = 1,
          py::arg("sigma") = 1.5, py::arg("coupling_c") = 0.5, py::arg("x0") = 1.0,
          py::arg("levy_terms") = std::nullopt, py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());

    m.def("convergence_ladder",
          [](const std::string& model, const std::string& scheme, const std::string& taming,
             bool gradient, bool lions, const std::vector<int>& levels,
             std::size_t particles, int repetitions, std::uint64_t seed, double horizon,
             double sigma, double c, double x0, std::optional<std::size_t> levy_terms,
             int workers) {
              const auto m_ = model_by_name(model, sigma, c, x0);
              ConvergenceLadderConfig config;
              config.scheme = scheme_from_args(scheme, taming, gradient, lions);
              config.levels = levels;
              config.particles = particles;
              config.repetitions = repetitions;
              config.base_seed = seed;
              config.horizon = horizon;
              config.levy_terms = levy_terms;
              config.workers = workers;
              ExperimentResult result;
              {
                  py::gil_scoped_release release;
                  result = run_convergence_ladder(m_, config);
              }
              return result_to_dict(result);
          },
          py::arg("model"), py::arg("scheme") = "milstein", py::arg("taming") = "s1",
          py::arg("gradient") = true, py::arg("lions") = false,
          py::arg("levels") = std::vector<int>{4, 5, 6, 7, 8, 9, 10},
          py::arg("particles") = 1000, py::arg("repetitions") = 1, py::arg("seed") = 1,
          py::arg("horizon") = 1.0, py::arg("sigma") = 1.5, py::arg("coupling_c") = 0.5,
          py::arg("x0") = 1.0, py::arg("levy_terms") = std::nullopt, py::arg("workers") = 1);

    m.def("lderiv_decay",
          [](const std::string& model, const std::string& taming, std::uint64_t steps,
             const std::vector<int>& particle_levels, int repetitions, std::uint64_t seed,
             double horizon, double sigma, double c, double x0,
             std::optional<std::size_t> levy_terms, int workers) {
              const auto m_ = model_by_name(model, sigma, c, x0);
              ParticleDecayConfig config;
              config.steps = steps;
              config.particle_levels = particle_levels;
              config.repetitions = repetitions;
              config.base_seed = seed;
              config.horizon = horizon;
              config.levy_terms = levy_terms;
              config.workers = workers;
              const auto variant = taming_from_name(taming);
              ExperimentResult result;
              {
                  py::gil_scoped_release release;
                  result = run_lderiv_decay(m_, tamed_euler_spec(variant),
                                            milstein_spec(variant, true, true), config);
              }
              return result_to_dict(result);
          },
          py::arg("model"), py::arg("taming") = "s1", py::arg("steps") = 64,
          py::arg("particle_levels") = std::vector<int>{2, 3, 4, 5, 6},
          py::arg("repetitions") = 100, py::arg("seed") = 1, py::arg("horizon") = 1.0,
          py::arg("sigma") = 1.5, py::arg("coupling_c") = 0.5, py::arg("x0") = 1.0,
          py::arg("levy_terms") = std::nullopt, py::arg("workers") = 1);

    m.def("poc_split",
          [](const std::string& model, const std::string& scheme, const std::string& taming,
             bool gradient, bool lions, std::uint64_t steps,
             const std::vector<int>& particle_levels, int repetitions, std::uint64_t seed,
             double horizon, double sigma, double c, double x0,
             std::optional<std::size_t> levy_terms, int workers) {
              const auto m_ = model_by_name(model, sigma, c, x0);
              ParticleDecayConfig config;
              config.steps = steps;
              config.particle_levels = particle_levels;
              config.repetitions = repetitions;
              config.base_seed = seed;
              config.horizon = horizon;
              config.levy_terms = levy_terms;
              config.workers = workers;
              ExperimentResult result;
              {
                  py::gil_scoped_release release;
                  result = run_poc_split(m_, scheme_from_args(scheme, taming, gradient, lions),
                                         config);
              }
              return result_to_dict(result);
          },
          py::arg("model"), py::arg("scheme") = "tamed-euler", py::arg("taming") = "s1",
          py::arg("gradient") = false, py::arg("lions") = false, py::arg("steps") = 64,
          py::arg("particle_levels") = std::vector<int>{3, 4, 5, 6, 7},
          py::arg("repetitions") = 100, py::arg("seed") = 1, py::arg("horizon") = 1.0,
          py::arg("sigma") = 1.5, py::arg("coupling_c") = 0.5, py::arg("x0") = 1.0,
          py::arg("levy_terms") = std::nullopt, py::arg("workers") = 1);

    m.def("validate_mean_field_ou",
          [](double a, double c, double s, double x0, double horizon, std::uint64_t steps,
             std::size_t particles, std::uint64_t seed, int workers) {
              OuValidationReport report;
              {
                  py::gil_scoped_release release;
                  report = run_meanfield_ou_oracle(a, c, s, x0, horizon, steps, particles,
                                                   seed, workers);
              }
              py::dict d;
              d["mean"] = report.measured_mean;
              d["target"] = report.target;
              d["mc_stderr"] = report.mc_std_error;
              d["bias_allowance"] = report.bias_allowance;
              d["abs_error"] = report.abs_error;
              d["pass"] = report.pass;
              return d;
          },
          py::arg("a"), py::arg("c"), py::arg("s"), py::arg("x0") = 1.0,
          py::arg("horizon") = 1.0, py::arg("steps") = 256, py::arg("particles") = 10000,
          py::arg("seed") = 1, py::arg("workers") = 1);

#ifdef MVSDE_VERSION
    m.attr("__version__") = MVSDE_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
