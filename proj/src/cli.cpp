#include "mvsde/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "mvsde/parallel.hpp"

namespace mvsde::cli {

std::string subcommand_name(Subcommand subcommand) {
    switch (subcommand) {
        case Subcommand::Simulate: return "simulate";
        case Subcommand::Convergence: return "convergence";
        case Subcommand::LderivDecay: return "lderiv-decay";
        case Subcommand::Poc: return "poc";
        case Subcommand::Validate: return "validate";
    }
    return "?";
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

constexpr std::array<double, 3> kOuBattery[] = {
    {-1.0, 0.5, 0.3},
    {0.0, 0.0, 1.0},
    {1.0, -1.0, 0.5},
};

using RawValues = std::map<std::string, std::string>;

struct KeySpec {
    const char* key;
    const char* help;
};

const std::vector<KeySpec> kAllKeys = {
    {"model", "built-in model, ex1..ex5"},
    {"scheme", "tamed-euler|milstein"},
    {"taming", "none|s1|s2"},
    {"gradient", "on|off, Milstein state-gradient term"},
    {"lions", "on|off, Milstein cross-particle measure-derivative term"},
    {"steps", "number of time steps M"},
    {"levels", "time-grid exponents a..b (M_l = 2^l per unit horizon)"},
    {"particles", "particle count N"},
    {"particle-levels", "particle exponents a..b (N_l = 2^l)"},
    {"reps", "independent repetitions per level"},
    {"seed", "base seed"},
    {"horizon", "terminal time T"},
    {"sigma", "sigma constant of the built-in drift"},
    {"coupling-c", "mean-coupling weight of ex1/ex2"},
    {"x0", "deterministic initial value"},
    {"levy-terms", "bridge modes per particle (default ceil(sqrt(M)))"},
    {"out", "output path"},
    {"format", "csv|json"},
    {"workers", "worker threads (does not affect results)"},
    {"ou-a", "validate: state coefficient a"},
    {"ou-c", "validate: mean coefficient c"},
    {"ou-s", "validate: diffusion constant s"},
    {"config", "flat key=value config file; explicit flags win"},
};

const std::set<std::string> kCommonKeys = {"out", "format", "workers", "seed",
                                           "horizon", "config"};

std::set<std::string> keys_for(Subcommand sub) {
    std::set<std::string> keys = kCommonKeys;
    const auto add = [&](std::initializer_list<const char*> names) {
        for (const char* n : names) keys.insert(n);
    };
    switch (sub) {
        case Subcommand::Simulate:
            add({"model", "sigma", "coupling-c", "x0", "scheme", "taming", "gradient",
                 "lions", "steps", "particles", "levy-terms"});
            break;
        case Subcommand::Convergence:
            add({"model", "sigma", "coupling-c", "x0", "scheme", "taming", "gradient",
                 "lions", "levels", "particles", "reps", "levy-terms"});
            break;
        case Subcommand::LderivDecay:
            add({"model", "sigma", "coupling-c", "x0", "taming", "steps",
                 "particle-levels", "reps", "levy-terms"});
            break;
        case Subcommand::Poc:
            add({"model", "sigma", "coupling-c", "x0", "scheme", "taming", "gradient",
                 "lions", "steps", "particle-levels", "reps", "levy-terms"});
            break;
        case Subcommand::Validate:
            add({"ou-a", "ou-c", "ou-s", "steps", "particles", "x0"});
            break;
    }
    return keys;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// flat key = value lines, '#' starts a comment
std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config file line without '=': '" + line + "'");
        }
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

double parse_double_value(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw UsageError("invalid value '" + value + "' for --" + key);
    }
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw UsageError("invalid value '" + value + "' for --" + key);
    }
}

bool parse_on_off(const std::string& key, const std::string& value) {
    if (value == "on") return true;
    if (value == "off") return false;
    throw UsageError("invalid value '" + value + "' for --" + key + " (expected on|off)");
}

std::vector<int> parse_level_list(const std::string& key, const std::string& value) {
    std::vector<int> levels;
    const auto parse_int = [&](const std::string& s) {
        return static_cast<int>(parse_u64_value(key, s));
    };
    const auto dots = value.find("..");
    if (dots != std::string::npos) {
        const int a = parse_int(value.substr(0, dots));
        const int b = parse_int(value.substr(dots + 2));
        if (b < a) throw UsageError("empty range '" + value + "' for --" + key);
        for (int l = a; l <= b; ++l) levels.push_back(l);
        return levels;
    }
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) levels.push_back(parse_int(item));
    if (levels.empty()) throw UsageError("empty value for --" + key);
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (levels[i] <= levels[i - 1]) {
            throw UsageError("--" + key + " must be strictly increasing");
        }
    }
    return levels;
}

std::string level_list_string(const std::vector<int>& levels) {
    bool contiguous = true;
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (levels[i] != levels[i - 1] + 1) contiguous = false;
    }
    if (levels.size() > 1 && contiguous) {
        return std::to_string(levels.front()) + ".." + std::to_string(levels.back());
    }
    std::string s;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(levels[i]);
    }
    return s;
}

}  // namespace

ExperimentConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"interacting-particle simulations for McKean-Vlasov SDEs"};
    app.set_help_flag();  // usage text is handled by the caller
    app.require_subcommand(1);

    RawValues raw;
    std::map<Subcommand, CLI::App*> subs;
    for (const Subcommand sub :
         {Subcommand::Simulate, Subcommand::Convergence, Subcommand::LderivDecay,
          Subcommand::Poc, Subcommand::Validate}) {
        CLI::App* capp = app.add_subcommand(subcommand_name(sub));
        capp->set_help_flag();
        const auto keys = keys_for(sub);
        for (const auto& spec : kAllKeys) {
            if (keys.count(spec.key)) {
                capp->add_option("--" + std::string(spec.key), raw[spec.key], spec.help);
            }
        }
        subs[sub] = capp;
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    Subcommand subcommand = Subcommand::Simulate;
    CLI::App* chosen = nullptr;
    for (const auto& [sub, capp] : subs) {
        if (capp->parsed()) {
            subcommand = sub;
            chosen = capp;
        }
    }
    if (chosen == nullptr) throw UsageError("a subcommand is required");

    // effective raw values: explicit flags first, config file fills the rest
    const auto valid_keys = keys_for(subcommand);
    std::map<std::string, std::string> effective;
    for (const auto& key : valid_keys) {
        if (key != "config" && chosen->count("--" + key) > 0) effective[key] = raw[key];
    }
    if (chosen->count("--config") > 0) {
        for (const auto& [key, value] : read_flat_config(raw["config"])) {
            if (!valid_keys.count(key) || key == "config") {
                throw UsageError("unknown config file key '" + key + "' for subcommand " +
                                 subcommand_name(subcommand));
            }
            effective.emplace(key, value);  // does not overwrite explicit flags
        }
    }

    const auto given = [&](const char* key) { return effective.count(key) > 0; };
    const auto value_of = [&](const char* key) { return effective.at(key); };

    ExperimentConfig config;
    config.subcommand = subcommand;

    try {
        if (subcommand != Subcommand::Validate) {
            if (!given("model")) throw std::invalid_argument("--model is required");
            config.model = builtin_name(builtin_from_name(value_of("model")));
        }
        config.scheme_kind = given("scheme") ? scheme_kind_from_name(value_of("scheme"))
                                             : SchemeKind::Milstein;
        config.taming =
            given("taming") ? taming_from_name(value_of("taming")) : TamingVariant::Scheme1;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const bool euler = config.scheme_kind == SchemeKind::TamedEuler;
    config.gradient = given("gradient") ? parse_on_off("gradient", value_of("gradient"))
                                        : !euler;
    config.lions = given("lions") ? parse_on_off("lions", value_of("lions")) : false;
    if (euler && config.gradient) {
        throw UsageError("--gradient on conflicts with --scheme tamed-euler");
    }
    if (euler && config.lions) {
        throw UsageError("--lions on conflicts with --scheme tamed-euler");
    }

    config.horizon = given("horizon") ? parse_double_value("horizon", value_of("horizon")) : 1.0;
    if (!(config.horizon > 0.0)) throw UsageError("--horizon must be positive");

    std::uint64_t default_steps = subcommand == Subcommand::Simulate ? 256 : 64;
    if (subcommand == Subcommand::Validate) default_steps = 256;
    config.steps = given("steps") ? parse_u64_value("steps", value_of("steps")) : default_steps;
    if (config.steps == 0) throw UsageError("--steps must be positive");

    if (subcommand == Subcommand::Convergence) {
        config.levels = given("levels") ? parse_level_list("levels", value_of("levels"))
                                        : std::vector<int>{4, 5, 6, 7, 8, 9, 10};
        if (config.levels.front() < 1) {
            throw UsageError("--levels must start at 1 or above (the coarse mate of "
                             "level l lives at l-1)");
        }
    }
    if (subcommand == Subcommand::LderivDecay || subcommand == Subcommand::Poc) {
        const std::vector<int> fallback =
            subcommand == Subcommand::Poc ? std::vector<int>{3, 4, 5, 6, 7}
                                          : std::vector<int>{2, 3, 4, 5, 6};
        config.particle_levels = given("particle-levels")
                                     ? parse_level_list("particle-levels",
                                                        value_of("particle-levels"))
                                     : fallback;
        const int min_level = subcommand == Subcommand::Poc ? 1 : 0;
        if (config.particle_levels.front() < min_level) {
            throw UsageError("--particle-levels must start at " +
                             std::to_string(min_level) + " or above");
        }
    }

    if (given("particles")) {
        config.particles =
            static_cast<std::size_t>(parse_u64_value("particles", value_of("particles")));
    } else {
        config.particles = config.model == "ex3" ? 1000 : 10000;
    }
    if (config.particles == 0) throw UsageError("--particles must be positive");

    if (given("reps")) {
        config.repetitions = static_cast<int>(parse_u64_value("reps", value_of("reps")));
    } else if (config.particles <= 20) {
        config.repetitions = 1000;
    } else if (config.particles < 1000) {
        config.repetitions = 100;
    } else {
        config.repetitions = 1;
    }
    if (config.repetitions < 1) throw UsageError("--reps must be positive");

    config.seed = given("seed") ? parse_u64_value("seed", value_of("seed")) : 1;
    config.sigma_param = given("sigma") ? parse_double_value("sigma", value_of("sigma")) : 1.5;
    if (!(config.sigma_param > 0.0)) throw UsageError("--sigma must be positive");
    config.coupling_c =
        given("coupling-c") ? parse_double_value("coupling-c", value_of("coupling-c")) : 0.5;
    config.x0 = given("x0") ? parse_double_value("x0", value_of("x0")) : 1.0;

    if (given("levy-terms")) {
        const std::uint64_t k = parse_u64_value("levy-terms", value_of("levy-terms"));
        if (k == 0) throw UsageError("--levy-terms must be positive");
        config.levy_terms = static_cast<std::size_t>(k);
    }

    config.out = given("out") ? value_of("out") : "results.csv";
    if (given("format")) {
        const std::string f = value_of("format");
        if (f == "csv") {
            config.format = OutputFormat::Csv;
        } else if (f == "json") {
            config.format = OutputFormat::Json;
        } else {
            throw UsageError("invalid value '" + f + "' for --format (expected csv|json)");
        }
    }

    config.workers = given("workers")
                         ? static_cast<int>(parse_u64_value("workers", value_of("workers")))
                         : default_workers();
    if (config.workers < 1) throw UsageError("--workers must be positive");

    if (subcommand == Subcommand::Validate) {
        const int n_given = static_cast<int>(given("ou-a")) + static_cast<int>(given("ou-c")) +
                            static_cast<int>(given("ou-s"));
        if (n_given != 0 && n_given != 3) {
            throw UsageError("--ou-a, --ou-c and --ou-s must be given together");
        }
        if (n_given == 3) {
            config.ou_a = parse_double_value("ou-a", value_of("ou-a"));
            config.ou_c = parse_double_value("ou-c", value_of("ou-c"));
            config.ou_s = parse_double_value("ou-s", value_of("ou-s"));
        }
        if (config.steps % 2 != 0) {
            throw UsageError("--steps must be even for validate (two-grid bias fit)");
        }
    }
    return config;
}

std::string canonical_config(const ExperimentConfig& config) {
    std::ostringstream os;
    os << "subcommand=" << subcommand_name(config.subcommand);
    if (config.subcommand != Subcommand::Validate) {
        os << " model=" << config.model;
        if (config.subcommand != Subcommand::LderivDecay) {
            os << " scheme=" << scheme_kind_name(config.scheme_kind);
        }
        os << " taming=" << taming_name(config.taming);
        if (config.subcommand != Subcommand::LderivDecay) {
            os << " gradient=" << (config.gradient ? "on" : "off")
               << " lions=" << (config.lions ? "on" : "off");
        }
    }
    os << " horizon=" << format_double(config.horizon);
    switch (config.subcommand) {
        case Subcommand::Simulate:
            os << " steps=" << config.steps << " particles=" << config.particles;
            break;
        case Subcommand::Convergence:
            os << " levels=" << level_list_string(config.levels)
               << " particles=" << config.particles << " reps=" << config.repetitions;
            break;
        case Subcommand::LderivDecay:
        case Subcommand::Poc:
            os << " steps=" << config.steps
               << " particle-levels=" << level_list_string(config.particle_levels)
               << " reps=" << config.repetitions;
            break;
        case Subcommand::Validate:
            os << " steps=" << config.steps << " particles=" << config.particles;
            if (config.ou_a) {
                os << " ou=" << format_double(*config.ou_a) << ','
                   << format_double(*config.ou_c) << ',' << format_double(*config.ou_s);
            } else {
                os << " ou=battery";
            }
            break;
    }
    os << " seed=" << config.seed;
    if (config.subcommand != Subcommand::Validate) {
        os << " sigma=" << format_double(config.sigma_param)
           << " coupling-c=" << format_double(config.coupling_c);
    }
    os << " x0=" << format_double(config.x0);
    if (config.subcommand != Subcommand::Validate) {
        os << " levy-terms="
           << (config.levy_terms ? std::to_string(*config.levy_terms) : std::string("auto"));
    }
    os << " format=" << (config.format == OutputFormat::Csv ? "csv" : "json");
    return os.str();
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
        } else {
            out += c;
        }
    }
    return out;
}

std::string json_number_or_null(double v) {
    if (!std::isfinite(v)) return "null";
    return format_double(v);
}

}  // namespace

void emit_ladder(const ExperimentResult& result, const ExperimentConfig& config,
                 const std::string& scale_column, std::ostream& os) {
    const double slope = result.has_slope ? result.slope
                                          : std::numeric_limits<double>::quiet_NaN();
    const double stderr_value = result.has_slope
                                    ? result.slope_std_error
                                    : std::numeric_limits<double>::quiet_NaN();
    if (config.format == OutputFormat::Csv) {
        os << "level," << scale_column << ",rmse,repetitions\n";
        for (const auto& row : result.rows) {
            os << row.level << ',' << row.scale << ',' << format_double(row.rmse) << ','
               << row.repetitions << '\n';
        }
        os << "#slope=" << format_double(slope) << ",stderr=" << format_double(stderr_value)
           << ",seed=" << result.base_seed << '\n';
        os << "#config=" << canonical_config(config) << '\n';
    } else {
        os << "{\"rows\":[";
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            const auto& row = result.rows[i];
            if (i) os << ',';
            os << "{\"level\":" << row.level << ",\"" << scale_column << "\":" << row.scale
               << ",\"rmse\":" << json_number_or_null(row.rmse)
               << ",\"repetitions\":" << row.repetitions
               << ",\"diverged\":" << (row.diverged ? "true" : "false") << '}';
        }
        os << "],\"slope\":" << json_number_or_null(slope)
           << ",\"stderr\":" << json_number_or_null(stderr_value)
           << ",\"seed\":" << result.base_seed << ",\"config\":\""
           << json_escape(canonical_config(config)) << "\"}\n";
    }
}

void emit_ensemble(const EnsembleState& state, const ExperimentConfig& config,
                   std::ostream& os) {
    if (config.format == OutputFormat::Csv) {
        os << "particle,position\n";
        for (std::size_t i = 0; i < state.positions.size(); ++i) {
            os << i << ',' << format_double(state.positions[i]) << '\n';
        }
        os << "#seed=" << config.seed << '\n';
        os << "#config=" << canonical_config(config) << '\n';
    } else {
        os << "{\"rows\":[";
        for (std::size_t i = 0; i < state.positions.size(); ++i) {
            if (i) os << ',';
            os << "{\"particle\":" << i << ",\"position\":"
               << json_number_or_null(state.positions[i]) << '}';
        }
        os << "],\"seed\":" << config.seed << ",\"config\":\""
           << json_escape(canonical_config(config)) << "\"}\n";
    }
}

void emit_validation(const std::vector<OuValidationReport>& reports,
                     const std::vector<std::array<double, 3>>& cases,
                     const ExperimentConfig& config, std::ostream& os) {
    if (config.format == OutputFormat::Csv) {
        os << "case,a,c,s,mean,target,mc_stderr,bias_allowance,abs_error,pass\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            os << i << ',' << format_double(cases[i][0]) << ',' << format_double(cases[i][1])
               << ',' << format_double(cases[i][2]) << ',' << format_double(r.measured_mean)
               << ',' << format_double(r.target) << ',' << format_double(r.mc_std_error)
               << ',' << format_double(r.bias_allowance) << ','
               << format_double(r.abs_error) << ',' << (r.pass ? 1 : 0) << '\n';
        }
        os << "#seed=" << config.seed << '\n';
        os << "#config=" << canonical_config(config) << '\n';
    } else {
        os << "{\"rows\":[";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            if (i) os << ',';
            os << "{\"case\":" << i << ",\"a\":" << format_double(cases[i][0])
               << ",\"c\":" << format_double(cases[i][1])
               << ",\"s\":" << format_double(cases[i][2])
               << ",\"mean\":" << format_double(r.measured_mean)
               << ",\"target\":" << format_double(r.target)
               << ",\"mc_stderr\":" << format_double(r.mc_std_error)
               << ",\"bias_allowance\":" << format_double(r.bias_allowance)
               << ",\"abs_error\":" << format_double(r.abs_error)
               << ",\"pass\":" << (r.pass ? "true" : "false") << '}';
        }
        os << "],\"seed\":" << config.seed << ",\"config\":\""
           << json_escape(canonical_config(config)) << "\"}\n";
    }
}

namespace {

void write_output(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("failed writing output file '" + path + "'");
}

McKeanVlasovModel model_from_config(const ExperimentConfig& config) {
    BuiltinModelParams params;
    params.sigma_param = config.sigma_param;
    params.c = config.coupling_c;
    params.x0 = config.x0;
    return make_builtin(builtin_from_name(config.model), params);
}

SchemeSpec scheme_from_config(const ExperimentConfig& config) {
    SchemeSpec spec{config.scheme_kind, config.taming, config.gradient, config.lions};
    validate_scheme(spec);
    return spec;
}

int run_simulate(const ExperimentConfig& config) {
    const McKeanVlasovModel model = model_from_config(config);
    const SchemeSpec spec = scheme_from_config(config);
    const TimeGrid grid(config.horizon, config.steps);
    SimulationOptions opts;
    opts.levy_terms = config.levy_terms;
    opts.workers = config.workers;
    std::ostringstream os;
    try {
        const EnsembleState terminal =
            simulate_terminal(model, spec, grid, config.particles, config.seed, opts);
        emit_ensemble(terminal, config, os);
        write_output(config.out, os.str());
        return 0;
    } catch (const SimulationDiverged& e) {
        if (config.format == OutputFormat::Csv) {
            os << "particle,position\n";
            os << "#diverged=step " << e.step() << " particle " << e.particle() << '\n';
            os << "#seed=" << config.seed << '\n';
            os << "#config=" << canonical_config(config) << '\n';
        } else {
            os << "{\"rows\":[],\"diverged\":{\"step\":" << e.step()
               << ",\"particle\":" << e.particle() << "},\"seed\":" << config.seed
               << ",\"config\":\"" << json_escape(canonical_config(config)) << "\"}\n";
        }
        write_output(config.out, os.str());
        return 3;
    }
}

int run_convergence(const ExperimentConfig& config) {
    const McKeanVlasovModel model = model_from_config(config);
    ConvergenceLadderConfig ladder;
    ladder.scheme = scheme_from_config(config);
    ladder.particles = config.particles;
    ladder.levels = config.levels;
    ladder.repetitions = config.repetitions;
    ladder.base_seed = config.seed;
    ladder.horizon = config.horizon;
    ladder.levy_terms = config.levy_terms;
    ladder.workers = config.workers;
    const ExperimentResult result = run_convergence_ladder(model, ladder);
    std::ostringstream os;
    emit_ladder(result, config, "M", os);
    write_output(config.out, os.str());
    return result.partial ? 3 : 0;
}

int run_lderiv(const ExperimentConfig& config) {
    const McKeanVlasovModel model = model_from_config(config);
    ParticleDecayConfig decay;
    decay.steps = config.steps;
    decay.particle_levels = config.particle_levels;
    decay.repetitions = config.repetitions;
    decay.base_seed = config.seed;
    decay.horizon = config.horizon;
    decay.levy_terms = config.levy_terms;
    decay.workers = config.workers;
    const ExperimentResult result = run_lderiv_decay(
        model, tamed_euler_spec(config.taming),
        milstein_spec(config.taming, true, true), decay);
    std::ostringstream os;
    emit_ladder(result, config, "N", os);
    write_output(config.out, os.str());
    return result.partial ? 3 : 0;
}

int run_poc(const ExperimentConfig& config) {
    const McKeanVlasovModel model = model_from_config(config);
    ParticleDecayConfig decay;
    decay.steps = config.steps;
    decay.particle_levels = config.particle_levels;
    decay.repetitions = config.repetitions;
    decay.base_seed = config.seed;
    decay.horizon = config.horizon;
    decay.levy_terms = config.levy_terms;
    decay.workers = config.workers;
    const ExperimentResult result =
        run_poc_split(model, scheme_from_config(config), decay);
    std::ostringstream os;
    emit_ladder(result, config, "N", os);
    write_output(config.out, os.str());
    return result.partial ? 3 : 0;
}

int run_validate(const ExperimentConfig& config) {
    std::vector<std::array<double, 3>> cases;
    if (config.ou_a) {
        cases.push_back({*config.ou_a, *config.ou_c, *config.ou_s});
    } else {
        cases.assign(std::begin(kOuBattery), std::end(kOuBattery));
    }
    std::vector<OuValidationReport> reports;
    for (const auto& [a, c, s] : cases) {
        reports.push_back(run_meanfield_ou_oracle(a, c, s, config.x0, config.horizon,
                                                  config.steps, config.particles,
                                                  config.seed, config.workers));
    }
    std::ostringstream os;
    emit_validation(reports, cases, config, os);
    write_output(config.out, os.str());
    return 0;
}

const char* kUsage = R"(mvsde - interacting-particle simulations for McKean-Vlasov SDEs

usage: mvsde <subcommand> [--flag value ...]

subcommands:
  simulate       terminal ensemble of one particle simulation
  convergence    coupled fine/coarse strong-convergence ladder over time grids
  lderiv-decay   RMSE between tamed Euler and full tamed Milstein per particle count
  poc            propagation-of-chaos split-system RMSE per particle count
  validate       mean-field Ornstein-Uhlenbeck closed-form oracle check

common flags:
  --model ex1..ex5        built-in model (required except for validate)
  --scheme tamed-euler|milstein   --taming none|s1|s2
  --gradient on|off       --lions on|off
  --steps M               --levels a..b          --particles N
  --particle-levels a..b  --reps R               --seed S
  --horizon T             --sigma V              --coupling-c V    --x0 V
  --levy-terms K          --out PATH             --format csv|json
  --workers W             --config FILE (flat key=value lines, # comments)
  validate only: --ou-a=A --ou-c=C --ou-s=S (default: three-case battery)

exit codes: 0 ok, 1 usage error, 2 i/o error, 3 partial result (divergence)
)";

}  // namespace

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    for (const auto& a : args) {
        if (a == "--help" || a == "-h") {
            std::cout << kUsage;
            return 0;
        }
    }
    try {
        const ExperimentConfig config = parse_config(args);
        switch (config.subcommand) {
            case Subcommand::Simulate: return run_simulate(config);
            case Subcommand::Convergence: return run_convergence(config);
            case Subcommand::LderivDecay: return run_lderiv(config);
            case Subcommand::Poc: return run_poc(config);
            case Subcommand::Validate: return run_validate(config);
        }
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n' << "run 'mvsde --help' for usage\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace mvsde::cli
