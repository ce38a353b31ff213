#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvsde/experiments.hpp"

namespace mvsde::cli {

enum class Subcommand { Simulate, Convergence, LderivDecay, Poc, Validate };
enum class OutputFormat { Csv, Json };

std::string subcommand_name(Subcommand subcommand);

// Fully resolved run description: defaults filled in, flags validated.
struct ExperimentConfig {
    Subcommand subcommand = Subcommand::Simulate;
    std::string model;  // ex1..ex5; unused by validate
    SchemeKind scheme_kind = SchemeKind::Milstein;
    TamingVariant taming = TamingVariant::Scheme1;
    bool gradient = true;
    bool lions = false;
    double horizon = 1.0;
    std::uint64_t steps = 64;
    std::vector<int> levels;           // convergence
    std::vector<int> particle_levels;  // lderiv-decay, poc
    std::size_t particles = 0;
    int repetitions = 1;
    std::uint64_t seed = 1;
    double sigma_param = 1.5;
    double coupling_c = 0.5;
    double x0 = 1.0;
    std::optional<std::size_t> levy_terms;
    std::string out = "results.csv";
    OutputFormat format = OutputFormat::Csv;
    int workers = 0;
    // validate runs a fixed three-case battery unless all of these are given
    std::optional<double> ou_a;
    std::optional<double> ou_c;
    std::optional<double> ou_s;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses command-line arguments (argv without the program name) plus an
// optional flat key=value config file (--config); explicit flags win over
// file values. Throws UsageError naming the offending key.
ExperimentConfig parse_config(const std::vector<std::string>& args);

// Canonical one-line echo of the effective config. Excludes the output path
// and worker count, which cannot influence results.
std::string canonical_config(const ExperimentConfig& config);

// 17 significant digits, locale-independent; round-trips binary64 exactly.
std::string format_double(double value);

void emit_ladder(const ExperimentResult& result, const ExperimentConfig& config,
                 const std::string& scale_column, std::ostream& os);
void emit_ensemble(const EnsembleState& state, const ExperimentConfig& config,
                   std::ostream& os);
void emit_validation(const std::vector<OuValidationReport>& reports,
                     const std::vector<std::array<double, 3>>& cases,
                     const ExperimentConfig& config, std::ostream& os);

// Exit codes: 0 complete, 1 usage error, 2 i/o error, 3 partial result
// (a divergence flag was raised somewhere).
int run_cli(int argc, char** argv);

}  // namespace mvsde::cli
