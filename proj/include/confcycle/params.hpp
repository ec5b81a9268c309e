#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace confcycle {

/// How the capital stock and the same-period income are resolved against each
/// other. Simultaneous iterates k_t <-> income_t to a fixed point; Lagged feeds
/// last period's income into the capital update.
enum class CouplingMode { Simultaneous, Lagged };

struct SolverSettings {
    double tolerance = 1e-12;            // absolute, on rescaled consumption
    int max_iterations = 200;
    double fixed_point_tolerance = 1e-10; // relative, on capital
    int fixed_point_max_iterations = 200;

    bool operator==(const SolverSettings&) const = default;
};

struct EngineSettings {
    std::int64_t horizon = 200000;
    std::int64_t burn_in = 2000;
    std::uint64_t seed = 1;

    bool operator==(const EngineSettings&) const = default;
};

/// Knobs of the post-run analysis (phase labels, histograms, bimodality).
struct AnalysisSettings {
    double phase_threshold = 1e-2;
    double permanent_threshold = 0.99;
    int histogram_bins = 50;
    double bimodal_min_mass = 0.01;
    double bimodal_min_dip = 0.25;
    double sharpe_clip_quantile = 0.005;

    bool operator==(const AnalysisSettings&) const = default;
};

struct ModelParams {
    // household and firm
    double gamma = 1.0;
    double alpha = 1.0 / 3.0;
    double rho = 7.0;
    double z0 = 0.05;
    double eta = 0.5;
    double sigma_z = 0.15;
    double delta = 0.005;
    double r = 0.0015;
    double pi = 0.001;
    double a = 15.0; // +inf disables the capital-return risk

    // confidence and consumption propensity
    double c0 = 0.017;
    double theta_c = 300.0;
    double g_min = 0.05;
    double g_max = 0.95;

    // investment allocation
    double lambda = 0.95;
    double nu = 1.0;
    double n_scale = 0.25;
    double theta_k = 15.0;
    double f_min = 0.0;
    double f_max = 1.0;
    double sharpe_floor = 1e-8;
    double sharpe_cap = 10.0;

    CouplingMode coupling_mode = CouplingMode::Simultaneous;
    SolverSettings solver;
    EngineSettings engine;
    AnalysisSettings analysis;

    bool operator==(const ModelParams&) const = default;
};

/// Baseline calibration.
ModelParams defaults();

/// Throws ConfigError naming the first field that violates its range.
void validate(const ModelParams& p);

/// Memory timescales in periods. t_delta is empty when delta == 0 (capital
/// never depreciates).
struct Timescales {
    double t_lambda;
    double t_eta;
    std::optional<double> t_delta;
};

Timescales derived_timescales(const ModelParams& p);

// ---------------------------------------------------------------------------
// Plain-text configuration: one `key = value` per line, `#` starts a comment.
// Nested settings use dotted keys (`solver.tolerance`, `engine.seed`, ...).
// ---------------------------------------------------------------------------

/// Every documented key, in the order save() writes them.
const std::vector<std::string>& config_keys();

/// Parses a complete configuration. Every key must be present exactly once.
ModelParams load(std::string_view text);

/// Writes every key at round-trip precision.
std::string save(const ModelParams& p);

/// Sets a single key from its textual value. Does not validate the whole
/// record; call validate() after the last override.
void apply_override(ModelParams& p, std::string_view key, std::string_view value);

/// Parses `key=value` and applies it.
void apply_override(ModelParams& p, std::string_view assignment);

/// Reads one key back as text (same formatting as save()).
std::string get_value(const ModelParams& p, std::string_view key);

/// Stable 64-bit fingerprint of the configuration (FNV-1a over save()).
std::uint64_t params_hash(const ModelParams& p);

std::string to_string(CouplingMode mode);

} // namespace confcycle
