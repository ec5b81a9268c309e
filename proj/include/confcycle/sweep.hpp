#pragma once

#include "confcycle/indicators.hpp"
#include "confcycle/params.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace confcycle {

struct SweepAxis {
    std::string name; // any numeric configuration key
    std::vector<double> values;
};

struct SweepPlan {
    ModelParams base;
    SweepAxis axis1;
    SweepAxis axis2;
    int seeds_per_cell = 5;
    std::int64_t horizon = 200000;
    std::int64_t burn_in = 2000;

    std::size_t cell_count() const { return axis1.values.size() * axis2.values.size(); }
};

/// Throws ConfigError for unknown or non-numeric axis names, empty value
/// lists, a bad seed count or any axis value the parameter range rejects.
void validate(const SweepPlan& plan);

/// Cells are numbered row-major: index = i1 * |axis2| + i2.
ModelParams cell_params(const SweepPlan& plan, std::size_t cell_index);

/// Compact per-seed record kept in the grid and the manifest.
struct SeedSummary {
    std::uint64_t replica = 0;
    double xi_c = 0.0;
    double xi_k = 0.0;
    double mean_sharpe = 0.0;
    std::optional<double> t_low_mean;
    std::optional<double> t_high_mean;
    std::int64_t n_spells = 0;
    Phase phase = Phase::LkLc;
    bool bimodal_c = false;
    bool bimodal_S = false;

    bool operator==(const SeedSummary&) const = default;
};

SeedSummary summarise(const CrisisReport& report, std::uint64_t replica);

struct PhaseCell {
    std::size_t index = 0;
    double axis1 = 0.0;
    double axis2 = 0.0;
    std::vector<SeedSummary> seeds;
    std::optional<std::string> error; // first engine failure among the seeds

    // Aggregates, meaningful only without error.
    double log10_xi_c = kLog10Floor;  // median over seeds
    double log10_xi_k = kLog10Floor;  // median over seeds
    double mean_sharpe = 0.0;         // mean over seeds
    Phase phase = Phase::LkLc;        // majority; ties resolved from the medians
    std::optional<double> t_low_mean; // median over seeds that have spells
    std::optional<double> t_high_mean;

    bool operator==(const PhaseCell&) const = default;
};

/// Fills the aggregate fields from `cell.seeds`.
void aggregate(PhaseCell& cell, const AnalysisSettings& analysis);

struct SweepResult {
    SweepPlan plan;
    std::vector<std::optional<PhaseCell>> cells; // one slot per cell, empty if not yet run
    bool complete() const;
};

struct SweepOptions {
    unsigned workers = 1;
    const std::atomic<bool>* stop = nullptr; // checked before each simulation
    // Previously finished cells (from a manifest); they are not re-run.
    std::vector<PhaseCell> finished;
    // Called on the calling thread after each newly finished cell.
    std::function<void(const SweepResult&, const PhaseCell&)> on_cell;
};

/// Simulates every (cell, replica) pair on a pool of worker threads. Output
/// does not depend on the worker count or on the order the cells run in.
SweepResult run_sweep(const SweepPlan& plan, const SweepOptions& options = {});

inline constexpr const char* kSweepCsvHeader =
    "axis1,axis2,log10_xi_c,log10_xi_k,mean_sharpe,phase,t_low_mean,t_high_mean";

/// One row per finished cell in index order. Failed cells keep their
/// coordinates, the phase column reads `error` and the numbers are empty.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

nlohmann::json plan_to_json(const SweepPlan& plan);
SweepPlan plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PhaseCell& cell);
PhaseCell cell_from_json(const nlohmann::json& j);

/// Manifest: plan, seeding scheme, code version, status and finished cells.
nlohmann::json manifest(const SweepResult& result);

struct LoadedManifest {
    SweepPlan plan;
    std::string code_version;
    std::vector<PhaseCell> finished;
};

/// Throws std::runtime_error on malformed manifests.
LoadedManifest read_manifest(const nlohmann::json& j);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

} // namespace confcycle
