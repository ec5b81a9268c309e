#pragma once

#include "confcycle/dynamics.hpp"
#include "confcycle/params.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace confcycle {

enum class Phase { LkLc, LkHc, HkLc, HkHc };

std::string to_string(Phase phase);
std::optional<Phase> parse_phase(std::string_view s);

struct PhaseLabel {
    Phase phase = Phase::LkLc;
    bool permanent_c = false;
    bool permanent_k = false;
};

/// Consumption-crisis severity: mean over periods of (1 - c/c0) where c < c0.
double xi_c(std::span<const EconomyState> states, double c0);

/// Capital-scarcity severity: mean over periods of (1 - k/n) where k < n.
double xi_k(std::span<const EconomyState> states);

/// High prevalence when a severity reaches `threshold`; permanent when it
/// exceeds `permanent`.
PhaseLabel classify_phase(double xi_c, double xi_k, double threshold = 1e-2, double permanent = 0.99);

/// Maximal runs of c < c0 (low) and c >= c0 (high). Runs touching either end
/// of the series are truncated by the observation window: they are kept out
/// of the spell lists and means and reported separately.
struct SpellStats {
    std::vector<std::int64_t> spells_low;
    std::vector<std::int64_t> spells_high;
    std::optional<double> t_low_mean;
    std::optional<double> t_high_mean;
    std::int64_t raw_low_runs = 0;  // including truncated runs
    std::int64_t raw_high_runs = 0;
    std::int64_t truncated_length = 0; // periods inside truncated runs
};

SpellStats spell_stats(std::span<const EconomyState> states, double c0);

/// Same rule on an explicit low/high indicator series.
SpellStats spell_stats_from_indicator(std::span<const bool> low);

struct BimodalityRule {
    double min_mass = 0.01; // share of total count each mode must hold
    double min_dip = 0.25;  // valley must sit this far below both neighbouring peaks
};

/// Uniform-bin histogram. `bimodal` is set by detect_modes().
struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::int64_t> counts;
    std::int64_t excluded = 0; // samples outside [lo, hi] (clipped range only)
    std::vector<double> mode_masses;
    bool bimodal = false;

    double bin_width() const { return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size()); }
    std::int64_t total() const;
};

/// Mode detection: counts are smoothed with a centred 3-bin moving average;
/// scanning left to right, a valley separates two modes when it lies at most
/// (1 - min_dip) times both the running peak before it and a later peak. Each
/// mode's mass is the raw count between its separating valleys. The histogram
/// is bimodal when at least two modes carry min_mass of the total.
void detect_modes(Histogram& h, const BimodalityRule& rule = {});

/// Histogram over [min, max] of the series with `bins` bins.
/// Throws std::invalid_argument for an empty series or bins < 2.
Histogram histogram(std::span<const double> series, int bins, const BimodalityRule& rule = {});

/// Histogram over the [q, 1 - q] quantile range of the series, for series with
/// extreme outliers. Samples outside the range are counted in `excluded`.
Histogram histogram_clipped(std::span<const double> series, int bins, double clip_quantile,
                            const BimodalityRule& rule = {});

void write_histogram_csv(std::ostream& out, const Histogram& h);

struct CrisisReport {
    double xi_c = 0.0;
    double xi_k = 0.0;
    double mean_sharpe = 0.0;
    SpellStats spells;
    Histogram hist_c;
    Histogram hist_n;
    Histogram hist_S;
    PhaseLabel label;
};

/// All indicators of one recorded trajectory. Throws std::invalid_argument for
/// an empty trajectory.
CrisisReport analyse(std::span<const EconomyState> states, const ModelParams& p);

/// {xi_c, xi_k, phase, mean_sharpe, t_low_mean, t_high_mean, n_spells,
///  bimodal_c, bimodal_S, ...}; absent spell means are null.
nlohmann::json to_json(const CrisisReport& report);

/// Floor used for log10 of a zero severity.
inline constexpr double kLog10Floor = -12.0;
double log10_floored(double x);

} // namespace confcycle
