#pragma once

#include "confcycle/params.hpp"
#include "confcycle/stochastic.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace confcycle {

/// Full record of one period. Monetary quantities are absolute (not rescaled
/// by productivity).
struct EconomyState {
    std::int64_t t = -1;
    double frak_z = 0.0; // productivity log-deviation
    double z = 0.0;
    double c = 0.0;
    double n = 0.0;
    double k = 0.0;
    double b = 0.0; // face value of bonds maturing next period
    double w = 0.0;
    double q_star = 0.0;
    double q = 0.0;
    double G = 0.0;
    double F = 0.0;
    double C = 0.0;
    double mu_q = 0.0;
    double var_q = 0.0;
    double S = 0.0;
    double Sigma = 0.0;
    double income = 0.0;
    double i_total = 0.0; // savings (1 - G) * income
    double profit_residual = 0.0;
    int fixed_point_iterations = 0;

    bool operator==(const EconomyState&) const = default;
};

/// Explicit shock values for one period.
struct PeriodShocks {
    double normal = 0.0;  // standard normal driving productivity
    double uniform = 1.0; // uniform on (0, 1] driving the return risk
};

/// Starting point of every run: capital at the Leontief matching point
/// sqrt(G_max / 2 gamma), previous consumption z0 * sqrt(G_max / 2 gamma),
/// no bonds, productivity at its base level, full confidence and a neutral
/// Sharpe estimate. Income is the labour income of the equilibrium at
/// (k0, G_max, z0).
EconomyState initial_state(const ModelParams& p);

/// Advances one period with the given shocks:
///   1. productivity AR(1) step
///   2. confidence from last period's consumption, consumption rate
///   3. sentiment from the last Sharpe estimate and current confidence, allocation F
///   4. capital and equilibrium (fixed point or lagged, per p.coupling_mode)
///   5. realised return q = q* xi
///   6. Sharpe EMA update with q
///   7. bond purchase
///   8. profit residual diagnostic
/// Throws EngineError (carrying the period index) if a solver fails.
EconomyState step(const EconomyState& prev, const PeriodShocks& shocks, const ModelParams& p);

/// Same, drawing the shocks from the two streams.
EconomyState step(const EconomyState& prev, ShockStreams& streams, const ModelParams& p);

struct TrajectoryMeta {
    std::uint64_t params_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t cell = 0;
    std::uint64_t replica = 0;
    std::int64_t burn_in = 0;
    std::int64_t horizon = 0;
};

struct Trajectory {
    std::vector<EconomyState> states; // recorded periods only, burn-in dropped
    TrajectoryMeta meta;
};

/// Simulates burn_in + horizon periods and keeps the last horizon of them.
/// Deterministic in (p, cell, replica).
Trajectory run(const ModelParams& p, std::uint64_t cell = 0, std::uint64_t replica = 0);

// Trajectory CSV: header `t,z,c,n,k,b,w,q_star,q,G,F,C,S,Sigma,income,profit_residual`,
// one row per recorded period, shortest round-trip decimal formatting.

extern const char* const kTrajectoryCsvHeader;

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Reads the columns written by write_trajectory_csv. Columns not present in
/// the CSV stay zero. Throws std::runtime_error on malformed input.
std::vector<EconomyState> read_trajectory_csv(std::istream& in);

} // namespace confcycle
