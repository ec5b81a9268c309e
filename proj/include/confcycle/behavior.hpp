#pragma once

#include "confcycle/params.hpp"

namespace confcycle {

/// Consumer confidence index in [-1, 1].
struct ConfidenceState {
    double C = 0.0;
};

/// Exponential-moving-average estimates of the realised return on capital and
/// the resulting scaled Sharpe ratio.
struct SharpeState {
    double mu_q = 0.0;
    double var_q = 0.0;
    double S = 0.0;
};

struct SentimentDecision {
    double Sigma = 0.0; // unbounded sentiment
    double F = 0.0;     // share of savings put into capital
};

/// C = tanh(theta_c (c_prev - c0)), c_prev in absolute consumption units.
ConfidenceState confidence(double c_prev, const ModelParams& p);

/// G = (G_min + G_max + (G_max - G_min) C) / 2.
double consumption_rate(double C, const ModelParams& p);

/// Neutral starting estimate: mean equal to the bond-plus-depreciation hurdle
/// (S = 0) and variance at the floor.
SharpeState initial_sharpe(const ModelParams& p);

/// One EMA update with the realised rate q. The variance uses the already
/// updated mean. When the volatility estimate drops below p.sharpe_floor the
/// ratio is clamped to +-p.sharpe_cap (0 for exactly zero excess return).
SharpeState update_sharpe(const SharpeState& s, double q_realised, const ModelParams& p);

/// Sharpe ratio implied by the given mean and variance.
double sharpe_ratio(double mu_q, double var_q, const ModelParams& p);

/// Sigma = nu S + (1 - nu) C, F = (F_max + F_min + (F_max - F_min) tanh(theta_k Sigma)) / 2.
SentimentDecision sentiment_and_allocation(double S, double C, const ModelParams& p);

} // namespace confcycle
