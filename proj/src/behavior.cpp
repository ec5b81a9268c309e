#include "confcycle/behavior.hpp"

#include <algorithm>
#include <cmath>

namespace confcycle {

ConfidenceState confidence(double c_prev, const ModelParams& p) {
    return {std::tanh(p.theta_c * (c_prev - p.c0))};
}

double consumption_rate(double C, const ModelParams& p) {
    return 0.5 * (p.g_min + p.g_max + (p.g_max - p.g_min) * C);
}

SharpeState initial_sharpe(const ModelParams& p) {
    SharpeState s;
    s.mu_q = p.r + p.delta;
    s.var_q = p.sharpe_floor * p.sharpe_floor;
    s.S = 0.0;
    return s;
}

double sharpe_ratio(double mu_q, double var_q, const ModelParams& p) {
    const double excess = mu_q - (p.r + p.delta);
    const double sigma = std::sqrt(var_q);
    if (sigma < p.sharpe_floor) {
        if (excess > 0) return p.sharpe_cap;
        if (excess < 0) return -p.sharpe_cap;
        return 0.0;
    }
    return p.n_scale * excess / sigma;
}

SharpeState update_sharpe(const SharpeState& s, double q_realised, const ModelParams& p) {
    SharpeState next;
    next.mu_q = p.lambda * s.mu_q + (1.0 - p.lambda) * q_realised;
    const double dev = q_realised - next.mu_q;
    next.var_q = p.lambda * s.var_q + (1.0 - p.lambda) * dev * dev;
    next.S = sharpe_ratio(next.mu_q, next.var_q, p);
    return next;
}

SentimentDecision sentiment_and_allocation(double S, double C, const ModelParams& p) {
    SentimentDecision d;
    d.Sigma = p.nu * S + (1.0 - p.nu) * C;
    // clamped: the midpoint form can round just outside the bounds
    d.F = std::clamp(0.5 * (p.f_max + p.f_min + (p.f_max - p.f_min) * std::tanh(p.theta_k * d.Sigma)), p.f_min, p.f_max);
    return d;
}

} // namespace confcycle
