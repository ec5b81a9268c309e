#include "confcycle/equilibrium.hpp"

#include "confcycle/error.hpp"

#include <cmath>
#include <stdexcept>

namespace confcycle {

namespace {

void check_inputs(double k, double G) {
    if (!(k > 0) || !std::isfinite(k)) throw std::invalid_argument("capital must be positive and finite");
    if (!(G > 0) || G > 1) throw std::invalid_argument("consumption rate must lie in (0, 1]");
}

constexpr double kBracketEps = 1e-12;

} // namespace

LeontiefRegime leontief_regime(double k, double G, const ModelParams& p) {
    check_inputs(k, G);
    LeontiefRegime lr;
    lr.beta = 2.0 * k * k * p.gamma / G;
    if (lr.beta >= 1.0) {
        lr.regime = CapitalRegime::Abundant;
    } else {
        lr.regime = CapitalRegime::Scarce;
        const double ratio = (1.0 - lr.beta) / p.alpha;
        if (ratio > 0.0 && ratio <= 1.0) lr.x = -std::log(ratio);
    }
    return lr;
}

EquilibriumOutcome solve_ces(double k, double G, const ModelParams& p, double z) {
    check_inputs(k, G);
    const double rho = p.rho;
    const double alpha = p.alpha;
    const double log_k = std::log(k);
    const double log_alpha = std::log(alpha);
    // ln of G/(2 gamma) * (1-alpha)^(-2/rho)
    const double log_scale = std::log(G / (2.0 * p.gamma)) - 2.0 / rho * std::log1p(-alpha);
    const double exponent = 1.0 + 2.0 / rho;

    // alpha (c/k)^rho evaluated in log space
    auto scarcity = [&](double c) { return std::exp(log_alpha + rho * (std::log(c) - log_k)); };
    // Increasing in c; negative at the lower bracket, positive at the upper.
    auto residual = [&](double c) {
        const double d = 1.0 - scarcity(c);
        if (d <= 0.0) return c * c;
        return c * c - std::exp(log_scale + exponent * std::log(d));
    };

    double lo = kBracketEps;
    double hi = k * std::exp(-log_alpha / rho) * (1.0 - kBracketEps);
    // Halve until the bracket stops shrinking in floating point; the tolerance
    // is the width that must have been reached when the budget runs out.
    int it = 0;
    for (; it < p.solver.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (residual(mid) > 0.0) hi = mid;
        else lo = mid;
    }
    if (hi - lo > p.solver.tolerance)
        throw EngineError("CES equilibrium did not converge in " + std::to_string(it) + " bisection steps");

    EquilibriumOutcome out;
    out.c_tilde = 0.5 * (lo + hi);
    const double d = 1.0 - scarcity(out.c_tilde);
    const double log_d = std::log(d);
    const double log_1ma = std::log1p(-alpha);
    // n = (1-alpha)^(1/rho) c D^(-1/rho); w = (1-alpha)(c/n)^(1+rho) = (1-alpha)^(-1/rho) D^((1+rho)/rho)
    out.n = out.c_tilde * std::exp((log_1ma - log_d) / rho);
    out.w_tilde = std::exp((-log_1ma + (1.0 + rho) * log_d) / rho);
    out.q_star_tilde = std::exp(log_alpha + (1.0 + rho) * (std::log(out.c_tilde) - log_k));
    out.y = z * out.c_tilde;
    out.utility = utility(out.y, out.n, G, p);
    return out;
}

EquilibriumOutcome solve_leontief(double k, double G, const ModelParams& p, double z) {
    const LeontiefRegime lr = leontief_regime(k, G, p);
    EquilibriumOutcome out;
    if (lr.regime == CapitalRegime::Abundant) {
        out.c_tilde = std::sqrt(G / (2.0 * p.gamma));
        out.w_tilde = 1.0;
        out.q_star_tilde = 0.0;
        out.n = out.c_tilde * out.w_tilde;
    } else {
        out.c_tilde = k;
        out.w_tilde = lr.beta;
        out.q_star_tilde = 1.0 - lr.beta;
        out.n = k;
    }
    out.y = z * out.c_tilde;
    out.utility = utility(out.y, out.n, G, p);
    return out;
}

double utility(double c, double n, double G, const ModelParams& p) {
    if (!(c > 0)) throw std::invalid_argument("utility requires positive consumption");
    return G * std::log(c) - p.gamma * n * n;
}

} // namespace confcycle
