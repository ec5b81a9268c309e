#pragma once

#include "confcycle/params.hpp"

#include <optional>

namespace confcycle {

/// Within-period market-clearing outcome. Quantities with a `_tilde` suffix
/// are expressed in units of productivity z (x_tilde = x / z); labour is not
/// rescaled.
struct EquilibriumOutcome {
    double c_tilde = 0.0;
    double n = 0.0;
    double w_tilde = 0.0;
    double q_star_tilde = 0.0;
    double y = 0.0;       // output = consumption, absolute units (z * c_tilde)
    double utility = 0.0; // household utility at (y, n), diagnostic only
};

enum class CapitalRegime { Abundant, Scarce };

/// Leontief-limit classification of a (k, G) point.
struct LeontiefRegime {
    double beta = 0.0; // 2 k^2 gamma / G
    CapitalRegime regime = CapitalRegime::Abundant;
    std::optional<double> x; // exp(-x) = (1 - beta) / alpha, scarce regime only
};

LeontiefRegime leontief_regime(double k, double G, const ModelParams& p);

/// Solves the CES economy for given capital k and consumption rate G.
///
/// Rescaled consumption is the unique root of
///     c^2 = G/(2 gamma) * (1-alpha)^(-2/rho) * D(c)^(1 + 2/rho),
///     D(c) = 1 - alpha (c/k)^rho,
/// obtained by eliminating labour and wage between the household first-order
/// condition n c = G w / (2 gamma), the marginal product of labour and market
/// clearing. The left side increases and the right side decreases in c, so
/// bisection on (0, k alpha^(-1/rho)) brackets exactly one root. Labour, wage
/// and ideal rent then follow in closed form. `z` only scales `y`. Halving
/// continues until the bracket stops shrinking in double precision.
///
/// Throws std::invalid_argument on k <= 0 or G outside (0, 1], EngineError
/// when the bracket does not shrink below solver.tolerance in
/// solver.max_iterations steps.
EquilibriumOutcome solve_ces(double k, double G, const ModelParams& p, double z = 1.0);

/// Leading-order (rho -> infinity) closed forms: abundant capital gives
/// c = sqrt(G / 2 gamma), w = 1, q* = 0; scarce capital gives c = n = k,
/// w = beta, q* = 1 - beta.
EquilibriumOutcome solve_leontief(double k, double G, const ModelParams& p, double z = 1.0);

/// U = G ln c - gamma n^2. Throws std::invalid_argument for c <= 0.
double utility(double c, double n, double G, const ModelParams& p);

} // namespace confcycle
