#include "confcycle/dynamics.hpp"

#include "confcycle/behavior.hpp"
#include "confcycle/equilibrium.hpp"
#include "confcycle/error.hpp"
#include "confcycle/text.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace confcycle {

EconomyState initial_state(const ModelParams& p) {
    EconomyState s;
    s.t = -1;
    const auto prod = initial_productivity(p);
    s.frak_z = prod.frak_z;
    s.z = prod.z;
    s.G = p.g_max;
    s.C = 1.0;
    s.k = std::sqrt(p.g_max / (2.0 * p.gamma));
    s.c = p.z0 * s.k;

    const auto eq = solve_ces(s.k, s.G, p, s.z);
    s.n = eq.n;
    s.w = s.z * eq.w_tilde;
    s.q_star = s.z * eq.q_star_tilde;
    s.q = 0.0;
    s.b = 0.0;

    const auto sharpe = initial_sharpe(p);
    s.mu_q = sharpe.mu_q;
    s.var_q = sharpe.var_q;
    s.S = sharpe.S;
    const auto decision = sentiment_and_allocation(s.S, s.C, p);
    s.Sigma = decision.Sigma;
    s.F = decision.F;

    s.income = s.w * s.n;
    s.i_total = (1.0 - s.G) * s.income;
    s.profit_residual = s.z * eq.c_tilde - s.w * s.n - s.q_star * s.k;
    return s;
}

namespace {

struct CapitalSolution {
    double k;
    EquilibriumOutcome eq;
    double income;
    int iterations;
};

// Capital k_t and the period equilibrium, resolving k_t against the income it
// generates when the coupling is simultaneous.
CapitalSolution solve_capital(const EconomyState& prev, double z, double G, double F, const ModelParams& p,
                              std::int64_t t) {
    const double carried = (1.0 - p.delta) * prev.k;
    const double share = F * (1.0 - G);
    const double asset_income = (prev.b + prev.q * prev.k) / (1.0 + p.pi);
    auto income_at = [&](const EquilibriumOutcome& eq) { return z * eq.w_tilde * eq.n + asset_income; };

    double k = carried + share * prev.income;
    if (p.coupling_mode == CouplingMode::Lagged) {
        const auto eq = solve_ces(k, G, p, z);
        return {k, eq, income_at(eq), 1};
    }

    double damping = 1.0;
    int last_sign = 0;
    for (int it = 1; it <= p.solver.fixed_point_max_iterations; ++it) {
        const auto eq = solve_ces(k, G, p, z);
        const double income = income_at(eq);
        const double diff = carried + share * income - k;
        if (std::abs(diff) <= p.solver.fixed_point_tolerance * k) return {k, eq, income, it};
        const int sign = diff > 0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) damping = 0.5;
        last_sign = sign;
        k += damping * diff;
    }
    throw EngineError("capital fixed point did not converge", t);
}

} // namespace

EconomyState step(const EconomyState& prev, const PeriodShocks& shocks, const ModelParams& p) {
    EconomyState s;
    s.t = prev.t + 1;

    // 1. productivity
    const auto prod = step_productivity(ProductivityState{prev.frak_z, prev.z}, p, shocks.normal);
    s.frak_z = prod.frak_z;
    s.z = prod.z;

    // 2. confidence and consumption propensity
    s.C = confidence(prev.c, p).C;
    s.G = consumption_rate(s.C, p);

    // 3. allocation from the Sharpe estimate through q_{t-1}
    const auto decision = sentiment_and_allocation(prev.S, s.C, p);
    s.Sigma = decision.Sigma;
    s.F = decision.F;

    // 4. capital and equilibrium
    CapitalSolution cap{};
    try {
        cap = solve_capital(prev, s.z, s.G, s.F, p, s.t);
    } catch (const EngineError& e) {
        if (e.period() >= 0) throw;
        throw EngineError(e.what(), s.t);
    } catch (const std::invalid_argument& e) {
        throw EngineError(e.what(), s.t);
    }
    s.k = cap.k;
    s.c = s.z * cap.eq.c_tilde;
    s.n = cap.eq.n;
    s.w = s.z * cap.eq.w_tilde;
    s.q_star = s.z * cap.eq.q_star_tilde;
    s.income = cap.income;
    s.i_total = (1.0 - s.G) * s.income;
    s.fixed_point_iterations = cap.iterations;

    // 5. realised return
    s.q = s.q_star * risk_from_uniform(shocks.uniform, p.a);

    // 6. Sharpe estimate
    const auto sharpe = update_sharpe(SharpeState{prev.mu_q, prev.var_q, prev.S}, s.q, p);
    s.mu_q = sharpe.mu_q;
    s.var_q = sharpe.var_q;
    s.S = sharpe.S;

    // 7. bonds
    s.b = (1.0 + p.r) * (1.0 - s.F) * s.i_total;

    // 8. profit residual (zero for constant returns to scale)
    s.profit_residual = s.c - s.w * s.n - s.q_star * s.k;
    return s;
}

EconomyState step(const EconomyState& prev, ShockStreams& streams, const ModelParams& p) {
    PeriodShocks shocks;
    shocks.normal = streams.productivity.normal();
    shocks.uniform = streams.risk.uniform_open_zero();
    return step(prev, shocks, p);
}

Trajectory run(const ModelParams& p, std::uint64_t cell, std::uint64_t replica) {
    validate(p);
    Trajectory traj;
    traj.meta.params_hash = params_hash(p);
    traj.meta.seed = p.engine.seed;
    traj.meta.cell = cell;
    traj.meta.replica = replica;
    traj.meta.burn_in = p.engine.burn_in;
    traj.meta.horizon = p.engine.horizon;
    traj.states.reserve(static_cast<std::size_t>(p.engine.horizon));

    auto streams = ShockStreams::derive(p.engine.seed, cell, replica);
    EconomyState state = initial_state(p);
    const std::int64_t total = p.engine.burn_in + p.engine.horizon;
    for (std::int64_t i = 0; i < total; ++i) {
        state = step(state, streams, p);
        if (i >= p.engine.burn_in) traj.states.push_back(state);
    }
    return traj;
}

const char* const kTrajectoryCsvHeader = "t,z,c,n,k,b,w,q_star,q,G,F,C,S,Sigma,income,profit_residual";

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << kTrajectoryCsvHeader << '\n';
    std::string line;
    for (const auto& s : traj.states) {
        line.clear();
        line += std::to_string(s.t);
        for (double v : {s.z, s.c, s.n, s.k, s.b, s.w, s.q_star, s.q, s.G, s.F, s.C, s.S, s.Sigma, s.income,
                         s.profit_residual}) {
            line += ',';
            line += text::format_double(v);
        }
        line += '\n';
        out << line;
    }
}

std::vector<EconomyState> read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trajectory CSV is empty");
    std::vector<std::string> columns;
    {
        std::stringstream hs(std::string(text::trim(line)));
        std::string col;
        while (std::getline(hs, col, ',')) columns.emplace_back(text::trim(col));
    }
    auto slot = [](EconomyState& s, const std::string& name) -> double* {
        if (name == "z") return &s.z;
        if (name == "c") return &s.c;
        if (name == "n") return &s.n;
        if (name == "k") return &s.k;
        if (name == "b") return &s.b;
        if (name == "w") return &s.w;
        if (name == "q_star") return &s.q_star;
        if (name == "q") return &s.q;
        if (name == "G") return &s.G;
        if (name == "F") return &s.F;
        if (name == "C") return &s.C;
        if (name == "S") return &s.S;
        if (name == "Sigma") return &s.Sigma;
        if (name == "income") return &s.income;
        if (name == "profit_residual") return &s.profit_residual;
        return nullptr;
    };

    std::vector<EconomyState> states;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (text::trim(line).empty()) continue;
        EconomyState s;
        std::stringstream ls(line);
        std::string cell;
        std::size_t i = 0;
        while (std::getline(ls, cell, ',')) {
            if (i >= columns.size())
                throw std::runtime_error("trajectory CSV row " + std::to_string(row) + " has too many fields");
            if (columns[i] == "t") {
                auto v = text::parse_int(cell);
                if (!v) throw std::runtime_error("bad t at row " + std::to_string(row));
                s.t = *v;
            } else if (double* dst = slot(s, columns[i])) {
                auto v = text::parse_double(cell);
                if (!v) throw std::runtime_error("bad value in column " + columns[i] + " at row " + std::to_string(row));
                *dst = *v;
            }
            ++i;
        }
        if (i != columns.size())
            throw std::runtime_error("trajectory CSV row " + std::to_string(row) + " has too few fields");
        states.push_back(s);
    }
    return states;
}

} // namespace confcycle
