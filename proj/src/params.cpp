#include "confcycle/params.hpp"

#include "confcycle/error.hpp"
#include "confcycle/text.hpp"

#include <cmath>
#include <functional>
#include <type_traits>
#include <set>
#include <sstream>

namespace confcycle {

ModelParams defaults() { return ModelParams{}; }

namespace {

using Kind = ConfigError::Kind;

[[noreturn]] void range_error(const char* field, const std::string& detail) {
    throw ConfigError(Kind::OutOfRange, field, detail);
}

void require(bool ok, const char* field, const char* detail) {
    if (!ok) range_error(field, detail);
}

void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) range_error(field, "must be finite");
}

// One entry per config key. Setters receive the trimmed textual value.
struct Field {
    std::string key;
    std::function<void(ModelParams&, std::string_view)> set;
    std::function<std::string(const ModelParams&)> get;
};

// Accessors map a ModelParams to one of its scalar slots. Getters work on a
// copy so a single accessor serves both directions.
template <typename Accessor>
Field real_field(std::string key, Accessor acc) {
    return Field{
        key,
        [key, acc](ModelParams& p, std::string_view v) {
            auto x = text::parse_double(v);
            if (!x) throw ConfigError(Kind::Malformed, key, "expected a number, got '" + std::string(v) + "'");
            acc(p) = *x;
        },
        [acc](const ModelParams& p) {
            ModelParams copy = p;
            return text::format_double(acc(copy));
        },
    };
}

template <typename Accessor>
Field int_field(std::string key, Accessor acc) {
    return Field{
        key,
        [key, acc](ModelParams& p, std::string_view v) {
            auto x = text::parse_int(v);
            if (!x) throw ConfigError(Kind::Malformed, key, "expected an integer, got '" + std::string(v) + "'");
            using T = std::remove_reference_t<decltype(acc(p))>;
            acc(p) = static_cast<T>(*x);
        },
        [acc](const ModelParams& p) {
            ModelParams copy = p;
            return std::to_string(acc(copy));
        },
    };
}

#define CC_FIELD(path) [](ModelParams& p) -> auto& { return p.path; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(real_field("gamma", CC_FIELD(gamma)));
        f.push_back(real_field("alpha", CC_FIELD(alpha)));
        f.push_back(real_field("rho", CC_FIELD(rho)));
        f.push_back(real_field("z0", CC_FIELD(z0)));
        f.push_back(real_field("eta", CC_FIELD(eta)));
        f.push_back(real_field("sigma_z", CC_FIELD(sigma_z)));
        f.push_back(real_field("delta", CC_FIELD(delta)));
        f.push_back(real_field("r", CC_FIELD(r)));
        f.push_back(real_field("pi", CC_FIELD(pi)));
        f.push_back(real_field("a", CC_FIELD(a)));
        f.push_back(real_field("c0", CC_FIELD(c0)));
        f.push_back(real_field("theta_c", CC_FIELD(theta_c)));
        f.push_back(real_field("g_min", CC_FIELD(g_min)));
        f.push_back(real_field("g_max", CC_FIELD(g_max)));
        f.push_back(real_field("lambda", CC_FIELD(lambda)));
        f.push_back(real_field("nu", CC_FIELD(nu)));
        f.push_back(real_field("n_scale", CC_FIELD(n_scale)));
        f.push_back(real_field("theta_k", CC_FIELD(theta_k)));
        f.push_back(real_field("f_min", CC_FIELD(f_min)));
        f.push_back(real_field("f_max", CC_FIELD(f_max)));
        f.push_back(real_field("sharpe_floor", CC_FIELD(sharpe_floor)));
        f.push_back(real_field("sharpe_cap", CC_FIELD(sharpe_cap)));
        f.push_back(Field{
            "coupling_mode",
            [](ModelParams& p, std::string_view v) {
                if (v == "simultaneous") p.coupling_mode = CouplingMode::Simultaneous;
                else if (v == "lagged") p.coupling_mode = CouplingMode::Lagged;
                else
                    throw ConfigError(Kind::Malformed, "coupling_mode",
                                      "expected 'simultaneous' or 'lagged', got '" + std::string(v) + "'");
            },
            [](const ModelParams& p) { return to_string(p.coupling_mode); },
        });
        f.push_back(real_field("solver.tolerance", CC_FIELD(solver.tolerance)));
        f.push_back(int_field("solver.max_iterations", CC_FIELD(solver.max_iterations)));
        f.push_back(real_field("solver.fixed_point_tolerance", CC_FIELD(solver.fixed_point_tolerance)));
        f.push_back(int_field("solver.fixed_point_max_iterations", CC_FIELD(solver.fixed_point_max_iterations)));
        f.push_back(int_field("engine.horizon", CC_FIELD(engine.horizon)));
        f.push_back(int_field("engine.burn_in", CC_FIELD(engine.burn_in)));
        f.push_back(Field{
            "engine.seed",
            [](ModelParams& p, std::string_view v) {
                auto x = text::parse_uint(v);
                if (!x) throw ConfigError(Kind::Malformed, "engine.seed", "expected an unsigned integer");
                p.engine.seed = *x;
            },
            [](const ModelParams& p) { return std::to_string(p.engine.seed); },
        });
        f.push_back(real_field("analysis.phase_threshold", CC_FIELD(analysis.phase_threshold)));
        f.push_back(real_field("analysis.permanent_threshold", CC_FIELD(analysis.permanent_threshold)));
        f.push_back(int_field("analysis.histogram_bins", CC_FIELD(analysis.histogram_bins)));
        f.push_back(real_field("analysis.bimodal_min_mass", CC_FIELD(analysis.bimodal_min_mass)));
        f.push_back(real_field("analysis.bimodal_min_dip", CC_FIELD(analysis.bimodal_min_dip)));
        f.push_back(real_field("analysis.sharpe_clip_quantile", CC_FIELD(analysis.sharpe_clip_quantile)));
        return f;
    }();
    return table;
}

#undef CC_FIELD

const Field& find_field(std::string_view key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw ConfigError(Kind::UnknownKey, std::string(key), "");
}

} // namespace

void validate(const ModelParams& p) {
    require_finite(p.gamma, "gamma");
    require(p.gamma > 0, "gamma", "must be > 0");
    require_finite(p.alpha, "alpha");
    require(p.alpha > 0 && p.alpha < 1, "alpha", "must lie in (0, 1)");
    require_finite(p.rho, "rho");
    require(p.rho > 0, "rho", "must be > 0");
    require_finite(p.z0, "z0");
    require(p.z0 > 0, "z0", "must be > 0");
    require_finite(p.eta, "eta");
    require(p.eta >= 0 && p.eta < 1, "eta", "must lie in [0, 1)");
    require_finite(p.sigma_z, "sigma_z");
    require(p.sigma_z >= 0, "sigma_z", "must be >= 0");
    require_finite(p.delta, "delta");
    require(p.delta >= 0 && p.delta < 1, "delta", "must lie in [0, 1)");
    require_finite(p.r, "r");
    require(p.r > -1, "r", "must be > -1");
    require_finite(p.pi, "pi");
    require(p.pi > -1, "pi", "must be > -1");
    require(!std::isnan(p.a) && p.a > 0, "a", "must be > 0 (inf disables risk)");
    require_finite(p.c0, "c0");
    require(p.c0 >= 0, "c0", "must be >= 0");
    require_finite(p.theta_c, "theta_c");
    require(p.theta_c > 0, "theta_c", "must be > 0");
    require_finite(p.g_min, "g_min");
    require_finite(p.g_max, "g_max");
    require(p.g_min >= 0, "g_min", "must be >= 0");
    require(p.g_max <= 1, "g_max", "must be <= 1");
    require(p.g_min < p.g_max, "g_max", "must exceed g_min");
    require_finite(p.lambda, "lambda");
    require(p.lambda > 0 && p.lambda < 1, "lambda", "must lie in (0, 1)");
    require_finite(p.nu, "nu");
    require(p.nu >= 0 && p.nu <= 1, "nu", "must lie in [0, 1]");
    require_finite(p.n_scale, "n_scale");
    require(p.n_scale > 0, "n_scale", "must be > 0");
    require_finite(p.theta_k, "theta_k");
    require(p.theta_k > 0, "theta_k", "must be > 0");
    require_finite(p.f_min, "f_min");
    require_finite(p.f_max, "f_max");
    require(p.f_min >= 0, "f_min", "must be >= 0");
    require(p.f_max <= 1, "f_max", "must be <= 1");
    require(p.f_min <= p.f_max, "f_max", "must be >= f_min");
    require_finite(p.sharpe_floor, "sharpe_floor");
    require(p.sharpe_floor > 0, "sharpe_floor", "must be > 0");
    require_finite(p.sharpe_cap, "sharpe_cap");
    require(p.sharpe_cap > 0, "sharpe_cap", "must be > 0");

    require(std::isfinite(p.solver.tolerance) && p.solver.tolerance > 0, "solver.tolerance", "must be > 0");
    require(p.solver.max_iterations >= 1, "solver.max_iterations", "must be >= 1");
    require(std::isfinite(p.solver.fixed_point_tolerance) && p.solver.fixed_point_tolerance > 0,
            "solver.fixed_point_tolerance", "must be > 0");
    require(p.solver.fixed_point_max_iterations >= 1, "solver.fixed_point_max_iterations", "must be >= 1");
    require(p.engine.horizon >= 0, "engine.horizon", "must be >= 0");
    require(p.engine.burn_in >= 0, "engine.burn_in", "must be >= 0");

    const auto& an = p.analysis;
    require(std::isfinite(an.phase_threshold) && an.phase_threshold > 0 && an.phase_threshold <= 1,
            "analysis.phase_threshold", "must lie in (0, 1]");
    require(std::isfinite(an.permanent_threshold) && an.permanent_threshold > 0 && an.permanent_threshold <= 1,
            "analysis.permanent_threshold", "must lie in (0, 1]");
    require(an.histogram_bins >= 2, "analysis.histogram_bins", "must be >= 2");
    require(std::isfinite(an.bimodal_min_mass) && an.bimodal_min_mass >= 0 && an.bimodal_min_mass < 0.5,
            "analysis.bimodal_min_mass", "must lie in [0, 0.5)");
    require(std::isfinite(an.bimodal_min_dip) && an.bimodal_min_dip >= 0 && an.bimodal_min_dip < 1,
            "analysis.bimodal_min_dip", "must lie in [0, 1)");
    require(std::isfinite(an.sharpe_clip_quantile) && an.sharpe_clip_quantile >= 0 && an.sharpe_clip_quantile < 0.5,
            "analysis.sharpe_clip_quantile", "must lie in [0, 0.5)");
}

Timescales derived_timescales(const ModelParams& p) {
    Timescales ts{};
    ts.t_lambda = 1.0 / std::abs(std::log(p.lambda));
    ts.t_eta = 1.0 / std::abs(std::log(p.eta));
    if (p.delta > 0) ts.t_delta = 1.0 / std::abs(std::log1p(-p.delta));
    return ts;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

ModelParams load(std::string_view text) {
    ModelParams p = defaults();
    std::set<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(Kind::Malformed, "line " + std::to_string(line_no), "expected 'key = value'");
        const std::string key(text::trim(line.substr(0, eq)));
        const auto value = text::trim(line.substr(eq + 1));
        const Field& f = find_field(key);
        if (!seen.insert(key).second) throw ConfigError(Kind::Duplicate, key, "");
        f.set(p, value);
    }
    for (const auto& f : fields())
        if (!seen.count(f.key)) throw ConfigError(Kind::Missing, f.key, "");
    validate(p);
    return p;
}

std::string save(const ModelParams& p) {
    std::ostringstream out;
    out << "# confcycle configuration\n";
    for (const auto& f : fields()) out << f.key << " = " << f.get(p) << '\n';
    return out.str();
}

void apply_override(ModelParams& p, std::string_view key, std::string_view value) {
    find_field(text::trim(key)).set(p, text::trim(value));
}

void apply_override(ModelParams& p, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(Kind::Malformed, std::string(text::trim(assignment)), "override must be key=value");
    apply_override(p, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string get_value(const ModelParams& p, std::string_view key) { return find_field(key).get(p); }

std::uint64_t params_hash(const ModelParams& p) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : save(p)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_string(CouplingMode mode) {
    return mode == CouplingMode::Simultaneous ? "simultaneous" : "lagged";
}

} // namespace confcycle
