#include "confcycle/sweep.hpp"

#include "confcycle/dynamics.hpp"
#include "confcycle/error.hpp"
#include "confcycle/text.hpp"
#include "confcycle/version.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace confcycle {

namespace {

ModelParams plan_base(const SweepPlan& plan) {
    ModelParams p = plan.base;
    p.engine.horizon = plan.horizon;
    p.engine.burn_in = plan.burn_in;
    return p;
}

void check_axis(const SweepAxis& axis, const char* label) {
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), axis.name) == keys.end())
        throw ConfigError(ConfigError::Kind::UnknownKey, axis.name, std::string(label) + " is not a configuration key");
    if (axis.name == "coupling_mode")
        throw ConfigError(ConfigError::Kind::Malformed, axis.name, std::string(label) + " must be numeric");
    if (axis.values.empty())
        throw ConfigError(ConfigError::Kind::Missing, axis.name, std::string(label) + " has no values");
}

std::optional<double> median(std::vector<double> v) {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

nlohmann::json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

std::optional<double> opt_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

} // namespace

void validate(const SweepPlan& plan) {
    check_axis(plan.axis1, "axis1");
    check_axis(plan.axis2, "axis2");
    if (plan.seeds_per_cell < 1)
        throw ConfigError(ConfigError::Kind::OutOfRange, "seeds", "at least one seed per cell is required");
    if (plan.horizon < 1)
        throw ConfigError(ConfigError::Kind::OutOfRange, "engine.horizon", "a sweep needs a positive horizon");
    validate(plan_base(plan));
    for (std::size_t i = 0; i < plan.cell_count(); ++i) validate(cell_params(plan, i));
}

ModelParams cell_params(const SweepPlan& plan, std::size_t cell_index) {
    const std::size_t n2 = plan.axis2.values.size();
    ModelParams p = plan_base(plan);
    apply_override(p, plan.axis1.name, text::format_double(plan.axis1.values.at(cell_index / n2)));
    apply_override(p, plan.axis2.name, text::format_double(plan.axis2.values.at(cell_index % n2)));
    return p;
}

SeedSummary summarise(const CrisisReport& report, std::uint64_t replica) {
    SeedSummary s;
    s.replica = replica;
    s.xi_c = report.xi_c;
    s.xi_k = report.xi_k;
    s.mean_sharpe = report.mean_sharpe;
    s.t_low_mean = report.spells.t_low_mean;
    s.t_high_mean = report.spells.t_high_mean;
    s.n_spells = static_cast<std::int64_t>(report.spells.spells_low.size());
    s.phase = report.label.phase;
    s.bimodal_c = report.hist_c.bimodal;
    s.bimodal_S = report.hist_S.bimodal;
    return s;
}

void aggregate(PhaseCell& cell, const AnalysisSettings& analysis) {
    if (cell.error || cell.seeds.empty()) return;
    std::vector<double> lc, lk, tl, th;
    std::map<Phase, int> votes;
    double sharpe = 0.0;
    for (const auto& s : cell.seeds) {
        lc.push_back(log10_floored(s.xi_c));
        lk.push_back(log10_floored(s.xi_k));
        if (s.t_low_mean) tl.push_back(*s.t_low_mean);
        if (s.t_high_mean) th.push_back(*s.t_high_mean);
        ++votes[s.phase];
        sharpe += s.mean_sharpe;
    }
    cell.log10_xi_c = *median(lc);
    cell.log10_xi_k = *median(lk);
    cell.mean_sharpe = sharpe / static_cast<double>(cell.seeds.size());
    cell.t_low_mean = median(tl);
    cell.t_high_mean = median(th);

    int best = 0;
    std::vector<Phase> leaders;
    for (const auto& [phase, n] : votes) {
        if (n > best) {
            best = n;
            leaders = {phase};
        } else if (n == best) {
            leaders.push_back(phase);
        }
    }
    cell.phase = leaders.front();
    if (leaders.size() > 1) {
        const Phase from_medians = classify_phase(std::pow(10.0, cell.log10_xi_c), std::pow(10.0, cell.log10_xi_k),
                                                  analysis.phase_threshold, analysis.permanent_threshold)
                                       .phase;
        if (std::find(leaders.begin(), leaders.end(), from_medians) != leaders.end()) cell.phase = from_medians;
    }
}

bool SweepResult::complete() const {
    return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.has_value(); });
}

SweepResult run_sweep(const SweepPlan& plan, const SweepOptions& options) {
    validate(plan);
    const std::size_t ncells = plan.cell_count();
    const auto seeds = static_cast<std::size_t>(plan.seeds_per_cell);

    SweepResult result;
    result.plan = plan;
    result.cells.resize(ncells);
    for (const auto& done : options.finished) {
        if (done.index >= ncells) throw std::runtime_error("finished cell index outside the plan");
        result.cells[done.index] = done;
    }

    struct Outcome {
        std::optional<SeedSummary> summary;
        std::string error;
    };
    std::vector<std::size_t> todo;
    for (std::size_t c = 0; c < ncells; ++c)
        if (!result.cells[c]) todo.push_back(c);

    std::vector<Outcome> slots(todo.size() * seeds);
    std::vector<std::atomic<int>> remaining(todo.size());
    for (auto& r : remaining) r.store(static_cast<int>(seeds));
    std::atomic<std::size_t> next{0};

    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::size_t> finished_slots; // positions in `todo`
    unsigned running = 0;

    auto worker = [&] {
        for (;;) {
            if (options.stop && options.stop->load()) break;
            const std::size_t task = next.fetch_add(1);
            if (task >= slots.size()) break;
            const std::size_t pos = task / seeds;
            const std::size_t replica = task % seeds;
            const std::size_t cell = todo[pos];
            Outcome& out = slots[task];
            try {
                const ModelParams p = cell_params(plan, cell);
                const auto traj = run(p, cell, replica);
                out.summary = summarise(analyse(traj.states, p), replica);
            } catch (const std::exception& e) {
                out.error = e.what();
            }
            if (remaining[pos].fetch_sub(1) == 1) {
                std::lock_guard lock(mu);
                finished_slots.push_back(pos);
                cv.notify_one();
            }
        }
        std::lock_guard lock(mu);
        --running;
        cv.notify_one();
    };

    const unsigned nworkers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(std::max<std::size_t>(slots.size(), 1))));
    std::vector<std::thread> pool;
    running = nworkers;
    for (unsigned i = 0; i < nworkers; ++i) pool.emplace_back(worker);

    auto finish_cell = [&](std::size_t pos) {
        const std::size_t c = todo[pos];
        PhaseCell cell;
        cell.index = c;
        cell.axis1 = plan.axis1.values[c / plan.axis2.values.size()];
        cell.axis2 = plan.axis2.values[c % plan.axis2.values.size()];
        for (std::size_t r = 0; r < seeds; ++r) {
            Outcome& out = slots[pos * seeds + r];
            if (out.summary) cell.seeds.push_back(*out.summary);
            else if (!cell.error) cell.error = "replica " + std::to_string(r) + ": " + out.error;
        }
        aggregate(cell, plan.base.analysis);
        result.cells[c] = cell;
        if (options.on_cell) options.on_cell(result, cell);
    };

    std::unique_lock lock(mu);
    for (;;) {
        cv.wait(lock, [&] { return !finished_slots.empty() || running == 0; });
        while (!finished_slots.empty()) {
            const std::size_t pos = finished_slots.front();
            finished_slots.pop_front();
            lock.unlock();
            finish_cell(pos);
            lock.lock();
        }
        if (running == 0) break;
    }
    lock.unlock();
    for (auto& t : pool) t.join();
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << kSweepCsvHeader << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); };
    for (const auto& slot : result.cells) {
        if (!slot) continue;
        const PhaseCell& c = *slot;
        out << text::format_double(c.axis1) << ',' << text::format_double(c.axis2) << ',';
        if (c.error) {
            out << ",,,error,,\n";
            continue;
        }
        out << text::format_double(c.log10_xi_c) << ',' << text::format_double(c.log10_xi_k) << ','
            << text::format_double(c.mean_sharpe) << ',' << to_string(c.phase) << ',' << opt(c.t_low_mean) << ','
            << opt(c.t_high_mean) << '\n';
    }
}

nlohmann::json plan_to_json(const SweepPlan& plan) {
    nlohmann::json base = nlohmann::json::object();
    for (const auto& key : config_keys()) base[key] = get_value(plan.base, key);
    return {
        {"base", base},
        {"axis1", {{"name", plan.axis1.name}, {"values", plan.axis1.values}}},
        {"axis2", {{"name", plan.axis2.name}, {"values", plan.axis2.values}}},
        {"seeds_per_cell", plan.seeds_per_cell},
        {"horizon", plan.horizon},
        {"burn_in", plan.burn_in},
    };
}

SweepPlan plan_from_json(const nlohmann::json& j) {
    SweepPlan plan;
    std::string text;
    for (const auto& [key, value] : j.at("base").items()) text += key + " = " + value.get<std::string>() + "\n";
    plan.base = load(text);
    plan.axis1.name = j.at("axis1").at("name").get<std::string>();
    plan.axis1.values = j.at("axis1").at("values").get<std::vector<double>>();
    plan.axis2.name = j.at("axis2").at("name").get<std::string>();
    plan.axis2.values = j.at("axis2").at("values").get<std::vector<double>>();
    plan.seeds_per_cell = j.at("seeds_per_cell").get<int>();
    plan.horizon = j.at("horizon").get<std::int64_t>();
    plan.burn_in = j.at("burn_in").get<std::int64_t>();
    return plan;
}

nlohmann::json to_json(const PhaseCell& c) {
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& s : c.seeds) {
        seeds.push_back({
            {"replica", s.replica},
            {"xi_c", s.xi_c},
            {"xi_k", s.xi_k},
            {"mean_sharpe", s.mean_sharpe},
            {"t_low_mean", opt_json(s.t_low_mean)},
            {"t_high_mean", opt_json(s.t_high_mean)},
            {"n_spells", s.n_spells},
            {"phase", to_string(s.phase)},
            {"bimodal_c", s.bimodal_c},
            {"bimodal_S", s.bimodal_S},
        });
    }
    nlohmann::json j{
        {"index", c.index},
        {"axis1", c.axis1},
        {"axis2", c.axis2},
        {"seeds", seeds},
        {"error", c.error ? nlohmann::json(*c.error) : nlohmann::json(nullptr)},
    };
    if (!c.error) {
        j["log10_xi_c"] = c.log10_xi_c;
        j["log10_xi_k"] = c.log10_xi_k;
        j["mean_sharpe"] = c.mean_sharpe;
        j["phase"] = to_string(c.phase);
        j["t_low_mean"] = opt_json(c.t_low_mean);
        j["t_high_mean"] = opt_json(c.t_high_mean);
    }
    return j;
}

PhaseCell cell_from_json(const nlohmann::json& j) {
    auto phase_of = [](const nlohmann::json& v) {
        auto ph = parse_phase(v.get<std::string>());
        if (!ph) throw std::runtime_error("unknown phase label in manifest");
        return *ph;
    };
    PhaseCell c;
    c.index = j.at("index").get<std::size_t>();
    c.axis1 = j.at("axis1").get<double>();
    c.axis2 = j.at("axis2").get<double>();
    for (const auto& s : j.at("seeds")) {
        SeedSummary seed;
        seed.replica = s.at("replica").get<std::uint64_t>();
        seed.xi_c = s.at("xi_c").get<double>();
        seed.xi_k = s.at("xi_k").get<double>();
        seed.mean_sharpe = s.at("mean_sharpe").get<double>();
        seed.t_low_mean = opt_from(s.at("t_low_mean"));
        seed.t_high_mean = opt_from(s.at("t_high_mean"));
        seed.n_spells = s.at("n_spells").get<std::int64_t>();
        seed.phase = phase_of(s.at("phase"));
        seed.bimodal_c = s.at("bimodal_c").get<bool>();
        seed.bimodal_S = s.at("bimodal_S").get<bool>();
        c.seeds.push_back(seed);
    }
    if (!j.at("error").is_null()) {
        c.error = j.at("error").get<std::string>();
        return c;
    }
    c.log10_xi_c = j.at("log10_xi_c").get<double>();
    c.log10_xi_k = j.at("log10_xi_k").get<double>();
    c.mean_sharpe = j.at("mean_sharpe").get<double>();
    c.phase = phase_of(j.at("phase"));
    c.t_low_mean = opt_from(j.at("t_low_mean"));
    c.t_high_mean = opt_from(j.at("t_high_mean"));
    return c;
}

nlohmann::json manifest(const SweepResult& result) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : result.cells)
        if (c) cells.push_back(to_json(*c));
    return {
        {"format", "confcycle-sweep"},
        {"status", result.complete() ? "complete" : "incomplete"},
        {"code_version", std::string(code_version())},
        {"seeding",
         {{"master_seed", result.plan.base.engine.seed},
          {"scheme", "splitmix64 chain over (master_seed, cell_index, replica, stream_tag)"},
          {"cell_index", "row-major: axis1_index * len(axis2) + axis2_index"},
          {"stream_tags", {{"productivity", 1}, {"risk", 2}}}}},
        {"plan", plan_to_json(result.plan)},
        {"cells", cells},
    };
}

LoadedManifest read_manifest(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "confcycle-sweep") throw std::runtime_error("not a sweep manifest");
        LoadedManifest m;
        m.plan = plan_from_json(j.at("plan"));
        m.code_version = j.at("code_version").get<std::string>();
        const std::size_t n2 = m.plan.axis2.values.size();
        for (const auto& cj : j.at("cells")) {
            PhaseCell c = cell_from_json(cj);
            if (c.index >= m.plan.cell_count() || c.axis1 != m.plan.axis1.values[c.index / n2] ||
                c.axis2 != m.plan.axis2.values[c.index % n2])
                throw std::runtime_error("cell " + std::to_string(c.index) + " does not match the plan");
            m.finished.push_back(std::move(c));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed sweep manifest: ") + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace confcycle
