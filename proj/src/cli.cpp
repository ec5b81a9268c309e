#include "confcycle/cli.hpp"

#include "confcycle/dynamics.hpp"
#include "confcycle/equilibrium.hpp"
#include "confcycle/error.hpp"
#include "confcycle/indicators.hpp"
#include "confcycle/params.hpp"
#include "confcycle/sweep.hpp"
#include "confcycle/text.hpp"
#include "confcycle/version.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace confcycle::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ConfigOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "configuration file (complete key = value listing)");
        app->add_option("--override,-o", overrides, "key=value applied after the config file; repeatable, last wins");
        app->add_option("--seed", seed, "master seed (overrides engine.seed)");
    }

    ModelParams resolve() const {
        ModelParams p = config.empty() ? defaults() : load(read_file(config));
        for (const auto& o : overrides) apply_override(p, o);
        if (seed) p.engine.seed = *seed;
        validate(p);
        return p;
    }
};

// "a,b,c" or "start:stop:count" (count evenly spaced points, both ends included).
std::vector<double> parse_values(const std::string& spec, const std::string& what) {
    std::vector<double> values;
    const auto trimmed = text::trim(spec);
    if (trimmed.empty()) return values;
    if (trimmed.find(':') != std::string_view::npos) {
        std::vector<std::string> parts;
        std::stringstream ss{std::string(trimmed)};
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(part);
        if (parts.size() != 3) throw UsageError(what + ": expected start:stop:count");
        const auto a = text::parse_double(text::trim(parts[0]));
        const auto b = text::parse_double(text::trim(parts[1]));
        const auto n = text::parse_int(text::trim(parts[2]));
        if (!a || !b || !n || *n < 0) throw UsageError(what + ": malformed range '" + spec + "'");
        for (std::int64_t i = 0; i < *n; ++i) {
            if (*n == 1) {
                values.push_back(*a);
                break;
            }
            const double f = static_cast<double>(i) / static_cast<double>(*n - 1);
            values.push_back(i == *n - 1 ? *b : *a + (*b - *a) * f);
        }
        return values;
    }
    std::stringstream ss{std::string(trimmed)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = text::parse_double(text::trim(item));
        if (!v) throw UsageError(what + ": malformed value '" + item + "'");
        values.push_back(*v);
    }
    return values;
}

SweepAxis parse_axis(const std::string& spec, const std::string& what) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError(what + ": expected name=values");
    SweepAxis axis;
    axis.name = std::string(text::trim(std::string_view(spec).substr(0, eq)));
    axis.values = parse_values(spec.substr(eq + 1), what);
    return axis;
}

void write_text(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex;
    ss.width(16);
    ss.fill('0');
    ss << v;
    return ss.str();
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
    ConfigOptions cfg;
    std::string out = "out";
    bool histograms = false;

    int exec() const {
        const ModelParams p = cfg.resolve();
        const Trajectory traj = run(p);
        nlohmann::json summary;
        std::optional<CrisisReport> report;
        if (!traj.states.empty()) {
            report = analyse(traj.states, p);
            summary = to_json(*report);
        } else {
            summary = nlohmann::json::object();
        }
        summary["seed"] = p.engine.seed;
        summary["horizon"] = p.engine.horizon;
        summary["burn_in"] = p.engine.burn_in;
        summary["params_hash"] = hex64(traj.meta.params_hash);
        summary["code_version"] = std::string(code_version());

        fs::create_directories(out);
        {
            std::ofstream f(fs::path(out) / "trajectory.csv", std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write trajectory.csv in " + out);
            write_trajectory_csv(f, traj);
        }
        write_text(fs::path(out) / "summary.json", summary.dump(2) + "\n");
        write_text(fs::path(out) / "config.txt", save(p));
        if (histograms && report) {
            const std::pair<const char*, const Histogram*> hs[] = {
                {"hist_c.csv", &report->hist_c}, {"hist_n.csv", &report->hist_n}, {"hist_S.csv", &report->hist_S}};
            for (const auto& [name, h] : hs) {
                std::ofstream f(fs::path(out) / name, std::ios::binary | std::ios::trunc);
                write_histogram_csv(f, *h);
            }
        }
        return kExitOk;
    }
};

struct SweepCmd {
    ConfigOptions cfg;
    std::string axis1, axis2;
    int seeds = 5;
    std::optional<std::int64_t> horizon, burn_in;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string out = "sweep_out";
    std::string resume;
    std::optional<int> stop_after;
    bool quiet = false;

    int exec() {
        SweepPlan plan;
        SweepOptions opts;
        if (!resume.empty()) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(read_file(resume));
            } catch (const nlohmann::json::exception& e) {
                throw UsageError("cannot parse manifest " + resume + ": " + e.what());
            }
            auto loaded = read_manifest(j);
            plan = loaded.plan;
            if (loaded.code_version == code_version()) {
                opts.finished = std::move(loaded.finished);
            } else {
                std::cerr << "note: manifest was written by code version " << loaded.code_version
                          << "; recomputing all cells\n";
            }
        } else {
            if (axis1.empty() || axis2.empty()) throw UsageError("sweep needs --axis1 and --axis2 (or --resume)");
            plan.base = cfg.resolve();
            plan.axis1 = parse_axis(axis1, "--axis1");
            plan.axis2 = parse_axis(axis2, "--axis2");
            plan.seeds_per_cell = seeds;
            plan.horizon = horizon.value_or(plan.base.engine.horizon);
            plan.burn_in = burn_in.value_or(plan.base.engine.burn_in);
        }
        validate(plan);

        const fs::path dir(out);
        fs::create_directories(dir);
        const fs::path manifest_path = dir / "manifest.json";
        const fs::path csv_path = dir / "grid.csv";

        const std::size_t total = plan.cell_count();
        std::size_t done = opts.finished.size();
        int fresh = 0;
        std::atomic<bool> stop{false};
        opts.workers = workers;
        opts.stop = &stop;
        opts.on_cell = [&](const SweepResult& r, const PhaseCell& cell) {
            ++done;
            ++fresh;
            if (!quiet) {
                std::cerr << "cell " << cell.index + 1 << "/" << total << " (" << done << " done)";
                if (cell.error) std::cerr << " error: " << *cell.error;
                std::cerr << '\n';
            }
            write_file_atomic(manifest_path, manifest(r).dump(1) + "\n");
            if (stop_after && fresh >= *stop_after) stop.store(true);
            if (g_stop.load()) stop.store(true);
        };

        std::thread watcher;
        std::atomic<bool> finished{false};
        watcher = std::thread([&] {
            while (!finished.load()) {
                if (g_stop.load()) stop.store(true);
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
            }
        });
        SweepResult result;
        try {
            result = run_sweep(plan, opts);
        } catch (...) {
            finished.store(true);
            watcher.join();
            throw;
        }
        finished.store(true);
        watcher.join();

        write_file_atomic(manifest_path, manifest(result).dump(1) + "\n");
        std::ostringstream csv;
        write_sweep_csv(csv, result);
        write_file_atomic(csv_path, csv.str());
        if (!result.complete()) {
            std::cerr << "interrupted: " << done << "/" << total << " cells finished; resume with --resume "
                      << manifest_path.string() << '\n';
            return kExitInterrupted;
        }
        for (const auto& c : result.cells)
            if (c && c->error) return kExitEngine;
        return kExitOk;
    }
};

struct LeontiefCmd {
    ConfigOptions cfg;
    std::string k_range = "0.1:3:30";
    std::string g_range = "0.05:0.95:5";
    std::string out;

    int exec() const {
        const ModelParams p = cfg.resolve();
        const auto ks = parse_values(k_range, "--k");
        const auto gs = parse_values(g_range, "--G");
        for (double k : ks)
            if (!(k > 0)) throw UsageError("--k values must be positive");
        for (double g : gs)
            if (!(g > 0 && g <= 1)) throw UsageError("--G values must lie in (0, 1]");

        std::ostringstream csv;
        csv << "k,G,c_tilde,n,w_tilde,q_star_tilde,regime\n";
        for (double G : gs) {
            for (double k : ks) {
                const auto eq = solve_leontief(k, G, p);
                const auto reg = leontief_regime(k, G, p);
                csv << text::format_double(k) << ',' << text::format_double(G) << ','
                    << text::format_double(eq.c_tilde) << ',' << text::format_double(eq.n) << ','
                    << text::format_double(eq.w_tilde) << ',' << text::format_double(eq.q_star_tilde) << ','
                    << (reg.regime == CapitalRegime::Abundant ? "abundant" : "scarce") << '\n';
            }
        }
        if (out.empty()) std::cout << csv.str();
        else write_text(out, csv.str());
        return kExitOk;
    }
};

struct ReportCmd {
    ConfigOptions cfg;
    std::string trajectory;
    std::string out;

    int exec() const {
        const ModelParams p = cfg.resolve();
        std::ifstream in(trajectory, std::ios::binary);
        if (!in) throw UsageError("cannot read " + trajectory);
        std::vector<EconomyState> states;
        try {
            states = read_trajectory_csv(in);
        } catch (const std::runtime_error& e) {
            throw UsageError(e.what());
        }
        if (states.empty()) throw UsageError("trajectory " + trajectory + " has no rows");
        const auto j = to_json(analyse(states, p));
        if (out.empty()) std::cout << j.dump(2) << '\n';
        else write_text(out, j.dump(2) + "\n");
        return kExitOk;
    }
};

} // namespace

int main(int argc, const char* const* argv) {
    CLI::App app{"Behavioural business-cycle simulator with confidence feedback"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(code_version()));

    SimulateCmd sim;
    auto* s = app.add_subcommand("simulate", "run one trajectory; writes trajectory.csv, summary.json, config.txt");
    sim.cfg.attach(s);
    s->add_option("--out", sim.out, "output directory")->capture_default_str();
    s->add_flag("--histograms", sim.histograms, "also write hist_c.csv, hist_n.csv and hist_S.csv");

    SweepCmd sw;
    auto* w = app.add_subcommand("sweep", "parameter grid in parallel; writes grid.csv and manifest.json");
    sw.cfg.attach(w);
    w->add_option("--axis1", sw.axis1, "name=v1,v2,... or name=start:stop:count");
    w->add_option("--axis2", sw.axis2, "name=v1,v2,... or name=start:stop:count");
    w->add_option("--seeds", sw.seeds, "seeds per cell")->capture_default_str();
    w->add_option("--horizon", sw.horizon, "recorded periods per run (default engine.horizon)");
    w->add_option("--burn-in", sw.burn_in, "discarded periods per run (default engine.burn_in)");
    w->add_option("--workers,-j", sw.workers, "worker threads")->capture_default_str();
    w->add_option("--out", sw.out, "output directory")->capture_default_str();
    w->add_option("--resume", sw.resume, "continue the plan stored in a manifest");
    w->add_option("--stop-after", sw.stop_after, "stop after this many newly finished cells");
    w->add_flag("--quiet,-q", sw.quiet, "no progress on stderr");

    LeontiefCmd le;
    auto* l = app.add_subcommand("leontief", "table of the Leontief-limit equilibrium over k and G");
    le.cfg.attach(l);
    l->add_option("--k", le.k_range, "capital values")->capture_default_str();
    l->add_option("--G", le.g_range, "consumption rates")->capture_default_str();
    l->add_option("--out", le.out, "output CSV (default stdout)");

    ReportCmd rep;
    auto* r = app.add_subcommand("report", "crisis indicators of a trajectory CSV as JSON");
    rep.cfg.attach(r);
    r->add_option("--trajectory", rep.trajectory, "trajectory CSV")->required();
    r->add_option("--out", rep.out, "output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    g_stop.store(false);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    try {
        if (*s) return sim.exec();
        if (*w) return sw.exec();
        if (*l) return le.exec();
        if (*r) return rep.exec();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const EngineError& e) {
        std::cerr << "engine error: " << e.what() << '\n';
        return kExitEngine;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitConfig;
}

} // namespace confcycle::cli
