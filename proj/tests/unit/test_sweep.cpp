#include <doctest.h>

#include "confcycle/dynamics.hpp"
#include "confcycle/error.hpp"
#include "confcycle/sweep.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace confcycle;

namespace {

SweepPlan toy_plan() {
    SweepPlan plan;
    plan.base = defaults();
    plan.axis1 = {"c0", {0.001, 0.017, 0.019}};
    plan.axis2 = {"delta", {0.001, 0.02}};
    plan.seeds_per_cell = 2;
    plan.horizon = 3000;
    plan.burn_in = 200;
    return plan;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream out;
    write_sweep_csv(out, r);
    return out.str();
}

} // namespace

TEST_SUITE("sweep") {

TEST_CASE("plan validation") {
    SweepPlan plan = toy_plan();
    CHECK_NOTHROW(validate(plan));

    plan.axis1.name = "kappa";
    CHECK_THROWS_AS(validate(plan), ConfigError);
    plan = toy_plan();
    plan.axis2.values.clear();
    CHECK_THROWS_AS(validate(plan), ConfigError);
    plan = toy_plan();
    plan.axis1.name = "coupling_mode";
    CHECK_THROWS_AS(validate(plan), ConfigError);
    plan = toy_plan();
    plan.seeds_per_cell = 0;
    CHECK_THROWS_AS(validate(plan), ConfigError);
    plan = toy_plan();
    plan.axis2.values.push_back(1.5);
    try {
        validate(plan);
        FAIL("expected a range error");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "delta");
    }
}

TEST_CASE("cells are numbered row-major") {
    const SweepPlan plan = toy_plan();
    CHECK(plan.cell_count() == 6);
    const auto p = cell_params(plan, 3); // axis1[1], axis2[1]
    CHECK(p.c0 == 0.017);
    CHECK(p.delta == 0.02);
    CHECK(p.engine.horizon == 3000);
    CHECK(p.engine.burn_in == 200);
}

TEST_CASE("a one-cell sweep equals a single run") {
    SweepPlan plan;
    plan.base = defaults();
    plan.axis1 = {"c0", {0.017}};
    plan.axis2 = {"nu", {1.0}};
    plan.seeds_per_cell = 1;
    plan.horizon = 4000;
    plan.burn_in = 100;
    const auto result = run_sweep(plan);
    REQUIRE(result.complete());
    const PhaseCell& cell = *result.cells[0];

    const ModelParams p = cell_params(plan, 0);
    const auto traj = run(p);
    const auto rep = analyse(traj.states, p);
    REQUIRE(cell.seeds.size() == 1);
    CHECK(cell.seeds[0] == summarise(rep, 0));
    CHECK(cell.log10_xi_c == log10_floored(rep.xi_c));
    CHECK(cell.log10_xi_k == log10_floored(rep.xi_k));
    CHECK(cell.mean_sharpe == rep.mean_sharpe);
    CHECK(cell.phase == rep.label.phase);
    CHECK(cell.t_low_mean == rep.spells.t_low_mean);
}

TEST_CASE("output does not depend on the worker count") {
    const SweepPlan plan = toy_plan();
    SweepOptions one, many;
    one.workers = 1;
    many.workers = 4;
    const auto a = run_sweep(plan, one);
    const auto b = run_sweep(plan, many);
    CHECK(a.cells == b.cells);
    CHECK(csv_of(a) == csv_of(b));
    CHECK(manifest(a).dump() == manifest(b).dump());
}

TEST_CASE("a cell's result does not depend on the other cells") {
    const SweepPlan plan = toy_plan();
    const auto full = run_sweep(plan);
    // pretend every other cell is already done, with made-up contents
    SweepOptions opts;
    for (std::size_t i = 0; i < plan.cell_count(); ++i) {
        if (i == 4) continue;
        PhaseCell fake;
        fake.index = i;
        fake.axis1 = plan.axis1.values[i / 2];
        fake.axis2 = plan.axis2.values[i % 2];
        fake.error = "placeholder";
        opts.finished.push_back(fake);
    }
    const auto only = run_sweep(plan, opts);
    CHECK(*only.cells[4] == *full.cells[4]);
}

TEST_CASE("aggregation across seeds") {
    PhaseCell c;
    auto seed = [](double xc, double xk, Phase ph, std::optional<double> tl) {
        SeedSummary s;
        s.xi_c = xc;
        s.xi_k = xk;
        s.phase = ph;
        s.t_low_mean = tl;
        s.mean_sharpe = xc;
        return s;
    };
    c.seeds = {seed(0.1, 0.0, Phase::LkHc, 4.0), seed(0.001, 0.0, Phase::LkLc, std::nullopt),
               seed(0.05, 0.0, Phase::LkHc, 8.0)};
    aggregate(c, AnalysisSettings{});
    CHECK(c.log10_xi_c == doctest::Approx(std::log10(0.05)));
    CHECK(c.log10_xi_k == kLog10Floor);
    CHECK(c.phase == Phase::LkHc);
    REQUIRE(c.t_low_mean.has_value());
    CHECK(*c.t_low_mean == 6.0);
    CHECK(c.mean_sharpe == doctest::Approx((0.1 + 0.001 + 0.05) / 3));
    CHECK_FALSE(c.t_high_mean.has_value());

    // a tie is resolved by classifying the median severities
    PhaseCell tie;
    tie.seeds = {seed(0.5, 0.0, Phase::LkHc, 1.0), seed(0.3, 0.0, Phase::LkHc, 1.0),
                 seed(0.001, 0.0, Phase::LkLc, 1.0), seed(0.005, 0.0, Phase::LkLc, 1.0)};
    aggregate(tie, AnalysisSettings{});
    CHECK(tie.phase == Phase::LkHc);
    tie.seeds = {seed(0.02, 0.0, Phase::LkHc, 1.0), seed(0.015, 0.0, Phase::LkHc, 1.0),
                 seed(1e-5, 0.0, Phase::LkLc, 1.0), seed(1e-6, 0.0, Phase::LkLc, 1.0)};
    aggregate(tie, AnalysisSettings{});
    CHECK(tie.phase == Phase::LkLc);
}

TEST_CASE("failed cells are recorded, not dropped") {
    SweepPlan plan = toy_plan();
    plan.axis1 = {"solver.fixed_point_max_iterations", {200, 1}};
    plan.axis2 = {"c0", {0.017}};
    const auto r = run_sweep(plan);
    REQUIRE(r.complete());
    CHECK_FALSE(r.cells[0]->error.has_value());
    REQUIRE(r.cells[1]->error.has_value());
    CHECK(r.cells[1]->error->find("replica 0") != std::string::npos);
    const std::string csv = csv_of(r);
    CHECK(csv.find("1,0.017,,,,error,,") != std::string::npos);
    const auto back = read_manifest(manifest(r));
    CHECK(back.finished[1] == *r.cells[1]);
}

TEST_CASE("interrupt and resume") {
    const SweepPlan plan = toy_plan();
    const auto full = run_sweep(plan);

    std::atomic<bool> stop{false};
    SweepOptions first;
    first.stop = &stop;
    first.on_cell = [&](const SweepResult&, const PhaseCell&) { stop.store(true); };
    const auto partial = run_sweep(plan, first);
    CHECK_FALSE(partial.complete());
    const auto m = manifest(partial);
    CHECK(m.at("status") == "incomplete");
    CHECK(m.at("cells").size() >= 1);
    CHECK(m.at("cells").size() < plan.cell_count());

    // round trip through text, as a resumed process would see it
    const auto loaded = read_manifest(nlohmann::json::parse(m.dump()));
    CHECK(loaded.plan.base == plan.base);
    CHECK(loaded.plan.axis1.values == plan.axis1.values);
    SweepOptions second;
    second.finished = loaded.finished;
    const auto resumed = run_sweep(loaded.plan, second);
    CHECK(resumed.complete());
    CHECK(resumed.cells == full.cells);
    CHECK(csv_of(resumed) == csv_of(full));
    CHECK(manifest(resumed).dump() == manifest(full).dump());
    CHECK(manifest(resumed).at("status") == "complete");
}

TEST_CASE("stop before start runs nothing") {
    std::atomic<bool> stop{true};
    SweepOptions opts;
    opts.stop = &stop;
    const auto r = run_sweep(toy_plan(), opts);
    for (const auto& c : r.cells) CHECK_FALSE(c.has_value());
    CHECK(csv_of(r) == std::string(kSweepCsvHeader) + "\n");
}

TEST_CASE("manifest rejects foreign or inconsistent documents") {
    CHECK_THROWS_AS(read_manifest(nlohmann::json{{"format", "other"}}), std::runtime_error);
    const auto r = run_sweep(toy_plan());
    auto m = manifest(r);
    m["cells"][0]["axis1"] = 0.5;
    CHECK_THROWS_AS(read_manifest(m), std::runtime_error);
    auto broken = manifest(r);
    broken["plan"].erase("axis1");
    CHECK_THROWS_AS(read_manifest(broken), std::runtime_error);
}

TEST_CASE("atomic file replacement") {
    const auto dir = std::filesystem::temp_directory_path() / "confcycle_atomic_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "x.json";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    CHECK(s == "second");
    CHECK_FALSE(std::filesystem::exists(dir / "x.json.tmp"));
    std::filesystem::remove_all(dir);
}

} // TEST_SUITE
