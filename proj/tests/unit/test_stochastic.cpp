#include <doctest.h>

#include "confcycle/params.hpp"
#include "confcycle/stochastic.hpp"
#include "golden.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace confcycle;

TEST_SUITE("stochastic") {

TEST_CASE("engine matches the standard reference value") {
    std::mt19937_64 e; // default seed 5489
    e.discard(9999);
    CHECK(e() == 9981545732273789042ULL);
}

TEST_CASE("seed derivation and first draws match the independent reference") {
    const auto g = golden::step_reference();
    const auto& s = g.at("streams");
    const std::uint64_t master = g.at("master_seed").get<std::uint64_t>();
    const auto sp = derive_seed(master, 0, 0, StreamTag::Productivity);
    CHECK(std::to_string(sp) == s.at("seed_productivity").get<std::string>());
    CHECK(std::to_string(derive_seed(master, 0, 0, StreamTag::Risk)) == s.at("seed_risk").get<std::string>());
    std::mt19937_64 raw(sp);
    CHECK(std::to_string(raw()) == s.at("first_raw")[0].get<std::string>());
    RandomStream stream(sp);
    for (const auto& v : s.at("first_normals")) CHECK(stream.normal() == v.get<double>());
}

TEST_CASE("derived seeds separate tags, cells and replicas") {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t cell = 0; cell < 20; ++cell)
        for (std::uint64_t rep = 0; rep < 20; ++rep)
            for (auto tag : {StreamTag::Productivity, StreamTag::Risk}) seeds.push_back(derive_seed(7, cell, rep, tag));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
    CHECK(derive_seed(1, 2, 3, StreamTag::Risk) == derive_seed(1, 2, 3, StreamTag::Risk));
    CHECK(derive_seed(1, 0, 0, StreamTag::Risk) != derive_seed(2, 0, 0, StreamTag::Risk));
}

TEST_CASE("streams are reproducible and do not interact") {
    auto a = ShockStreams::derive(11, 3, 4);
    auto b = ShockStreams::derive(11, 3, 4);
    for (int i = 0; i < 1000; ++i) {
        // consume the risk stream of `a` at a different pace
        a.risk.uniform();
        a.risk.uniform();
        CHECK(a.productivity.normal() == b.productivity.normal());
    }
    auto c = ShockStreams::derive(11, 3, 4);
    auto d = ShockStreams::derive(11, 3, 5);
    CHECK(c.risk.uniform() != d.risk.uniform());
}

TEST_CASE("uniform ranges") {
    RandomStream s(5);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        CHECK_UNARY(u >= 0.0);
        CHECK_UNARY(u < 1.0);
        const double v = s.uniform_open_zero();
        CHECK_UNARY(v > 0.0);
        CHECK_UNARY(v <= 1.0);
    }
}

TEST_CASE("productivity and risk streams are uncorrelated") {
    auto st = ShockStreams::derive(1);
    const int n = 1000000;
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = st.productivity.uniform(), y = st.risk.uniform();
        sx += x;
        sy += y;
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    const double cov = sxy / n - sx / n * sy / n;
    const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    CHECK(std::abs(corr) < 5.0 / std::sqrt(n));
}

TEST_CASE("standard normal moments") {
    RandomStream s(99);
    const int n = 1000000;
    double m = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        m += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    m /= n;
    m2 /= n;
    m4 /= n;
    CHECK(std::abs(m) < 0.005);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(m4 == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("productivity step examples") {
    ModelParams p = defaults();
    p.eta = 0.0;
    // the innovation of the process is sigma_z times a standard normal
    auto next = step_productivity(ProductivityState{5.0, 0.0}, p, 0.1 / p.sigma_z);
    CHECK(next.frak_z == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(next.z == doctest::Approx(p.z0 * std::exp(0.1)).epsilon(1e-14));

    p.eta = 0.5;
    next = step_productivity(ProductivityState{0.2, 0.0}, p, 0.1 / p.sigma_z);
    CHECK(next.frak_z == doctest::Approx(0.1 + std::sqrt(0.75) * 0.1).epsilon(1e-14));
    CHECK(next.frak_z == doctest::Approx(0.18660).epsilon(1e-5));

    const auto init = initial_productivity(p);
    CHECK(init.frak_z == 0.0);
    CHECK(init.z == p.z0);
}

TEST_CASE("productivity process: stationary variance and lag-1 autocorrelation") {
    for (double eta : {0.0, 0.5, 0.9}) {
        ModelParams p = defaults();
        p.eta = eta;
        RandomStream s(2024);
        ProductivityState st = initial_productivity(p);
        for (int i = 0; i < 1000; ++i) st = step_productivity(st, p, s);
        const int n = 1000000;
        double sum = 0, sum2 = 0, lag = 0, prev = st.frak_z;
        for (int i = 0; i < n; ++i) {
            st = step_productivity(st, p, s);
            CHECK_UNARY(st.z > 0);
            sum += st.frak_z;
            sum2 += st.frak_z * st.frak_z;
            lag += st.frak_z * prev;
            prev = st.frak_z;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        const double acf = (lag / n - mean * mean) / var;
        INFO("eta = " << eta);
        CHECK(var == doctest::Approx(p.sigma_z * p.sigma_z).epsilon(0.02));
        CHECK(std::abs(acf - eta) < 0.02);
    }
}

TEST_CASE("risk draws: endpoint, no-risk hook, mean and variance") {
    CHECK(risk_from_uniform(1.0, 15.0) == 1.0);
    CHECK(risk_from_uniform(0.3, std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(risk_from_uniform(0.5, 1.0) == 0.5);

    ModelParams p = defaults();
    RandomStream s(3);
    const int n = 1000000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double xi = draw_risk(p, s);
        CHECK_UNARY(xi > 0.0);
        CHECK_UNARY(xi <= 1.0);
        sum += xi;
        sum2 += xi * xi;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double a = p.a;
    CHECK(std::abs(mean - a / (a + 1)) < 0.001);
    CHECK(var == doctest::Approx(a / ((2 + a) * (1 + a) * (1 + a))).epsilon(0.05));
}

TEST_CASE("risk draws pass a Kolmogorov-Smirnov test against xi^a") {
    ModelParams p = defaults();
    RandomStream s(17);
    const int n = 100000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = draw_risk(p, s);
    std::sort(xs.begin(), xs.end());
    double d = 0;
    for (int i = 0; i < n; ++i) {
        const double cdf = std::pow(xs[i], p.a);
        d = std::max({d, (i + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    // asymptotic critical value at the 1% level
    CHECK(d * std::sqrt(static_cast<double>(n)) < 1.628);
}

} // TEST_SUITE
