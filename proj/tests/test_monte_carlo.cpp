#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sfmax/cdf_exact.hpp"
#include "sfmax/config.hpp"
#include "sfmax/monte_carlo.hpp"
#include "sfmax/roc.hpp"

using namespace sfmax;

namespace {

// analytic cdf of the detector-scale statistic (p/n-normalized pencil)
double detector_cdf_null(double x, const SpikedFConfig& cfg) {
    const double kappa = static_cast<double>(cfg.n) / static_cast<double>(cfg.p);
    return cdf::cdf_max_null(kappa * x, cfg).value();
}

}  // namespace

// ---- generator ----

TEST_CASE("philox blocks match the reference permutation") {
    // fixed key/counter probes frozen from the numpy-compatible reference
    {
        const std::uint64_t key[2] = {0xdeadbeefULL, 0xfaceb00cULL};
        const std::uint64_t ctr[4] = {2, 2, 3, 4};
        std::uint64_t out[4];
        mc::Philox4x64::block(key, ctr, out);
        CHECK(out[0] == 0x96d961af5ad9fa36ULL);
        CHECK(out[1] == 0xe83ee691304f0212ULL);
        CHECK(out[2] == 0x9c4eeeac1dbda566ULL);
        CHECK(out[3] == 0xe8977773828bc1b4ULL);
    }
    {
        const std::uint64_t key[2] = {~0ULL, ~0ULL};
        const std::uint64_t ctr[4] = {0, 0, 0, 0};
        std::uint64_t out[4];
        mc::Philox4x64::block(key, ctr, out);
        CHECK(out[0] == 0x44b7493d1acfc229ULL);
        CHECK(out[1] == 0x6636af8e997921ddULL);
        CHECK(out[2] == 0x3f73e132b5b3780eULL);
        CHECK(out[3] == 0x605644dde03b01b1ULL);
    }
}

TEST_CASE("philox streams match frozen output sequences") {
    {
        mc::Philox4x64 rng({0, 0});
        const std::uint64_t want[8] = {
            0x2f4ba6408e4d89bULL,  0x3dd62b0b9ca8c5b2ULL,
            0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL,
            0x809bf322883987c3ULL, 0x471128b9e807f7ddULL,
            0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL,
        };
        for (std::uint64_t w : want) CHECK(rng.next_raw() == w);
    }
    {
        mc::Philox4x64 rng({123456789, 987654321});
        const std::uint64_t want[8] = {
            0x6706e62d61821e23ULL, 0xe4c8441b53f8ebf7ULL,
            0xe04e8b4644f92c55ULL, 0x62319c42b8b9a2ceULL,
            0xd49c105779b1e396ULL, 0xa1477727d9cda34cULL,
            0x522cc8d315487109ULL, 0x306213f1d5603940ULL,
        };
        for (std::uint64_t w : want) CHECK(rng.next_raw() == w);
    }
}

TEST_CASE("philox uniforms live strictly inside the unit interval") {
    mc::Philox4x64 rng({42, 0});
    double sum = 0.0, sum_sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_u01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum_sq += u * u;
    }
    // 5+ sigma bands around the uniform moments
    CHECK(std::fabs(sum / n - 0.5) < 5e-3);
    CHECK(std::fabs(sum_sq / n - 1.0 / 3.0) < 5e-3);
}

TEST_CASE("distinct streams and substreams do not collide") {
    auto take = [](mc::Philox4x64 rng, int k) {
        std::vector<std::uint64_t> v(k);
        for (auto& x : v) x = rng.next_raw();
        return v;
    };
    const auto a = take(mc::Philox4x64({42, 0}), 1000);
    const auto b = take(mc::Philox4x64({42, 1}), 1000);
    const auto c = take(mc::Philox4x64({43, 0}), 1000);
    const auto d = take(mc::Philox4x64({42, 0}, 1), 1000);

    std::set<std::uint64_t> seen(a.begin(), a.end());
    int clashes = 0;
    for (auto x : b) clashes += seen.count(x);
    for (auto x : c) clashes += seen.count(x);
    for (auto x : d) clashes += seen.count(x);
    CHECK(clashes == 0);

    // identical construction replays identically
    CHECK(take(mc::Philox4x64({42, 0}), 1000) == a);
}

// ---- sampling ----

TEST_CASE("lambda draws are positive and respond to the spike") {
    const SpikedFConfig cfg{4, 2, 5, 0.0};
    SpikedFConfig spiked = cfg;
    spiked.eta = 100.0;
    mc::Philox4x64 r0({7, 0});
    mc::Philox4x64 r1({7, 1});
    double mean0 = 0.0, mean1 = 0.0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        const double x0 = mc::sample_lambda_max(cfg, mc::Hypothesis::H0, r0);
        const double x1 =
            mc::sample_lambda_max(spiked, mc::Hypothesis::H1, r1);
        CHECK(x0 > 0.0);
        CHECK(std::isfinite(x1));
        mean0 += x0;
        mean1 += x1;
    }
    // a 20 dB spike lifts the largest eigenvalue far beyond sampling noise
    CHECK(mean1 / n > 2.0 * mean0 / n);

    mc::Philox4x64 r2({7, 2});
    CHECK_THROWS_AS(mc::sample_lambda_max(cfg, mc::Hypothesis::H1, r2),
                    std::invalid_argument);  // H1 needs eta > 0
}

TEST_CASE("empirical cdf machinery follows its stated conventions") {
    mc::EmpiricalCdf e;
    e.samples = {1.0, 2.0, 3.0, 4.0};
    e.count = 4;
    CHECK(e.at(0.5) == 0.0);
    CHECK(e.at(1.0) == 0.25);  // right-continuous at sample points
    CHECK(e.at(2.5) == 0.5);
    CHECK(e.at(4.0) == 1.0);
    CHECK(e.at(100.0) == 1.0);
    CHECK(e.quantile(0.25) == 1.0);
    CHECK(e.quantile(0.26) == 2.0);
    CHECK(e.quantile(0.5) == 2.0);
    CHECK(e.quantile(0.75) == 3.0);
    CHECK(e.quantile(0.99) == 4.0);
    CHECK_THROWS_AS(e.quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(e.quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(mc::EmpiricalCdf{}.quantile(0.5), std::invalid_argument);
}

TEST_CASE("kolmogorov-smirnov distance checks both jump sides") {
    mc::EmpiricalCdf e;
    e.samples = {0.25, 0.75};
    e.count = 2;
    const double d =
        mc::ks_distance(e, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(d == doctest::Approx(0.25).epsilon(1e-15));
    CHECK_THROWS_AS(
        mc::ks_distance(mc::EmpiricalCdf{}, [](double) { return 0.5; }),
        std::invalid_argument);
}

TEST_CASE("empirical cdf is reproducible and thread-count independent") {
    const SpikedFConfig cfg{4, 2, 5, 0.0};
    const mc::RngStream stream{2024, 5};
    const auto one = mc::empirical_cdf(cfg, mc::Hypothesis::H0, 2000, stream, 1);
    const auto eight =
        mc::empirical_cdf(cfg, mc::Hypothesis::H0, 2000, stream, 8);
    REQUIRE(one.samples.size() == 2000);
    CHECK(one.samples == eight.samples);  // bit-identical partitioning
    CHECK(one.count == 2000);

    const auto other =
        mc::empirical_cdf(cfg, mc::Hypothesis::H0, 2000, {2024, 6}, 1);
    CHECK(one.samples != other.samples);

    CHECK_THROWS_AS(mc::empirical_cdf(cfg, mc::Hypothesis::H0, 0, stream),
                    std::invalid_argument);
}

TEST_CASE("null draws follow the analytic law") {
    const SpikedFConfig cfg{4, 2, 5, 0.0};
    const long trials = 2000;
    const auto ecdf =
        mc::empirical_cdf(cfg, mc::Hypothesis::H0, trials, {11, 0}, 2);
    const double d =
        mc::ks_distance(ecdf, [&](double x) { return detector_cdf_null(x, cfg); });
    // 1% Kolmogorov-Smirnov critical value for this sample size
    CHECK(d < static_cast<double>(oracles::ks_crit_1pct(trials)));
}

TEST_CASE("spiked draws follow the analytic law") {
    const SpikedFConfig cfg{4, 2, 5, 10.0};
    const long trials = 2000;
    const auto ecdf =
        mc::empirical_cdf(cfg, mc::Hypothesis::H1, trials, {12, 0}, 2);
    const double kappa = static_cast<double>(cfg.n) / static_cast<double>(cfg.p);
    const double d = mc::ks_distance(ecdf, [&](double x) {
        return cdf::cdf_max_spiked(kappa * x, cfg).value();
    });
    CHECK(d < static_cast<double>(oracles::ks_crit_1pct(trials)));
}

TEST_CASE("empirical roc tracks the exact curve") {
    const SpikedFConfig cfg{4, 2, 5, 0.0};
    const double gamma = 10.0;
    const std::vector<double> grid{0.1, 0.3, 0.5};
    const auto emp = mc::empirical_roc(cfg, gamma, 4000, grid, {21, 0}, 2);
    const auto exact =
        roc::roc_exact(gamma, roc::DetectorConfig::make(cfg), grid);
    REQUIRE(emp.size() == exact.size());
    for (size_t i = 0; i < emp.size(); ++i) {
        CHECK(emp[i].provenance == roc::Provenance::empirical);
        CHECK(emp[i].pf == grid[i]);
        CAPTURE(grid[i]);
        CHECK(std::fabs(emp[i].pd - exact[i].pd) <= 0.05);
    }

    CHECK_THROWS_AS(mc::empirical_roc(cfg, 0.0, 100, grid, {21, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(mc::empirical_roc(cfg, gamma, 100, {0.0}, {21, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(mc::empirical_roc(cfg, gamma, -5, grid, {21, 0}),
                    std::invalid_argument);
}
