#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sfmax/cdf_exact.hpp"
#include "sfmax/config.hpp"
#include "sfmax/roc.hpp"

using namespace sfmax;

namespace {

// small log-spaced false-alarm grid for curve-shape checks
std::vector<double> small_grid() {
    return {1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.9, 0.99};
}

}  // namespace

// ---- probability primitives ----

TEST_CASE("detector construction fixes the statistic scale") {
    const auto d = roc::DetectorConfig::make({8, 5, 10, 0.0});
    CHECK(d.kappa == 0.5);
    CHECK(d.base.m == 8);
    const auto d2 = roc::DetectorConfig::make({6, 1, 9, 0.0});
    CHECK(d2.kappa == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("false-alarm probability is the null upper tail") {
    const auto d = roc::DetectorConfig::make({8, 5, 10, 0.0});
    for (double th : {0.5, 2.0, 6.0, 20.0}) {
        const double got = roc::p_false_alarm(th, d);
        const double want =
            1.0 - cdf::cdf_max_null(d.kappa * th, d.base).value();
        CHECK(got == want);  // same computation, bit for bit
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
    }
    // decreasing in the threshold
    CHECK(roc::p_false_alarm(1.0, d) > roc::p_false_alarm(4.0, d));
    CHECK(roc::p_false_alarm(0.0, d) == 1.0);

    CHECK_THROWS_AS(roc::p_false_alarm(-1.0, d), std::invalid_argument);
    CHECK_THROWS_AS(
        roc::p_false_alarm(std::numeric_limits<double>::quiet_NaN(), d),
        std::invalid_argument);
}

TEST_CASE("detection probability is the spiked upper tail") {
    const auto d = roc::DetectorConfig::make({8, 5, 10, 0.0});
    for (double th : {1.0, 4.0}) {
        SpikedFConfig spiked = d.base;
        spiked.eta = 10.0;
        const double want =
            1.0 - cdf::cdf_max_spiked(d.kappa * th, spiked).value();
        CHECK(roc::p_detect(10.0, th, d) == want);
    }
    // a stronger spike detects better at a fixed threshold
    CHECK(roc::p_detect(20.0, 4.0, d) > roc::p_detect(2.0, 4.0, d));
    // and beats the false-alarm rate at the same threshold
    CHECK(roc::p_detect(10.0, 4.0, d) > roc::p_false_alarm(4.0, d));

    CHECK_THROWS_AS(roc::p_detect(0.0, 1.0, d), std::invalid_argument);
    CHECK_THROWS_AS(roc::p_detect(-1.0, 1.0, d), std::invalid_argument);
    CHECK_THROWS_AS(roc::p_detect(1.0, -1.0, d), std::invalid_argument);
}

// ---- threshold inversion ----

TEST_CASE("threshold inversion round-trips the false-alarm rate") {
    struct Dims {
        long m, n, p;
    };
    for (const Dims& dd : {Dims{8, 5, 8}, Dims{12, 7, 15}, Dims{6, 1, 9}}) {
        const auto d = roc::DetectorConfig::make({dd.m, dd.n, dd.p, 0.0});
        for (double level : {1e-4, 0.05, 0.5, 0.99}) {
            const double th = roc::threshold_for_pfa(level, d);
            CAPTURE(dd.m);
            CAPTURE(level);
            CHECK(th > 0.0);
            CHECK(std::fabs(roc::p_false_alarm(th, d) - level) <= 1e-10);
        }
    }
}

TEST_CASE("threshold inversion matches a closed-form inverse") {
    // for p = m the null law is (x/(1+x))^{mn}, solvable by hand
    const auto d = roc::DetectorConfig::make({3, 2, 3, 0.0});
    for (double level : {0.05, 0.4, 0.9}) {
        const double u = std::pow(1.0 - level, 1.0 / 6.0);
        const double want = u / (1.0 - u) / d.kappa;
        const double got = roc::threshold_for_pfa(level, d);
        CAPTURE(level);
        CHECK(std::fabs(got - want) <= 1e-9 * want);
    }
}

TEST_CASE("threshold inversion validates its level") {
    const auto d = roc::DetectorConfig::make({4, 2, 5, 0.0});
    CHECK_THROWS_AS(roc::threshold_for_pfa(0.0, d), std::invalid_argument);
    CHECK_THROWS_AS(roc::threshold_for_pfa(1.0, d), std::invalid_argument);
    CHECK_THROWS_AS(roc::threshold_for_pfa(-0.1, d), std::invalid_argument);
    CHECK_THROWS_AS(
        roc::threshold_for_pfa(std::numeric_limits<double>::quiet_NaN(), d),
        std::invalid_argument);
}

// ---- exact curves ----

TEST_CASE("exact roc curves are monotone and better than chance") {
    const auto d = roc::DetectorConfig::make({4, 2, 5, 0.0});
    const auto curve = roc::roc_exact(10.0, d, small_grid());
    REQUIRE(curve.size() == small_grid().size());
    double prev = 0.0;
    for (const auto& pt : curve) {
        CHECK(pt.provenance == roc::Provenance::exact);
        CHECK(pt.pd >= pt.pf - 1e-9);  // spike only helps
        CHECK(pt.pd >= prev - 1e-12);
        CHECK(pt.pd <= 1.0);
        prev = pt.pd;
    }
    CHECK(std::strcmp(roc::provenance_name(curve.front().provenance),
                      "exact") == 0);
}

TEST_CASE("exact roc collapses to chance as the spike vanishes") {
    const auto d = roc::DetectorConfig::make({4, 2, 5, 0.0});
    for (const auto& pt :
         roc::roc_exact(1e-8, d, {0.05, 0.3, 0.7})) {
        CHECK(std::fabs(pt.pd - pt.pf) <= 1e-5);
    }
}

TEST_CASE("exact roc validates its grid") {
    const auto d = roc::DetectorConfig::make({4, 2, 5, 0.0});
    CHECK_THROWS_AS(roc::roc_exact(10.0, d, {0.5, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(roc::roc_exact(10.0, d, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(roc::roc_exact(0.0, d, {0.5}), std::invalid_argument);
}

TEST_CASE("detection grows with snapshots at fixed dimensions") {
    // m = 15, p = 16, gamma = 100: more snapshots can only help
    const double gamma = 100.0;
    for (double pf : {0.01, 0.3}) {
        double prev = 1.1;
        for (long n : {14L, 10L, 5L}) {
            const auto d = roc::DetectorConfig::make({15, n, 16, 0.0});
            const double pd =
                roc::roc_exact(gamma, d, {pf}).front().pd;
            CAPTURE(n);
            CAPTURE(pf);
            CHECK(pd <= prev + 1e-9);
            prev = pd;
        }
    }
}

// ---- closed forms ----

TEST_CASE("square-case closed form matches the exact curve") {
    const double gamma = 4.0;
    const auto d = roc::DetectorConfig::make({6, 5, 6, 0.0});
    for (const auto& pt :
         roc::roc_exact(gamma, d, {0.01, 0.1, 0.4, 0.8})) {
        const double closed =
            roc::roc_alpha0_closed_form(gamma, 6, 5, pt.pf);
        CAPTURE(pt.pf);
        CHECK(std::fabs(pt.pd - closed) <= 1e-9);
    }
}

TEST_CASE("square-case closed form endpoints and validation") {
    CHECK(roc::roc_alpha0_closed_form(4.0, 6, 5, 0.0) == 0.0);
    CHECK(roc::roc_alpha0_closed_form(4.0, 6, 5, 1.0) == 1.0);
    // deep into the low-false-alarm corner the formula must stay stable
    const double tiny = roc::roc_alpha0_closed_form(4.0, 6, 5, 1e-12);
    CHECK(tiny >= 0.0);
    CHECK(tiny <= 1e-6);
    CHECK_THROWS_AS(roc::roc_alpha0_closed_form(0.0, 6, 5, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(roc::roc_alpha0_closed_form(4.0, 5, 5, 0.5),
                    std::invalid_argument);  // needs m > n
    CHECK_THROWS_AS(roc::roc_alpha0_closed_form(4.0, 6, 5, 1.5),
                    std::invalid_argument);
}

TEST_CASE("single-snapshot closed form matches its frozen value") {
    CHECK(roc::roc_n1_closed_form(10.0, 2, 0.1) ==
          doctest::Approx(0.4052209779853349).epsilon(1e-13));
    CHECK(roc::roc_n1_closed_form(10.0, 5, 0.0) == 0.0);
    CHECK(roc::roc_n1_closed_form(10.0, 5, 1.0) == 1.0);
    CHECK_THROWS_AS(roc::roc_n1_closed_form(10.0, 1, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(roc::roc_n1_closed_form(-1.0, 4, 0.5),
                    std::invalid_argument);
}

TEST_CASE("single-snapshot closed form is the n = 1 square case") {
    for (long m : {2L, 5L, 12L}) {
        for (double gamma : {0.5, 10.0}) {
            for (double pf : {0.01, 0.3, 0.9}) {
                const double a = roc::roc_n1_closed_form(gamma, m, pf);
                const double b = roc::roc_alpha0_closed_form(gamma, m, 1, pf);
                CAPTURE(m);
                CAPTURE(gamma);
                CAPTURE(pf);
                CHECK(std::fabs(a - b) <= 1e-9);
            }
        }
    }
}

// ---- asymptotics ----

TEST_CASE("asymptotic curve matches frozen value and degenerate cases") {
    CHECK(roc::roc_asymptotic({1.0, 1}, 0.5) ==
          doctest::Approx(0.7046919454251794).epsilon(1e-13));
    // c = 0 carries no signal: the curve is the chance diagonal
    for (double pf : {0.05, 0.5, 0.95}) {
        CHECK(roc::roc_asymptotic({0.0, 3}, pf) ==
              doctest::Approx(pf).epsilon(1e-14));
    }
    CHECK(roc::roc_asymptotic({2.0, 4}, 1.0) == 1.0);
    CHECK(roc::roc_asymptotic({2.0, 4}, 0.0) == 0.0);
    // monotone in pf
    double prev = -1.0;
    for (double pf : small_grid()) {
        const double pd = roc::roc_asymptotic({1.5, 3}, pf);
        CHECK(pd >= prev);
        prev = pd;
    }
    CHECK_THROWS_AS(roc::roc_asymptotic({-0.5, 3}, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(roc::roc_asymptotic({1.0, 0}, 0.5),
                    std::invalid_argument);
}

TEST_CASE("asymptotic curve respects its universal upper bound") {
    CHECK(roc::roc_asymptotic_upper_bound(1.0, 0.5) ==
          doctest::Approx(0.75).epsilon(1e-14));
    CHECK(roc::roc_asymptotic_upper_bound(2.0, 0.0) == 0.0);
    CHECK(roc::roc_asymptotic_upper_bound(2.0, 1.0) == 1.0);
    for (double c : {0.0, 0.5, 1.0, 5.0}) {
        for (long n = 1; n <= 10; ++n) {
            for (double pf : small_grid()) {
                const double pd = roc::roc_asymptotic({c, n}, pf);
                const double bound = roc::roc_asymptotic_upper_bound(c, pf);
                CAPTURE(c);
                CAPTURE(n);
                CAPTURE(pf);
                CHECK(pd <= bound + 1e-12);
                CHECK(pd >= pf - 1e-12);  // and never below chance
            }
        }
    }
    CHECK_THROWS_AS(roc::roc_asymptotic_upper_bound(-1.0, 0.5),
                    std::invalid_argument);
}

TEST_CASE("square-case curves approach the asymptotic regime") {
    // gamma = m keeps the equivalent strength c = (p-m+1) gamma / m at 1
    const roc::AsymptoticRegime regime{1.0, 5};
    double prev_gap = 2.0;
    for (long m : {6L, 20L}) {
        double gap = 0.0;
        for (double pf : {0.05, 0.2, 0.5, 0.8, 0.95}) {
            const double exact = roc::roc_alpha0_closed_form(
                static_cast<double>(m), m, 5, pf);
            const double asym = roc::roc_asymptotic(regime, pf);
            gap = std::max(gap, std::fabs(exact - asym));
        }
        CAPTURE(m);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 0.1);  // already close by m = 20
}

TEST_CASE("single-snapshot curves flatten toward chance as m grows") {
    // fixed gamma: pd -> pf with the excess decaying like 1/m
    const double gamma = 10.0, pf = 0.3;
    const double target = gamma * (1.0 - pf) * (-std::log1p(-pf));
    double prev_excess = 2.0;
    for (long m : {100L, 1000L, 10000L}) {
        const double pd = roc::roc_n1_closed_form(gamma, m, pf);
        const double excess = static_cast<double>(m) * (pd - pf);
        CAPTURE(m);
        CHECK(pd > pf);
        CHECK(pd - pf < prev_excess);
        prev_excess = pd - pf;
        if (m == 10000) {
            CHECK(std::fabs(excess - target) <= 0.05 * target);
        }
    }
}

TEST_CASE("provenance names are stable identifiers") {
    CHECK(std::strcmp(roc::provenance_name(roc::Provenance::exact),
                      "exact") == 0);
    CHECK(std::strcmp(
              roc::provenance_name(roc::Provenance::closed_form_alpha0),
              "closed_form_alpha0") == 0);
    CHECK(std::strcmp(roc::provenance_name(roc::Provenance::closed_form_n1),
                      "closed_form_n1") == 0);
    CHECK(std::strcmp(roc::provenance_name(roc::Provenance::asymptotic),
                      "asymptotic") == 0);
    CHECK(std::strcmp(roc::provenance_name(roc::Provenance::upper_bound),
                      "upper_bound") == 0);
    CHECK(std::strcmp(roc::provenance_name(roc::Provenance::empirical),
                      "empirical") == 0);
}
