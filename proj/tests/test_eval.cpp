#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "sbdkit/error.hpp"
#include "sbdkit/eval/metrics.hpp"

using namespace sbd;
using namespace sbd::eval;

TEST_CASE("jain index values and failure cases") {
    CHECK(jain_index(10.0, 10.0) == doctest::Approx(1.0));
    CHECK(jain_index(10.0, 0.0) == doctest::Approx(0.5));
    CHECK(jain_index(0.0, 10.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(jain_index(0.0, 0.0), Error);
}

TEST_CASE("jain index symmetry and scale invariance") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> x(0.0, 100.0);
    std::uniform_real_distribution<double> k(0.01, 50.0);
    for (int trial = 0; trial < 12000; ++trial) {
        const double a = x(rng), b = x(rng);
        if (a == 0.0 && b == 0.0) continue;
        const double j = jain_index(a, b);
        CHECK(j >= 0.5);
        CHECK(j <= 1.0 + 1e-12);
        CHECK(j == doctest::Approx(jain_index(b, a)).epsilon(1e-12));
        const double s = k(rng);
        CHECK(j == doctest::Approx(jain_index(s * a, s * b)).epsilon(1e-9));
    }
}

TEST_CASE("throughput ratio") {
    CHECK(throughput_ratio(17.4, 10.0) == doctest::Approx(1.74));
    CHECK(throughput_ratio(10.0, 10.0) == doctest::Approx(1.0));
    CHECK(throughput_ratio(0.0, 10.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(throughput_ratio(1.0, 0.0), Error);
    // homogeneity
    CHECK(throughput_ratio(6.0, 4.0) == doctest::Approx(throughput_ratio(3.0, 2.0)));
}

TEST_CASE("sqrt-law fit recovers its own model exactly") {
    // r(t) = sqrt(2nt/C + rmin^2), n=1, C=83.33 pkt/s, rmin=0.1 s
    const double n = 1.0, cap = 83.33, rmin = 0.1;
    std::vector<RttSample> seg;
    for (int i = 0; i <= 200; ++i) {
        const double t_s = i * 0.05;
        const double r_s = std::sqrt(2.0 * n * t_s / cap + rmin * rmin);
        seg.push_back({1000.0 * t_s, 1000.0 * r_s});
    }
    const FitReport rep = fit_sqrt_law(seg);
    CHECK(rep.r_squared == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.coeff == doctest::Approx(2.0 * n / cap).epsilon(1e-6));
    CHECK(rep.intercept == doctest::Approx(rmin * rmin).epsilon(1e-6));
    // direct evaluation at t = 1 s from the fitted parameters
    CHECK(std::sqrt(rep.coeff * 1.0 + rep.intercept) == doctest::Approx(0.1844).epsilon(1e-3));

    CHECK_THROWS_AS(fit_sqrt_law({{0, 100}, {1, 101}, {2, 102}}), Error);  // under 5 samples
}

TEST_CASE("predicted slope unit conversion") {
    CHECK(predicted_slope_ms_per_s(30.0, 20.0, 1500) == doctest::Approx(18.0).epsilon(1e-6));
    CHECK(predicted_slope_ms_per_s(0.0, 20.0) == doctest::Approx(0.0));
    CHECK(predicted_slope_ms_per_s(20.0, 10.0) ==
          doctest::Approx(2.0 * predicted_slope_ms_per_s(10.0, 10.0)).epsilon(1e-12));
}

TEST_CASE("equilibrium throughput formulas") {
    CHECK(reno_equilibrium_pps(0.1, 0.01) == doctest::Approx(10.0 * std::sqrt(198.0)).epsilon(1e-9));
    CHECK_THROWS_AS(reno_equilibrium_pps(0.1, 0.0), Error);
    CHECK_THROWS_AS(reno_equilibrium_pps(0.1, 1.0), Error);

    const std::vector<std::pair<double, double>> two_same = {{0.1, 0.01}, {0.1, 0.01}};
    CHECK(lia_equilibrium_pps(two_same) == doctest::Approx(reno_equilibrium_pps(0.1, 0.01)));
    CHECK(uncoupled_equilibrium_pps(two_same) ==
          doctest::Approx(2.0 * reno_equilibrium_pps(0.1, 0.01)));

    std::mt19937_64 rng(88);
    std::uniform_real_distribution<double> rtt(0.01, 1.0);
    std::uniform_real_distribution<double> p(1e-4, 0.3);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::pair<double, double>> paths;
        const std::size_t np = 1 + rng() % 4;
        for (std::size_t i = 0; i < np; ++i) paths.push_back({rtt(rng), p(rng)});
        CHECK(lia_equilibrium_pps(paths) <= uncoupled_equilibrium_pps(paths) + 1e-12);
    }
}

TEST_CASE("positive interval coalescing") {
    const std::vector<WindowFlag> flags = {
        {0, 5000, true}, {5000, 10000, true}, {10000, 15000, false}, {20000, 25000, true}};
    const PositiveIntervals pi = positive_intervals(flags);
    REQUIRE(pi.intervals_ms.size() == 2);
    CHECK(pi.intervals_ms[0].first == 0);
    CHECK(pi.intervals_ms[0].second == 10000);
    CHECK(pi.intervals_ms[1].first == 20000);
    REQUIRE(pi.first_positive_ms.has_value());
    CHECK(*pi.first_positive_ms == 0);

    const PositiveIntervals none = positive_intervals({{0, 5000, false}, {5000, 10000, false}});
    CHECK(none.intervals_ms.empty());
    CHECK(!none.first_positive_ms.has_value());
}

TEST_CASE("mean rate over bins") {
    // 12500 bytes in one 100 ms bin = 1 Mbps over that bin
    const std::vector<double> bins = {12500.0, 12500.0, 0.0, 0.0};
    CHECK(mean_rate_mbps(bins, 100.0, 0.0, 200.0) == doctest::Approx(1.0));
    CHECK(mean_rate_mbps(bins, 100.0, 0.0, 400.0) == doctest::Approx(0.5));
}
