#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "bodepace/io.hpp"
#include "bodepace/metrics.hpp"
#include "bodepace/traffic.hpp"

using namespace bodepace;

namespace {

// O(n²) DFT amplitude, single-sided, mean removed.
std::vector<double> brute_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    std::vector<double> out(n / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            acc += (x[i] - mean) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / n);
        }
        const double scale = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
        out[k] = scale * std::abs(acc) / static_cast<double>(n);
    }
    return out;
}

}  // namespace

TEST(Traffic, NormalizedToUnitSum) {
    const TrafficCurve c({1.0, 3.0, 4.0, 2.0}, 60.0);
    const auto& v = c.intensities();
    EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(c.remaining(0.0), 1.0);
    EXPECT_DOUBLE_EQ(c.remaining(240.0), 0.0);
    EXPECT_NEAR(c.remaining(90.0), 0.3 * 0.5 + 0.4 + 0.2, 1e-15);
}

TEST(Traffic, RejectsBadCurves) {
    EXPECT_THROW(TrafficCurve({}, 60.0), invalid_configuration);
    EXPECT_THROW(TrafficCurve({0.0, 0.0}, 60.0), invalid_configuration);
    EXPECT_THROW(TrafficCurve({1.0, -1.0}, 60.0), invalid_configuration);
    EXPECT_THROW(TrafficCurve({1.0}, 0.0), invalid_configuration);
}

TEST(Traffic, DiurnalSumsToOneAndIsPositive) {
    const auto c = synthetic_diurnal();
    EXPECT_EQ(c.size(), 1440u);
    EXPECT_NEAR(std::accumulate(c.intensities().begin(), c.intensities().end(), 0.0), 1.0, 1e-9);
    EXPECT_GT(c.min_intensity(), 0.0);
    EXPECT_EQ(c.bin(72000.0), c.bin(72000.0 + 1.0));
    EXPECT_DOUBLE_EQ(c.at(72000.0), c.max_intensity());
}

TEST(Fft, SingleToneAtDailyFundamental) {
    std::vector<double> x(1440);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = 2.0 + std::sin(2.0 * std::numbers::pi * static_cast<double>(i) * 60.0 / 86400.0);
    }
    const auto s = traffic_fft(x, 60.0);
    ASSERT_EQ(s.significant_bins.size(), 1u);
    EXPECT_NEAR(s.max_significant_freq_hz, 1.0 / 86400.0, s.bin_width_hz);
    EXPECT_NEAR(s.peak_magnitude, 1.0, 1e-12);
}

TEST(Fft, ConstantCurveHasNoSignificantBins) {
    const auto s = traffic_fft(TrafficCurve::uniform(1440, 60.0));
    EXPECT_TRUE(s.significant_bins.empty());
}

TEST(Fft, DiurnalCeilingIsEighthHarmonic) {
    const auto s = traffic_fft(synthetic_diurnal());
    EXPECT_NEAR(s.max_significant_freq_hz, 8.0 / 86400.0, s.bin_width_hz);
    EXPECT_NEAR(s.max_significant_freq_hz, 9.3e-5, s.bin_width_hz);
}

TEST(Fft, MatchesBruteForceDft) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const std::size_t n : {16u, 17u, 100u, 257u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = u(rng);
        const auto s = traffic_fft(x, 1.0);
        const auto want = brute_dft(x);
        ASSERT_EQ(s.magnitude.size(), want.size());
        for (std::size_t k = 1; k < want.size(); ++k) {
            EXPECT_NEAR(s.magnitude[k], want[k], 1e-12);
        }
    }
}

TEST(Fft, RejectsShortInput) {
    const std::vector<double> x(15, 1.0);
    EXPECT_THROW(traffic_fft(x, 1.0), invalid_configuration);
}

TEST(Metrics, PerfectTracking) {
    const std::vector<CohortSeries> c{{{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, 10.0}};
    const auto r = pacing_error(c);
    EXPECT_DOUBLE_EQ(r.pe, 0.0);
    EXPECT_DOUBLE_EQ(r.swpe, 0.0);
}

TEST(Metrics, HandComputedSingleCohort) {
    const std::vector<CohortSeries> c{{{10.0, 10.0}, {9.0, 11.0}, 1.0}};
    EXPECT_NEAR(pacing_error(c).pe, 0.1, 1e-15);
}

TEST(Metrics, SpendWeightedMean) {
    // errors 0.2 and 0.4 with spend weights 0.75 / 0.25
    const std::vector<CohortSeries> c{{{10.0}, {8.0}, 75.0}, {{10.0}, {6.0}, 25.0}};
    const auto r = pacing_error(c);
    EXPECT_NEAR(r.weights[0], 0.75, 1e-15);
    EXPECT_NEAR(r.weighted_mean_error, 0.25, 1e-15);
    EXPECT_NEAR(r.swpe, 0.25 / 2.0, 1e-15);
    EXPECT_NEAR(r.pe, 0.3, 1e-15);
}

TEST(Metrics, ZeroDesiredExcluded) {
    const std::vector<CohortSeries> c{{{0.0, 10.0}, {1.0, 9.0}, 1.0}};
    const auto r = pacing_error(c);
    EXPECT_EQ(r.excluded, 1u);
    EXPECT_NEAR(r.pe, 0.1, 1e-15);
    const std::vector<CohortSeries> zero{{{0.0, 0.0}, {1.0, 1.0}, 1.0}};
    EXPECT_THROW(pacing_error(zero), invalid_configuration);
}

TEST(Metrics, ScaleInvariantAndWeightsSumToOne) {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.1, 10.0), scale(1e-3, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CohortSeries> c(1 + trial % 7);
        for (auto& s : c) {
            for (int j = 0; j < 30; ++j) {
                s.desired.push_back(u(rng));
                s.actual.push_back(u(rng));
            }
            s.daily_spend = u(rng);
        }
        const auto base = pacing_error(c);
        EXPECT_NEAR(std::accumulate(base.weights.begin(), base.weights.end(), 0.0), 1.0, 1e-9);
        const double k = scale(rng);
        for (auto& s : c) {
            for (auto& v : s.desired) v *= k;
            for (auto& v : s.actual) v *= k;
        }
        const auto scaled = pacing_error(c);
        EXPECT_NEAR(scaled.pe, base.pe, 1e-12 * std::max(1.0, base.pe));
        EXPECT_NEAR(scaled.swpe, base.swpe, 1e-12 * std::max(1.0, base.swpe));
    }
}

TEST(Csv, TrafficRoundTrip) {
    const auto c = synthetic_diurnal();
    const auto back = traffic_from_csv(traffic_to_csv(c));
    EXPECT_DOUBLE_EQ(back.resolution_s(), c.resolution_s());
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_NEAR(back.intensities()[i], c.intensities()[i], 1e-12 * c.intensities()[i]);
    }
}

TEST(Csv, NonUniformTrafficRejected) {
    EXPECT_THROW(traffic_from_csv("time_s,intensity\n0,1\n60,1\n150,1\n"), invalid_configuration);
    EXPECT_THROW(traffic_from_csv("t,intensity\n0,1\n60,1\n"), invalid_configuration);
}

TEST(Csv, FormatDoubleRoundTrips) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> e(-300.0, 300.0), m(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = m(rng) * std::pow(10.0, e(rng));
        EXPECT_EQ(parse_double(format_double(x), "x"), x);
    }
}
