#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bodepace/discretization.hpp"
#include "bodepace/frequency_response.hpp"
#include "bodepace/plant.hpp"
#include "bodepace/sensing_filters.hpp"

using namespace bodepace;

TEST(Lpf, Coefficients) {
    const LpfConfig c{1.0, 1.0};
    EXPECT_NEAR(c.a(), -1.0 / 3.0, 1e-15);
    EXPECT_NEAR(c.b(), 1.0 / 3.0, 1e-15);
    LpfState st;
    EXPECT_NEAR(lpf_step(c, st, 1.0), 1.0 / 3.0, 1e-15);
}

TEST(Lpf, StepConvergesMonotonically) {
    LowPassFilter f({1.0, 1.0});
    double prev = f.step(1.0);
    for (int k = 0; k < 60; ++k) {
        const double y = f.step(1.0);
        EXPECT_GE(y, prev);
        EXPECT_LE(y, 1.0 + 1e-15);
        prev = y;
    }
    EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(Lpf, CornerSinusoidAmplitude) {
    const double t_f = 10.0, t = 0.1;
    const double f = 1.0 / (2.0 * std::numbers::pi * t_f);
    LowPassFilter filt({t_f, t});
    double peak = 0.0;
    const int n = static_cast<int>(40.0 / (f * t));
    for (int k = 0; k < n; ++k) {
        const double y = filt.step(std::sin(2.0 * std::numbers::pi * f * k * t));
        if (k > n / 2) {
            peak = std::max(peak, std::abs(y));
        }
    }
    EXPECT_NEAR(peak, 1.0 / std::sqrt(2.0), 0.02 / std::sqrt(2.0));
}

TEST(Lpf, MatchesGenericPipeline) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (const auto& cfg : {LpfConfig{10.0 / (2.0 * std::numbers::pi), 0.87}, LpfConfig{1.0, 1.0}, LpfConfig{0.3, 2.0}}) {
        LpfState st;
        auto rec = to_recurrence(tustin(sensing_lpf_tf(cfg.t_f), cfg.t_sample));
        for (int k = 0; k < 1000; ++k) {
            const double x = u(rng);
            EXPECT_NEAR(lpf_step(cfg, st, x), rec.step(x), 1e-12);
        }
    }
}

TEST(Lpf, NonFiniteRejected) {
    LowPassFilter f({1.0, 1.0});
    f.step(2.0);
    EXPECT_THROW(f.step(std::nan("")), invalid_configuration);
    EXPECT_NEAR(f.output(), 2.0 / 3.0, 1e-15);
}

TEST(Lpf, PreloadHasNoTransient) {
    LowPassFilter f({5.0, 0.87});
    f.preload(3.25);
    for (int k = 0; k < 10; ++k) {
        EXPECT_NEAR(f.step(3.25), 3.25, 1e-14);
    }
}

TEST(Smoother, PassThrough) {
    SmootherState st;
    const SmootherConfig c{1.0, 1.0};
    for (const double x : {1.0, 5.0, 2.0}) {
        EXPECT_DOUBLE_EQ(smoother_step(c, st, x), x);
    }
}

TEST(Smoother, GeometricApproach) {
    SmootherState st;
    const SmootherConfig c{0.5, 1.0};
    EXPECT_DOUBLE_EQ(smoother_step(c, st, 10.0), 5.0);
    EXPECT_DOUBLE_EQ(smoother_step(c, st, 10.0), 7.5);
    EXPECT_DOUBLE_EQ(smoother_step(c, st, 10.0), 8.75);
}

TEST(Smoother, ImpulseResponse) {
    for (const double beta : {0.1, 0.37, 0.9}) {
        SmootherState st;
        const SmootherConfig c{beta, 1.0};
        for (int k = 0; k < 40; ++k) {
            EXPECT_NEAR(smoother_step(c, st, k == 0 ? 1.0 : 0.0), beta * std::pow(1.0 - beta, k), 1e-15);
        }
    }
}

TEST(Smoother, LaplaceForm) {
    const auto one = smoother_to_laplace({1.0, 1.0});
    for (const double f : {1e-3, 0.1, 0.4}) {
        EXPECT_LT(std::abs(one(s_at(f)) - 1.0), 1e-15);
    }
    const auto half = smoother_to_laplace({0.5, 1.0});
    const TransferFunction want(Polynomial({0.5, 0.25}), Polynomial({0.5, 0.75}));
    for (const double f : {1e-3, 0.1, 0.4}) {
        EXPECT_LT(std::abs(half(s_at(f)) - want(s_at(f))), 1e-15);
    }
}

TEST(Smoother, UnityDcGain) {
    for (const double beta : {0.01, 0.2, 0.5, 0.99, 1.0}) {
        EXPECT_NEAR(smoother_to_laplace({beta, 0.87}).dc_gain(), 1.0, 1e-15);
    }
}

TEST(Smoother, TustinRecoversDifferenceEquation) {
    for (const double beta : {0.1, 0.5, 0.8}) {
        const double t = 0.87;
        const auto d = tustin(smoother_to_laplace({beta, t}), t);
        // normalize so that the numerator has no z^-1 term left, matching β/(1 − (1 − β)z^-1)
        const double d0 = d.den_z()[0];
        EXPECT_NEAR(d.num_z()[0] / d0, beta, 1e-12);
        EXPECT_NEAR(d.den_z()[1] / d0, -(1.0 - beta), 1e-12);
        if (d.num_z().size() > 1) {
            EXPECT_NEAR(d.num_z()[1] / d0, 0.0, 1e-12);
        }
    }
}

TEST(Smoother, RejectsBadBeta) {
    EXPECT_THROW(smoother_to_laplace({0.0, 1.0}), invalid_configuration);
    EXPECT_THROW(smoother_to_laplace({1.5, 1.0}), invalid_configuration);
}

TEST(Filters, DcNeutralUnderRandomConstants) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> c(0.0, 1000.0), tf(0.1, 20.0), beta(0.05, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double x = c(rng);
        LowPassFilter lpf({tf(rng), 0.87});
        SmootherState ss;
        const SmootherConfig sc{beta(rng), 0.87};
        double yl = 0.0, ys = 0.0;
        for (int k = 0; k < 5000; ++k) {
            yl = lpf.step(x);
            ys = smoother_step(sc, ss, x);
        }
        EXPECT_NEAR(yl, x, 1e-9 * std::max(1.0, x));
        EXPECT_NEAR(ys, x, 1e-9 * std::max(1.0, x));
    }
}

TEST(Regularize, UniformUnchanged) {
    const SampleStream s{{0.0, 2.0, 4.0, 6.0}, {1.0, 3.0, 2.0, 5.0}};
    const auto r = regularize(s);
    EXPECT_DOUBLE_EQ(r.t_sample, 2.0);
    EXPECT_EQ(r.values, s.values);
}

TEST(Regularize, LowerMiddleMedian) {
    // intervals {1, 2}: lower-middle median is 1, so the grid is 0, 1, 2, 3
    const auto r = regularize({{0.0, 1.0, 3.0}, {0.0, 2.0, 6.0}});
    EXPECT_DOUBLE_EQ(r.t_sample, 1.0);
    ASSERT_EQ(r.values.size(), 4u);
    EXPECT_DOUBLE_EQ(r.values[0], 0.0);
    EXPECT_DOUBLE_EQ(r.values[1], 2.0);
    EXPECT_DOUBLE_EQ(r.values[2], 4.0);
    EXPECT_DOUBLE_EQ(r.values[3], 6.0);
}

TEST(Regularize, GapFilledWithLengthFormula) {
    std::vector<double> t, v;
    for (int i = 0; i < 10; ++i) {
        t.push_back(i);
        v.push_back(i * 2.0);
    }
    for (int i = 25; i < 30; ++i) {
        t.push_back(i + 0.5);
        v.push_back(i * 2.0 + 1.0);
    }
    const auto r = regularize({t, v});
    EXPECT_DOUBLE_EQ(r.t_sample, 1.0);
    EXPECT_EQ(r.values.size(), static_cast<std::size_t>(std::floor((t.back() - t.front()) / 1.0)) + 1);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        EXPECT_NEAR(r.values[i], 2.0 * static_cast<double>(i), 1e-12);
    }
}

TEST(Regularize, Idempotent) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dt(0.5, 1.5), val(0.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        SampleStream s;
        double t = 0.0;
        for (int i = 0; i < 200; ++i) {
            s.timestamps.push_back(t);
            s.values.push_back(val(rng));
            t += dt(rng);
        }
        const auto r1 = regularize(s);
        SampleStream again;
        for (std::size_t i = 0; i < r1.values.size(); ++i) {
            again.timestamps.push_back(r1.start_s + static_cast<double>(i) * r1.t_sample);
            again.values.push_back(r1.values[i]);
        }
        const auto r2 = regularize(again);
        EXPECT_NEAR(r2.t_sample, r1.t_sample, 1e-12);
        ASSERT_EQ(r2.values.size(), r1.values.size());
        for (std::size_t i = 0; i < r1.values.size(); ++i) {
            EXPECT_NEAR(r2.values[i], r1.values[i], 1e-9);
        }
    }
}

TEST(Regularize, Rejections) {
    EXPECT_THROW(regularize({{0.0}, {1.0}}), invalid_configuration);
    EXPECT_THROW(regularize({{0.0, 0.0}, {1.0, 1.0}}), invalid_configuration);
    EXPECT_THROW(regularize({{0.0, 1.0}, {1.0, -1.0}}), invalid_configuration);
}
