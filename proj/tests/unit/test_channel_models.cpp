#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "irsoob/channel_models.hpp"

using namespace irsoob;
using namespace irsoob::channel;

TEST(PathLoss, ReferenceAndPowerLaw) {
    PathLossParams p;
    EXPECT_NEAR(path_loss(p, 1.0, LinkClass::bs_irs), 1e-3, 1e-18);
    EXPECT_NEAR(path_loss(p, 10.0, LinkClass::irs_ue) / 1e-5, 1.0, 1e-12);
    PathLossParams mm;
    mm.c0_db = -60.0;
    EXPECT_NEAR(path_loss(mm, 100.0, LinkClass::direct) / 1e-15, 1.0, 1e-12);
    EXPECT_THROW(path_loss(p, 0.5, LinkClass::direct), std::invalid_argument);
}

TEST(PathLoss, ParameterValidation) {
    PathLossParams p;
    p.c0_db = 1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.c0_db = -30.0;
    p.alpha_direct = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Placement, InsideRegionAndClearOfNodes) {
    std::mt19937_64 rng(11);
    NodeGeometry g;
    const auto ues = place_ues(rng, g, 500, 1.0);
    ASSERT_EQ(ues.size(), 500u);
    for (const auto& u : ues) {
        EXPECT_GE(u.x, 950.0);
        EXPECT_LE(u.x, 1100.0);
        EXPECT_GE(u.y, 950.0);
        EXPECT_LE(u.y, 1100.0);
        EXPECT_GT(distance(u, g.irs), 1.0);
    }
}

TEST(Sub6, MomentsOfElements) {
    std::mt19937_64 rng(1);
    const std::size_t draws = 1000000;
    const auto v = complex_gaussian_vector(rng, draws, 1.0);
    double m2 = 0.0;
    double m1 = 0.0;
    for (const auto& e : v) {
        m2 += std::norm(e);
        m1 += std::abs(e);
    }
    EXPECT_NEAR(m2 / draws, 1.0, 0.01);
    EXPECT_NEAR(m1 / draws, std::sqrt(std::numbers::pi / 4.0), 0.005);
}

TEST(Sub6, IndependenceAndPathLossVariances) {
    std::mt19937_64 rng(2);
    Sub6PathLosses pl{{2.0, {{0.5, 3.0}}}, {0.25, {{4.0, 0.1}}}};
    const int trials = 100000;
    double corr = 0.0;
    double fx = 0.0, fy = 0.0, hx = 0.0, hy = 0.0, gx = 0.0, gy = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto r = sample_sub6(rng, 2, pl);
        corr += (r.f_x[0] * std::conj(r.g_x[0][1])).real();
        fx += std::norm(r.f_x[1]);
        fy += std::norm(r.f_y[0]);
        hx += std::norm(r.h_d_x[0]);
        hy += std::norm(r.h_d_y[0]);
        gx += std::norm(r.g_x[0][0]);
        gy += std::norm(r.g_y[0][1]);
    }
    EXPECT_NEAR(corr / trials / std::sqrt(2.0 * 3.0), 0.0, 0.01);
    // 3 sigma of an exponential sample mean is 3 * beta / sqrt(trials).
    const double tol = 3.0 / std::sqrt(static_cast<double>(trials));
    EXPECT_NEAR(fx / trials / 2.0, 1.0, tol);
    EXPECT_NEAR(fy / trials / 0.25, 1.0, tol);
    EXPECT_NEAR(hx / trials / 0.5, 1.0, tol);
    EXPECT_NEAR(hy / trials / 4.0, 1.0, tol);
    EXPECT_NEAR(gx / trials / 3.0, 1.0, tol);
    EXPECT_NEAR(gy / trials / 0.1, 1.0, tol);
}

TEST(Sub6, DeterministicReplay) {
    Sub6PathLosses pl{{1.0, {{1.0, 1.0}, {2.0, 2.0}}}, {1.0, {{1.0, 1.0}}}};
    std::mt19937_64 a(99), b(99);
    const auto ra = sample_sub6(a, 8, pl);
    const auto rb = sample_sub6(b, 8, pl);
    EXPECT_EQ(ra.f_x, rb.f_x);
    EXPECT_EQ(ra.g_x, rb.g_x);
    EXPECT_EQ(ra.h_d_y, rb.h_d_y);
}

TEST(MmWave, SinglePathCascade) {
    std::mt19937_64 rng(4);
    const math::ResolvableAngleBook book(16);
    OperatorLosses ol{1.0, {{1.0, 1.0}}};
    const auto r = sample_mmwave(rng, 16, 1, 1, ol, book);
    ASSERT_EQ(r.cascaded.size(), 1u);
    ASSERT_EQ(r.cascaded[0].size(), 1u);
    EXPECT_NEAR(r.cascaded[0][0].omega, math::principal_sine_wrap(r.bs_angles[0] + r.ue_angles[0][0]), 1e-12);
    EXPECT_EQ(r.cascaded[0][0].gain, r.bs_gains[0] * r.ue_gains[0][0]);
}

TEST(MmWave, ChannelEnergyNormalization) {
    std::mt19937_64 rng(5);
    const math::ResolvableAngleBook book(16);
    OperatorLosses ol{1.0, {{1.0, 1.0}}};
    const int trials = 20000;
    double e = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto r = sample_mmwave(rng, 16, 2, 3, ol, book);
        for (const auto& v : r.bs_channel()) e += std::norm(v);
    }
    EXPECT_NEAR(e / trials, 16.0, 0.5);
}

TEST(MmWave, ChannelMatchesSteeringSum) {
    std::mt19937_64 rng(6);
    const std::size_t n = 8;
    const math::ResolvableAngleBook book(n);
    OperatorLosses ol{1.0, {{1.0, 1.0}}};
    const auto r = sample_mmwave(rng, n, 2, 2, ol, book);
    const auto f = r.bs_channel();
    for (std::size_t k = 0; k < n; ++k) {
        math::cplx want{};
        for (std::size_t i = 0; i < 2; ++i) {
            want += std::sqrt(n / 2.0) * r.bs_gains[i] *
                    std::exp(math::cplx(0.0, std::numbers::pi * k * r.bs_angles[i])) / std::sqrt(double(n));
        }
        EXPECT_LT(std::abs(f[k] - want), 1e-12);
    }
}

TEST(MmWave, AnglesOnGridDistinctAndCascadeSize) {
    std::mt19937_64 rng(7);
    const std::size_t n = 32;
    const math::ResolvableAngleBook book(n);
    OperatorLosses ol{1.0, {{1.0, 1.0}, {1.0, 1.0}}};
    for (int t = 0; t < 200; ++t) {
        const auto r = sample_mmwave(rng, n, 2, 5, ol, book);
        for (double a : r.bs_angles) EXPECT_TRUE(book.contains(a));
        for (const auto& u : r.ue_angles) {
            EXPECT_EQ(std::set<double>(u.begin(), u.end()).size(), 5u);
            for (double a : u) EXPECT_TRUE(book.contains(a));
        }
        for (const auto& c : r.cascaded) {
            EXPECT_EQ(c.size(), 10u);
            for (const auto& p : c) {
                EXPECT_TRUE(book.contains(p.omega));
                EXPECT_GE(p.omega, -1.0);
                EXPECT_LT(p.omega, 1.0);
            }
        }
    }
}

TEST(MmWave, MorePathsThanBeamsCluster) {
    std::mt19937_64 rng(8);
    const math::ResolvableAngleBook book(4);
    OperatorLosses ol{1.0, {{1.0, 1.0}}};
    const auto r = sample_mmwave(rng, 4, 1, 9, ol, book);
    EXPECT_EQ(r.ue_angles[0].size(), 9u);
    EXPECT_LE(std::set<double>(r.ue_angles[0].begin(), r.ue_angles[0].end()).size(), 4u);
}

TEST(MmWave, UniformAngleLaw) {
    std::mt19937_64 rng(9);
    const std::size_t n = 8;
    std::vector<int> hist(n, 0);
    const int trials = 80000;
    for (int t = 0; t < trials; ++t) {
        for (auto i : sample_grid_indices(rng, n, 3)) ++hist[i];
    }
    const double expect = 3.0 * trials / n;
    for (int h : hist) EXPECT_NEAR(h / expect, 1.0, 0.02);
}
