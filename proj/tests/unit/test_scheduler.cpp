#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "irsoob/scheduler.hpp"

using namespace irsoob::sim;

TEST(Names, RoundTrip) {
    for (auto k : {SchedulerKind::round_robin, SchedulerKind::proportional_fair, SchedulerKind::max_rate}) {
        EXPECT_EQ(scheduler_from_string(to_string(k)), k);
    }
    EXPECT_THROW(scheduler_from_string("fifo"), std::invalid_argument);
}

TEST(RoundRobin, CyclesAndFairness) {
    SchedulerState st(SchedulerKind::round_robin, 7);
    std::vector<int> hits(7, 0);
    for (int t = 0; t < 7 * 5; ++t) {
        const auto q = rr_select(st);
        EXPECT_EQ(q, static_cast<std::size_t>(t % 7));
        ++hits[q];
    }
    for (int h : hits) EXPECT_EQ(h, 5);
    EXPECT_FALSE(st.needs_all_rates());
    EXPECT_THROW(SchedulerState(SchedulerKind::round_robin, 0), std::invalid_argument);
    EXPECT_THROW(SchedulerState(SchedulerKind::proportional_fair, 3, 0.5), std::invalid_argument);
}

TEST(MaxRate, SingleTiesAndEquivariance) {
    EXPECT_EQ(mr_select(std::vector<double>{0.3}, 10.0), 0u);
    EXPECT_EQ(mr_select(std::vector<double>{1.0, 3.0, 3.0}, 10.0), 1u);
    std::mt19937_64 rng(61);
    std::exponential_distribution<double> e(1.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> g(10);
        for (auto& v : g) v = e(rng);
        const auto q = mr_select(g, 1e3);
        EXPECT_EQ(q, static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin()));
        std::vector<std::size_t> perm(10);
        std::iota(perm.begin(), perm.end(), 0u);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> pg(10);
        for (std::size_t i = 0; i < 10; ++i) pg[i] = g[perm[i]];
        EXPECT_EQ(perm[mr_select(pg, 1e3)], q);
    }
    EXPECT_THROW(mr_select(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST(ProportionalFair, MemorylessHorizon) {
    SchedulerState st(SchedulerKind::proportional_fair, 3, 1.0);
    const std::vector<double> r1{1.0, 2.0, 3.0};
    pf_update(st, 2, r1);
    EXPECT_DOUBLE_EQ(st.running_averages[2], 3.0);
    EXPECT_DOUBLE_EQ(st.running_averages[0], 0.0);
    const std::vector<double> r2{4.0, 0.5, 7.0};
    pf_update(st, 0, r2);
    EXPECT_DOUBLE_EQ(st.running_averages[0], 4.0);
}

TEST(ProportionalFair, UnservedShrinkAndServedIncrement) {
    SchedulerState st(SchedulerKind::proportional_fair, 3, 10.0);
    const std::vector<double> r{1.0, 2.0, 4.0};
    pf_update(st, 1, r);  // seeds T = r, then updates
    EXPECT_DOUBLE_EQ(st.running_averages[0], 0.9 * 1.0);
    EXPECT_DOUBLE_EQ(st.running_averages[1], 0.9 * 2.0 + 0.2);
    EXPECT_DOUBLE_EQ(st.running_averages[2], 0.9 * 4.0);
    const auto before = st.running_averages;
    const std::vector<double> r2{5.0, 5.0, 5.0};
    pf_update(st, 0, r2);
    EXPECT_DOUBLE_EQ(st.running_averages[1], before[1] * 0.9);
    EXPECT_DOUBLE_EQ(st.running_averages[2], before[2] * 0.9);
    EXPECT_DOUBLE_EQ(st.running_averages[0], before[0] * 0.9 + 0.5);
    EXPECT_THROW(pf_update(st, 3, r2), std::invalid_argument);
}

TEST(ProportionalFair, SelectsLargestRatio) {
    SchedulerState st(SchedulerKind::proportional_fair, 3, 100.0);
    EXPECT_TRUE(st.needs_all_rates());
    // Before warm-up every ratio is one; ties go to the lowest index.
    EXPECT_EQ(pf_select(st, std::vector<double>{2.0, 5.0, 1.0}), 0u);
    st.running_averages = {1.0, 4.0, 0.5};
    st.warm = true;
    EXPECT_EQ(pf_select(st, std::vector<double>{1.5, 5.0, 1.0}), 2u);
}

TEST(ProportionalFair, EqualRatesConvergeToFixedPoint) {
    // With constant equal rates r the long-run averages all tend to r/Q.
    const std::size_t q = 5;
    const double rate = 3.0;
    SchedulerState st(SchedulerKind::proportional_fair, q, 50.0);
    const std::vector<double> r(q, rate);
    std::vector<int> served(q, 0);
    for (int t = 0; t < 20000; ++t) {
        const auto k = pf_select(st, r);
        ++served[k];
        pf_update(st, k, r);
    }
    for (double a : st.running_averages) EXPECT_NEAR(a, rate / q, 0.1 * rate / q);
    for (int s : served) EXPECT_NEAR(s, 20000 / int(q), 20);
}
