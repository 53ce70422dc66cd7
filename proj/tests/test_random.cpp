#include "gsampling/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace gsampling;

TEST(Random, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.next(), b.next());
        EXPECT_EQ(a.normal(), b.normal());
    }
}

TEST(Random, DeriveSeedSeparatesPaths) {
    std::set<Seed> seen;
    for (std::uint64_t t = 0; t < 50; ++t) {
        for (std::uint64_t m = 0; m < 6; ++m) seen.insert(derive_seed(7, {5, t, m}));
    }
    EXPECT_EQ(seen.size(), 300u);
    EXPECT_NE(derive_seed(7, {1}), derive_seed(8, {1}));
    EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
}

TEST(Random, UniformInUnitInterval) {
    Rng r(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Random, NormalMoments) {
    Rng r(3);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Random, BelowIsUniform) {
    Rng r(9);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[r.below(7)];
    // Chi-square with 6 dof; 22.46 is the 0.999 quantile.
    double chi2 = 0;
    for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
    EXPECT_LT(chi2, 22.46);
}

TEST(Random, SampleWithoutReplacementIsDistinct) {
    Rng r(11);
    auto s = sample_without_replacement(20, 20, r);
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(s[i], i);
    auto t = sample_without_replacement(5, 9, r);
    EXPECT_EQ(t.size(), 5u);
}
