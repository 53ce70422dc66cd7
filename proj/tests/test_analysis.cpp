#include "gsampling/analysis.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace gsampling;
using gsampling::testing::random_model;

namespace {

Matrix diag(std::initializer_list<double> d) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) {
        m(i, i) = x;
        ++i;
    }
    return m;
}

}  // namespace

TEST(CurvatureBound, ClosedFormValues) {
    EXPECT_DOUBLE_EQ(curvature_bound(SignalModel(Matrix::Identity(3, 2), Matrix::Identity(2, 2), 1.0)), 8.0);
    EXPECT_NEAR(curvature_bound(SignalModel(Matrix::Identity(3, 2), diag({2, 1}), 1.0)), 108.0, 1e-12);
}

TEST(CurvatureBound, Scaling) {
    const SignalModel base = random_model(10, 4, 0.5, 3);
    const SignalModel scaled(base.u(), 2.0 * base.p(), 0.5);
    const SpectralBasis e = eig_symmetric(base.p());
    const double lmax = e.eigenvalues(0);
    const double lmin = e.eigenvalues(3);
    const double first = lmax * lmax / (lmin * lmin);
    EXPECT_NEAR(curvature_bound(base), first * std::pow(1 + lmax / 0.5, 3), 1e-9 * curvature_bound(base));
    EXPECT_NEAR(curvature_bound(scaled), first * std::pow(1 + 2 * lmax / 0.5, 3), 1e-9 * curvature_bound(scaled));
}

TEST(ExactCurvature, ModularInstanceIsOne) {
    Matrix u = Matrix::Zero(6, 3);
    u(0, 0) = 1;
    u(2, 1) = 1;
    u(4, 2) = 1;
    const SignalModel m(u, diag({2, 1, 0.5}), 0.3);
    const CurvatureReport rep = exact_curvature(m);
    EXPECT_NEAR(rep.value, 1.0, 1e-12);
    EXPECT_GT(rep.skipped_zero_gain, 0u);
}

TEST(ExactCurvature, BoundedByClosedForm) {
    for (Seed seed = 0; seed < 5; ++seed) {
        const SignalModel m = random_model(7, 3, 0.1, seed, 0.5);
        const CurvatureReport rep = exact_curvature(m);
        EXPECT_GE(rep.value, 1.0 - 1e-12);
        EXPECT_LE(rep.value, curvature_bound(m));
        // 3^n - 2^n pairs S strictly inside T, times nodes outside T, is an
        // upper bound on the triple count.
        EXPECT_LE(rep.triples + rep.skipped_zero_gain, 7u * 2187u);
    }
}

TEST(ExactCurvature, MatchesNaiveEnumeration) {
    const SignalModel m = random_model(5, 3, 0.2, 11, 0.6);
    double naive = 0;
    const std::size_t n = 5;
    auto gain = [&](std::size_t mask, std::size_t i) {
        NodeSet s;
        for (std::size_t j = 0; j < n; ++j)
            if (mask >> j & 1U) s.push_back(j);
        NodeSet si = s;
        si.push_back(i);
        return mse(s, m) - mse(si, m);
    };
    for (std::size_t t = 1; t < 32; ++t)
        for (std::size_t s = 0; s < 32; ++s) {
            if ((s & t) != s || s == t) continue;
            for (std::size_t i = 0; i < n; ++i) {
                if (t >> i & 1U) continue;
                const double den = gain(s, i);
                if (den > 1e-14) naive = std::max(naive, gain(t, i) / den);
            }
        }
    EXPECT_NEAR(exact_curvature(m).value, naive, 1e-8 * naive);
}

TEST(ExactCurvature, Guard) {
    const SignalModel m = random_model(13, 3, 0.1, 1);
    EXPECT_THROW(exact_curvature(m), std::length_error);
}

TEST(ExpectationAlpha, Values) {
    const AlphaTerms a = expectation_alpha(1.0, 0.1, 1000, 1);
    EXPECT_NEAR(1.0 - std::exp(-1.0) - 0.1, 0.532120558828558, 1e-15);
    EXPECT_DOUBLE_EQ(a.beta, 1.0);
    EXPECT_NEAR(a.alpha, 0.532120558828558, 1e-12);
    EXPECT_NEAR(expectation_alpha(1.0, 1e-300, 100, 1).alpha, 1 - std::exp(-1.0), 1e-12);
    EXPECT_LT(expectation_alpha(1e12, 0.1, 100, 1).alpha, 1e-11);
}

TEST(ExpectationAlpha, BetaTerm) {
    // s = 8, N = 10: 8/20 - 1/4 = 0.15.
    const AlphaTerms a = expectation_alpha(2.0, 0.1, 10, 8);
    EXPECT_NEAR(a.beta, 1.15, 1e-15);
    EXPECT_NEAR(a.alpha, 1 - std::exp(-0.5) - std::pow(0.1, 1.15) / 2, 1e-15);
    const AlphaTerms forced = expectation_alpha(2.0, 0.1, 10, 10);
    EXPECT_TRUE(forced.beta_forced);
    EXPECT_EQ(forced.beta, 1.0);
    EXPECT_THROW(expectation_alpha(0.5, 0.1, 10, 1), std::invalid_argument);
}

TEST(MeanAndError, SmallSamples) {
    const std::vector<double> one = {3.5};
    EXPECT_EQ(mean_and_standard_error(one).mean, 3.5);
    EXPECT_EQ(mean_and_standard_error(one).standard_error, 0.0);
    const std::vector<double> same = {2.0, 2.0};
    EXPECT_EQ(mean_and_standard_error(same).standard_error, 0.0);
    const std::vector<double> v = {1, 2, 3, 4};
    EXPECT_NEAR(mean_and_standard_error(v).standard_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(ExpectationBound, SmallInstanceSatisfied) {
    const SignalModel m = random_model(10, 3, 1e-2, 21, 0.4);
    const BoundReport rep = check_expectation_bound(m, 3, 0.1, 500, 9);
    EXPECT_TRUE(rep.satisfied);
    EXPECT_TRUE(rep.exact_curvature.has_value());
    EXPECT_LE(*rep.exact_curvature, rep.curvature_bound);
    EXPECT_LE(rep.trace_optimal, rep.mean_trace + 1e-12);
    EXPECT_EQ(rep.s_batch, 8u);
}

TEST(ExpectationBound, FourNodeBudget) {
    const SignalModel m = random_model(10, 4, 1e-2, 22, 0.4);
    EXPECT_TRUE(check_expectation_bound(m, 4, 0.1, 200, 10).satisfied);
}

TEST(PacBound, ToleranceAndGreedyLimit) {
    EXPECT_NEAR(std::exp(-kPacConstant * 30), 0.0714, 1e-4);
    const SignalModel m = random_model(10, 4, 1e-2, 23, 0.4);
    const BoundReport greedy_like = check_pac_bound(m, 4, min_epsilon(4), 50, 1);
    EXPECT_EQ(greedy_like.violations, 0u);
    const BoundReport rep = check_pac_bound(m, 4, 0.1, 1000, 2, 0.02);
    EXPECT_NEAR(rep.allowed_fraction, std::exp(-0.352) + 0.02, 1e-12);
    EXPECT_TRUE(rep.satisfied);
}

TEST(BoundChecks, RejectBadArguments) {
    const SignalModel m = random_model(10, 3, 1e-2, 1);
    EXPECT_THROW(check_expectation_bound(m, 3, 1.0, 10, 0), std::out_of_range);
    EXPECT_THROW(check_expectation_bound(m, 3, 0.1, 0, 0), std::invalid_argument);
    EXPECT_THROW(check_pac_bound(m, 0, 0.1, 10, 0), std::out_of_range);
}
