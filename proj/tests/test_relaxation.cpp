#include "gsampling/relaxation.hpp"
#include "gsampling/samplers.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gsampling;
using gsampling::testing::oracle_covariance;
using gsampling::testing::random_model;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

}  // namespace

TEST(RelaxedObjective, ZeroWeightsGivePrior) {
    const SignalModel m = random_model(20, 5, 0.05, 3);
    const ObjectiveAndGradient og = relaxed_objective_and_gradient(Vector::Zero(20), m);
    EXPECT_NEAR(og.value, m.trace_p(), 1e-12);
    const Matrix p2 = m.p() * m.p();
    for (Eigen::Index i = 0; i < 20; ++i) {
        const Vector u = m.u().row(i).transpose();
        EXPECT_NEAR(og.grad(i), -u.dot(p2 * u) / m.sigma2(), 1e-10);
    }
}

TEST(RelaxedObjective, IdentityClosedForm) {
    const SignalModel m(Matrix::Identity(6, 6), Matrix::Identity(6, 6), 1.0);
    EXPECT_NEAR(relaxed_objective_and_gradient(Vector::Ones(6), m).value, 3.0, 1e-14);
}

TEST(RelaxedObjective, BinaryWeightsMatchDirectCovariance) {
    const SignalModel m = random_model(30, 6, 1e-2, 7);
    Vector z = Vector::Zero(30);
    const NodeSet s = {2, 5, 11, 17, 23, 29};
    for (NodeIndex j : s) z(static_cast<Eigen::Index>(j)) = 1.0;
    const double oracle = oracle_covariance(s, m.u(), m.p(), m.sigma2()).trace();
    EXPECT_NEAR(relaxed_objective_and_gradient(z, m).value, oracle, 1e-9 * oracle);
}

TEST(RelaxedObjective, GradientMatchesCentralDifferences) {
    for (Seed seed = 0; seed < 5; ++seed) {
        const SignalModel m = random_model(15, 4, 0.1, seed);
        Rng rng(seed);
        Vector z(15);
        for (Eigen::Index i = 0; i < 15; ++i) z(i) = 0.1 + 0.8 * rng.uniform();
        const Vector g = relaxed_objective_and_gradient(z, m).grad;
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < 15; ++i) {
            Vector zp = z, zm = z;
            zp(i) += h;
            zm(i) -= h;
            const double fd = (relaxed_objective_and_gradient(zp, m).value - relaxed_objective_and_gradient(zm, m).value) /
                              (2 * h);
            EXPECT_NEAR(g(i), fd, 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(RelaxedObjective, RejectsInfeasibleWeights) {
    const SignalModel m = random_model(10, 3, 1e-2, 1);
    EXPECT_THROW(relaxed_objective_and_gradient(Vector::Constant(10, 1.5), m), std::invalid_argument);
    EXPECT_THROW(relaxed_objective_and_gradient(Vector::Zero(9), m), DimensionError);
}

TEST(Projection, InactiveSumConstraint) {
    const Vector z = project_box_capped_simplex(vec({2, -1, 0.5}), 2);
    EXPECT_TRUE(z.isApprox(vec({1, 0, 0.5})));
}

TEST(Projection, SymmetricActiveConstraint) {
    const Vector v = vec({1, 1, 1});
    const Vector z = project_box_capped_simplex(v, 2);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(z(i), 2.0 / 3.0, 1e-9);
    // KKT: z = clip(v - tau) with a common tau >= 0 and sum z = k.
    const double tau = v(0) - z(0);
    EXPECT_GE(tau, 0.0);
    EXPECT_NEAR(z.sum(), 2.0, 1e-9);
    EXPECT_LE(z.sum(), 2.0);
}

TEST(Projection, FeasiblePointIsFixed) {
    const Vector v = vec({0.2, 0.9, 0.0, 0.4});
    EXPECT_TRUE(project_box_capped_simplex(v, 2) == v);
}

TEST(Projection, VariationalInequality) {
    // z = proj(v) iff (v - z)^T (w - z) <= 0 for every feasible w.
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Vector v(8);
        for (Eigen::Index i = 0; i < 8; ++i) v(i) = 3 * rng.normal();
        const Vector z = project_box_capped_simplex(v, 3);
        EXPECT_LE(z.sum(), 3.0 + 1e-12);
        EXPECT_GE(z.minCoeff(), 0.0);
        EXPECT_LE(z.maxCoeff(), 1.0);
        for (int w_trial = 0; w_trial < 20; ++w_trial) {
            Vector w(8);
            for (Eigen::Index i = 0; i < 8; ++i) w(i) = rng.uniform();
            if (w.sum() > 3) w *= 3 / w.sum();
            EXPECT_LE((v - z).dot(w - z), 1e-8);
        }
    }
}

TEST(SolveRelaxation, FullBudgetSaturatesBox) {
    const SignalModel m = random_model(8, 8, 1e-2, 2);
    const RelaxedSolution sol = solve_relaxation(m, 8);
    EXPECT_TRUE(sol.converged);
    EXPECT_LE((sol.z - Vector::Ones(8)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SolveRelaxation, RestartsAgree) {
    const SignalModel m = random_model(30, 8, 1e-2, 4);
    const RelaxedSolution ref = solve_relaxation(m, 6);
    ASSERT_TRUE(ref.converged);
    EXPECT_LE(ref.z.sum(), 6.0 + 1e-9);
    Rng rng(8);
    for (int r = 0; r < 5; ++r) {
        Vector z0(30);
        for (Eigen::Index i = 0; i < 30; ++i) z0(i) = rng.uniform();
        const RelaxedSolution sol = solve_relaxation_from(m, 6, z0);
        EXPECT_TRUE(sol.converged);
        EXPECT_NEAR(sol.objective, ref.objective, 1e-5 * ref.objective);
    }
}

TEST(SolveRelaxation, LowerBoundsEveryBinaryChoice) {
    const SignalModel m = random_model(10, 3, 1e-2, 6);
    const RelaxedSolution sol = solve_relaxation(m, 3);
    EXPECT_LE(sol.objective, brute_force(m, 3).mse + 1e-9);
}

TEST(CheckSchur, Boundaries) {
    const SignalModel m = random_model(12, 4, 0.1, 9);
    const Vector z = Vector::Constant(12, 0.3);
    const Matrix sb = relaxed_covariance(z, m);
    EXPECT_TRUE(check_schur(z, sb, m));
    EXPECT_TRUE(check_schur(z, sb + Matrix::Identity(4, 4), m));
    EXPECT_FALSE(check_schur(z, sb - 0.1 * Matrix::Identity(4, 4), m));
}

TEST(RoundTopK, Examples) {
    EXPECT_EQ(round_top_k(vec({0.9, 0.1, 0.8, 0.1}), 2), (NodeSet{0, 2}));
    EXPECT_EQ(round_top_k(vec({0, 1, 0, 1, 1}), 3), (NodeSet{1, 3, 4}));
    EXPECT_EQ(round_top_k(vec({0.5, 0.5, 0.5}), 2), (NodeSet{0, 1}));
}

TEST(RelaxationRounded, ReturnsValidSet) {
    const SignalModel m = random_model(40, 10, 1e-2, 3);
    const SamplingResult r = relaxation_rounded(m, 8);
    EXPECT_EQ(r.s.size(), 8u);
    EXPECT_TRUE(std::is_sorted(r.s.begin(), r.s.end()));
    EXPECT_NEAR(r.mse, oracle_covariance(r.s, m.u(), m.p(), m.sigma2()).trace(), 1e-8 * r.mse);
    EXPECT_GE(r.gain_evaluations, 40u);
}
