#include "gsampling/signal_model.hpp"
#include "gsampling/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gsampling;

namespace {

SignalModel identity_model(Eigen::Index n, Eigen::Index k, double sigma2) {
    return SignalModel(Matrix::Identity(n, k), Matrix::Identity(k, k), sigma2);
}

}  // namespace

TEST(RandomPsdCovariance, ScalarIsPositive) {
    const Matrix p = random_psd_covariance(1, 5);
    ASSERT_EQ(p.rows(), 1);
    EXPECT_GT(p(0, 0), 0.0);
}

TEST(RandomPsdCovariance, EigenvaluesPositive) {
    const SpectralBasis b = eig_symmetric(random_psd_covariance(4, 1));
    for (Eigen::Index i = 0; i < 4; ++i) {
        EXPECT_GT(b.eigenvalues(i), 0.0);
        EXPECT_GE(b.eigenvalues(i), 1e-3 - 1e-12);
        EXPECT_LE(b.eigenvalues(i), 1.0 + 1e-12);
    }
}

TEST(RandomPsdCovariance, SymmetricAndReproducible) {
    const Matrix p = random_psd_covariance(30, 77);
    EXPECT_LE((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(p == random_psd_covariance(30, 77));
    EXPECT_FALSE(p == random_psd_covariance(30, 78));
    // Non-diagonal in general.
    EXPECT_GT((p - Matrix(p.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(SignalModelType, Validation) {
    EXPECT_THROW(SignalModel(Matrix::Identity(3, 2), Matrix::Identity(3, 3), 1.0), DimensionError);
    EXPECT_THROW(SignalModel(Matrix::Identity(2, 3), Matrix::Identity(3, 3), 1.0), DimensionError);
    EXPECT_THROW(SignalModel(Matrix::Identity(3, 2), Matrix::Identity(2, 2), 0.0), std::invalid_argument);
    EXPECT_THROW(SignalModel(Matrix::Identity(3, 2), Matrix::Identity(2, 2), -1.0), std::invalid_argument);
    Matrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    EXPECT_THROW(SignalModel(Matrix::Identity(3, 2), indefinite, 1.0), std::invalid_argument);
    Matrix asym(2, 2);
    asym << 1, 0.1, 0, 1;
    EXPECT_THROW(SignalModel(Matrix::Identity(3, 2), asym, 1.0), std::invalid_argument);
}

TEST(DrawSignal, SampleCovarianceMatchesIdentity) {
    const SignalModel m = identity_model(6, 4, 1.0);
    const int draws = 100000;
    Matrix acc = Matrix::Zero(4, 4);
    Vector mean = Vector::Zero(4);
    for (int t = 0; t < draws; ++t) {
        const SignalDraw d = draw_signal(m, derive_seed(123, {static_cast<std::uint64_t>(t)}));
        acc += d.xbar * d.xbar.transpose();
        mean += d.xbar;
    }
    acc /= draws;
    mean /= draws;
    EXPECT_LE((acc - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.05);
    EXPECT_LE(mean.cwiseAbs().maxCoeff(), 0.02);
}

TEST(DrawSignal, SampleCovarianceMatchesGeneralP) {
    const Matrix p = random_psd_covariance(3, 8);
    const SignalModel m(Matrix::Identity(5, 3), p, 1.0);
    const int draws = 100000;
    Matrix acc = Matrix::Zero(3, 3);
    for (int t = 0; t < draws; ++t) {
        const SignalDraw d = draw_signal(m, derive_seed(5, {static_cast<std::uint64_t>(t)}));
        acc += d.xbar * d.xbar.transpose();
    }
    acc /= draws;
    EXPECT_LE((acc - p).cwiseAbs().maxCoeff(), 0.05 * p.cwiseAbs().maxCoeff());
}

TEST(DrawSignal, SignalLiesInBasisSpan) {
    const SignalModel m = identity_model(6, 2, 1.0);
    const SignalDraw d = draw_signal(m, 3);
    EXPECT_TRUE((d.x.tail(4).array() == 0.0).all());
    EXPECT_TRUE(d.x.head(2) == d.xbar);
}

TEST(Observe, ReproducibleForSeed) {
    const SignalModel m = identity_model(5, 3, 0.5);
    const SignalDraw a = draw_signal(m, 42);
    const SignalDraw b = draw_signal(m, 42);
    EXPECT_TRUE(a.x == b.x);
    EXPECT_TRUE(observe(m, a.x, 9) == observe(m, b.x, 9));
}

TEST(Observe, NoiseVarianceMatchesSigma2) {
    const double sigma2 = 0.25;
    const SignalModel m = identity_model(200, 3, sigma2);
    const Vector x = Vector::Zero(200);
    double ss = 0;
    int count = 0;
    for (int t = 0; t < 500; ++t) {
        const Vector y = observe(m, x, derive_seed(1, {static_cast<std::uint64_t>(t)}));
        ss += y.squaredNorm();
        count += 200;
    }
    const double var = ss / count;
    // SE of a chi-square variance estimate: sigma2 * sqrt(2 / count).
    EXPECT_NEAR(var, sigma2, 4 * sigma2 * std::sqrt(2.0 / count));
}

TEST(Observe, VanishingNoise) {
    const SignalModel m = identity_model(5, 3, 1e-300);
    const SignalDraw d = draw_signal(m, 1);
    const Vector y = observe(m, d.x, 2);
    EXPECT_LE((y - d.x).cwiseAbs().maxCoeff(), 1e-140);
}

TEST(Observe, RejectsWrongLength) {
    const SignalModel m = identity_model(5, 3, 1.0);
    EXPECT_THROW(observe(m, Vector::Zero(4), 1), DimensionError);
}
