#pragma once

#include "gsampling/random.hpp"
#include "gsampling/spectral.hpp"
#include "gsampling/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <utility>

namespace gsampling {

/// Bayesian observation model for k-bandlimited graph signals:
///
///     x = U xbar,   xbar ~ N(0, P),   y = x + n,   n ~ N(0, sigma2 I).
///
/// Holds cached factorizations of P used by every estimator and sampler:
/// the Cholesky factor (signal draws), P^{-1} (direct covariance solves) and
/// U^T (contiguous rows of U, one column per node).
class SignalModel {
public:
    SignalModel(BandlimitedBasis basis, Matrix p, double sigma2)
        : basis_(std::move(basis)), p_(std::move(p)), sigma2_(sigma2) {
        const auto k = static_cast<Eigen::Index>(basis_.k());
        if (basis_.u.rows() < 1 || k < 1) throw DimensionError("SignalModel: empty basis");
        if (k > basis_.u.rows()) throw DimensionError("SignalModel: bandwidth k exceeds n");
        if (p_.rows() != k || p_.cols() != k) {
            throw DimensionError("SignalModel: P must be " + std::to_string(k) + "x" + std::to_string(k));
        }
        if (!p_.allFinite() || detail::max_asymmetry(p_) > 1e-10) {
            throw std::invalid_argument("SignalModel: P must be finite and symmetric");
        }
        if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) {
            throw std::invalid_argument("SignalModel: sigma2 must be positive and finite");
        }
        p_ = detail::symmetrized(p_);
        llt_.compute(p_);
        if (llt_.info() != Eigen::Success) {
            throw std::invalid_argument("SignalModel: P is not positive definite");
        }
        l_ = llt_.matrixL();
        p_inv_ = detail::symmetrized(llt_.solve(Matrix::Identity(k, k)));
        ut_ = basis_.u.transpose();
    }

    SignalModel(const Matrix& u, Matrix p, double sigma2)
        : SignalModel(make_basis(u), std::move(p), sigma2) {}

    std::size_t n() const noexcept { return basis_.n(); }
    std::size_t k() const noexcept { return basis_.k(); }
    double sigma2() const noexcept { return sigma2_; }

    const BandlimitedBasis& basis() const noexcept { return basis_; }
    const Matrix& u() const noexcept { return basis_.u; }
    /// Row j of U as a contiguous k-vector.
    auto row(NodeIndex j) const { return ut_.col(static_cast<Eigen::Index>(j)); }
    const Matrix& ut() const noexcept { return ut_; }

    const Matrix& p() const noexcept { return p_; }
    const Matrix& p_inverse() const noexcept { return p_inv_; }
    const Matrix& p_cholesky_factor() const noexcept { return l_; }
    double trace_p() const { return p_.trace(); }

private:
    static BandlimitedBasis make_basis(const Matrix& u) {
        BandlimitedBasis b;
        b.u = u;
        b.support.resize(static_cast<std::size_t>(u.cols()));
        std::iota(b.support.begin(), b.support.end(), std::size_t{0});
        return b;
    }

    BandlimitedBasis basis_;
    Matrix p_;
    double sigma2_;
    Eigen::LLT<Matrix> llt_;
    Matrix l_;
    Matrix p_inv_;
    Matrix ut_;
};

/// Random full-rank covariance P = Q^T D Q, with Q Haar-orthogonal (QR of a
/// standard Gaussian matrix, R's diagonal signs folded into Q) and D's
/// entries uniform on [1e-3, 1]. Eigenvalues of P are exactly D up to
/// rounding.
inline Matrix random_psd_covariance(std::size_t k, Seed seed) {
    if (k < 1) throw std::invalid_argument("random_psd_covariance: k must be >= 1");
    const auto kk = static_cast<Eigen::Index>(k);
    Rng rng(seed);
    Matrix g(kk, kk);
    for (Eigen::Index j = 0; j < kk; ++j) {
        for (Eigen::Index i = 0; i < kk; ++i) g(i, j) = rng.normal();
    }
    Vector d(kk);
    for (Eigen::Index i = 0; i < kk; ++i) d(i) = 1e-3 + (1.0 - 1e-3) * rng.uniform();

    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < kk; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return detail::symmetrized(q.transpose() * d.asDiagonal() * q);
}

struct SignalDraw {
    Vector x;     ///< nodal signal, length n
    Vector xbar;  ///< frequency coefficients on the support, length k
};

/// xbar = L z with L the Cholesky factor of P and z standard normal; x = U xbar.
inline SignalDraw draw_signal(const SignalModel& model, Seed seed) {
    Rng rng(seed);
    Vector z(static_cast<Eigen::Index>(model.k()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    SignalDraw out;
    out.xbar = model.p_cholesky_factor() * z;
    out.x = model.u() * out.xbar;
    return out;
}

/// y = x + n with n_i ~ N(0, sigma2) i.i.d.
inline Vector observe(const SignalModel& model, const Vector& x, Seed seed) {
    if (static_cast<std::size_t>(x.size()) != model.n()) {
        throw DimensionError("observe: signal length does not match the model");
    }
    Rng rng(seed);
    const double sd = std::sqrt(model.sigma2());
    Vector y = x;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sd * rng.normal();
    return y;
}

}  // namespace gsampling
