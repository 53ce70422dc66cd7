#pragma once

#include "gsampling/signal_model.hpp"
#include "gsampling/types.hpp"

#include <Eigen/Cholesky>

#include <string>
#include <utility>
#include <vector>

namespace gsampling {

/// Error covariance of the LMS estimate for a sampling set S, kept in the
/// frequency domain:
///
///     sigma_bar(S) = (P^{-1} + sigma^{-2} U_S^T U_S)^{-1},
///     f(S)         = Tr(P) - Tr(sigma_bar(S)).
///
/// Values are immutable; add_node() returns a new state updated by the
/// rank-one recursion, so concurrent gain evaluations against one state are
/// safe.
class CovarianceState {
public:
    const NodeSet& selected() const noexcept { return s_; }
    bool contains(NodeIndex j) const { return j < in_set_.size() && in_set_[j]; }
    std::size_t size() const noexcept { return s_.size(); }

    const Matrix& sigma_bar() const noexcept { return sigma_bar_; }
    double f_value() const noexcept { return f_value_; }
    /// Tr(sigma_bar), the analytic MSE of the current set.
    double mse() const { return sigma_bar_.trace(); }

private:
    friend CovarianceState init_state(const SignalModel& model);
    friend CovarianceState add_node(const CovarianceState& state, NodeIndex j, const SignalModel& model);

    NodeSet s_;
    std::vector<bool> in_set_;
    Matrix sigma_bar_;
    double f_value_ = 0.0;
};

/// S = {}, sigma_bar = P, f = 0.
inline CovarianceState init_state(const SignalModel& model) {
    CovarianceState st;
    st.in_set_.assign(model.n(), false);
    st.sigma_bar_ = model.p();
    st.f_value_ = 0.0;
    return st;
}

namespace detail {

inline void check_candidate(const CovarianceState& state, NodeIndex j, const SignalModel& model,
                            const char* who) {
    if (j >= model.n()) {
        throw std::out_of_range(std::string(who) + ": node " + std::to_string(j) + " out of range");
    }
    if (state.contains(j)) {
        throw std::invalid_argument(std::string(who) + ": node " + std::to_string(j) +
                                    " is already selected");
    }
}

/// Gain of node j without the membership check; callers guarantee j is new.
inline double marginal_gain_unchecked(const Matrix& sigma_bar, const SignalModel& model, NodeIndex j) {
    const auto u = model.row(j);
    const Vector w = sigma_bar * u;
    // u^T sigma_bar^2 u = ||sigma_bar u||^2 for symmetric sigma_bar.
    return w.squaredNorm() / (model.sigma2() + u.dot(w));
}

}  // namespace detail

/// f(S + j) - f(S) = u_j^T sigma_bar^2 u_j / (sigma^2 + u_j^T sigma_bar u_j).
inline double marginal_gain(const CovarianceState& state, NodeIndex j, const SignalModel& model) {
    detail::check_candidate(state, j, model, "marginal_gain");
    return detail::marginal_gain_unchecked(state.sigma_bar(), model, j);
}

/// Rank-one (Sherman-Morrison) update
///     sigma_bar' = sigma_bar - (sigma_bar u)(sigma_bar u)^T / (sigma^2 + u^T sigma_bar u),
/// followed by re-symmetrization.
inline CovarianceState add_node(const CovarianceState& state, NodeIndex j, const SignalModel& model) {
    detail::check_candidate(state, j, model, "add_node");
    const auto u = model.row(j);
    const Vector w = state.sigma_bar_ * u;
    const double denom = model.sigma2() + u.dot(w);

    CovarianceState next;
    next.s_ = state.s_;
    next.s_.push_back(j);
    next.in_set_ = state.in_set_;
    next.in_set_[j] = true;
    next.sigma_bar_ = state.sigma_bar_;
    next.sigma_bar_.noalias() -= (w / denom) * w.transpose();
    next.sigma_bar_ = detail::symmetrized(next.sigma_bar_);
    next.f_value_ = state.f_value_ + w.squaredNorm() / denom;
    return next;
}

namespace detail {

inline void check_set(const NodeSet& s, const SignalModel& model, const char* who) {
    std::vector<bool> seen(model.n(), false);
    for (NodeIndex j : s) {
        if (j >= model.n()) {
            throw std::out_of_range(std::string(who) + ": node " + std::to_string(j) + " out of range");
        }
        if (seen[j]) throw std::invalid_argument(std::string(who) + ": duplicate node " + std::to_string(j));
        seen[j] = true;
    }
}

/// sigma^2 P^{-1} + U_S^T U_S, the scaled information matrix of S. Equal to
/// sigma^2 sigma_bar(S)^{-1}; the scaling keeps it well defined as sigma^2 -> 0.
inline Eigen::LLT<Matrix> scaled_information(const NodeSet& s, const SignalModel& model, const char* who) {
    check_set(s, model, who);
    const auto k = static_cast<Eigen::Index>(model.k());
    Matrix us(static_cast<Eigen::Index>(s.size()), k);
    for (std::size_t r = 0; r < s.size(); ++r) us.row(static_cast<Eigen::Index>(r)) = model.row(s[r]).transpose();
    Matrix info = model.sigma2() * model.p_inverse();
    info.noalias() += us.transpose() * us;
    Eigen::LLT<Matrix> llt(symmetrized(info));
    if (llt.info() != Eigen::Success) {
        throw ConditioningError(std::string(who) + ": information matrix is not positive definite");
    }
    if (llt.rcond() < 1e-14) {
        throw ConditioningError(std::string(who) + ": information matrix condition number exceeds 1e14");
    }
    return llt;
}

}  // namespace detail

/// sigma_bar(S) evaluated directly by a Cholesky solve, without recursion.
inline Matrix direct_covariance(const NodeSet& s, const SignalModel& model) {
    const auto llt = detail::scaled_information(s, model, "direct_covariance");
    const auto k = static_cast<Eigen::Index>(model.k());
    return detail::symmetrized(model.sigma2() * llt.solve(Matrix::Identity(k, k)));
}

/// Tr(sigma_bar(S)); for S = {} this is Tr(P).
inline double mse(const NodeSet& s, const SignalModel& model) {
    if (s.empty()) return model.trace_p();
    return direct_covariance(s, model).trace();
}

/// Tr(U sigma_bar U^T), the nodal-domain MSE. Equals mse() when U has
/// orthonormal columns.
inline double nodal_mse(const NodeSet& s, const SignalModel& model) {
    const Matrix sb = s.empty() ? model.p() : direct_covariance(s, model);
    return (model.u() * sb).cwiseProduct(model.u()).sum();
}

struct Reconstruction {
    Vector xhat;      ///< U xbar_hat, length n
    Vector xbar_hat;  ///< LMS estimate of the k frequency coefficients
};

/// LMS estimate from the samples y_S:
///     xbar_hat = sigma^{-2} sigma_bar(S) U_S^T y_S,  xhat = U xbar_hat,
/// computed as (sigma^2 P^{-1} + U_S^T U_S)^{-1} U_S^T y_S.
inline Reconstruction reconstruct(const Vector& y, const NodeSet& s, const SignalModel& model) {
    if (s.empty()) throw std::invalid_argument("reconstruct: empty sampling set");
    if (static_cast<std::size_t>(y.size()) != model.n()) {
        throw DimensionError("reconstruct: observation length does not match the model");
    }
    const auto llt = detail::scaled_information(s, model, "reconstruct");
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(model.k()));
    for (NodeIndex j : s) rhs += y(static_cast<Eigen::Index>(j)) * model.row(j);
    Reconstruction out;
    out.xbar_hat = llt.solve(rhs);
    out.xhat = model.u() * out.xbar_hat;
    return out;
}

}  // namespace gsampling
