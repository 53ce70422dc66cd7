#pragma once

#include "gsampling/estimator.hpp"
#include "gsampling/samplers.hpp"
#include "gsampling/signal_model.hpp"
#include "gsampling/spectral.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace gsampling {

// Continuous relaxation of the subset-selection problem:
//
//     minimize  Tr(sigma_bar(z)),  sigma_bar(z) = (P^{-1} + sigma^{-2} sum_i z_i u_i u_i^T)^{-1}
//     s.t.      0 <= z_i <= 1,  sum_i z_i <= k.
//
// Introducing C >= sigma_bar(z) gives the epigraph form min Tr(C), and by the
// Schur complement C - sigma_bar(z) >= 0 iff [[C, I], [I, sigma_bar(z)^{-1}]] >= 0,
// which is the semidefinite program. The solver below works on the smooth
// convex form directly; check_schur() certifies that (z, C = sigma_bar(z))
// is feasible for the SDP with Tr(C) equal to the relaxed objective.

struct RelaxedSolution {
    Vector z;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::size_t objective_evaluations = 0;
    bool converged = false;
};

struct RelaxationOptions {
    std::size_t max_iters = 5000;
    double tol = 1e-7;
    double initial_step = 1.0;
    double armijo = 1e-4;
};

namespace detail {

inline void check_weights(const Vector& z, const SignalModel& model, const char* who) {
    if (static_cast<std::size_t>(z.size()) != model.n()) {
        throw DimensionError(std::string(who) + ": z must have length n");
    }
    if (!z.allFinite() || (z.array() < -1e-9).any() || (z.array() > 1.0 + 1e-9).any()) {
        throw std::invalid_argument(std::string(who) + ": z must lie in [0, 1]^n");
    }
}

inline Matrix relaxed_covariance_unchecked(const Vector& z, const SignalModel& model) {
    const auto k = static_cast<Eigen::Index>(model.k());
    Matrix info = model.p_inverse();
    info.noalias() += (1.0 / model.sigma2()) * (model.ut() * z.asDiagonal() * model.u());
    Eigen::LLT<Matrix> llt(symmetrized(info));
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("relaxed objective: information matrix is not positive definite");
    }
    return symmetrized(llt.solve(Matrix::Identity(k, k)));
}

}  // namespace detail

/// sigma_bar(z) for fractional weights z in [0, 1]^n.
inline Matrix relaxed_covariance(const Vector& z, const SignalModel& model) {
    detail::check_weights(z, model, "relaxed_covariance");
    return detail::relaxed_covariance_unchecked(z, model);
}

struct ObjectiveAndGradient {
    double value = 0.0;
    Vector grad;
};

/// Tr(sigma_bar(z)) and its gradient, d/dz_i = -sigma^{-2} u_i^T sigma_bar(z)^2 u_i.
inline ObjectiveAndGradient relaxed_objective_and_gradient(const Vector& z, const SignalModel& model) {
    detail::check_weights(z, model, "relaxed_objective_and_gradient");
    const Matrix sb = detail::relaxed_covariance_unchecked(z, model);
    const Matrix w = model.u() * sb;
    ObjectiveAndGradient out;
    out.value = sb.trace();
    out.grad = -(1.0 / model.sigma2()) * w.rowwise().squaredNorm();
    return out;
}

/// Euclidean projection onto {0 <= z <= 1, sum z <= k}.
///
/// If clipping to the box already satisfies the sum constraint it is the
/// answer. Otherwise the sum constraint is active and z = clip(v - tau, 0, 1)
/// for the tau >= 0 solving sum z = k, found by bisection to width 1e-10;
/// the upper end of the final bracket is used so sum z <= k holds.
inline Vector project_box_capped_simplex(const Vector& v, std::size_t k) {
    if (k < 1) throw std::invalid_argument("project_box_capped_simplex: k must be >= 1");
    const double budget = static_cast<double>(k);
    auto clipped = [&](double tau) { return (v.array() - tau).min(1.0).max(0.0).matrix().eval(); };
    Vector z = clipped(0.0);
    if (z.sum() <= budget) return z;

    double lo = 0.0;
    double hi = v.maxCoeff();
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (clipped(mid).sum() > budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return clipped(hi);
}

/// Projected gradient descent with Armijo backtracking on the relaxed
/// problem, started from the projection of z0. The first trial step of every
/// iteration is options.initial_step, halved until
///     f(z+) <= f(z) + armijo * grad^T (z+ - z).
/// Stops when ||z+ - z||_inf <= tol (converged) or after max_iters.
/// The objective is non-increasing along the iterates.
inline RelaxedSolution solve_relaxation_from(const SignalModel& model, std::size_t k, const Vector& z0,
                                             const RelaxationOptions& options = {}) {
    if (k < 1 || k > model.n()) throw std::out_of_range("solve_relaxation: budget outside [1, n]");
    if (static_cast<std::size_t>(z0.size()) != model.n()) throw DimensionError("solve_relaxation: z0 must have length n");

    RelaxedSolution sol;
    sol.z = project_box_capped_simplex(z0, k);
    ObjectiveAndGradient cur = relaxed_objective_and_gradient(sol.z, model);
    ++sol.objective_evaluations;

    for (sol.iterations = 0; sol.iterations < options.max_iters;) {
        double step = options.initial_step;
        Vector next;
        double next_value = 0.0;
        bool accepted = false;
        while (step > 1e-30) {
            next = project_box_capped_simplex(sol.z - step * cur.grad, k);
            next_value = detail::relaxed_covariance_unchecked(next, model).trace();
            ++sol.objective_evaluations;
            if (next_value <= cur.value + options.armijo * cur.grad.dot(next - sol.z)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++sol.iterations;
        if (!accepted) break;  // no representable decrease left

        const double change = (next - sol.z).cwiseAbs().maxCoeff();
        sol.z = std::move(next);
        cur = relaxed_objective_and_gradient(sol.z, model);
        ++sol.objective_evaluations;
        if (change <= options.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.objective = cur.value;
    return sol;
}

/// solve_relaxation_from() started at z = (k/n) 1.
inline RelaxedSolution solve_relaxation(const SignalModel& model, std::size_t k,
                                        const RelaxationOptions& options = {}) {
    if (k < 1 || k > model.n()) throw std::out_of_range("solve_relaxation: budget outside [1, n]");
    const auto n = static_cast<Eigen::Index>(model.n());
    return solve_relaxation_from(model, k, Vector::Constant(n, static_cast<double>(k) / static_cast<double>(n)), options);
}

/// True iff B = [[C, I], [I, sigma_bar(z)^{-1}]] is positive semidefinite
/// (smallest eigenvalue >= -1e-8), i.e. C >= sigma_bar(z).
inline bool check_schur(const Vector& z, const Matrix& c, const SignalModel& model) {
    detail::check_weights(z, model, "check_schur");
    const auto k = static_cast<Eigen::Index>(model.k());
    if (c.rows() != k || c.cols() != k) throw DimensionError("check_schur: C must be k x k");
    Matrix info = model.p_inverse();
    info.noalias() += (1.0 / model.sigma2()) * (model.ut() * z.asDiagonal() * model.u());

    Matrix b(2 * k, 2 * k);
    b.topLeftCorner(k, k) = detail::symmetrized(c);
    b.topRightCorner(k, k).setIdentity();
    b.bottomLeftCorner(k, k).setIdentity();
    b.bottomRightCorner(k, k) = detail::symmetrized(info);
    const SpectralBasis eig = eig_symmetric(b, BasisSource::laplacian);
    return eig.eigenvalues(0) >= -1e-8;
}

/// Indices of the k largest entries of z (ties to the lower index), ascending.
inline NodeSet round_top_k(const Vector& z, std::size_t k) {
    const auto n = static_cast<std::size_t>(z.size());
    k = std::min(k, n);
    NodeSet order(n);
    std::iota(order.begin(), order.end(), NodeIndex{0});
    std::stable_sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
        return z(static_cast<Eigen::Index>(a)) > z(static_cast<Eigen::Index>(b));
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

/// Relaxation followed by top-k rounding. gain_evaluations counts per-node
/// gradient terms (n per gradient evaluation).
inline SamplingResult relaxation_rounded(const SignalModel& model, std::size_t k,
                                         const RelaxationOptions& options = {}) {
    detail::check_budget(model, k, "relaxation_rounded");
    const auto start = detail::Clock::now();
    const RelaxedSolution sol = solve_relaxation(model, k, options);
    SamplingResult r;
    r.method = Method::relaxation_rounded;
    r.s = round_top_k(sol.z, k);
    r.gain_evaluations = static_cast<std::uint64_t>(sol.iterations + 1) * model.n();
    detail::finish_with_direct(r, model);
    r.elapsed_seconds = detail::seconds_since(start);
    return r;
}

}  // namespace gsampling
