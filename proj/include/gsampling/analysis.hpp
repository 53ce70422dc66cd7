#pragma once

#include "gsampling/estimator.hpp"
#include "gsampling/random.hpp"
#include "gsampling/samplers.hpp"
#include "gsampling/spectral.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gsampling {

/// Constant of the high-probability bound: it holds with probability at
/// least 1 - exp(-kPacConstant * k).
inline constexpr double kPacConstant = 0.088;

/// Upper bound on the maximum element-wise curvature of f(S) = Tr(P - sigma_bar(S)):
///     (lmax(P)^2 / lmin(P)^2) * (1 + lmax(P) / sigma^2)^3.
inline double curvature_bound(const SignalModel& model) {
    const SpectralBasis eig = eig_symmetric(model.p(), BasisSource::adjacency);
    const double lmax = eig.eigenvalues(0);
    const double lmin = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (!(lmin > 0.0)) throw std::invalid_argument("curvature_bound: P is singular");
    const double ratio = lmax / lmin;
    return ratio * ratio * std::pow(1.0 + lmax / model.sigma2(), 3);
}

struct CurvatureReport {
    double value = 0.0;                  ///< max f_i(T) / f_i(S) over counted triples
    std::uint64_t triples = 0;           ///< (S, T, i) triples with a usable denominator
    std::uint64_t skipped_zero_gain = 0; ///< triples dropped because f_i(S) <= 1e-14
};

/// Maximum element-wise curvature by enumeration of every S strictly inside
/// T and every i outside T. Marginal gains are tabulated once per
/// (subset, node) using the rank-one recursion over subsets ordered by
/// bitmask. Limited to n <= 12.
inline CurvatureReport exact_curvature(const SignalModel& model, std::size_t max_n = 12) {
    const std::size_t n = model.n();
    if (n > max_n || n > 20) {
        throw std::length_error("exact_curvature: n=" + std::to_string(n) + " exceeds the enumeration guard");
    }
    const std::size_t subsets = std::size_t{1} << n;
    // gain[mask * n + i] for i not in mask.
    std::vector<double> gain(subsets * n, 0.0);
    std::vector<CovarianceState> states;
    states.reserve(subsets);
    states.push_back(init_state(model));
    for (std::size_t mask = 1; mask < subsets; ++mask) {
        const auto low = static_cast<NodeIndex>(std::countr_zero(mask));
        states.push_back(add_node(states[mask & (mask - 1)], low, model));
    }
    for (std::size_t mask = 0; mask < subsets; ++mask) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask >> i & 1U)) gain[mask * n + i] = marginal_gain(states[mask], i, model);
        }
    }
    states.clear();

    CurvatureReport rep;
    for (std::size_t t = 1; t < subsets; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (t >> i & 1U) continue;
            const double num = gain[t * n + i];
            // Proper subsets S of T, including the empty set.
            for (std::size_t s = (t - 1) & t;; s = (s - 1) & t) {
                const double den = gain[s * n + i];
                if (den <= 1e-14) {
                    ++rep.skipped_zero_gain;
                } else {
                    ++rep.triples;
                    rep.value = std::max(rep.value, num / den);
                }
                if (s == 0) break;
            }
        }
    }
    return rep;
}

struct AlphaTerms {
    double alpha = 0.0;
    double beta = 1.0;
    bool beta_forced = false;  ///< s_batch >= n, where beta is undefined; beta = 1 used
};

/// alpha = 1 - e^{-1/c} - epsilon^beta / c with
/// beta = 1 + max{0, s/(2N) - 1/(2(N - s))}.
inline AlphaTerms expectation_alpha(double c, double epsilon, std::size_t n, std::size_t s_batch) {
    if (!(c >= 1.0)) throw std::invalid_argument("expectation_alpha: c must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("expectation_alpha: epsilon must lie in (0, 1)");
    if (n < 1) throw std::invalid_argument("expectation_alpha: n must be >= 1");
    AlphaTerms out;
    if (s_batch >= n) {
        out.beta = 1.0;
        out.beta_forced = true;
    } else {
        const double nn = static_cast<double>(n);
        const double s = static_cast<double>(s_batch);
        out.beta = 1.0 + std::max(0.0, s / (2.0 * nn) - 1.0 / (2.0 * (nn - s)));
    }
    out.alpha = 1.0 - std::exp(-1.0 / c) - std::pow(epsilon, out.beta) / c;
    return out;
}

struct MeanAndError {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Sample mean and its standard error (sample sd / sqrt(count)); the error
/// is 0 for a single value.
inline MeanAndError mean_and_standard_error(std::span<const double> values) {
    MeanAndError out;
    if (values.empty()) return out;
    const double m = static_cast<double>(values.size());
    for (double v : values) out.mean += v;
    out.mean /= m;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.standard_error = std::sqrt(ss / (m - 1.0) / m);
    }
    return out;
}

enum class BoundKind { expectation, pac };

inline std::string_view to_string(BoundKind k) { return k == BoundKind::expectation ? "expectation" : "pac"; }

struct BoundReport {
    BoundKind kind = BoundKind::expectation;
    std::size_t n = 0;
    std::size_t k = 0;
    double epsilon = 0.0;
    std::size_t s_batch = 0;
    std::size_t trials = 0;

    double alpha = 0.0;
    double beta = 1.0;
    bool beta_forced = false;
    double c = 1.0;  ///< max(1, curvature_bound)
    double curvature_bound = 0.0;
    std::optional<double> exact_curvature;

    double trace_p = 0.0;
    double trace_optimal = 0.0;
    double rhs = 0.0;

    double mean_trace = 0.0;       ///< expectation: mean Tr(sigma_bar(S_rg))
    double standard_error = 0.0;   ///< expectation: SE of that mean
    std::size_t violations = 0;    ///< pac: trials exceeding the rhs
    double violation_fraction = 0.0;
    double allowed_fraction = 0.0; ///< pac: exp(-0.088 k) + slack

    bool satisfied = false;
};

namespace detail {

inline BoundReport prepare_bound(const SignalModel& model, std::size_t k, double epsilon, std::size_t trials,
                                 BoundKind kind) {
    if (trials < 1) throw std::invalid_argument("bound check: trials must be >= 1");
    check_budget(model, k, "bound check");
    if (!(epsilon < 1.0) || epsilon < min_epsilon(k)) {
        throw std::out_of_range("bound check: epsilon must lie in [e^-k, 1)");
    }
    BoundReport rep;
    rep.kind = kind;
    rep.n = model.n();
    rep.k = k;
    rep.epsilon = epsilon;
    rep.trials = trials;
    rep.s_batch = batch_size(model.n(), k, epsilon, model.n());
    rep.curvature_bound = curvature_bound(model);
    rep.c = std::max(1.0, rep.curvature_bound);
    const AlphaTerms a = expectation_alpha(rep.c, epsilon, model.n(), rep.s_batch);
    rep.alpha = a.alpha;
    rep.beta = a.beta;
    rep.beta_forced = a.beta_forced;
    if (model.n() <= 12) rep.exact_curvature = exact_curvature(model).value;
    rep.trace_p = model.trace_p();
    rep.trace_optimal = brute_force(model, k).mse;
    return rep;
}

}  // namespace detail

/// Empirical check of
///     E[Tr(sigma_bar(S_rg))] <= alpha Tr(sigma_bar(O)) + (1 - alpha) Tr(P)
/// with O the brute-force optimum and c = max(1, curvature_bound). Trial t
/// uses seed derive_seed(master_seed, {t}). Satisfied when the sample mean
/// plus two standard errors does not exceed the right-hand side.
inline BoundReport check_expectation_bound(const SignalModel& model, std::size_t k, double epsilon,
                                           std::size_t trials, Seed master_seed) {
    BoundReport rep = detail::prepare_bound(model, k, epsilon, trials, BoundKind::expectation);
    rep.rhs = rep.alpha * rep.trace_optimal + (1.0 - rep.alpha) * rep.trace_p;

    std::vector<double> traces(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        traces[t] = randomized_greedy(model, k, epsilon, derive_seed(master_seed, {t})).mse;
    }
    const MeanAndError stats = mean_and_standard_error(traces);
    rep.mean_trace = stats.mean;
    rep.standard_error = stats.standard_error;
    rep.satisfied = rep.mean_trace + 2.0 * rep.standard_error <= rep.rhs;
    return rep;
}

/// Empirical check of the high-probability bound
///     Tr(sigma_bar(S_rg)) <= (1 - e^{-1/(2c)}) Tr(sigma_bar(O)) + e^{-1/(2c)} Tr(P)
/// per trial. Satisfied when the fraction of violating trials is at most
/// exp(-0.088 k) + slack.
inline BoundReport check_pac_bound(const SignalModel& model, std::size_t k, double epsilon, std::size_t trials,
                                   Seed master_seed, double slack = 0.0) {
    BoundReport rep = detail::prepare_bound(model, k, epsilon, trials, BoundKind::pac);
    const double w = std::exp(-1.0 / (2.0 * rep.c));
    rep.rhs = (1.0 - w) * rep.trace_optimal + w * rep.trace_p;
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const double v = randomized_greedy(model, k, epsilon, derive_seed(master_seed, {t})).mse;
        sum += v;
        if (v > rep.rhs) ++rep.violations;
    }
    rep.mean_trace = sum / static_cast<double>(trials);
    rep.violation_fraction = static_cast<double>(rep.violations) / static_cast<double>(trials);
    rep.allowed_fraction = std::exp(-kPacConstant * static_cast<double>(k)) + slack;
    rep.satisfied = rep.violation_fraction <= rep.allowed_fraction;
    return rep;
}

}  // namespace gsampling
