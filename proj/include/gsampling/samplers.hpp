#pragma once

#include "gsampling/estimator.hpp"
#include "gsampling/random.hpp"
#include "gsampling/signal_model.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsampling {

enum class Method {
    randomized_greedy,
    greedy,
    brute_force,
    uniform_random,
    leverage_score,
    relaxation_rounded,
};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::randomized_greedy: return "randomized_greedy";
        case Method::greedy: return "greedy";
        case Method::brute_force: return "brute_force";
        case Method::uniform_random: return "uniform_random";
        case Method::leverage_score: return "leverage_score";
        case Method::relaxation_rounded: return "relaxation_rounded";
    }
    return "unknown";
}

inline Method parse_method(std::string_view name) {
    for (Method m : {Method::randomized_greedy, Method::greedy, Method::brute_force,
                     Method::uniform_random, Method::leverage_score, Method::relaxation_rounded}) {
        if (to_string(m) == name) return m;
    }
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

struct SamplingResult {
    NodeSet s;  ///< selection order for greedy methods, ascending otherwise
    double mse = 0.0;
    double f_value = 0.0;
    std::uint64_t gain_evaluations = 0;
    double elapsed_seconds = 0.0;
    Seed seed = 0;
    Method method = Method::greedy;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

inline void check_budget(const SignalModel& model, std::size_t k, const char* who) {
    if (k < 1 || k > model.n()) {
        throw std::out_of_range(std::string(who) + ": budget " + std::to_string(k) + " outside [1, " +
                                std::to_string(model.n()) + "]");
    }
}

/// Fills mse/f_value for a set chosen without tracking the covariance.
inline void finish_with_direct(SamplingResult& r, const SignalModel& model) {
    r.mse = mse(r.s, model);
    r.f_value = model.trace_p() - r.mse;
}

/// Index of the largest gain among `candidates`; ties go to the lowest node
/// index regardless of candidate order.
inline std::size_t best_candidate(const CovarianceState& state, std::span<const NodeIndex> candidates,
                                  const SignalModel& model) {
    std::size_t best = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double g = detail::marginal_gain_unchecked(state.sigma_bar(), model, candidates[i]);
        if (g > best_gain || (g == best_gain && candidates[i] < candidates[best])) {
            best_gain = g;
            best = i;
        }
    }
    return best;
}

}  // namespace detail

/// Per-iteration candidate batch size ceil((N/k) ln(1/epsilon)), clamped to
/// [1, remaining].
inline std::size_t batch_size(std::size_t n, std::size_t k, double epsilon, std::size_t remaining) {
    const double s = std::ceil(static_cast<double>(n) / static_cast<double>(k) * std::log(1.0 / epsilon));
    if (!(s < static_cast<double>(remaining))) return remaining;
    return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

/// Smallest admissible epsilon for budget k, e^{-k}. At this value every
/// batch covers all remaining nodes.
inline double min_epsilon(std::size_t k) { return std::exp(-static_cast<double>(k)); }

/// Randomized greedy selection. Each of the k iterations draws a batch R of
/// batch_size() nodes uniformly without replacement from the unselected
/// nodes, adds the argmax of the marginal gain over R, and updates the error
/// covariance by the rank-one recursion.
inline SamplingResult randomized_greedy(const SignalModel& model, std::size_t k, double epsilon, Seed seed) {
    detail::check_budget(model, k, "randomized_greedy");
    if (!(epsilon < 1.0) || epsilon < min_epsilon(k)) {
        throw std::out_of_range("randomized_greedy: epsilon must lie in [e^-k, 1)");
    }
    const auto start = detail::Clock::now();
    const std::size_t n = model.n();
    Rng rng(seed);

    std::vector<NodeIndex> pool(n);
    std::iota(pool.begin(), pool.end(), NodeIndex{0});
    CovarianceState state = init_state(model);
    SamplingResult r;
    r.method = Method::randomized_greedy;
    r.seed = seed;

    while (state.size() < k) {
        const std::size_t batch = batch_size(n, k, epsilon, pool.size());
        std::span<NodeIndex> all(pool);
        partial_shuffle(all, batch, rng);
        const std::size_t pick = detail::best_candidate(state, all.first(batch), model);
        r.gain_evaluations += batch;
        state = add_node(state, pool[pick], model);
        pool[pick] = pool.back();
        pool.pop_back();
    }
    r.s = state.selected();
    r.mse = state.mse();
    r.f_value = state.f_value();
    r.elapsed_seconds = detail::seconds_since(start);
    return r;
}

/// Exact greedy: k iterations of argmax over every unselected node.
inline SamplingResult greedy(const SignalModel& model, std::size_t k) {
    detail::check_budget(model, k, "greedy");
    const auto start = detail::Clock::now();
    std::vector<NodeIndex> remaining(model.n());
    std::iota(remaining.begin(), remaining.end(), NodeIndex{0});
    CovarianceState state = init_state(model);
    SamplingResult r;
    r.method = Method::greedy;

    while (state.size() < k) {
        const std::size_t pick = detail::best_candidate(state, remaining, model);
        r.gain_evaluations += remaining.size();
        state = add_node(state, remaining[pick], model);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    r.s = state.selected();
    r.mse = state.mse();
    r.f_value = state.f_value();
    r.elapsed_seconds = detail::seconds_since(start);
    return r;
}

inline double binomial_coefficient(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(c);
}

/// Exhaustive minimum of Tr(sigma_bar(S)) over all |S| = k, evaluated by
/// direct_covariance in lexicographic order; the first minimum found wins.
/// Refuses instances with C(n, k) > max_subsets.
inline SamplingResult brute_force(const SignalModel& model, std::size_t k, double max_subsets = 1e6) {
    detail::check_budget(model, k, "brute_force");
    const std::size_t n = model.n();
    if (binomial_coefficient(n, k) > max_subsets) {
        throw std::length_error("brute_force: C(" + std::to_string(n) + ", " + std::to_string(k) +
                                ") exceeds the enumeration guard");
    }
    const auto start = detail::Clock::now();
    SamplingResult r;
    r.method = Method::brute_force;

    NodeSet current(k);
    std::iota(current.begin(), current.end(), NodeIndex{0});
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        const double value = direct_covariance(current, model).trace();
        ++r.gain_evaluations;
        if (value < best) {
            best = value;
            r.s = current;
        }
        // Next combination in lexicographic order.
        std::size_t i = k;
        while (i > 0 && current[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++current[i - 1];
        for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
    }
    r.mse = best;
    r.f_value = model.trace_p() - best;
    r.elapsed_seconds = detail::seconds_since(start);
    return r;
}

/// k distinct nodes uniformly at random.
inline SamplingResult uniform_random(const SignalModel& model, std::size_t k, Seed seed) {
    detail::check_budget(model, k, "uniform_random");
    const auto start = detail::Clock::now();
    Rng rng(seed);
    SamplingResult r;
    r.method = Method::uniform_random;
    r.seed = seed;
    r.s = sample_without_replacement(model.n(), k, rng);
    std::sort(r.s.begin(), r.s.end());
    detail::finish_with_direct(r, model);
    r.elapsed_seconds = detail::seconds_since(start);
    return r;
}

/// Sequential draws without replacement, node i chosen with probability
/// proportional to its leverage score ||u_i||^2 among the remaining nodes.
/// Once every remaining node has zero score the rest are drawn uniformly.
inline SamplingResult leverage_score(const SignalModel& model, std::size_t k, Seed seed) {
    detail::check_budget(model, k, "leverage_score");
    const auto start = detail::Clock::now();
    const std::size_t n = model.n();
    Rng rng(seed);
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) score[i] = model.row(i).squaredNorm();
    std::vector<bool> taken(n, false);

    SamplingResult r;
    r.method = Method::leverage_score;
    r.seed = seed;
    while (r.s.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) total += score[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i] || score[i] <= 0.0) continue;
                acc += score[i];
                pick = i;
                if (target < acc) break;
            }
        } else {
            std::vector<NodeIndex> rest;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i]) rest.push_back(i);
            }
            pick = rest[static_cast<std::size_t>(rng.below(rest.size()))];
        }
        taken[pick] = true;
        r.s.push_back(pick);
    }
    std::sort(r.s.begin(), r.s.end());
    detail::finish_with_direct(r, model);
    r.elapsed_seconds = detail::seconds_since(start);
    return r;
}

}  // namespace gsampling
