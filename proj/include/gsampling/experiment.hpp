#pragma once

#include "gsampling/analysis.hpp"
#include "gsampling/estimator.hpp"
#include "gsampling/graph.hpp"
#include "gsampling/random.hpp"
#include "gsampling/relaxation.hpp"
#include "gsampling/samplers.hpp"
#include "gsampling/signal_model.hpp"
#include "gsampling/spectral.hpp"

#include "json.hpp"

#include <atomic>
#include <charconv>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace gsampling {

inline constexpr std::string_view kLibraryVersion = "1.0.0";

/// Invalid experiment configuration. field() names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ErdosRenyiSpec {
    std::size_t n = 0;
    double p = 0.0;
};

struct MethodSpec {
    Method method = Method::greedy;
    double epsilon = 0.1;  ///< randomized_greedy only
    std::string label;     ///< CSV name; defaults to e.g. "randomized_greedy[eps=0.1]"
};

struct ExperimentConfig {
    std::optional<ErdosRenyiSpec> er;
    std::optional<std::filesystem::path> graph_file;
    BasisSource basis_source = BasisSource::adjacency;
    std::size_t k_signal = 0;
    double sigma2 = 1e-2;
    std::vector<std::size_t> budgets;
    std::vector<MethodSpec> methods;
    std::size_t trials = 1;
    Seed master_seed = 0;
    std::string output;
    std::size_t workers = 1;
    bool record_timing = true;
    RelaxationOptions relaxation;
};

struct ExperimentRecord {
    std::size_t trial = 0;
    std::string method;
    std::size_t budget = 0;
    double mse_analytic = 0.0;
    double mse_empirical = 0.0;
    double elapsed_seconds = 0.0;
    std::uint64_t gain_evaluations = 0;
    Seed seed = 0;
};

/// Stream identifiers mixed into derive_seed() so that each random quantity
/// of a trial has its own independent stream.
namespace streams {
inline constexpr std::uint64_t graph = 1;
inline constexpr std::uint64_t covariance = 2;
inline constexpr std::uint64_t signal = 3;
inline constexpr std::uint64_t noise = 4;
inline constexpr std::uint64_t method = 5;
}  // namespace streams

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string default_label(const MethodSpec& m) {
    std::string label(to_string(m.method));
    if (m.method == Method::randomized_greedy) label += "[eps=" + format_double(m.epsilon) + "]";
    return label;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

template <class T>
T config_get(const nlohmann::json& j, const std::string& field) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(field, std::string("wrong type (") + e.what() + ")");
    }
}

inline std::size_t config_count(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)) {
        throw ConfigError(field, "expected a non-negative integer");
    }
    return j.get<std::size_t>();
}

}  // namespace detail

/// Checks every field-level invariant that does not depend on the graph.
/// With `require_runs` false only the instance fields (graph, basis,
/// k_signal, sigma2, seed) are checked, for single-instance commands.
inline void validate(const ExperimentConfig& c, bool require_runs = true) {
    if (c.er.has_value() == c.graph_file.has_value()) {
        throw ConfigError("graph", "exactly one of 'er' or 'file' is required");
    }
    if (c.er) {
        if (c.er->n < 1) throw ConfigError("graph.er.n", "must be >= 1");
        if (!(c.er->p >= 0.0 && c.er->p <= 1.0)) throw ConfigError("graph.er.p", "must lie in [0, 1]");
    }
    if (c.k_signal < 1) throw ConfigError("k_signal", "must be >= 1");
    if (c.er && c.k_signal > c.er->n) throw ConfigError("k_signal", "exceeds the number of nodes");
    if (!(c.sigma2 > 0.0) || !std::isfinite(c.sigma2)) throw ConfigError("sigma2", "must be positive");
    if (!require_runs) return;
    if (c.budgets.empty()) throw ConfigError("budgets", "must be non-empty");
    for (std::size_t i = 0; i < c.budgets.size(); ++i) {
        const std::string field = "budgets[" + std::to_string(i) + "]";
        if (c.budgets[i] < 1) throw ConfigError(field, "must be >= 1");
        if (c.budgets[i] > c.k_signal) throw ConfigError(field, "exceeds k_signal");
    }
    if (c.methods.empty()) throw ConfigError("methods", "must be non-empty");
    for (std::size_t i = 0; i < c.methods.size(); ++i) {
        const auto& m = c.methods[i];
        if (m.method == Method::randomized_greedy && !(m.epsilon > 0.0 && m.epsilon < 1.0)) {
            throw ConfigError("methods[" + std::to_string(i) + "].epsilon", "must lie in (0, 1)");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (c.methods[j].label == m.label) {
                throw ConfigError("methods[" + std::to_string(i) + "]", "duplicate label '" + m.label + "'");
            }
        }
        if (m.label.find_first_of(",\"\n") != std::string::npos) {
            throw ConfigError("methods[" + std::to_string(i) + "].label", "must not contain commas, quotes or newlines");
        }
    }
    if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
    if (c.workers < 1) throw ConfigError("workers", "must be >= 1");
    if (c.relaxation.max_iters < 1) throw ConfigError("relaxation.max_iters", "must be >= 1");
    if (!(c.relaxation.tol > 0.0)) throw ConfigError("relaxation.tol", "must be positive");
}

/// Parses and validates a config document. Relative graph file paths are
/// resolved against `base_dir`.
inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {},
                                     bool require_runs = true) {
    using detail::config_count;
    using detail::config_get;
    if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
    static const std::vector<std::string> known = {"graph", "basis_source", "k_signal", "sigma2", "budgets",
                                                   "methods", "trials", "master_seed", "output", "workers",
                                                   "record_timing", "relaxation"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown field");
    }

    ExperimentConfig c;
    if (!j.contains("graph") || !j["graph"].is_object()) throw ConfigError("graph", "required object");
    const auto& g = j["graph"];
    if (g.contains("er")) {
        const auto& er = g["er"];
        if (!er.is_object() || !er.contains("n") || !er.contains("p")) {
            throw ConfigError("graph.er", "requires 'n' and 'p'");
        }
        c.er = ErdosRenyiSpec{config_count(er["n"], "graph.er.n"), config_get<double>(er["p"], "graph.er.p")};
    }
    if (g.contains("file")) {
        std::filesystem::path p = config_get<std::string>(g["file"], "graph.file");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        c.graph_file = p;
    }
    if (j.contains("basis_source")) {
        try {
            c.basis_source = parse_basis_source(config_get<std::string>(j["basis_source"], "basis_source"));
        } catch (const std::invalid_argument& e) {
            if (dynamic_cast<const ConfigError*>(&e)) throw;
            throw ConfigError("basis_source", e.what());
        }
    }
    if (!j.contains("k_signal")) throw ConfigError("k_signal", "required");
    c.k_signal = config_count(j["k_signal"], "k_signal");
    if (j.contains("sigma2")) c.sigma2 = config_get<double>(j["sigma2"], "sigma2");
    if (require_runs && (!j.contains("budgets") || !j["budgets"].is_array())) throw ConfigError("budgets", "required array");
    if (j.contains("budgets") && !j["budgets"].is_array()) throw ConfigError("budgets", "expected an array");
    for (std::size_t i = 0; j.contains("budgets") && i < j["budgets"].size(); ++i) {
        c.budgets.push_back(config_count(j["budgets"][i], "budgets[" + std::to_string(i) + "]"));
    }
    if (require_runs && (!j.contains("methods") || !j["methods"].is_array())) throw ConfigError("methods", "required array");
    if (j.contains("methods") && !j["methods"].is_array()) throw ConfigError("methods", "expected an array");
    for (std::size_t i = 0; j.contains("methods") && i < j["methods"].size(); ++i) {
        const std::string field = "methods[" + std::to_string(i) + "]";
        const auto& mj = j["methods"][i];
        MethodSpec m;
        std::string name;
        if (mj.is_string()) {
            name = mj.get<std::string>();
        } else if (mj.is_object() && mj.contains("name")) {
            name = config_get<std::string>(mj["name"], field + ".name");
            if (mj.contains("epsilon")) m.epsilon = config_get<double>(mj["epsilon"], field + ".epsilon");
            if (mj.contains("label")) m.label = config_get<std::string>(mj["label"], field + ".label");
        } else {
            throw ConfigError(field, "expected a method name or {\"name\": ...}");
        }
        try {
            m.method = parse_method(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(mj.is_string() ? field : field + ".name", e.what());
        }
        if (m.label.empty()) m.label = default_label(m);
        c.methods.push_back(std::move(m));
    }
    if (j.contains("trials")) c.trials = config_count(j["trials"], "trials");
    if (j.contains("master_seed")) {
        if (!j["master_seed"].is_number_unsigned()) throw ConfigError("master_seed", "expected an unsigned 64-bit integer");
        c.master_seed = j["master_seed"].get<Seed>();
    }
    if (j.contains("output")) c.output = config_get<std::string>(j["output"], "output");
    if (j.contains("workers")) c.workers = config_count(j["workers"], "workers");
    if (j.contains("record_timing")) c.record_timing = config_get<bool>(j["record_timing"], "record_timing");
    if (j.contains("relaxation")) {
        const auto& r = j["relaxation"];
        if (!r.is_object()) throw ConfigError("relaxation", "expected an object");
        if (r.contains("max_iters")) c.relaxation.max_iters = config_count(r["max_iters"], "relaxation.max_iters");
        if (r.contains("tol")) c.relaxation.tol = config_get<double>(r["tol"], "relaxation.tol");
    }
    validate(c, require_runs);
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    if (c.er) j["graph"]["er"] = {{"n", c.er->n}, {"p", c.er->p}};
    if (c.graph_file) j["graph"]["file"] = c.graph_file->string();
    j["basis_source"] = std::string(to_string(c.basis_source));
    j["k_signal"] = c.k_signal;
    j["sigma2"] = c.sigma2;
    j["budgets"] = c.budgets;
    j["methods"] = nlohmann::json::array();
    for (const auto& m : c.methods) {
        nlohmann::json mj = {{"name", std::string(to_string(m.method))}, {"label", m.label}};
        if (m.method == Method::randomized_greedy) mj["epsilon"] = m.epsilon;
        j["methods"].push_back(mj);
    }
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["output"] = c.output;
    j["workers"] = c.workers;
    j["record_timing"] = c.record_timing;
    j["relaxation"] = {{"max_iters", c.relaxation.max_iters}, {"tol", c.relaxation.tol}};
    return j;
}

// ---------------------------------------------------------------------------
// Instances

/// Graph and bandlimited basis shared by all trials of an experiment.
struct Instance {
    Graph graph;
    BandlimitedBasis basis;
};

inline Graph build_graph(const ExperimentConfig& c) {
    if (c.er) return generate_erdos_renyi(c.er->n, c.er->p, derive_seed(c.master_seed, {streams::graph}));
    return load_matrix_market(*c.graph_file);
}

inline Instance build_instance(const ExperimentConfig& c) {
    Graph g = build_graph(c);
    if (c.k_signal > g.n()) throw ConfigError("k_signal", "exceeds the number of graph nodes");
    BandlimitedBasis b = bandlimit(graph_basis(g, c.basis_source), c.k_signal);
    return Instance{std::move(g), std::move(b)};
}

/// Signal model of trial `trial`: fresh covariance P from the trial's stream.
inline SignalModel trial_model(const Instance& inst, const ExperimentConfig& c, std::size_t trial) {
    return SignalModel(inst.basis, random_psd_covariance(c.k_signal, derive_seed(c.master_seed, {streams::covariance, trial})),
                       c.sigma2);
}

/// epsilon clamped up to e^{-budget}, the smallest admissible value.
inline double effective_epsilon(double epsilon, std::size_t budget) { return std::max(epsilon, min_epsilon(budget)); }

/// Runs one method at one budget.
inline SamplingResult run_method(const MethodSpec& m, const SignalModel& model, std::size_t budget, Seed seed,
                                 const RelaxationOptions& relaxation = {}) {
    switch (m.method) {
        case Method::randomized_greedy:
            return randomized_greedy(model, budget, effective_epsilon(m.epsilon, budget), seed);
        case Method::greedy: return greedy(model, budget);
        case Method::brute_force: return brute_force(model, budget);
        case Method::uniform_random: return uniform_random(model, budget, seed);
        case Method::leverage_score: return leverage_score(model, budget, seed);
        case Method::relaxation_rounded: return relaxation_rounded(model, budget, relaxation);
    }
    throw std::logic_error("run_method: unhandled method");
}

// ---------------------------------------------------------------------------
// Experiment loop

using RecordSink = std::function<void(const ExperimentRecord&)>;
using TrialErrorSink = std::function<void(std::size_t trial, const std::string& message)>;

/// All records of one trial: fresh P, one signal and one noise realization
/// shared by every (method, budget) pair.
inline std::vector<ExperimentRecord> run_trial(const Instance& inst, const ExperimentConfig& c, std::size_t trial) {
    const SignalModel model = trial_model(inst, c, trial);
    const SignalDraw draw = draw_signal(model, derive_seed(c.master_seed, {streams::signal, trial}));
    const Vector y = observe(model, draw.x, derive_seed(c.master_seed, {streams::noise, trial}));

    std::vector<ExperimentRecord> out;
    out.reserve(c.methods.size() * c.budgets.size());
    for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
        for (std::size_t bi = 0; bi < c.budgets.size(); ++bi) {
            const Seed seed = derive_seed(c.master_seed, {streams::method, trial, mi, bi});
            const SamplingResult res = run_method(c.methods[mi], model, c.budgets[bi], seed, c.relaxation);
            const Reconstruction rec = reconstruct(y, res.s, model);
            ExperimentRecord r;
            r.trial = trial;
            r.method = c.methods[mi].label;
            r.budget = c.budgets[bi];
            r.mse_analytic = res.mse;
            r.mse_empirical = (draw.x - rec.xhat).squaredNorm();
            r.elapsed_seconds = c.record_timing ? res.elapsed_seconds : 0.0;
            r.gain_evaluations = res.gain_evaluations;
            r.seed = seed;
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// Checks config constraints that need the instance (graph size).
inline void validate_against_instance(const ExperimentConfig& c, const Instance& inst) {
    for (std::size_t i = 0; i < c.methods.size(); ++i) {
        if (c.methods[i].method != Method::brute_force) continue;
        for (std::size_t b : c.budgets) {
            if (binomial_coefficient(inst.graph.n(), b) > 1e6) {
                throw ConfigError("methods[" + std::to_string(i) + "]",
                                  "brute_force needs C(n, budget) <= 1e6 for every budget");
            }
        }
    }
}

/// Runs every trial of `c`. Trials are distributed over c.workers threads;
/// records are handed to `sink` from the calling thread in trial order, so
/// the emitted sequence does not depend on the worker count. A trial that
/// throws is reported through `on_error` and contributes no records.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& c, const RecordSink& sink = {},
                                                    const TrialErrorSink& on_error = {}) {
    validate(c);
    const Instance inst = build_instance(c);
    validate_against_instance(c, inst);

    struct Slot {
        bool done = false;
        std::vector<ExperimentRecord> records;
        std::string error;
    };
    std::vector<Slot> slots(c.trials);
    std::mutex mu;
    std::condition_variable ready;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= c.trials) return;
            Slot s;
            try {
                s.records = run_trial(inst, c, t);
            } catch (const std::exception& e) {
                s.error = e.what();
                if (s.error.empty()) s.error = "unknown error";
            }
            s.done = true;
            {
                std::lock_guard lock(mu);
                slots[t] = std::move(s);
            }
            ready.notify_all();
        }
    };
    std::vector<std::jthread> pool;
    const std::size_t nthreads = std::min(c.workers, c.trials);
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);

    std::vector<ExperimentRecord> all;
    all.reserve(c.trials * c.methods.size() * c.budgets.size());
    for (std::size_t t = 0; t < c.trials; ++t) {
        Slot s;
        {
            std::unique_lock lock(mu);
            ready.wait(lock, [&] { return slots[t].done; });
            s = std::move(slots[t]);
        }
        if (!s.error.empty()) {
            if (on_error) on_error(t, s.error);
            continue;
        }
        for (auto& r : s.records) {
            if (sink) sink(r);
            all.push_back(std::move(r));
        }
    }
    return all;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr std::string_view kCsvHeader =
    "trial,method,budget,mse_analytic,mse_empirical,elapsed_seconds,gain_evaluations,seed";

inline std::string csv_line(const ExperimentRecord& r) {
    std::string s;
    s += std::to_string(r.trial);
    s += ',';
    s += r.method;
    s += ',';
    s += std::to_string(r.budget);
    s += ',';
    s += format_double(r.mse_analytic);
    s += ',';
    s += format_double(r.mse_empirical);
    s += ',';
    s += format_double(r.elapsed_seconds);
    s += ',';
    s += std::to_string(r.gain_evaluations);
    s += ',';
    s += std::to_string(r.seed);
    return s;
}

inline nlohmann::json to_json(const ExperimentRecord& r) {
    return {{"trial", r.trial},
            {"method", r.method},
            {"budget", r.budget},
            {"mse_analytic", r.mse_analytic},
            {"mse_empirical", r.mse_empirical},
            {"elapsed_seconds", r.elapsed_seconds},
            {"gain_evaluations", r.gain_evaluations},
            {"seed", r.seed}};
}

/// Parses a line produced by csv_line().
inline ExperimentRecord parse_csv_line(const std::string& line) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cols.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (cols.size() != 8) throw ParseError(0, "expected 8 CSV columns, got " + std::to_string(cols.size()));
    ExperimentRecord r;
    r.trial = std::stoull(cols[0]);
    r.method = cols[1];
    r.budget = std::stoull(cols[2]);
    r.mse_analytic = std::stod(cols[3]);
    r.mse_empirical = std::stod(cols[4]);
    r.elapsed_seconds = std::stod(cols[5]);
    r.gain_evaluations = std::stoull(cols[6]);
    r.seed = std::stoull(cols[7]);
    return r;
}

/// Config and library version, written next to the records.
inline nlohmann::json sidecar(const ExperimentConfig& c, std::size_t record_count) {
    return {{"library", "gsampling"},
            {"version", std::string(kLibraryVersion)},
            {"config", to_json(c)},
            {"records", record_count},
            {"csv_columns", std::string(kCsvHeader)}};
}

inline nlohmann::json to_json(const SamplingResult& r) {
    return {{"method", std::string(to_string(r.method))},
            {"selected", r.s},
            {"mse", r.mse},
            {"f_value", r.f_value},
            {"gain_evaluations", r.gain_evaluations},
            {"elapsed_seconds", r.elapsed_seconds},
            {"seed", r.seed}};
}

inline nlohmann::json to_json(const BoundReport& r) {
    nlohmann::json j = {{"bound", std::string(to_string(r.kind))},
                        {"n", r.n},
                        {"k", r.k},
                        {"epsilon", r.epsilon},
                        {"s_batch", r.s_batch},
                        {"trials", r.trials},
                        {"alpha", r.alpha},
                        {"beta", r.beta},
                        {"beta_forced", r.beta_forced},
                        {"c", r.c},
                        {"curvature_bound", r.curvature_bound},
                        {"exact_curvature", nullptr},
                        {"trace_p", r.trace_p},
                        {"trace_optimal", r.trace_optimal},
                        {"rhs", r.rhs},
                        {"mean_trace", r.mean_trace},
                        {"satisfied", r.satisfied}};
    if (r.exact_curvature) j["exact_curvature"] = *r.exact_curvature;
    if (r.kind == BoundKind::expectation) {
        j["standard_error"] = r.standard_error;
    } else {
        j["violations"] = r.violations;
        j["violation_fraction"] = r.violation_fraction;
        j["allowed_fraction"] = r.allowed_fraction;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Summaries

struct SummaryRow {
    std::string method;
    std::size_t budget = 0;
    std::size_t count = 0;
    MeanAndError mse_analytic;
    MeanAndError mse_empirical;
    double mean_elapsed_seconds = 0.0;
    double mean_gain_evaluations = 0.0;
};

/// Per (method, budget) aggregates, in order of first appearance.
inline std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");
    std::vector<std::pair<std::string, std::size_t>> keys;
    std::map<std::pair<std::string, std::size_t>, std::vector<const ExperimentRecord*>> groups;
    for (const auto& r : records) {
        auto key = std::make_pair(r.method, r.budget);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) keys.push_back(key);
        it->second.push_back(&r);
    }
    std::vector<SummaryRow> out;
    for (const auto& key : keys) {
        const auto& g = groups[key];
        std::vector<double> a, e;
        SummaryRow row;
        row.method = key.first;
        row.budget = key.second;
        row.count = g.size();
        for (const auto* r : g) {
            a.push_back(r->mse_analytic);
            e.push_back(r->mse_empirical);
            row.mean_elapsed_seconds += r->elapsed_seconds;
            row.mean_gain_evaluations += static_cast<double>(r->gain_evaluations);
        }
        row.mse_analytic = mean_and_standard_error(a);
        row.mse_empirical = mean_and_standard_error(e);
        row.mean_elapsed_seconds /= static_cast<double>(g.size());
        row.mean_gain_evaluations /= static_cast<double>(g.size());
        out.push_back(std::move(row));
    }
    return out;
}

inline const SummaryRow* find_summary(const std::vector<SummaryRow>& rows, std::string_view method, std::size_t budget) {
    for (const auto& r : rows) {
        if (r.method == method && r.budget == budget) return &r;
    }
    return nullptr;
}

}  // namespace gsampling
