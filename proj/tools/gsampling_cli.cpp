// gsampling command-line tool.
//
//   gsampling generate   --config c.json --output graph.mtx [--basis u.csv]
//   gsampling sample     --config c.json --method greedy --budget 10 [--epsilon 0.1]
//   gsampling experiment --config c.json [--output out.csv] [--workers 4]
//   gsampling bounds     --config c.json --budget 3 [--epsilon 0.1] [--trials 500]
//   gsampling project    --config c.json --budget 10
//
// Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.

#include "gsampling/gsampling.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace gsampling;
using nlohmann::json;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Common {
    std::string config_path;
    std::optional<Seed> seed;
    std::string output;
    std::string format = "csv";
};

ExperimentConfig load_config(const Common& opts, bool require_runs) {
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("--config", "cannot open " + opts.config_path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    const auto base = std::filesystem::path(opts.config_path).parent_path();
    ExperimentConfig c = parse_config(j, base, require_runs);
    if (opts.seed) c.master_seed = *opts.seed;
    // The config's output names the experiment table; other commands write
    // to --output or stdout.
    if (!require_runs) c.output.clear();
    if (!opts.output.empty()) c.output = opts.output;
    return c;
}

/// Writes to the named file, or stdout for "" / "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void write_vector_csv(std::ostream& out, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

int cmd_generate(const Common& opts, const std::string& basis_path) {
    const ExperimentConfig c = load_config(opts, false);
    if (c.output.empty()) throw ConfigError("--output", "required for generate");
    const Instance inst = build_instance(c);
    {
        Output out(c.output);
        save_matrix_market(inst.graph, out.stream());
    }
    if (!basis_path.empty()) {
        Output out(basis_path);
        const Matrix& u = inst.basis.u;
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            for (Eigen::Index j = 0; j < u.cols(); ++j) {
                if (j) out.stream() << ',';
                out.stream() << format_double(u(i, j));
            }
            out.stream() << '\n';
        }
    }
    std::cerr << "graph: n=" << inst.graph.n() << " edges=" << inst.graph.edge_count() << '\n';
    return 0;
}

int cmd_sample(const Common& opts, const std::string& method, std::size_t budget, double epsilon) {
    const ExperimentConfig c = load_config(opts, false);
    MethodSpec spec;
    try {
        spec.method = parse_method(method);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("--method", e.what());
    }
    spec.epsilon = epsilon;
    if (budget < 1 || budget > c.k_signal) throw ConfigError("--budget", "must lie in [1, k_signal]");
    const Instance inst = build_instance(c);
    const SignalModel model = trial_model(inst, c, 0);
    const Seed seed = derive_seed(c.master_seed, {streams::method, 0, 0, 0});
    const SamplingResult r = run_method(spec, model, budget, seed, c.relaxation);

    Output out(c.output);
    if (opts.format == "json") {
        out.stream() << to_json(r).dump(2) << '\n';
    } else {
        out.stream() << "method,selected,mse,f_value,gain_evaluations,elapsed_seconds,seed\n";
        out.stream() << to_string(r.method) << ',';
        for (std::size_t i = 0; i < r.s.size(); ++i) out.stream() << (i ? " " : "") << r.s[i];
        out.stream() << ',' << format_double(r.mse) << ',' << format_double(r.f_value) << ',' << r.gain_evaluations
                     << ',' << format_double(r.elapsed_seconds) << ',' << r.seed << '\n';
    }
    return 0;
}

int cmd_experiment(const Common& opts, std::optional<std::size_t> workers, bool no_timing) {
    ExperimentConfig c = load_config(opts, true);
    if (workers) {
        if (*workers < 1) throw ConfigError("--workers", "must be >= 1");
        c.workers = *workers;
    }
    if (no_timing) c.record_timing = false;

    Output out(c.output);
    std::ostream& os = out.stream();
    const bool as_json = opts.format == "json";
    bool first = true;
    std::size_t failed = 0;
    if (as_json) {
        os << "{\"meta\":" << sidecar(c, 0).dump() << ",\"records\":[\n";
    } else {
        os << kCsvHeader << '\n';
    }
    const auto records = run_experiment(
        c,
        [&](const ExperimentRecord& r) {
            if (as_json) {
                os << (first ? "" : ",\n") << to_json(r).dump();
                first = false;
            } else {
                os << csv_line(r) << '\n';
            }
        },
        [&](std::size_t trial, const std::string& msg) {
            ++failed;
            std::cerr << "warning: trial " << trial << " skipped: " << msg << '\n';
        });
    if (as_json) os << "\n]}\n";
    os.flush();

    if (!as_json && !c.output.empty() && c.output != "-") {
        std::ofstream meta(c.output + ".json");
        meta << sidecar(c, records.size()).dump(2) << '\n';
    }
    if (records.empty()) {
        std::cerr << "error: every trial failed\n";
        return kExitRuntime;
    }
    std::cerr << "experiment: " << records.size() << " records, " << failed << " failed trials\n";
    return 0;
}

int cmd_bounds(const Common& opts, std::size_t budget, double epsilon, std::size_t trials, double slack) {
    const ExperimentConfig c = load_config(opts, false);
    if (budget < 1 || budget > c.k_signal) throw ConfigError("--budget", "must lie in [1, k_signal]");
    if (!(epsilon < 1.0) || epsilon < min_epsilon(budget)) throw ConfigError("--epsilon", "must lie in [e^-budget, 1)");
    if (trials < 1) throw ConfigError("--trials", "must be >= 1");
    const Instance inst = build_instance(c);
    if (binomial_coefficient(inst.graph.n(), budget) > 1e6) {
        throw ConfigError("--budget", "C(n, budget) exceeds the brute-force guard");
    }
    const SignalModel model = trial_model(inst, c, 0);

    json j;
    j["expectation"] = to_json(check_expectation_bound(model, budget, epsilon, trials, c.master_seed));
    j["pac"] = to_json(check_pac_bound(model, budget, epsilon, trials, c.master_seed, slack));
    j["curvature"]["bound"] = curvature_bound(model);
    if (model.n() <= 12) {
        const CurvatureReport cr = exact_curvature(model);
        j["curvature"]["exact"] = cr.value;
        j["curvature"]["triples"] = cr.triples;
        j["curvature"]["skipped_zero_gain"] = cr.skipped_zero_gain;
    }
    Output out(c.output);
    out.stream() << j.dump(2) << '\n';
    return 0;
}

int cmd_project(const Common& opts, std::size_t budget) {
    const ExperimentConfig c = load_config(opts, false);
    if (budget < 1 || budget > c.k_signal) throw ConfigError("--budget", "must lie in [1, k_signal]");
    const Instance inst = build_instance(c);
    const SignalModel model = trial_model(inst, c, 0);
    const RelaxedSolution sol = solve_relaxation(model, budget, c.relaxation);

    Output out(c.output);
    if (opts.format == "json") {
        json j = {{"objective", sol.objective},
                  {"iterations", sol.iterations},
                  {"converged", sol.converged},
                  {"rounded", round_top_k(sol.z, budget)},
                  {"z", std::vector<double>(sol.z.data(), sol.z.data() + sol.z.size())}};
        out.stream() << j.dump(2) << '\n';
    } else {
        write_vector_csv(out.stream(), sol.z);
    }
    if (!sol.converged) std::cerr << "warning: relaxation stopped after " << sol.iterations << " iterations\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-set selection for noisy bandlimited graph signals"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kLibraryVersion));

    Common opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON experiment/instance config")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opts.seed, "Override master_seed");
        sub->add_option("--output", opts.output, "Output path ('-' for stdout)");
        sub->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    };

    std::string basis_path;
    auto* generate = app.add_subcommand("generate", "Write the configured graph (and optionally its basis U)");
    add_common(generate);
    generate->add_option("--basis", basis_path, "Also write U as CSV");

    std::string method = "randomized_greedy";
    std::size_t budget = 0;
    double epsilon = 0.1;
    auto* sample = app.add_subcommand("sample", "Run one method on one instance");
    add_common(sample);
    sample->add_option("--method", method, "Sampler name");
    sample->add_option("--budget", budget, "Sampling-set size")->required();
    sample->add_option("--epsilon", epsilon, "Randomized greedy epsilon");

    std::optional<std::size_t> workers;
    bool no_timing = false;
    auto* experiment = app.add_subcommand("experiment", "Run a full Monte Carlo experiment");
    add_common(experiment);
    experiment->add_option("--workers", workers, "Worker threads");
    experiment->add_flag("--no-timing", no_timing, "Write elapsed_seconds as 0 (byte-reproducible output)");

    std::size_t trials = 500;
    double slack = 0.0;
    auto* bounds = app.add_subcommand("bounds", "Empirical approximation-guarantee reports");
    add_common(bounds);
    bounds->add_option("--budget", budget, "Sampling-set size")->required();
    bounds->add_option("--epsilon", epsilon, "Randomized greedy epsilon");
    bounds->add_option("--trials", trials, "Randomized greedy runs");
    bounds->add_option("--slack", slack, "Extra allowed violation fraction for the PAC check");

    auto* project = app.add_subcommand("project", "Solve the convex relaxation and emit z");
    add_common(project);
    project->add_option("--budget", budget, "Sampling-set size")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*generate) return cmd_generate(opts, basis_path);
        if (*sample) return cmd_sample(opts, method, budget, epsilon);
        if (*experiment) return cmd_experiment(opts, workers, no_timing);
        if (*bounds) return cmd_bounds(opts, budget, epsilon, trials, slack);
        if (*project) return cmd_project(opts, budget);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
