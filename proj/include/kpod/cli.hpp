#pragma once

#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpod/baselines.hpp"
#include "kpod/benchmark.hpp"
#include "kpod/csv.hpp"
#include "kpod/evaluation.hpp"
#include "kpod/kpod.hpp"
#include "kpod/missingness.hpp"
#include "kpod/report.hpp"

namespace kpod {

namespace detail {

inline void write_trace_csv(const std::string& path, const std::vector<double>& trace) {
    auto out = open_for_writing(path);
    out << "iteration,objective\n";
    for (std::size_t i = 0; i < trace.size(); ++i) out << i << ',' << format_double(trace[i]) << '\n';
    finish(out, path);
}

struct ClusterArgs {
    std::string input, output, method = "kpod", missing_token = "NA";
    std::optional<std::string> label_column;
    std::size_t k = 2, max_mm_iter = 300, n_init = 1;
    Seed seed = 0;
    double tol = 1e-6;
    bool no_standardize = false, no_header = false;
};

inline void cmd_cluster(const ClusterArgs& a, std::ostream& out) {
    CsvOptions opts;
    opts.missing_token = a.missing_token;
    opts.has_header = !a.no_header;
    opts.label_column = a.label_column;
    const CsvDataset ds = read_masked_csv(a.input, opts);
    const Method method = parse_method(a.method);
    EngineConfig engine;
    engine.n_init = a.n_init;
    const bool standardize = !a.no_standardize;

    Assignment labels;
    Centroids centroids;
    std::vector<double> trace;
    std::vector<std::string> centroid_names = ds.feature_names;
    std::size_t iterations = 0;
    bool converged = false;
    switch (method) {
        case Method::kpod: {
            KPodConfig cfg;
            cfg.k = a.k;
            cfg.seed = a.seed;
            cfg.max_mm_iter = a.max_mm_iter;
            cfg.mm_tol = a.tol;
            cfg.inner = engine;
            cfg.standardize_first = standardize;
            KPodResult r = kpod_fit(ds.data, cfg);
            labels = std::move(r.assignment);
            centroids = std::move(r.centroids);
            trace = std::move(r.observed_objective_trace);
            iterations = r.mm_iterations;
            converged = r.converged;
            break;
        }
        case Method::mean_impute: {
            KMeansResult r = mean_impute_cluster(ds.data, a.k, a.seed, engine, standardize);
            labels = std::move(r.assignment);
            centroids = std::move(r.centroids);
            trace = std::move(r.trace);
            iterations = r.iterations;
            converged = r.converged;
            break;
        }
        case Method::delete_vars: {
            DeletionResult r = delete_cluster(ds.data, a.k, a.seed, engine, standardize);
            labels = std::move(r.clustering.assignment);
            centroids = std::move(r.clustering.centroids);
            trace = std::move(r.clustering.trace);
            iterations = r.clustering.iterations;
            converged = r.clustering.converged;
            centroid_names.clear();
            for (std::size_t j : r.kept_columns) centroid_names.push_back(ds.feature_names[j]);
            break;
        }
    }
    write_labels_csv(a.output + "_assignment.csv", labels);
    write_matrix_csv(a.output + "_centroids.csv", centroids.centers, centroid_names);
    write_trace_csv(a.output + "_trace.csv", trace);
    out << "method=" << to_string(method) << " k=" << a.k << " objective=" << format_double(trace.back())
        << " iterations=" << iterations << " converged=" << (converged ? "true" : "false");
    if (ds.labels) {
        out << " rand=" << format_double(rand_index(labels, *ds.labels))
            << " adjusted_rand=" << format_double(adjusted_rand_index(labels, *ds.labels));
    }
    out << '\n';
}

}  // namespace detail

/// Entry point of the command-line tool. Returns 0 on success, 2 on a usage
/// error and 1 on a runtime failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"k-means clustering of partially observed data (k-POD)", "kpod"};
    app.require_subcommand(1);
    std::function<void()> action;

    // cluster
    detail::ClusterArgs ca;
    auto* cluster = app.add_subcommand("cluster", "cluster a CSV with missing values");
    cluster->add_option("--input", ca.input, "input CSV")->required();
    cluster->add_option("--output", ca.output, "output prefix")->required();
    cluster->add_option("--method", ca.method, "kpod | mean_impute | delete")
        ->check(CLI::IsMember({"kpod", "mean_impute", "delete"}));
    cluster->add_option("--k", ca.k, "number of clusters")->required()->check(CLI::PositiveNumber);
    cluster->add_option("--seed", ca.seed, "random seed");
    cluster->add_option("--missing-token", ca.missing_token, "token marking a missing cell");
    cluster->add_option("--label-column", ca.label_column, "ground-truth column excluded from features");
    cluster->add_flag("--no-standardize", ca.no_standardize, "skip column standardization");
    cluster->add_flag("--no-header", ca.no_header, "input has no header row");
    cluster->add_option("--max-mm-iter", ca.max_mm_iter, "maximum MM iterations")->check(CLI::PositiveNumber);
    cluster->add_option("--tol", ca.tol, "relative objective tolerance")->check(CLI::PositiveNumber);
    cluster->add_option("--n-init", ca.n_init, "k-means++ restarts for the initial clustering")
        ->check(CLI::PositiveNumber);
    cluster->callback([&] { action = [&] { detail::cmd_cluster(ca, out); }; });

    // simulate
    MixtureSpec ms;
    std::string sim_output;
    auto* simulate = app.add_subcommand("simulate", "draw a Gaussian mixture dataset");
    simulate->add_option("--output", sim_output, "output CSV")->required();
    simulate->add_option("--n", ms.n, "rows")->check(CLI::PositiveNumber);
    simulate->add_option("--p", ms.p, "columns")->check(CLI::PositiveNumber);
    simulate->add_option("--k", ms.k, "components")->check(CLI::PositiveNumber);
    simulate->add_option("--center-sd", ms.center_sd, "sd of component means");
    simulate->add_option("--noise-variance", ms.noise_variance, "within-component variance");
    simulate->add_option("--seed", ms.seed, "random seed");
    simulate->callback([&] {
        action = [&] {
            const SimulatedData sim = simulate_mixture(ms);
            write_masked_csv(sim_output, MaskedMatrix::fully_observed(sim.values), {}, &sim.labels);
            out << "wrote " << ms.n << "x" << ms.p << " mixture with " << ms.k << " components to " << sim_output
                << '\n';
        };
    });

    // ampute
    std::string am_input, am_output, am_mechanism = "MCAR", am_token = "NA", am_sampling = "exact";
    std::optional<std::string> am_label;
    std::vector<std::size_t> am_columns;
    double am_rate = 0.25;
    Seed am_seed = 0;
    auto* amp = app.add_subcommand("ampute", "remove entries from a complete CSV");
    amp->add_option("--input", am_input, "complete input CSV")->required();
    amp->add_option("--output", am_output, "masked output CSV")->required();
    amp->add_option("--mechanism", am_mechanism, "MCAR | MAR | NMAR")
        ->check(CLI::IsMember({"MCAR", "MAR", "NMAR"}, CLI::ignore_case));
    amp->add_option("--rate", am_rate, "target overall missing fraction")->check(CLI::Range(0.0, 1.0));
    amp->add_option("--mar-columns", am_columns, "0-based columns eligible under MAR")->delimiter(',');
    amp->add_option("--mcar-sampling", am_sampling, "exact | bernoulli")
        ->check(CLI::IsMember({"exact", "bernoulli"}));
    amp->add_option("--seed", am_seed, "random seed");
    amp->add_option("--missing-token", am_token, "token marking a missing cell");
    amp->add_option("--label-column", am_label, "column copied through untouched");
    amp->callback([&] {
        action = [&] {
            CsvOptions opts;
            opts.missing_token = am_token;
            opts.label_column = am_label;
            const CsvDataset ds = read_masked_csv(am_input, opts);
            if (!ds.data.is_complete()) throw InfeasibleError("ampute needs a complete input matrix");
            MechanismSpec spec;
            spec.kind = parse_mechanism(am_mechanism);
            spec.target_rate = am_rate;
            spec.mar_columns = am_columns;
            spec.sampling = am_sampling == "exact" ? McarSampling::exact : McarSampling::bernoulli;
            spec.seed = am_seed;
            const AmputeResult r = ampute(ds.data.values(), spec);
            std::optional<Assignment> raw;
            if (ds.labels) {
                // Write the original label strings back when they are integers.
                Assignment a;
                bool numeric = true;
                for (int code : ds.labels->labels) {
                    const std::string& s = ds.label_names[static_cast<std::size_t>(code)];
                    int v = 0;
                    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
                    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) { numeric = false; break; }
                    a.labels.push_back(v);
                }
                raw = numeric ? a : *ds.labels;
            }
            write_masked_csv(am_output, r.data, ds.feature_names, raw ? &*raw : nullptr,
                             am_label.value_or("label"));
            out << "mechanism=" << to_string(spec.kind) << " target_rate=" << format_double(am_rate)
                << " achieved_rate=" << format_double(r.achieved_rate) << '\n';
        };
    });

    // benchmark
    std::string bm_config, bm_output;
    std::optional<std::size_t> bm_workers, bm_trials;
    std::optional<Seed> bm_seed;
    auto* bench = app.add_subcommand("benchmark", "run a scenario grid from a JSON config");
    bench->add_option("--config", bm_config, "JSON config file")->required();
    bench->add_option("--output", bm_output, "report CSV path")->required();
    bench->add_option("--workers", bm_workers, "worker threads")->check(CLI::PositiveNumber);
    bench->add_option("--trials", bm_trials, "override trials per scenario")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bm_seed, "override base seed");
    bench->callback([&] {
        action = [&] {
            ScenarioGrid grid = load_grid(bm_config);
            if (bm_trials) grid.trials = *bm_trials;
            if (bm_seed) grid.base_seed = *bm_seed;
            const auto rows = run_benchmark(grid, bm_workers);
            const auto paths = write_report(rows, bm_output);
            for (const auto& g : aggregate(rows)) {
                out << g.mechanism << ' ' << format_double(g.target_rate) << ' ' << g.method << ": ok "
                    << g.rand.count << '/' << g.rows;
                if (g.rand.count)
                    out << " rand " << format_double(g.rand.mean) << " +/- " << format_double(g.rand.standard_error);
                out << '\n';
            }
            out << "wrote " << paths.rows << ", " << paths.summary << ", " << paths.timing << '\n';
        };
    });

    // evaluate
    std::string ev_input, ev_reference;
    std::optional<std::string> ev_column, ev_ref_column;
    auto* evaluate = app.add_subcommand("evaluate", "Rand and adjusted Rand between two labelings");
    evaluate->add_option("--input", ev_input, "label CSV to score")->required();
    evaluate->add_option("--reference", ev_reference, "ground-truth label CSV")->required();
    evaluate->add_option("--label-column", ev_column, "label column in --input");
    evaluate->add_option("--reference-column", ev_ref_column, "label column in --reference");
    evaluate->callback([&] {
        action = [&] {
            const Assignment a = read_labels_csv(ev_input, ev_column);
            const Assignment b = read_labels_csv(ev_reference, ev_ref_column);
            out << "rand=" << format_double(rand_index(a, b))
                << " adjusted_rand=" << format_double(adjusted_rand_index(a, b)) << '\n';
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    try {
        action();
    } catch (const Error& e) {
        err << "error [" << e.code() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace kpod
