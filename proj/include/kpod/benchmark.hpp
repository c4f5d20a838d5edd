#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kpod/baselines.hpp"
#include "kpod/csv.hpp"
#include "kpod/evaluation.hpp"
#include "kpod/kpod.hpp"
#include "kpod/missingness.hpp"
#include "kpod/report.hpp"
#include "kpod/seed.hpp"

namespace kpod {

enum class Method { kpod, mean_impute, delete_vars };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::kpod: return "kpod";
        case Method::mean_impute: return "mean_impute";
        case Method::delete_vars: return "delete";
    }
    return "?";
}

inline Method parse_method(std::string_view name) {
    if (name == "kpod") return Method::kpod;
    if (name == "mean_impute") return Method::mean_impute;
    if (name == "delete") return Method::delete_vars;
    throw ParseError("unknown method '" + std::string(name) + "' (expected kpod, mean_impute or delete)");
}

struct MechanismTemplate {
    Mechanism kind = Mechanism::mcar;
    std::vector<std::size_t> mar_columns;
    McarSampling sampling = McarSampling::exact;
};

struct DatasetSource {
    /// Complete labelled CSV; when absent a Gaussian mixture is simulated.
    std::optional<std::string> csv_path;
    CsvOptions csv;
    /// Per-trial relative noise for CSV datasets (0 = use the file as is).
    double perturb_rel_sd = 0.0;
    MixtureSpec mixture;
};

/// Mechanism x rate x method x trial campaign.
struct ScenarioGrid {
    DatasetSource dataset;
    std::vector<MechanismTemplate> mechanisms;
    std::vector<double> rates;
    std::vector<Method> methods;
    std::size_t trials = 1;
    Seed base_seed = 0;
    std::size_t k = 2;
    bool standardize = true;
    EngineConfig engine;
    std::size_t max_mm_iter = 300;
    double mm_tol = 1e-6;
    std::size_t workers = 1;
};

namespace detail {

inline void validate_grid(const ScenarioGrid& g) {
    if (g.trials == 0) throw ParseError("trials must be at least 1");
    if (g.k == 0) throw ParseError("k must be at least 1");
    if (g.mechanisms.empty()) throw ParseError("at least one mechanism is required");
    if (g.rates.empty()) throw ParseError("at least one rate is required");
    if (g.methods.empty()) throw ParseError("at least one method is required");
    for (double r : g.rates)
        if (!(r > 0.0 && r < 1.0)) throw ParseError("rates must lie in (0, 1)");
}

}  // namespace detail

/// Builds a grid from a flat JSON object. Recognised keys:
///   dataset ("mixture" | "csv"), input, label_column, missing_token,
///   has_header, perturb_rel_sd, n, p, center_sd, noise_variance, k,
///   mechanisms, mar_columns, mcar_sampling, rates, methods, trials,
///   base_seed, standardize, n_init, max_iter, tol, max_mm_iter, mm_tol,
///   workers.
inline ScenarioGrid parse_grid(const nlohmann::json& j) {
    static const std::set<std::string> known{
        "dataset", "input", "label_column", "missing_token", "has_header", "perturb_rel_sd", "n", "p",
        "center_sd", "noise_variance", "k", "mechanisms", "mar_columns", "mcar_sampling", "rates", "methods",
        "trials", "base_seed", "standardize", "n_init", "max_iter", "tol", "max_mm_iter", "mm_tol", "workers"};
    if (!j.is_object()) throw ParseError("benchmark config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ParseError("unknown config key '" + key + "'");

    ScenarioGrid g;
    try {
        const std::string kind = j.value("dataset", std::string(j.contains("input") ? "csv" : "mixture"));
        if (kind == "csv") {
            if (!j.contains("input")) throw ParseError("dataset 'csv' needs 'input'");
            g.dataset.csv_path = j.at("input").get<std::string>();
            if (j.contains("label_column")) g.dataset.csv.label_column = j.at("label_column").get<std::string>();
            g.dataset.csv.missing_token = j.value("missing_token", g.dataset.csv.missing_token);
            g.dataset.csv.has_header = j.value("has_header", true);
            g.dataset.perturb_rel_sd = j.value("perturb_rel_sd", 0.0);
        } else if (kind != "mixture") {
            throw ParseError("dataset must be 'mixture' or 'csv'");
        }
        g.k = j.value("k", g.k);
        g.dataset.mixture.n = j.value("n", g.dataset.mixture.n);
        g.dataset.mixture.p = j.value("p", g.dataset.mixture.p);
        g.dataset.mixture.k = g.k;
        g.dataset.mixture.center_sd = j.value("center_sd", g.dataset.mixture.center_sd);
        g.dataset.mixture.noise_variance = j.value("noise_variance", g.dataset.mixture.noise_variance);

        const auto mar_columns = j.value("mar_columns", std::vector<std::size_t>{});
        const std::string sampling = j.value("mcar_sampling", std::string("exact"));
        if (sampling != "exact" && sampling != "bernoulli") throw ParseError("mcar_sampling must be exact or bernoulli");
        for (const auto& m : j.value("mechanisms", std::vector<std::string>{"MCAR"})) {
            MechanismTemplate t;
            t.kind = parse_mechanism(m);
            if (t.kind == Mechanism::mar) t.mar_columns = mar_columns;
            t.sampling = sampling == "exact" ? McarSampling::exact : McarSampling::bernoulli;
            g.mechanisms.push_back(std::move(t));
        }
        g.rates = j.value("rates", std::vector<double>{0.25});
        for (const auto& m : j.value("methods", std::vector<std::string>{"kpod", "mean_impute"}))
            g.methods.push_back(parse_method(m));
        g.trials = j.value("trials", g.trials);
        g.base_seed = j.value("base_seed", g.base_seed);
        g.standardize = j.value("standardize", g.standardize);
        g.engine.n_init = j.value("n_init", g.engine.n_init);
        g.engine.max_iter = j.value("max_iter", g.engine.max_iter);
        g.engine.tol = j.value("tol", g.engine.tol);
        g.max_mm_iter = j.value("max_mm_iter", g.max_mm_iter);
        g.mm_tol = j.value("mm_tol", g.mm_tol);
        g.workers = j.value("workers", g.workers);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("benchmark config: ") + e.what());
    }
    detail::validate_grid(g);
    return g;
}

inline ScenarioGrid load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    try {
        return parse_grid(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

namespace detail {

struct ClusterOutcome {
    Assignment labels;
    std::optional<std::size_t> mm_iterations;
};

inline ClusterOutcome run_method(Method method, const MaskedMatrix& x, const ScenarioGrid& g, Seed seed) {
    switch (method) {
        case Method::kpod: {
            KPodConfig cfg;
            cfg.k = g.k;
            cfg.seed = seed;
            cfg.max_mm_iter = g.max_mm_iter;
            cfg.mm_tol = g.mm_tol;
            cfg.inner = g.engine;
            cfg.standardize_first = g.standardize;
            KPodResult r = kpod_fit(x, cfg);
            return {std::move(r.assignment), r.mm_iterations};
        }
        case Method::mean_impute:
            return {mean_impute_cluster(x, g.k, seed, g.engine, g.standardize).assignment, std::nullopt};
        case Method::delete_vars:
            return {delete_cluster(x, g.k, seed, g.engine, g.standardize).clustering.assignment, std::nullopt};
    }
    throw Error("unhandled method");
}

}  // namespace detail

/// Complete data, generating labels and mask of one (mechanism, rate, trial)
/// unit. `amputed` is empty when amputation failed; `ampute_status` then holds
/// the error code.
struct PreparedTrial {
    Matrix values;
    std::optional<Assignment> truth;
    std::optional<AmputeResult> amputed;
    std::string ampute_status;
};

/// Builds the inputs of unit (mi, ri, trial). `base` is the loaded CSV
/// dataset when the grid names one.
inline PreparedTrial prepare_trial(const ScenarioGrid& grid, const std::optional<CsvDataset>& base, std::size_t mi,
                                   std::size_t ri, std::size_t trial) {
    if (mi >= grid.mechanisms.size() || ri >= grid.rates.size() || trial >= grid.trials) {
        throw IndexError("benchmark unit out of range");
    }
    const MechanismTemplate& mech = grid.mechanisms[mi];
    const Seed data_seed = derive_seed(grid.base_seed, {mi, ri, trial});

    PreparedTrial out;
    if (base) {
        out.values = perturb_dataset(base->data.values(), grid.dataset.perturb_rel_sd, derive_seed(data_seed, {2}));
        out.truth = base->labels;
    } else {
        MixtureSpec spec = grid.dataset.mixture;
        spec.seed = derive_seed(data_seed, {0});
        SimulatedData sim = simulate_mixture(spec);
        out.values = std::move(sim.values);
        out.truth = std::move(sim.labels);
    }

    MechanismSpec ms;
    ms.kind = mech.kind;
    ms.target_rate = grid.rates[ri];
    ms.mar_columns = mech.mar_columns;
    ms.sampling = mech.sampling;
    ms.seed = derive_seed(data_seed, {1});
    try {
        out.amputed = ampute(out.values, ms);
    } catch (const Error& e) {
        out.ampute_status = e.code();
    }
    return out;
}

/// Loads the grid's CSV dataset, if any, checking that it is complete.
inline std::optional<CsvDataset> load_base_dataset(const ScenarioGrid& grid) {
    if (!grid.dataset.csv_path) return std::nullopt;
    CsvDataset base = read_masked_csv(*grid.dataset.csv_path, grid.dataset.csv);
    if (!base.data.is_complete()) throw InfeasibleError("benchmark dataset must be complete before amputation");
    return base;
}

/// Runs every (mechanism, rate, trial) unit and every method within it. The
/// dataset and mask of a unit depend only on (base_seed, mechanism, rate,
/// trial); the clustering seed also mixes in the method index. Units are
/// spread over `workers` threads and merged in grid order, so the rows do not
/// depend on the worker count. Exactly one row per unit and method.
inline std::vector<ReportRow> run_benchmark(const ScenarioGrid& grid, std::optional<std::size_t> workers = {}) {
    detail::validate_grid(grid);
    const std::optional<CsvDataset> base = load_base_dataset(grid);

    const std::size_t n_rates = grid.rates.size();
    const std::size_t units = grid.mechanisms.size() * n_rates * grid.trials;
    std::vector<std::vector<ReportRow>> results(units);

    auto run_unit = [&](std::size_t u) {
        const std::size_t trial = u % grid.trials;
        const std::size_t ri = (u / grid.trials) % n_rates;
        const std::size_t mi = u / (grid.trials * n_rates);
        const MechanismTemplate& mech = grid.mechanisms[mi];
        const PreparedTrial data = prepare_trial(grid, base, mi, ri, trial);
        const auto& amputed = data.amputed;

        auto& rows = results[u];
        for (std::size_t k = 0; k < grid.methods.size(); ++k) {
            ReportRow row;
            row.mechanism = std::string(to_string(mech.kind));
            row.target_rate = grid.rates[ri];
            row.method = std::string(to_string(grid.methods[k]));
            row.trial = trial;
            if (!amputed) {
                row.status = data.ampute_status;
                rows.push_back(std::move(row));
                continue;
            }
            row.achieved_rate = amputed->achieved_rate;
            const Seed seed = derive_seed(grid.base_seed, {mi, ri, k, trial});
            try {
                auto run = timed([&] { return detail::run_method(grid.methods[k], amputed->data, grid, seed); });
                row.seconds = run.seconds;
                row.mm_iterations = run.result.mm_iterations;
                if (data.truth) {
                    row.rand = rand_index(run.result.labels, *data.truth);
                    row.adjusted_rand = adjusted_rand_index(run.result.labels, *data.truth);
                }
            } catch (const Error& e) {
                row.status = e.code();
            }
            rows.push_back(std::move(row));
        }
    };

    const std::size_t n_workers = std::max<std::size_t>(1, std::min(workers.value_or(grid.workers), units));
    if (n_workers == 1) {
        for (std::size_t u = 0; u < units; ++u) run_unit(u);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t u = next++; u < units; u = next++) {
                    try {
                        run_unit(u);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<ReportRow> merged;
    merged.reserve(units * grid.methods.size());
    for (auto& unit : results)
        for (auto& row : unit) merged.push_back(std::move(row));
    return merged;
}

}  // namespace kpod
