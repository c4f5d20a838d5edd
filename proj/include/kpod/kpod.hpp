#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kpod/error.hpp"
#include "kpod/kmeans.hpp"
#include "kpod/matrix.hpp"
#include "kpod/seed.hpp"

namespace kpod {

struct KPodConfig {
    std::size_t k = 2;
    Seed seed = 0;
    std::size_t max_mm_iter = 300;
    double mm_tol = 1e-6;
    EngineConfig inner{};
    bool standardize_first = false;
};

struct KPodResult {
    Assignment assignment;
    Centroids centroids;
    /// Observed-entry objective after every MM iterate, starting with the
    /// initial clustering.
    std::vector<double> observed_objective_trace;
    std::size_t mm_iterations = 0;
    bool converged = false;
    /// Observed cells of the (possibly standardized) input, model values elsewhere.
    Matrix fitted_fill;
    /// Statistics used to standardize the input, when standardize_first was set.
    std::optional<ColumnStats> scaling;

    double objective() const { return observed_objective_trace.back(); }
};

/// Copy of the observed cells with every unobserved cell set to its column's
/// observed mean.
inline Matrix init_fill(const MaskedMatrix& x) {
    const ColumnStats stats = column_stats(x);
    Matrix out = x.values();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            if (!x.observed()(i, j)) out(i, j) = stats.means[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

/// Surrogate value ||Y~ - A B||_F^2 with Y~ the observed cells of x and the
/// previous model A~ B~ elsewhere. Touches the observed-entry objective at
/// (a, b) = (a_prev, b_prev) and lies above it everywhere else.
inline double majorization_value(const MaskedMatrix& x, const Assignment& a, const Centroids& b,
                                 const Assignment& a_prev, const Centroids& b_prev) {
    const Matrix anchor = fill_unobserved(x, reconstruct(a_prev, b_prev));
    const Matrix model = reconstruct(a, b);
    detail::require_same_shape(anchor.rows(), anchor.cols(), model.rows(), model.cols(),
                               "majorization_value");
    double total = 0.0;
    for (Eigen::Index i = 0; i < anchor.rows(); ++i) {
        for (Eigen::Index j = 0; j < anchor.cols(); ++j) {
            const double r = anchor(i, j) - model(i, j);
            total += r * r;
        }
    }
    return total;
}

namespace detail {

inline void validate_kpod_input(const MaskedMatrix& x, const KPodConfig& cfg) {
    if (cfg.k == 0) throw InfeasibleError("k must be at least 1");
    if (cfg.max_mm_iter == 0) throw InfeasibleError("max_mm_iter must be at least 1");
    if (!(cfg.mm_tol > 0.0)) throw InfeasibleError("mm_tol must be positive");
    if (cfg.k > x.rows()) {
        throw InfeasibleError("k = " + std::to_string(cfg.k) + " exceeds the number of rows (" +
                              std::to_string(x.rows()) + ")");
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (x.observed_in_row(i) == 0)
            throw DegenerateError("row " + std::to_string(i) + " has no observed entries", i);
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
        if (x.observed_in_col(j) == 0)
            throw DegenerateError("column " + std::to_string(j) + " has no observed entries", j);
    }
}

}  // namespace detail

/// The initial clustering: k-means (k-means++ seeding, cfg.inner restarts)
/// on the column-mean-filled input. Applies standardization when requested.
inline KMeansResult kpod_initialize(const MaskedMatrix& x, const KPodConfig& cfg) {
    detail::validate_kpod_input(x, cfg);
    if (cfg.standardize_first) return lloyd(init_fill(standardize(x).first), cfg.k, cfg.seed, cfg.inner);
    return lloyd(init_fill(x), cfg.k, cfg.seed, cfg.inner);
}

/// k-means on partially observed data by majorization-minimization.
///
/// After the initial clustering, each iterate fills the unobserved cells with
/// the current model A*B and re-runs Lloyd on the filled matrix, warm-started
/// from the current centroids. The observed-entry objective is non-increasing
/// across iterates. Stops when its relative decrease falls to `mm_tol`, when
/// it reaches 0, or after `max_mm_iter` iterates.
inline KPodResult kpod_fit(const MaskedMatrix& input, const KPodConfig& cfg) {
    detail::validate_kpod_input(input, cfg);

    KPodResult result;
    MaskedMatrix scaled;
    if (cfg.standardize_first) {
        auto [standardized, stats] = standardize(input);
        scaled = std::move(standardized);
        result.scaling = std::move(stats);
    }
    const MaskedMatrix& x = cfg.standardize_first ? scaled : input;

    KMeansResult current = lloyd(init_fill(x), cfg.k, cfg.seed, cfg.inner);
    Matrix model = reconstruct(current.assignment, current.centroids);
    result.observed_objective_trace.push_back(project_observed(x, model));

    if (x.is_complete()) {
        result.converged = true;
    } else {
        for (std::size_t m = 1; m <= cfg.max_mm_iter; ++m) {
            const Matrix filled = fill_unobserved(x, model);
            current = lloyd_from(filled, current.centroids, cfg.inner);
            model = reconstruct(current.assignment, current.centroids);
            const double previous = result.observed_objective_trace.back();
            const double objective = project_observed(x, model);
            result.observed_objective_trace.push_back(objective);
            result.mm_iterations = m;
            if (objective == 0.0 || previous - objective <= cfg.mm_tol * previous) {
                result.converged = true;
                break;
            }
        }
    }

    result.assignment = std::move(current.assignment);
    result.centroids = std::move(current.centroids);
    result.fitted_fill = fill_unobserved(x, model);
    return result;
}

}  // namespace kpod
