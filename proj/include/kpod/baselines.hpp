#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kpod/error.hpp"
#include "kpod/kmeans.hpp"
#include "kpod/kpod.hpp"
#include "kpod/matrix.hpp"

namespace kpod {

/// Column-mean imputation followed by k-means. Same as the initial
/// clustering of kpod_fit under the same seed and engine settings.
inline KMeansResult mean_impute_cluster(const MaskedMatrix& x, std::size_t k, Seed seed,
                                        const EngineConfig& engine = {}, bool standardize_first = false) {
    KPodConfig cfg;
    cfg.k = k;
    cfg.seed = seed;
    cfg.inner = engine;
    cfg.standardize_first = standardize_first;
    return kpod_initialize(x, cfg);
}

struct DeletionResult {
    KMeansResult clustering;
    std::vector<std::size_t> kept_columns;
};

/// Indices of the columns with no missing entry.
inline std::vector<std::size_t> complete_columns(const MaskedMatrix& x) {
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        if (x.observed_in_col(j) == x.rows()) kept.push_back(j);
    }
    return kept;
}

/// Drops every column containing a missing entry and runs k-means on the
/// complete remainder.
inline DeletionResult delete_cluster(const MaskedMatrix& x, std::size_t k, Seed seed,
                                     const EngineConfig& engine = {}, bool standardize_first = false) {
    DeletionResult out;
    out.kept_columns = complete_columns(x);
    if (out.kept_columns.empty()) {
        throw InfeasibleError("deletion leaves no variables: every column has a missing entry");
    }
    Matrix sub(static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(out.kept_columns.size()));
    for (std::size_t c = 0; c < out.kept_columns.size(); ++c) {
        sub.col(static_cast<Eigen::Index>(c)) = x.values().col(static_cast<Eigen::Index>(out.kept_columns[c]));
    }
    if (standardize_first) sub = standardize(MaskedMatrix::fully_observed(std::move(sub))).first.values();
    out.clustering = lloyd(sub, k, seed, engine);
    return out;
}

}  // namespace kpod
