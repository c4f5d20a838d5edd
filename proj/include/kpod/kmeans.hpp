#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "kpod/error.hpp"
#include "kpod/matrix.hpp"
#include "kpod/seed.hpp"

namespace kpod {

/// Cluster label per row, each in [0, k). Encodes a membership matrix with
/// exactly one cluster per row.
struct Assignment {
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    bool operator==(const Assignment&) const = default;
};

/// k x p matrix whose rows are cluster centers.
struct Centroids {
    Matrix centers;

    std::size_t k() const noexcept { return static_cast<std::size_t>(centers.rows()); }
};

struct EngineConfig {
    std::size_t max_iter = 100;
    double tol = 1e-6;
    std::size_t n_init = 1;
};

struct KMeansResult {
    Assignment assignment;
    Centroids centroids;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> trace;
    bool duplicate_centers = false;
};

struct Seeding {
    Centroids centroids;
    std::vector<std::size_t> rows;
    bool duplicate_centers = false;
};

namespace detail {

inline double squared_distance(const Matrix& a, Eigen::Index row_a, const Matrix& b,
                               Eigen::Index row_b) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double d = a(row_a, j) - b(row_b, j);
        total += d * d;
    }
    return total;
}

inline void check_labels(const Assignment& a, std::size_t n, std::size_t k) {
    if (a.size() != n) {
        throw DimensionError("assignment has " + std::to_string(a.size()) + " labels for " +
                             std::to_string(n) + " rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (a.labels[i] < 0 || static_cast<std::size_t>(a.labels[i]) >= k) {
            throw IndexError("label " + std::to_string(a.labels[i]) + " at row " +
                             std::to_string(i) + " outside [0, " + std::to_string(k) + ")");
        }
    }
}

inline void check_centroids(const Matrix& data, const Centroids& b) {
    if (b.centers.cols() != data.cols()) {
        throw DimensionError("centroids have " + std::to_string(b.centers.cols()) +
                             " columns, data has " + std::to_string(data.cols()));
    }
    if (b.k() == 0) throw DimensionError("centroids are empty");
}

inline Matrix cluster_means(const Matrix& data, const Assignment& a, std::size_t k,
                            std::vector<std::size_t>& sizes) {
    Matrix centers = Matrix::Zero(static_cast<Eigen::Index>(k), data.cols());
    sizes.assign(k, 0);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto c = static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)]);
        centers.row(static_cast<Eigen::Index>(c)) += data.row(i);
        ++sizes[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] > 0) centers.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(sizes[c]);
    }
    return centers;
}

// Means of each cluster; every empty cluster takes over the point farthest
// from its own cluster mean (among clusters with >= 2 members), which keeps
// k clusters and never increases the objective. Labels are rewritten in place.
inline Centroids update_with_repair(const Matrix& data, Assignment& a, std::size_t k) {
    std::vector<std::size_t> sizes;
    Matrix centers = cluster_means(data, a, k, sizes);
    for (std::size_t empty = 0; empty < k; ++empty) {
        if (sizes[empty] > 0) continue;
        double far = -1.0;
        Eigen::Index donor_row = -1;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            const auto c = static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)]);
            if (sizes[c] < 2) continue;
            const double d = squared_distance(data, i, centers, static_cast<Eigen::Index>(c));
            if (d > far) {
                far = d;
                donor_row = i;
            }
        }
        if (donor_row < 0) break;  // n < k; nothing left to move
        const auto donor = static_cast<std::size_t>(a.labels[static_cast<std::size_t>(donor_row)]);
        a.labels[static_cast<std::size_t>(donor_row)] = static_cast<int>(empty);
        sizes[empty] = 1;
        centers.row(static_cast<Eigen::Index>(empty)) = data.row(donor_row);
        // Recompute the donor mean from scratch for stable rounding.
        centers.row(static_cast<Eigen::Index>(donor)).setZero();
        --sizes[donor];
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            if (static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)]) == donor)
                centers.row(static_cast<Eigen::Index>(donor)) += data.row(i);
        }
        centers.row(static_cast<Eigen::Index>(donor)) /= static_cast<double>(sizes[donor]);
    }
    return Centroids{std::move(centers)};
}

}  // namespace detail

/// Within-cluster sum of squares, sum_i ||y_i - b_{a(i)}||^2.
inline double kmeans_objective(const Matrix& data, const Assignment& a, const Centroids& b) {
    detail::check_centroids(data, b);
    detail::check_labels(a, static_cast<std::size_t>(data.rows()), b.k());
    double total = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        total += detail::squared_distance(data, i, b.centers,
                                          a.labels[static_cast<std::size_t>(i)]);
    }
    return total;
}

/// Row-expanded model A*B: row i is the center of cluster a(i).
inline Matrix reconstruct(const Assignment& a, const Centroids& b) {
    Matrix model(static_cast<Eigen::Index>(a.size()), b.centers.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int c = a.labels[i];
        if (c < 0 || static_cast<std::size_t>(c) >= b.k())
            throw IndexError("label " + std::to_string(c) + " has no centroid");
        model.row(static_cast<Eigen::Index>(i)) = b.centers.row(c);
    }
    return model;
}

/// k-means++ seeding: the first center is a uniformly chosen row, each later
/// one is drawn with probability proportional to its squared distance to the
/// nearest center chosen so far. When every remaining row coincides with a
/// chosen center the draw falls back to uniform and the result is flagged.
inline Seeding kmeanspp_init(const Matrix& data, std::size_t k, Seed seed) {
    const auto n = static_cast<std::size_t>(data.rows());
    if (k == 0) throw InfeasibleError("k must be at least 1");
    if (k > n) {
        throw InfeasibleError("k = " + std::to_string(k) + " exceeds the number of rows (" +
                              std::to_string(n) + ")");
    }
    std::mt19937_64 rng(seed);
    Seeding out;
    out.centroids.centers.resize(static_cast<Eigen::Index>(k), data.cols());
    out.rows.reserve(k);

    auto choose = [&](std::size_t row) {
        out.centroids.centers.row(static_cast<Eigen::Index>(out.rows.size())) =
            data.row(static_cast<Eigen::Index>(row));
        out.rows.push_back(row);
    };

    choose(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) {
        nearest[i] = detail::squared_distance(data, static_cast<Eigen::Index>(i), data,
                                              static_cast<Eigen::Index>(out.rows[0]));
    }

    while (out.rows.size() < k) {
        double total = 0.0;
        for (double d : nearest) total += d;
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0.0;
            std::size_t last_positive = 0;
            bool found = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (nearest[i] <= 0.0) continue;
                last_positive = i;
                acc += nearest[i];
                if (u < acc) {
                    pick = i;
                    found = true;
                    break;
                }
            }
            if (!found) pick = last_positive;
        } else {
            out.duplicate_centers = true;
            pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        }
        choose(pick);
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i],
                                  detail::squared_distance(data, static_cast<Eigen::Index>(i), data,
                                                           static_cast<Eigen::Index>(pick)));
        }
    }
    return out;
}

/// Nearest-centroid labels; ties go to the lowest cluster index.
inline Assignment assign_step(const Matrix& data, const Centroids& b) {
    detail::check_centroids(data, b);
    Assignment a;
    a.labels.resize(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (Eigen::Index c = 0; c < b.centers.rows(); ++c) {
            const double d = detail::squared_distance(data, i, b.centers, c);
            if (d < best) {
                best = d;
                best_c = static_cast<int>(c);
            }
        }
        a.labels[static_cast<std::size_t>(i)] = best_c;
    }
    return a;
}

/// Per-cluster means. An empty cluster is re-seeded with the point farthest
/// from its own cluster's mean (that point leaves its old cluster).
inline Centroids update_step(const Matrix& data, const Assignment& a, std::size_t k) {
    detail::check_labels(a, static_cast<std::size_t>(data.rows()), k);
    Assignment working = a;
    return detail::update_with_repair(data, working, k);
}

/// Lloyd iterations from fixed starting centers.
///
/// Each iteration assigns, repairs empty clusters, and recomputes means. Stops
/// when the assignment no longer changes, when the relative objective
/// decrease falls to `cfg.tol`, or after `cfg.max_iter` updates. The
/// returned (assignment, centroids, objective) triple is always consistent.
inline KMeansResult lloyd_from(const Matrix& data, const Centroids& start, const EngineConfig& cfg) {
    detail::check_centroids(data, start);
    if (cfg.max_iter == 0) throw InfeasibleError("max_iter must be at least 1");
    const std::size_t k = start.k();
    if (k > static_cast<std::size_t>(data.rows())) {
        throw InfeasibleError("k = " + std::to_string(k) + " exceeds the number of rows (" +
                              std::to_string(data.rows()) + ")");
    }

    KMeansResult result;
    Assignment labels = assign_step(data, start);
    Centroids centers;
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        centers = detail::update_with_repair(data, labels, k);
        const double objective = kmeans_objective(data, labels, centers);
        result.iterations = it;
        const double previous = result.trace.empty() ? 0.0 : result.trace.back();
        result.trace.push_back(objective);
        if (result.trace.size() >= 2 && previous - objective <= cfg.tol * previous) {
            result.converged = true;
            break;
        }
        Assignment next = assign_step(data, centers);
        if (next == labels) {
            result.converged = true;
            break;
        }
        if (it == cfg.max_iter) break;
        labels = std::move(next);
    }
    result.assignment = std::move(labels);
    result.centroids = std::move(centers);
    result.objective = result.trace.back();
    return result;
}

/// k-means with k-means++ seeding and `cfg.n_init` restarts; the lowest
/// objective wins (first on ties). Deterministic in `seed`.
inline KMeansResult lloyd(const Matrix& data, std::size_t k, Seed seed, const EngineConfig& cfg = {}) {
    if (k == 0) throw InfeasibleError("k must be at least 1");
    if (k > static_cast<std::size_t>(data.rows())) {
        throw InfeasibleError("k = " + std::to_string(k) + " exceeds the number of rows (" +
                              std::to_string(data.rows()) + ")");
    }
    const std::size_t restarts = std::max<std::size_t>(cfg.n_init, 1);
    KMeansResult best;
    bool have_best = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        const Seed run_seed = r == 0 ? seed : derive_seed(seed, {r});
        Seeding init = kmeanspp_init(data, k, run_seed);
        KMeansResult run = lloyd_from(data, init.centroids, cfg);
        run.duplicate_centers = init.duplicate_centers;
        if (!have_best || run.objective < best.objective) {
            best = std::move(run);
            have_best = true;
        }
    }
    return best;
}

}  // namespace kpod
