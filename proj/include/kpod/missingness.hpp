#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kpod/error.hpp"
#include "kpod/kmeans.hpp"
#include "kpod/matrix.hpp"
#include "kpod/seed.hpp"

namespace kpod {

enum class Mechanism { mcar, mar, nmar };

inline std::string_view to_string(Mechanism m) {
    switch (m) {
        case Mechanism::mcar: return "MCAR";
        case Mechanism::mar: return "MAR";
        case Mechanism::nmar: return "NMAR";
    }
    return "?";
}

inline Mechanism parse_mechanism(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "MCAR") return Mechanism::mcar;
    if (upper == "MAR") return Mechanism::mar;
    if (upper == "NMAR" || upper == "MNAR") return Mechanism::nmar;
    throw ParseError("unknown missingness mechanism '" + std::string(name) + "'");
}

/// How MCAR chooses cells: an exact count drawn uniformly without
/// replacement, or an independent Bernoulli trial per cell.
enum class McarSampling { exact, bernoulli };

struct MechanismSpec {
    Mechanism kind = Mechanism::mcar;
    double target_rate = 0.25;
    /// MAR only: the columns that may lose entries.
    std::vector<std::size_t> mar_columns;
    /// MAR only, optional: per-column missing fractions aligned with
    /// mar_columns. Overrides target_rate when non-empty.
    std::vector<double> mar_column_rates;
    McarSampling sampling = McarSampling::exact;
    Seed seed = 0;
};

struct MixtureSpec {
    std::size_t n = 500;
    std::size_t p = 100;
    std::size_t k = 10;
    double center_sd = 10.0;
    double noise_variance = 10.0;
    Seed seed = 0;
};

struct SimulatedData {
    Matrix values;
    Assignment labels;
    Matrix means;
};

struct AmputeResult {
    MaskedMatrix data;
    /// The complete input, kept for oracle checks.
    Matrix original;
    double achieved_rate = 0.0;
    /// NMAR columns that had too few distinct values and were amputed MCAR.
    std::vector<std::size_t> fallback_columns;
    /// Cells un-masked to keep every row and column partially observed.
    std::size_t restored_cells = 0;
};

/// Isotropic Gaussian mixture: component means N(0, center_sd^2) per
/// coordinate, labels uniform over k, rows mean + N(0, noise_variance I).
inline SimulatedData simulate_mixture(const MixtureSpec& spec) {
    if (spec.n == 0 || spec.p == 0 || spec.k == 0) throw InfeasibleError("mixture dimensions must be positive");
    if (!(spec.center_sd > 0.0) || !(spec.noise_variance >= 0.0))
        throw InfeasibleError("mixture spreads must be non-negative (center_sd > 0)");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> standard(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(spec.k) - 1);

    SimulatedData out;
    out.means.resize(static_cast<Eigen::Index>(spec.k), static_cast<Eigen::Index>(spec.p));
    for (Eigen::Index c = 0; c < out.means.rows(); ++c)
        for (Eigen::Index j = 0; j < out.means.cols(); ++j) out.means(c, j) = spec.center_sd * standard(rng);

    const double noise_sd = std::sqrt(spec.noise_variance);
    out.values.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.p));
    out.labels.labels.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const int c = pick(rng);
        out.labels.labels[i] = c;
        for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
            out.values(static_cast<Eigen::Index>(i), j) = out.means(c, j) + noise_sd * standard(rng);
        }
    }
    return out;
}

/// Adds N(0, (rel_sd * mean_j)^2) noise to every entry of column j.
/// Columns with mean 0 are left as they are.
inline Matrix perturb_dataset(const Matrix& values, double rel_sd, Seed seed) {
    if (!(rel_sd >= 0.0)) throw InfeasibleError("rel_sd must be non-negative");
    Matrix out = values;
    if (rel_sd == 0.0 || values.size() == 0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> standard(0.0, 1.0);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const double mean = values.col(j).mean();
        const double sd = rel_sd * std::abs(mean);
        if (sd == 0.0) continue;
        for (Eigen::Index i = 0; i < values.rows(); ++i) out(i, j) += sd * standard(rng);
    }
    return out;
}

namespace detail {

inline std::size_t rounded_count(double rate, std::size_t cells) {
    return static_cast<std::size_t>(std::llround(rate * static_cast<double>(cells)));
}

template <class Rng>
void choose_cells(std::vector<std::size_t> candidates, std::size_t count, Rng& rng, Mask& mask,
                  std::size_t p) {
    count = std::min(count, candidates.size());
    // Partial Fisher-Yates.
    for (std::size_t s = 0; s < count; ++s) {
        std::uniform_int_distribution<std::size_t> pick(s, candidates.size() - 1);
        std::swap(candidates[s], candidates[pick(rng)]);
        const std::size_t cell = candidates[s];
        mask(static_cast<Eigen::Index>(cell / p), static_cast<Eigen::Index>(cell % p)) = false;
    }
}

template <class Rng>
std::vector<std::size_t> spread_over_columns(std::size_t total, std::size_t p, Rng& rng) {
    std::vector<std::size_t> counts(p, total / p);
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r = 0; r < total % p; ++r) ++counts[order[r]];
    return counts;
}

template <class Rng>
std::size_t restore_empty_lines(Mask& mask, Rng& rng) {
    std::size_t restored = 0;
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        if (mask.cols() > 0 && !mask.row(i).any()) {
            std::uniform_int_distribution<Eigen::Index> pick(0, mask.cols() - 1);
            mask(i, pick(rng)) = true;
            ++restored;
        }
    }
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        if (mask.rows() > 0 && !mask.col(j).any()) {
            std::uniform_int_distribution<Eigen::Index> pick(0, mask.rows() - 1);
            mask(pick(rng), j) = true;
            ++restored;
        }
    }
    return restored;
}

}  // namespace detail

/// Removes entries from a complete matrix according to the mechanism.
///
/// - MCAR: round(rate * n * p) cells uniformly at random (or one Bernoulli
///   trial per cell with McarSampling::bernoulli).
/// - MAR: cells drawn uniformly inside `mar_columns` only, enough to reach
///   the overall rate, or per-column rates when given.
/// - NMAR: per column, a random subset of the cells at or below the column's
///   rate-quantile, sized so the overall rate is met. Columns with fewer than
///   two distinct values fall back to MCAR and are reported.
///
/// Finally any fully masked row or column gets one random cell back.
/// Values are never modified.
inline AmputeResult ampute(const Matrix& values, const MechanismSpec& spec) {
    const auto n = static_cast<std::size_t>(values.rows());
    const auto p = static_cast<std::size_t>(values.cols());
    if (n == 0 || p == 0) throw InfeasibleError("cannot ampute an empty matrix");
    if (!values.allFinite()) throw Error("ampute requires a complete, finite matrix");
    const bool per_column = spec.kind == Mechanism::mar && !spec.mar_column_rates.empty();
    if (!per_column && !(spec.target_rate > 0.0 && spec.target_rate < 1.0)) {
        throw InfeasibleError("target missingness rate must lie in (0, 1)");
    }

    std::mt19937_64 rng(spec.seed);
    Mask mask = Mask::Constant(values.rows(), values.cols(), true);
    AmputeResult out;
    const std::size_t total = detail::rounded_count(spec.target_rate, n * p);

    switch (spec.kind) {
        case Mechanism::mcar: {
            if (spec.sampling == McarSampling::bernoulli) {
                std::bernoulli_distribution drop(spec.target_rate);
                for (Eigen::Index i = 0; i < values.rows(); ++i)
                    for (Eigen::Index j = 0; j < values.cols(); ++j)
                        if (drop(rng)) mask(i, j) = false;
            } else {
                std::vector<std::size_t> cells(n * p);
                std::iota(cells.begin(), cells.end(), std::size_t{0});
                detail::choose_cells(std::move(cells), total, rng, mask, p);
            }
            break;
        }
        case Mechanism::mar: {
            if (spec.mar_columns.empty()) throw InfeasibleError("MAR requires at least one column");
            std::vector<std::size_t> columns = spec.mar_columns;
            std::sort(columns.begin(), columns.end());
            if (std::adjacent_find(columns.begin(), columns.end()) != columns.end())
                throw InfeasibleError("MAR columns must be distinct");
            if (columns.back() >= p)
                throw IndexError("MAR column " + std::to_string(columns.back()) + " out of range");
            if (per_column) {
                if (spec.mar_column_rates.size() != spec.mar_columns.size())
                    throw DimensionError("mar_column_rates must align with mar_columns");
                for (std::size_t c = 0; c < spec.mar_columns.size(); ++c) {
                    const double rate = spec.mar_column_rates[c];
                    if (!(rate >= 0.0 && rate < 1.0)) throw InfeasibleError("per-column MAR rate must lie in [0, 1)");
                    std::vector<std::size_t> cells(n);
                    for (std::size_t i = 0; i < n; ++i) cells[i] = i * p + spec.mar_columns[c];
                    detail::choose_cells(std::move(cells), detail::rounded_count(rate, n), rng, mask, p);
                }
            } else {
                const double reachable = static_cast<double>(columns.size()) / static_cast<double>(p);
                if (spec.target_rate > reachable) {
                    throw InfeasibleError("MAR rate " + std::to_string(spec.target_rate) +
                                          " exceeds the reachable fraction " + std::to_string(reachable));
                }
                std::vector<std::size_t> cells;
                cells.reserve(n * columns.size());
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j : columns) cells.push_back(i * p + j);
                detail::choose_cells(std::move(cells), total, rng, mask, p);
            }
            break;
        }
        case Mechanism::nmar: {
            const auto counts = detail::spread_over_columns(total, p, rng);
            std::vector<std::size_t> order(n);
            for (std::size_t j = 0; j < p; ++j) {
                const auto col = static_cast<Eigen::Index>(j);
                const std::size_t count = std::min(counts[j], n - 1);
                if (count == 0) continue;
                std::iota(order.begin(), order.end(), std::size_t{0});
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return values(static_cast<Eigen::Index>(a), col) < values(static_cast<Eigen::Index>(b), col);
                });
                const double lowest = values(static_cast<Eigen::Index>(order.front()), col);
                const double highest = values(static_cast<Eigen::Index>(order.back()), col);
                std::vector<std::size_t> cells;
                if (lowest == highest) {
                    out.fallback_columns.push_back(j);
                    for (std::size_t i = 0; i < n; ++i) cells.push_back(i * p + j);
                } else {
                    const double cutoff = values(static_cast<Eigen::Index>(order[count - 1]), col);
                    for (std::size_t r = 0; r < n; ++r) {
                        if (values(static_cast<Eigen::Index>(order[r]), col) > cutoff) break;
                        cells.push_back(order[r] * p + j);
                    }
                }
                detail::choose_cells(std::move(cells), count, rng, mask, p);
            }
            break;
        }
    }

    out.restored_cells = detail::restore_empty_lines(mask, rng);
    out.original = values;
    out.data = MaskedMatrix(values, std::move(mask));
    out.achieved_rate = out.data.missing_fraction();
    return out;
}

}  // namespace kpod
