#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kpod/error.hpp"

namespace kpod {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

inline void require_same_shape(Eigen::Index rows_a, Eigen::Index cols_a, Eigen::Index rows_b,
                               Eigen::Index cols_b, const char* what) {
    if (rows_a != rows_b || cols_a != cols_b) {
        throw DimensionError(std::string(what) + ": shape " + std::to_string(rows_a) + "x" +
                             std::to_string(cols_a) + " does not match " +
                             std::to_string(rows_b) + "x" + std::to_string(cols_b));
    }
}

}  // namespace detail

/// Dense n x p matrix together with its observed-entry mask.
///
/// The mask is authoritative: cells with `observed(i, j) == false` are stored
/// as 0.0 and carry no information. Instances are immutable.
class MaskedMatrix {
public:
    MaskedMatrix() = default;

    MaskedMatrix(Matrix values, Mask observed)
        : values_(std::move(values)), observed_(std::move(observed)) {
        detail::require_same_shape(values_.rows(), values_.cols(), observed_.rows(),
                                   observed_.cols(), "MaskedMatrix");
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            for (Eigen::Index j = 0; j < values_.cols(); ++j) {
                if (!observed_(i, j)) {
                    values_(i, j) = 0.0;
                } else if (!std::isfinite(values_(i, j))) {
                    throw Error("MaskedMatrix: non-finite observed value at (" +
                                std::to_string(i) + ", " + std::to_string(j) + ")");
                }
            }
        }
    }

    static MaskedMatrix fully_observed(Matrix values) {
        Mask mask = Mask::Constant(values.rows(), values.cols(), true);
        return MaskedMatrix(std::move(values), std::move(mask));
    }

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    const Matrix& values() const noexcept { return values_; }
    const Mask& observed() const noexcept { return observed_; }

    bool is_observed(std::size_t i, std::size_t j) const {
        return observed_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    double value(std::size_t i, std::size_t j) const {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    std::size_t observed_count() const { return static_cast<std::size_t>(observed_.count()); }

    double observed_fraction() const {
        const auto total = values_.size();
        return total == 0 ? 1.0 : static_cast<double>(observed_count()) / static_cast<double>(total);
    }

    double missing_fraction() const { return 1.0 - observed_fraction(); }

    bool is_complete() const { return observed_.all(); }

    std::size_t observed_in_row(std::size_t i) const {
        return static_cast<std::size_t>(observed_.row(static_cast<Eigen::Index>(i)).count());
    }
    std::size_t observed_in_col(std::size_t j) const {
        return static_cast<std::size_t>(observed_.col(static_cast<Eigen::Index>(j)).count());
    }

private:
    Matrix values_;
    Mask observed_;
};

/// Per-column location and scale over observed entries.
struct ColumnStats {
    std::vector<double> means;
    std::vector<double> std_devs;
    std::vector<std::size_t> counts;
};

/// Sum of squared residuals between x and model over the observed cells.
inline double project_observed(const MaskedMatrix& x, const Matrix& model) {
    detail::require_same_shape(static_cast<Eigen::Index>(x.rows()),
                               static_cast<Eigen::Index>(x.cols()), model.rows(), model.cols(),
                               "project_observed");
    const Matrix& values = x.values();
    const Mask& mask = x.observed();
    double total = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (mask(i, j)) {
                const double r = values(i, j) - model(i, j);
                total += r * r;
            }
        }
    }
    return total;
}

/// Observed cells of x, unobserved cells of source. x is left untouched.
inline Matrix fill_unobserved(const MaskedMatrix& x, const Matrix& source) {
    detail::require_same_shape(static_cast<Eigen::Index>(x.rows()),
                               static_cast<Eigen::Index>(x.cols()), source.rows(), source.cols(),
                               "fill_unobserved");
    return x.observed().select(x.values(), source);
}

/// Column means and sample standard deviations (n_obs - 1 denominator) of the
/// observed entries. A column with a single observed entry has sd 0.
inline ColumnStats column_stats(const MaskedMatrix& x) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    ColumnStats stats{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0),
                      std::vector<std::size_t>(p, 0)};
    for (std::size_t j = 0; j < p; ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (x.is_observed(i, j)) {
                sum += x.value(i, j);
                ++count;
            }
        }
        if (count == 0) {
            throw DegenerateError("column " + std::to_string(j) + " has no observed entries", j);
        }
        const double mean = sum / static_cast<double>(count);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (x.is_observed(i, j)) {
                const double d = x.value(i, j) - mean;
                ss += d * d;
            }
        }
        stats.means[j] = mean;
        stats.std_devs[j] = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
        stats.counts[j] = count;
    }
    return stats;
}

/// Center and scale the observed entries of each column. Zero-variance
/// columns are only centered. Returns the statistics that were applied.
inline std::pair<MaskedMatrix, ColumnStats> standardize(const MaskedMatrix& x) {
    ColumnStats stats = column_stats(x);
    Matrix out = x.values();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double mean = stats.means[static_cast<std::size_t>(j)];
        const double sd = stats.std_devs[static_cast<std::size_t>(j)];
        const double scale = sd > 0.0 ? sd : 1.0;
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            if (x.observed()(i, j)) out(i, j) = (out(i, j) - mean) / scale;
        }
    }
    return {MaskedMatrix(std::move(out), x.observed()), std::move(stats)};
}

}  // namespace kpod
