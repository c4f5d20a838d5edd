#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "kpod/error.hpp"
#include "kpod/kmeans.hpp"

namespace kpod {

/// Classification of the n(n-1)/2 unordered pairs of items by whether each
/// partition puts them together ("same") or apart ("diff").
struct PairCounts {
    std::uint64_t same_same = 0;
    std::uint64_t same_diff = 0;
    std::uint64_t diff_same = 0;
    std::uint64_t diff_diff = 0;

    std::uint64_t total() const noexcept { return same_same + same_diff + diff_same + diff_diff; }
};

namespace detail {

inline std::uint64_t choose2(std::uint64_t m) noexcept { return m * (m - (m > 0 ? 1 : 0)) / 2; }

// Relabels to 0..(distinct-1) in order of sorted label value.
inline std::vector<std::size_t> dense_codes(std::span<const int> labels, std::size_t& distinct) {
    std::vector<int> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    distinct = sorted.size();
    std::vector<std::size_t> codes(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        codes[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), labels[i]) -
                                            sorted.begin());
    }
    return codes;
}

}  // namespace detail

/// Pair counts from the contingency table of the two labelings, O(n + ka*kb).
inline PairCounts pair_counts(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) {
        throw DimensionError("partitions have different lengths (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    }
    if (a.size() < 2) throw InfeasibleError("pair agreement needs at least two items");
    std::size_t ka = 0;
    std::size_t kb = 0;
    const auto ca = detail::dense_codes(a, ka);
    const auto cb = detail::dense_codes(b, kb);

    std::vector<std::uint64_t> table(ka * kb, 0);
    std::vector<std::uint64_t> rows(ka, 0);
    std::vector<std::uint64_t> cols(kb, 0);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        ++table[ca[i] * kb + cb[i]];
        ++rows[ca[i]];
        ++cols[cb[i]];
    }
    std::uint64_t both = 0;
    for (auto cell : table) both += detail::choose2(cell);
    std::uint64_t in_a = 0;
    for (auto r : rows) in_a += detail::choose2(r);
    std::uint64_t in_b = 0;
    for (auto c : cols) in_b += detail::choose2(c);

    PairCounts out;
    out.same_same = both;
    out.same_diff = in_a - both;
    out.diff_same = in_b - both;
    out.diff_diff = detail::choose2(a.size()) - in_a - in_b + both;
    return out;
}

/// Fraction of pairs on which two partitions agree. Label values are
/// arbitrary; only the induced partitions matter.
inline double rand_index(std::span<const int> a, std::span<const int> b) {
    const PairCounts c = pair_counts(a, b);
    return static_cast<double>(c.same_same + c.diff_diff) / static_cast<double>(c.total());
}

/// Hubert-Arabie adjusted Rand index. Defined as 1 when both partitions are
/// trivial in the same way (the chance correction is then undefined).
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    const PairCounts c = pair_counts(a, b);
    const double total = static_cast<double>(c.total());
    const double both = static_cast<double>(c.same_same);
    const double in_a = static_cast<double>(c.same_same + c.same_diff);
    const double in_b = static_cast<double>(c.same_same + c.diff_same);
    const double expected = in_a * in_b / total;
    const double maximum = 0.5 * (in_a + in_b);
    if (maximum == expected) return 1.0;
    return (both - expected) / (maximum - expected);
}

inline double rand_index(const Assignment& a, const Assignment& b) { return rand_index(a.labels, b.labels); }
inline double adjusted_rand_index(const Assignment& a, const Assignment& b) {
    return adjusted_rand_index(a.labels, b.labels);
}

template <class R>
struct Timed {
    R result;
    double seconds;
};

template <>
struct Timed<void> {
    double seconds;
};

/// Runs `run` once and measures its wall time on the steady clock.
template <class F>
auto timed(F&& run) {
    using R = std::invoke_result_t<F&>;
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    if constexpr (std::is_void_v<R>) {
        run();
        return Timed<void>{elapsed()};
    } else {
        R result = run();
        const double seconds = elapsed();
        return Timed<R>{std::move(result), seconds};
    }
}

struct Summary {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t count = 0;
};

/// Mean and standard error (sample sd / sqrt(count)); SE is 0 for a single value.
inline Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.standard_error = std::sqrt(ss / static_cast<double>(values.size() - 1)) /
                           std::sqrt(static_cast<double>(values.size()));
    }
    return s;
}

}  // namespace kpod
