#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "kpod/csv.hpp"
#include "kpod/evaluation.hpp"

namespace kpod {

/// One (scenario, method, trial) outcome. Optional fields are empty when the
/// run did not produce them (failed runs, or mm_iterations for non-k-POD).
struct ReportRow {
    std::string mechanism;
    double target_rate = 0.0;
    std::optional<double> achieved_rate;
    std::string method;
    std::size_t trial = 0;
    std::optional<double> rand;
    std::optional<double> adjusted_rand;
    double seconds = 0.0;
    std::optional<std::size_t> mm_iterations;
    std::string status = "ok";
};

struct AggregateRow {
    std::string mechanism;
    double target_rate = 0.0;
    std::string method;
    std::size_t rows = 0;
    Summary rand;
    Summary adjusted_rand;
    Summary achieved_rate;
    Summary seconds;
};

/// Per mechanism x rate x method summaries over the "ok" rows, in order of
/// first appearance.
inline std::vector<AggregateRow> aggregate(const std::vector<ReportRow>& rows) {
    using Key = std::tuple<std::string, double, std::string>;
    std::map<Key, std::size_t> index;
    std::vector<AggregateRow> out;
    struct Acc {
        std::vector<double> rand, ari, rate, secs;
    };
    std::vector<Acc> acc;
    for (const auto& r : rows) {
        Key key{r.mechanism, r.target_rate, r.method};
        auto [it, inserted] = index.emplace(key, out.size());
        if (inserted) {
            AggregateRow row;
            row.mechanism = r.mechanism;
            row.target_rate = r.target_rate;
            row.method = r.method;
            out.push_back(std::move(row));
            acc.emplace_back();
        }
        out[it->second].rows += 1;
        if (r.status != "ok") continue;
        auto& a = acc[it->second];
        if (r.rand) a.rand.push_back(*r.rand);
        if (r.adjusted_rand) a.ari.push_back(*r.adjusted_rand);
        if (r.achieved_rate) a.rate.push_back(*r.achieved_rate);
        a.secs.push_back(r.seconds);
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
        out[g].rand = summarize(acc[g].rand);
        out[g].adjusted_rand = summarize(acc[g].ari);
        out[g].achieved_rate = summarize(acc[g].rate);
        out[g].seconds = summarize(acc[g].secs);
    }
    return out;
}

struct ReportPaths {
    std::string rows;
    std::string summary;
    std::string timing;
};

inline ReportPaths report_paths(const std::string& path) {
    std::string stem = path;
    if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0) stem.resize(stem.size() - 4);
    return {path, stem + "_summary.csv", stem + "_timing.csv"};
}

namespace detail {

inline std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace detail

/// Writes the per-run rows to `path`, the aggregate to `<stem>_summary.csv`
/// and wall times to `<stem>_timing.csv`. The first two files are a pure
/// function of the rows' non-timing fields.
inline ReportPaths write_report(const std::vector<ReportRow>& rows, const std::string& path) {
    const ReportPaths paths = report_paths(path);
    {
        auto out = detail::open_for_writing(paths.rows);
        out << "mechanism,target_rate,achieved_rate,method,trial,rand,adjusted_rand,mm_iterations,status\n";
        for (const auto& r : rows) {
            out << r.mechanism << ',' << format_double(r.target_rate) << ',' << detail::opt_cell(r.achieved_rate)
                << ',' << r.method << ',' << r.trial << ',' << detail::opt_cell(r.rand) << ','
                << detail::opt_cell(r.adjusted_rand) << ','
                << (r.mm_iterations ? std::to_string(*r.mm_iterations) : std::string("NA")) << ',' << r.status
                << '\n';
        }
        detail::finish(out, paths.rows);
    }
    const auto groups = aggregate(rows);
    {
        auto out = detail::open_for_writing(paths.summary);
        out << "mechanism,target_rate,method,runs,ok,rand_mean,rand_se,adjusted_rand_mean,adjusted_rand_se,"
               "achieved_rate_mean\n";
        for (const auto& g : groups) {
            auto cell = [&](const Summary& s, double v) { return s.count ? format_double(v) : std::string("NA"); };
            out << g.mechanism << ',' << format_double(g.target_rate) << ',' << g.method << ',' << g.rows << ','
                << g.rand.count << ',' << cell(g.rand, g.rand.mean) << ',' << cell(g.rand, g.rand.standard_error)
                << ',' << cell(g.adjusted_rand, g.adjusted_rand.mean) << ','
                << cell(g.adjusted_rand, g.adjusted_rand.standard_error) << ','
                << cell(g.achieved_rate, g.achieved_rate.mean) << '\n';
        }
        detail::finish(out, paths.summary);
    }
    {
        auto out = detail::open_for_writing(paths.timing);
        out << "mechanism,target_rate,method,trial,seconds,status\n";
        for (const auto& r : rows) {
            out << r.mechanism << ',' << format_double(r.target_rate) << ',' << r.method << ',' << r.trial << ','
                << format_double(r.seconds) << ',' << r.status << '\n';
        }
        detail::finish(out, paths.timing);
    }
    return paths;
}

}  // namespace kpod
