#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kpod/error.hpp"
#include "kpod/kmeans.hpp"
#include "kpod/matrix.hpp"

namespace kpod {

struct CsvOptions {
    std::string missing_token = "NA";
    bool has_header = true;
    /// Column holding ground-truth classes. Matched by header name, or by
    /// 0-based position when the file has no header.
    std::optional<std::string> label_column;
};

struct CsvDataset {
    MaskedMatrix data;
    std::vector<std::string> feature_names;
    std::optional<Assignment> labels;
    /// Original label strings indexed by dense label code.
    std::vector<std::string> label_names;
};

/// Shortest text that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::vector<std::vector<std::string>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(split_fields(line));
    }
    return rows;
}

inline std::ofstream open_for_writing(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace detail

/// Reads a numeric CSV where empty cells and `missing_token` are unobserved.
inline CsvDataset read_masked_csv(const std::string& path, const CsvOptions& opts = {}) {
    auto rows = detail::read_rows(path);
    std::vector<std::string> header;
    if (opts.has_header) {
        if (rows.empty()) throw ParseError(path + ": missing header row");
        header = std::move(rows.front());
        rows.erase(rows.begin());
    }
    const std::size_t width = opts.has_header ? header.size() : (rows.empty() ? 0 : rows.front().size());
    if (!opts.has_header) {
        for (std::size_t j = 0; j < width; ++j) header.push_back("x" + std::to_string(j));
    }

    std::optional<std::size_t> label_idx;
    if (opts.label_column) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == *opts.label_column) label_idx = j;
        if (!label_idx && !opts.has_header) {
            std::size_t pos = 0;
            const auto& name = *opts.label_column;
            if (std::from_chars(name.data(), name.data() + name.size(), pos).ec == std::errc() && pos < width)
                label_idx = pos;
        }
        if (!label_idx) throw ParseError(path + ": label column '" + *opts.label_column + "' not found");
    }

    CsvDataset out;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (!label_idx || j != *label_idx) out.feature_names.push_back(header[j]);
    const std::size_t p = out.feature_names.size();

    Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    Mask mask(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    std::map<std::string, int> label_codes;
    std::vector<std::string> raw_labels;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& fields = rows[r];
        const std::size_t line_no = r + (opts.has_header ? 2 : 1);
        if (fields.size() != width) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " fields, found " + std::to_string(fields.size()));
        }
        std::size_t c = 0;
        for (std::size_t j = 0; j < width; ++j) {
            if (label_idx && j == *label_idx) {
                raw_labels.push_back(fields[j]);
                label_codes.emplace(fields[j], 0);
                continue;
            }
            const auto ri = static_cast<Eigen::Index>(r);
            const auto ci = static_cast<Eigen::Index>(c);
            if (fields[j].empty() || fields[j] == opts.missing_token) {
                values(ri, ci) = 0.0;
                mask(ri, ci) = false;
            } else {
                double v = 0.0;
                if (!detail::parse_double(fields[j], v) || !std::isfinite(v)) {
                    throw ParseError(path + ":" + std::to_string(line_no) + ": column " + std::to_string(j + 1) +
                                     " ('" + header[j] + "'): non-numeric value '" + fields[j] + "'");
                }
                values(ri, ci) = v;
                mask(ri, ci) = true;
            }
            ++c;
        }
    }
    out.data = MaskedMatrix(std::move(values), std::move(mask));
    if (label_idx) {
        int next = 0;
        for (auto& [name, code] : label_codes) {
            code = next++;
            out.label_names.push_back(name);
        }
        Assignment labels;
        labels.labels.reserve(raw_labels.size());
        for (const auto& s : raw_labels) labels.labels.push_back(label_codes.at(s));
        out.labels = std::move(labels);
    }
    return out;
}

/// Writes a masked matrix with a header row; unobserved cells become "NA".
/// An optional label column is appended last.
inline void write_masked_csv(const std::string& path, const MaskedMatrix& x,
                             const std::vector<std::string>& names = {}, const Assignment* labels = nullptr,
                             const std::string& label_name = "label") {
    auto out = detail::open_for_writing(path);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        if (j) out << ',';
        out << (j < names.size() ? names[j] : "x" + std::to_string(j));
    }
    if (labels) out << (x.cols() ? "," : "") << label_name;
    out << '\n';
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            if (j) out << ',';
            out << (x.is_observed(i, j) ? format_double(x.value(i, j)) : std::string("NA"));
        }
        if (labels) out << (x.cols() ? "," : "") << labels->labels.at(i);
        out << '\n';
    }
    detail::finish(out, path);
}

inline void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& names = {}) {
    write_masked_csv(path, MaskedMatrix::fully_observed(m), names);
}

/// One label per row under a "label" header.
inline void write_labels_csv(const std::string& path, const Assignment& a) {
    auto out = detail::open_for_writing(path);
    out << "label\n";
    for (int v : a.labels) out << v << '\n';
    detail::finish(out, path);
}

/// Reads integer labels from a CSV column (by header name); with no column
/// named, the file must have exactly one column. Non-integer labels are coded
/// densely in sorted order.
inline Assignment read_labels_csv(const std::string& path, const std::optional<std::string>& column = {}) {
    auto rows = detail::read_rows(path);
    if (rows.empty()) throw ParseError(path + ": empty label file");
    const auto header = rows.front();
    std::size_t idx = 0;
    if (column) {
        bool found = false;
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == *column) { idx = j; found = true; }
        if (!found) throw ParseError(path + ": label column '" + *column + "' not found");
    } else if (header.size() != 1) {
        throw ParseError(path + ": several columns present; name the label column");
    }
    std::vector<std::string> raw;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw ParseError(path + ":" + std::to_string(r + 1) + ": ragged row");
        raw.push_back(rows[r][idx]);
    }
    Assignment a;
    bool all_int = true;
    for (const auto& s : raw) {
        int v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) { all_int = false; break; }
        a.labels.push_back(v);
    }
    if (!all_int) {
        std::map<std::string, int> codes;
        for (const auto& s : raw) codes.emplace(s, 0);
        int next = 0;
        for (auto& [name, code] : codes) code = next++;
        a.labels.clear();
        for (const auto& s : raw) a.labels.push_back(codes.at(s));
    }
    return a;
}

}  // namespace kpod
