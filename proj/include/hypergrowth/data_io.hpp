#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hypergrowth/series.hpp"

namespace hypergrowth {

inline constexpr const char* kDatasetSchemaVersion = "hypergrowth/1";
inline constexpr int kYearMin = -10000;
inline constexpr int kYearMax = 2100;

enum class CsvLayout { maddison_horizontal, tidy };

/// How to read a CSV file. `region_columns` empty means every non-year
/// column; `year_column` empty means the first column (horizontal) or the
/// column named "year" (tidy).
struct IngestManifest {
    std::string source_path;  // for error messages/provenance only
    CsvLayout layout = CsvLayout::maddison_horizontal;
    Quantity quantity = Quantity::gdp_per_capita;  // horizontal layout only
    std::string unit;                              // horizontal layout only
    std::vector<std::string> region_columns;
    std::string year_column;
    std::string provenance;
};

struct SkippedCell {
    std::size_t row = 0;     // 1-based, header included
    std::size_t column = 0;  // 1-based
    std::string content;
};

struct IngestResult {
    RegionalDataset dataset;
    std::size_t skipped_cells = 0;
    std::vector<SkippedCell> skipped;
    std::size_t candidate_cells = 0;  // emitted points + skipped_cells == candidate_cells
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Splits one CSV record. Double-quoted fields may contain commas and ""
/// escapes; unquoted fields are trimmed.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"' && trim(cell).empty() && !was_quoted) {
            quoted = true;
            was_quoted = true;
            cell.clear();
        } else if (c == ',') {
            cells.push_back(was_quoted ? cell : trim(cell));
            cell.clear();
            was_quoted = false;
        } else {
            cell += c;
        }
    }
    cells.push_back(was_quoted ? cell : trim(cell));
    return cells;
}

inline std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lines.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);  // UTF-8 BOM from spreadsheet exports
        }
        lines.push_back(line);
    }
    return lines;
}

/// Strict integer year in [-10000, 2100]; there is no year zero.
inline int parse_year(const std::string& cell, std::size_t row) {
    const std::string token = trim(cell);
    if (token.empty()) {
        raise(ErrorKind::parse_error, "row " + std::to_string(row) + ": empty year cell");
    }
    char* end = nullptr;
    const long value = std::strtol(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0') {
        raise(ErrorKind::parse_error,
              "row " + std::to_string(row) + ": year '" + token + "' is not an integer");
    }
    if (value < kYearMin || value > kYearMax) {
        raise(ErrorKind::parse_error, "row " + std::to_string(row) + ": year " +
                                          std::to_string(value) + " outside [-10000, 2100]");
    }
    if (value == 0) {
        raise(ErrorKind::parse_error,
              "row " + std::to_string(row) + ": there is no year zero in the calendar");
    }
    return static_cast<int>(value);
}

/// Numeric cell parse. Blank or non-numeric -> nullopt (the caller records a
/// skip); parseable but non-positive/non-finite is a fatal error. Grouping
/// spaces and (in quoted cells) commas are stripped first.
inline std::optional<double> parse_value(const std::string& cell, std::size_t row,
                                         std::size_t column) {
    std::string token;
    for (char c : cell) {
        if (c == ' ' || c == ',' || c == '\t') continue;
        token += c;
    }
    if (token.empty()) return std::nullopt;
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') return std::nullopt;
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "row " << row << " column " << column << ": non-positive value " << token;
        raise(ErrorKind::non_positive_value, os.str());
    }
    return value;
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline void reject_control_chars(const std::string& label, const char* what) {
    for (char c : label) {
        if (c == '\n' || c == '\r') {
            raise(ErrorKind::invalid_argument,
                  std::string(what) + " must not contain line breaks");
        }
    }
}

inline std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                               const char* what) {
    const std::string want = lower(trim(name));
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (lower(header[i]) == want) return i;
    }
    raise(ErrorKind::parse_error, std::string("header has no ") + what + " column '" + name + "'");
}

/// Column reference by header name, or by 1-based index when the reference
/// is a plain integer that names no column.
inline std::size_t find_column_or_index(const std::vector<std::string>& header,
                                        const std::string& reference, const char* what) {
    const std::string want = lower(trim(reference));
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (lower(header[i]) == want) return i;
    }
    char* end = nullptr;
    const long index = std::strtol(want.c_str(), &end, 10);
    if (end != want.c_str() && *end == '\0' && index >= 1 &&
        static_cast<std::size_t>(index) <= header.size()) {
        return static_cast<std::size_t>(index - 1);
    }
    raise(ErrorKind::parse_error, std::string("header has no ") + what + " column '" + reference +
                                      "' and it is not a valid column index");
}

}  // namespace detail

/// Maddison-style horizontal layout: first column years, one column per
/// region, blank cells allowed. Produces one series per region that has at
/// least one retained cell.
inline IngestResult ingest_horizontal(std::istream& in, const IngestManifest& manifest) {
    const std::vector<std::string> lines = detail::read_lines(in);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) {
        raise(ErrorKind::parse_error, manifest.source_path + ": no header row");
    }
    const std::vector<std::string> header = detail::split_csv_line(lines[first]);
    if (header.size() < 2) {
        raise(ErrorKind::parse_error, manifest.source_path + ": header needs a year column and at least one region column");
    }

    std::size_t year_col = 0;
    if (!manifest.year_column.empty()) {
        year_col = detail::find_column_or_index(header, manifest.year_column, "year");
    }
    std::vector<std::size_t> region_cols;
    if (manifest.region_columns.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c != year_col && !header[c].empty()) region_cols.push_back(c);
        }
    } else {
        for (const std::string& name : manifest.region_columns) {
            region_cols.push_back(detail::find_column(header, name, "region"));
        }
    }
    if (region_cols.empty()) {
        raise(ErrorKind::parse_error, manifest.source_path + ": no region columns selected");
    }

    IngestResult result;
    result.dataset.provenance = manifest.provenance;
    std::map<std::size_t, std::vector<TimeValue>> points_by_col;
    std::set<int> seen_years;
    for (std::size_t li = first + 1; li < lines.size(); ++li) {
        const std::size_t row = li + 1;  // 1-based, header included
        if (detail::trim(lines[li]).empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(lines[li]);
        if (cells.size() <= year_col) {
            raise(ErrorKind::parse_error,
                  "row " + std::to_string(row) + ": missing year column");
        }
        const int year = detail::parse_year(cells[year_col], row);
        if (!seen_years.insert(year).second) {
            raise(ErrorKind::duplicate_year,
                  "row " + std::to_string(row) + ": duplicate year " + std::to_string(year));
        }
        for (std::size_t c : region_cols) {
            const std::string cell = c < cells.size() ? cells[c] : std::string();
            ++result.candidate_cells;
            const std::optional<double> value = detail::parse_value(cell, row, c + 1);
            if (!value) {
                ++result.skipped_cells;
                result.skipped.push_back({row, c + 1, cell});
                continue;
            }
            points_by_col[c].push_back({static_cast<double>(year), *value});
        }
    }

    for (const auto& [col, points] : points_by_col) {
        const std::string& region = header[col];
        TimeSeries series = make_series(region, manifest.quantity, manifest.unit, points);
        result.dataset.regions[region].by(manifest.quantity) = std::move(series);
    }
    if (result.dataset.regions.empty()) {
        raise(ErrorKind::parse_error, manifest.source_path + ": no data rows with usable cells");
    }
    return result;
}

/// Tidy layout: columns (region, year, quantity, value, unit). Rows group
/// into one series per (region, quantity); each quantity must use a single
/// unit across the whole file.
inline IngestResult ingest_tidy(std::istream& in, const IngestManifest& manifest) {
    const std::vector<std::string> lines = detail::read_lines(in);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) {
        raise(ErrorKind::parse_error, manifest.source_path + ": no header row");
    }
    const std::vector<std::string> header = detail::split_csv_line(lines[first]);
    const std::size_t region_col = detail::find_column(header, "region", "region");
    const std::size_t year_col = detail::find_column(
        header, manifest.year_column.empty() ? "year" : manifest.year_column, "year");
    const std::size_t quantity_col = detail::find_column(header, "quantity", "quantity");
    const std::size_t value_col = detail::find_column(header, "value", "value");
    const std::size_t unit_col = detail::find_column(header, "unit", "unit");

    IngestResult result;
    result.dataset.provenance = manifest.provenance;
    std::map<Quantity, std::string> unit_by_quantity;
    std::map<std::pair<std::string, Quantity>, std::map<int, double>> grouped;
    std::map<std::pair<std::string, Quantity>, std::string> unit_of_group;

    for (std::size_t li = first + 1; li < lines.size(); ++li) {
        const std::size_t row = li + 1;
        if (detail::trim(lines[li]).empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(lines[li]);
        const std::size_t need =
            std::max({region_col, year_col, quantity_col, value_col, unit_col});
        if (cells.size() <= need) {
            raise(ErrorKind::parse_error,
                  "row " + std::to_string(row) + ": expected " + std::to_string(need + 1) +
                      " columns, got " + std::to_string(cells.size()));
        }
        const std::string region = cells[region_col];
        if (region.empty()) {
            raise(ErrorKind::parse_error, "row " + std::to_string(row) + ": empty region");
        }
        const std::optional<Quantity> quantity = quantity_from_token(cells[quantity_col]);
        if (!quantity) {
            raise(ErrorKind::parse_error,
                  "row " + std::to_string(row) + ": unknown quantity '" + cells[quantity_col] +
                      "' (expected GDP, population or GDP_per_capita)");
        }
        const std::string unit = cells[unit_col];
        auto [it, inserted] = unit_by_quantity.emplace(*quantity, unit);
        if (!inserted && it->second != unit) {
            raise(ErrorKind::unit_mismatch, std::string("conflicting units for ") +
                                                to_token(*quantity) + ": '" + it->second +
                                                "' vs '" + unit + "'");
        }

        const int year = detail::parse_year(cells[year_col], row);
        ++result.candidate_cells;
        const std::optional<double> value = detail::parse_value(cells[value_col], row, value_col + 1);
        if (!value) {
            ++result.skipped_cells;
            result.skipped.push_back({row, value_col + 1, cells[value_col]});
            continue;
        }
        auto key = std::make_pair(region, *quantity);
        auto [pit, fresh] = grouped[key].emplace(year, *value);
        (void)pit;
        if (!fresh) {
            raise(ErrorKind::duplicate_year, "row " + std::to_string(row) + ": duplicate year " +
                                                 std::to_string(year) + " for region '" + region +
                                                 "' quantity " + to_token(*quantity));
        }
        unit_of_group[key] = unit;
    }

    for (const auto& [key, points_map] : grouped) {
        std::vector<TimeValue> points;
        points.reserve(points_map.size());
        for (const auto& [year, value] : points_map) {
            points.push_back({static_cast<double>(year), value});
        }
        TimeSeries series = make_series(key.first, key.second, unit_of_group[key], points);
        result.dataset.regions[key.first].by(key.second) = std::move(series);
    }
    if (result.dataset.regions.empty()) {
        raise(ErrorKind::parse_error, manifest.source_path + ": no data rows with usable cells");
    }
    return result;
}

inline IngestResult ingest_csv(std::istream& in, const IngestManifest& manifest) {
    return manifest.layout == CsvLayout::maddison_horizontal ? ingest_horizontal(in, manifest)
                                                             : ingest_tidy(in, manifest);
}

inline IngestResult ingest_csv_file(const std::string& path, IngestManifest manifest) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorKind::io_error, "cannot open '" + path + "' for reading");
    }
    manifest.source_path = path;
    if (manifest.provenance.empty()) manifest.provenance = path;
    return ingest_csv(in, manifest);
}

/// Merges `fragment` into `target`. The same (region, quantity) pair may not
/// be supplied twice.
inline void merge_dataset(RegionalDataset& target, RegionalDataset fragment) {
    for (auto& [name, rs] : fragment.regions) {
        RegionSeries& dst = target.regions[name];
        for (Quantity q : {Quantity::gdp, Quantity::population, Quantity::gdp_per_capita}) {
            std::optional<TimeSeries>& src = rs.by(q);
            if (!src) continue;
            if (dst.by(q)) {
                raise(ErrorKind::duplicate_series, "dataset already has " +
                                                       std::string(to_token(q)) + " for region '" +
                                                       name + "'");
            }
            dst.by(q) = std::move(src);
        }
    }
    if (target.provenance.empty()) target.provenance = fragment.provenance;
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

inline std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

/// Shortest-exact decimal for a double is overkill here; 17 significant
/// digits round-trip every IEEE-754 double bit-exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

inline double parse_double_strict(const std::string& token, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        raise(ErrorKind::parse_error, std::string("malformed ") + what + " '" + token + "'");
    }
    return v;
}

}  // namespace detail

/// Writes the normalized dataset document:
///
///   hypergrowth/1
///   provenance <label>
///   regions <count>
///   region <name>
///   series <count-in-region>
///   quantity <GDP|population|GDP_per_capita>
///   unit <label>
///   points <count>
///   <t> <v>            (17 significant digits, bit-exact round trip)
///   ...
///   checksum <16 hex>  (FNV-1a 64 over every preceding byte)
///
/// Regions are written in lexicographic order and series in the fixed order
/// GDP, population, GDP_per_capita, so equal datasets serialize to equal
/// bytes.
inline void save_dataset(const RegionalDataset& dataset, std::ostream& out) {
    if (dataset.regions.empty()) {
        raise(ErrorKind::invalid_argument, "refusing to save a dataset with no regions");
    }
    detail::reject_control_chars(dataset.provenance, "provenance");

    std::ostringstream body;
    body << kDatasetSchemaVersion << '\n';
    body << "provenance " << dataset.provenance << '\n';
    body << "regions " << dataset.regions.size() << '\n';
    for (const auto& [name, rs] : dataset.regions) {
        detail::reject_control_chars(name, "region name");
        if (rs.series_count() == 0) {
            raise(ErrorKind::invalid_argument, "region '" + name + "' has no series");
        }
        body << "region " << name << '\n';
        body << "series " << rs.series_count() << '\n';
        for (Quantity q : {Quantity::gdp, Quantity::population, Quantity::gdp_per_capita}) {
            const std::optional<TimeSeries>& series = rs.by(q);
            if (!series) continue;
            validate_series(*series);
            detail::reject_control_chars(series->unit, "unit");
            body << "quantity " << to_token(q) << '\n';
            body << "unit " << series->unit << '\n';
            body << "points " << series->points.size() << '\n';
            for (const TimeValue& p : series->points) {
                body << detail::format_double(p.t) << ' ' << detail::format_double(p.value)
                     << '\n';
            }
        }
    }
    const std::string text = body.str();
    out << text << "checksum " << detail::hex64(detail::fnv1a64(text)) << '\n';
}

inline void save_dataset_file(const RegionalDataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorKind::io_error, "cannot open '" + path + "' for writing");
    }
    save_dataset(dataset, out);
    if (!out) {
        raise(ErrorKind::io_error, "failed writing '" + path + "'");
    }
}

inline RegionalDataset load_dataset(std::istream& in) {
    std::ostringstream all;
    all << in.rdbuf();
    const std::string text = all.str();

    const std::size_t marker = text.rfind("checksum ");
    if (marker == std::string::npos || (marker != 0 && text[marker - 1] != '\n')) {
        raise(ErrorKind::corrupt_file, "dataset document has no checksum line");
    }
    const std::string_view prefix = std::string_view(text).substr(0, marker);
    std::string checksum_line = text.substr(marker);
    while (!checksum_line.empty() &&
           (checksum_line.back() == '\n' || checksum_line.back() == '\r')) {
        checksum_line.pop_back();
    }
    const std::string expected = "checksum " + detail::hex64(detail::fnv1a64(prefix));
    // Schema line is checked before the checksum so that a well-formed file
    // of a future schema reports the version problem, not a hash problem.
    std::istringstream lines{text};
    std::string line;
    if (!std::getline(lines, line)) {
        raise(ErrorKind::corrupt_file, "empty dataset document");
    }
    if (line != kDatasetSchemaVersion) {
        raise(ErrorKind::schema_version_mismatch,
              "expected schema '" + std::string(kDatasetSchemaVersion) + "', found '" + line + "'");
    }
    if (checksum_line != expected) {
        raise(ErrorKind::corrupt_file, "dataset checksum mismatch");
    }

    auto next_line = [&](const char* what) {
        std::string l;
        if (!std::getline(lines, l)) {
            raise(ErrorKind::parse_error, std::string("dataset document truncated before ") + what);
        }
        return l;
    };
    auto expect_keyword = [&](const std::string& l, const std::string& keyword,
                              const char* what) -> std::string {
        if (l.rfind(keyword + " ", 0) == 0) return l.substr(keyword.size() + 1);
        if (l == keyword) return std::string();
        raise(ErrorKind::parse_error,
              std::string("expected '") + keyword + "' line for " + what + ", found '" + l + "'");
    };
    auto parse_count = [&](const std::string& token, const char* what) {
        char* end = nullptr;
        const long v = std::strtol(token.c_str(), &end, 10);
        if (end == token.c_str() || *end != '\0' || v < 0) {
            raise(ErrorKind::parse_error, std::string("malformed ") + what + " count '" + token + "'");
        }
        return static_cast<std::size_t>(v);
    };

    RegionalDataset dataset;
    dataset.provenance = expect_keyword(next_line("provenance"), "provenance", "provenance");
    const std::size_t region_count =
        parse_count(expect_keyword(next_line("regions"), "regions", "region count"), "region");
    if (region_count == 0) {
        raise(ErrorKind::parse_error, "dataset document declares zero regions");
    }
    for (std::size_t r = 0; r < region_count; ++r) {
        const std::string region =
            expect_keyword(next_line("region"), "region", "region name");
        if (region.empty()) {
            raise(ErrorKind::parse_error, "empty region name");
        }
        if (dataset.regions.count(region) != 0) {
            raise(ErrorKind::parse_error, "region '" + region + "' appears twice");
        }
        const std::size_t series_count =
            parse_count(expect_keyword(next_line("series"), "series", "series count"), "series");
        if (series_count == 0 || series_count > 3) {
            raise(ErrorKind::parse_error,
                  "region '" + region + "' declares " + std::to_string(series_count) + " series");
        }
        RegionSeries& rs = dataset.regions[region];
        for (std::size_t s = 0; s < series_count; ++s) {
            const std::string qtoken =
                expect_keyword(next_line("quantity"), "quantity", "quantity");
            const std::optional<Quantity> quantity = quantity_from_token(qtoken);
            if (!quantity) {
                raise(ErrorKind::parse_error, "unknown quantity '" + qtoken + "'");
            }
            if (rs.by(*quantity)) {
                raise(ErrorKind::duplicate_series,
                      "region '" + region + "' declares " + qtoken + " twice");
            }
            const std::string unit = expect_keyword(next_line("unit"), "unit", "unit");
            const std::size_t point_count =
                parse_count(expect_keyword(next_line("points"), "points", "point count"), "point");
            std::vector<TimeValue> points;
            points.reserve(point_count);
            for (std::size_t i = 0; i < point_count; ++i) {
                const std::string pl = next_line("point");
                const std::size_t space = pl.find(' ');
                if (space == std::string::npos) {
                    raise(ErrorKind::parse_error, "malformed point line '" + pl + "'");
                }
                points.push_back({detail::parse_double_strict(pl.substr(0, space), "year"),
                                  detail::parse_double_strict(pl.substr(space + 1), "value")});
            }
            rs.by(*quantity) = make_series(region, *quantity, unit, std::move(points));
        }
    }
    const std::string tail = next_line("checksum");
    if (tail.rfind("checksum ", 0) != 0) {
        raise(ErrorKind::parse_error, "trailing content before checksum line");
    }
    return dataset;
}

inline RegionalDataset load_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::io_error, "cannot open '" + path + "' for reading");
    }
    return load_dataset(in);
}

}  // namespace hypergrowth
