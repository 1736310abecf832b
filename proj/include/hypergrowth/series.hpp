#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hypergrowth/errors.hpp"

namespace hypergrowth {

/// One sample of an observed quantity. Times are calendar years as real
/// numbers; BC dates are negative, and there is no year zero.
struct TimeValue {
    double t = 0.0;
    double value = 0.0;
};

enum class Quantity { gdp, population, gdp_per_capita };

inline const char* to_token(Quantity q) {
    switch (q) {
        case Quantity::gdp: return "GDP";
        case Quantity::population: return "population";
        case Quantity::gdp_per_capita: return "GDP_per_capita";
    }
    return "unknown";
}

inline std::optional<Quantity> quantity_from_token(std::string_view token) {
    if (token == "GDP") return Quantity::gdp;
    if (token == "population") return Quantity::population;
    if (token == "GDP_per_capita") return Quantity::gdp_per_capita;
    return std::nullopt;
}

/// Inclusive year window.
struct Window {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double t) const { return t >= lo && t <= hi; }
};

inline Window make_window(double lo, double hi) {
    if (!(lo <= hi)) {
        raise(ErrorKind::invalid_argument,
              "window bounds out of order: lo=" + std::to_string(lo) + " hi=" + std::to_string(hi));
    }
    return Window{lo, hi};
}

/// One region's observed quantity over historical time. Points are kept
/// sorted by year with strictly positive values.
struct TimeSeries {
    std::string region;
    Quantity quantity = Quantity::gdp;
    std::string unit;
    std::vector<TimeValue> points;
};

inline void validate_series(const TimeSeries& series) {
    if (series.points.empty()) {
        raise(ErrorKind::insufficient_data, "series '" + series.region + "' has no points");
    }
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const TimeValue& p = series.points[i];
        if (!std::isfinite(p.t)) {
            raise(ErrorKind::parse_error, "series '" + series.region + "' has a non-finite year");
        }
        if (!(p.value > 0.0) || !std::isfinite(p.value)) {
            std::ostringstream os;
            os << "series '" << series.region << "' has a non-positive value " << p.value
               << " at year " << p.t;
            raise(ErrorKind::non_positive_value, os.str());
        }
        if (i > 0 && !(series.points[i - 1].t < p.t)) {
            std::ostringstream os;
            os << "series '" << series.region << "' has duplicate or unordered year " << p.t;
            raise(ErrorKind::duplicate_year, os.str());
        }
    }
}

/// Builds a validated series: points are sorted by year first, so callers may
/// pass observations in any order. Duplicate years and non-positive values
/// are rejected.
inline TimeSeries make_series(std::string region, Quantity quantity, std::string unit,
                              std::vector<TimeValue> points) {
    std::sort(points.begin(), points.end(),
              [](const TimeValue& a, const TimeValue& b) { return a.t < b.t; });
    TimeSeries series{std::move(region), quantity, std::move(unit), std::move(points)};
    validate_series(series);
    return series;
}

/// Points of `series` with years inside `window` (all points when no window).
inline std::vector<TimeValue> points_in_window(const TimeSeries& series,
                                               const std::optional<Window>& window) {
    if (!window) return series.points;
    std::vector<TimeValue> out;
    for (const TimeValue& p : series.points) {
        if (window->contains(p.t)) out.push_back(p);
    }
    return out;
}

/// Up to three series (GDP, population, GDP per capita) for one region.
struct RegionSeries {
    std::optional<TimeSeries> gdp;
    std::optional<TimeSeries> population;
    std::optional<TimeSeries> per_capita;

    const std::optional<TimeSeries>& by(Quantity q) const {
        switch (q) {
            case Quantity::gdp: return gdp;
            case Quantity::population: return population;
            case Quantity::gdp_per_capita: return per_capita;
        }
        return gdp;
    }

    std::optional<TimeSeries>& by(Quantity q) {
        switch (q) {
            case Quantity::gdp: return gdp;
            case Quantity::population: return population;
            case Quantity::gdp_per_capita: return per_capita;
        }
        return gdp;
    }

    std::size_t series_count() const {
        return (gdp ? 1u : 0u) + (population ? 1u : 0u) + (per_capita ? 1u : 0u);
    }
};

/// A set of regional series plus a provenance label (e.g. "maddison-2010").
/// The map keeps regions in lexicographic order, which every serializer and
/// report relies on for determinism.
struct RegionalDataset {
    std::map<std::string, RegionSeries> regions;
    std::string provenance;

    const TimeSeries* find(const std::string& region, Quantity q) const {
        auto it = regions.find(region);
        if (it == regions.end()) return nullptr;
        const std::optional<TimeSeries>& s = it->second.by(q);
        return s ? &*s : nullptr;
    }
};

}  // namespace hypergrowth
