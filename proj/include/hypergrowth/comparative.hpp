#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hypergrowth/models.hpp"
#include "hypergrowth/series.hpp"

namespace hypergrowth {

inline constexpr double kDefaultMaxAlignmentRms = 0.25;       // log units
inline constexpr double kDefaultSingularityWindowYears = 60.0;

struct RatioRow {
    double year = 0.0;
    double richest = 0.0;
    double poorest = 0.0;
    double ratio = 1.0;  // richest / poorest, >= 1 by construction
};

namespace detail {

/// year -> values of all regions reporting that exact year.
inline std::map<double, std::vector<double>> values_by_year(const RegionalDataset& dataset,
                                                            Quantity quantity) {
    std::map<double, std::vector<double>> table;
    for (const auto& [name, rs] : dataset.regions) {
        const std::optional<TimeSeries>& series = rs.by(quantity);
        if (!series) continue;
        for (const TimeValue& p : series->points) {
            table[p.t].push_back(p.value);
        }
    }
    return table;
}

inline RatioRow ratio_row(double year, const std::vector<double>& values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return RatioRow{year, *hi, *lo, *hi / *lo};
}

}  // namespace detail

/// Richest/poorest value ratio at each requested year (exact year match, no
/// interpolation). Years with fewer than two reporting regions make the
/// request unanswerable and are reported together as year_unavailable.
inline std::vector<RatioRow> richest_poorest_ratio(const RegionalDataset& dataset,
                                                   Quantity quantity,
                                                   std::span<const double> years) {
    const auto table = detail::values_by_year(dataset, quantity);
    std::vector<double> sorted_years(years.begin(), years.end());
    std::sort(sorted_years.begin(), sorted_years.end());
    sorted_years.erase(std::unique(sorted_years.begin(), sorted_years.end()),
                       sorted_years.end());

    std::vector<double> missing;
    std::vector<RatioRow> rows;
    for (double year : sorted_years) {
        auto it = table.find(year);
        if (it == table.end() || it->second.size() < 2) {
            missing.push_back(year);
            continue;
        }
        rows.push_back(detail::ratio_row(year, it->second));
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "years without at least 2 reporting regions:";
        for (double y : missing) os << ' ' << y;
        raise(ErrorKind::year_unavailable, os.str());
    }
    return rows;
}

struct LogSpreadSeries {
    std::vector<TimeValue> spread;      // (year, max ln v - min ln v)
    std::vector<double> skipped_years;  // years with only one reporting region
};

/// Cross-region spread of ln(value) per year; exp(spread) is the
/// richest/poorest ratio. Years without a 2-region quorum are skipped and
/// listed, not errors.
inline LogSpreadSeries log_spread_series(const RegionalDataset& dataset, Quantity quantity) {
    LogSpreadSeries out;
    for (const auto& [year, values] : detail::values_by_year(dataset, quantity)) {
        if (values.size() < 2) {
            out.skipped_years.push_back(year);
            continue;
        }
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        out.spread.push_back({year, std::log(*hi) - std::log(*lo)});
    }
    return out;
}

struct LagRange {
    double lo = -200.0;
    double hi = 200.0;
    double step = 1.0;
};

struct Alignment {
    double lag = 0.0;               // years the series trails the reference trajectory
    double rms_log_residual = 0.0;  // minimized objective
    std::size_t points_used = 0;
};

/// Grid search for the time shift that best overlays `series` onto the
/// reference trajectory: best_lag = argmin RMS of ln(v_i) - ln(model(t_i - lag)),
/// evaluated over the points the shifted model can reach. Lags that leave
/// fewer than half the points in-domain are not considered.
inline Alignment align_by_lag(const ModulatedHyperbolicModel& reference, const TimeSeries& series,
                              LagRange range = {}) {
    validate_series(series);
    if (!(range.step > 0.0) || !(range.lo <= range.hi)) {
        raise(ErrorKind::invalid_argument, "lag range must be ordered with a positive step");
    }
    const std::vector<TimeValue>& pts = series.points;
    const std::size_t quorum = (pts.size() + 1) / 2;

    const auto steps =
        static_cast<std::size_t>(std::floor((range.hi - range.lo) / range.step + 1e-9));
    bool found = false;
    Alignment best;
    for (std::size_t s = 0; s <= steps; ++s) {
        const double lag = range.lo + static_cast<double>(s) * range.step;
        double acc = 0.0;
        std::size_t used = 0;
        for (const TimeValue& p : pts) {
            const double shifted = p.t - lag;
            if (!reference.in_domain(shifted)) continue;
            const double d = std::log(p.value) - std::log(reference.value(shifted));
            acc += d * d;
            ++used;
        }
        if (used < quorum) continue;
        const double rms = std::sqrt(acc / static_cast<double>(used));
        if (!found || rms < best.rms_log_residual) {
            found = true;
            best = Alignment{lag, rms, used};
        }
    }
    if (!found) {
        std::ostringstream os;
        os << "no lag in [" << range.lo << ", " << range.hi << "] keeps at least half of '"
           << series.region << "' inside the reference domain";
        raise(ErrorKind::no_valid_lag, os.str());
    }
    return best;
}

struct DivergenceThresholds {
    double max_alignment_rms = kDefaultMaxAlignmentRms;
    double singularity_window_years = kDefaultSingularityWindowYears;
    LagRange lag_range = {};
    std::optional<std::string> reference_region;  // default: largest fitted terminal value
};

enum class DivergenceVerdict { divergent, non_divergent_level_shifted };

inline const char* to_string(DivergenceVerdict v) {
    return v == DivergenceVerdict::divergent ? "divergent" : "non-divergent-level-shifted";
}

struct DivergenceReport {
    struct LagEntry {
        std::string region;
        double lag = 0.0;
        double rms_log_residual = 0.0;
    };

    std::vector<RatioRow> ratio_series;        // every year with a 2-region quorum
    std::vector<TimeValue> spread_series;      // log spread per quorum year
    std::vector<double> spread_skipped_years;
    std::map<std::string, double> terminal_gradients;  // last-interval log-slope per year
    std::map<std::string, std::optional<double>> singularity_times;
    std::vector<LagEntry> lag_table;           // against the reference region, sorted
    std::string reference_region;
    DivergenceVerdict verdict = DivergenceVerdict::divergent;
    DivergenceThresholds thresholds;
};

/// Decides whether the regions follow one trajectory at different levels of
/// development or genuinely distinct trajectories. Non-divergent requires
/// (i) every region's series aligns onto the reference region's fitted
/// trajectory within max_alignment_rms under some time lag, and (ii) all
/// fitted singularity times sit inside one window. Everything that fed the
/// verdict is included in the report regardless of the outcome.
inline DivergenceReport divergence_verdict(
    const RegionalDataset& dataset,
    const std::map<std::string, ModulatedHyperbolicModel>& fits,
    DivergenceThresholds thresholds = {}, Quantity quantity = Quantity::gdp_per_capita) {
    std::vector<std::string> names;
    for (const auto& [name, model] : fits) {
        if (dataset.find(name, quantity) != nullptr) names.push_back(name);
    }
    if (names.size() < 2) {
        raise(ErrorKind::quorum, "divergence verdict needs at least 2 regions with both data and fits");
    }

    DivergenceReport report;
    report.thresholds = thresholds;

    // Reference: caller override, else the region whose fitted trajectory is
    // furthest ahead at its own last observation.
    if (thresholds.reference_region) {
        report.reference_region = *thresholds.reference_region;
        if (std::find(names.begin(), names.end(), report.reference_region) == names.end()) {
            raise(ErrorKind::unknown_region,
                  "reference region '" + report.reference_region + "' has no data and fit");
        }
    } else {
        double best_value = -std::numeric_limits<double>::infinity();
        for (const std::string& name : names) {
            const TimeSeries* series = dataset.find(name, quantity);
            const ModulatedHyperbolicModel& model = fits.at(name);
            const TimeValue& last = series->points.back();
            const double terminal =
                model.in_domain(last.t) ? model.value(last.t) : last.value;
            if (terminal > best_value) {
                best_value = terminal;
                report.reference_region = name;
            }
        }
    }
    const ModulatedHyperbolicModel& reference = fits.at(report.reference_region);

    bool aligned_everywhere = true;
    for (const std::string& name : names) {
        const TimeSeries* series = dataset.find(name, quantity);
        Alignment a = align_by_lag(reference, *series, thresholds.lag_range);
        report.lag_table.push_back({name, a.lag, a.rms_log_residual});
        aligned_everywhere = aligned_everywhere && a.rms_log_residual <= thresholds.max_alignment_rms;

        report.singularity_times[name] = fits.at(name).singularity_time();
        if (series->points.size() >= 2) {
            const TimeValue& p1 = series->points[series->points.size() - 2];
            const TimeValue& p2 = series->points.back();
            report.terminal_gradients[name] =
                (std::log(p2.value) - std::log(p1.value)) / (p2.t - p1.t);
        }
    }

    bool singularities_clustered = true;
    double sing_lo = std::numeric_limits<double>::infinity();
    double sing_hi = -std::numeric_limits<double>::infinity();
    for (const auto& [name, sing] : report.singularity_times) {
        if (!sing) {
            singularities_clustered = false;
            break;
        }
        sing_lo = std::min(sing_lo, *sing);
        sing_hi = std::max(sing_hi, *sing);
    }
    if (singularities_clustered) {
        singularities_clustered = (sing_hi - sing_lo) <= thresholds.singularity_window_years;
    }

    report.verdict = (aligned_everywhere && singularities_clustered)
                         ? DivergenceVerdict::non_divergent_level_shifted
                         : DivergenceVerdict::divergent;

    // Ratio and spread series over every year with a quorum.
    for (const auto& [year, values] : detail::values_by_year(dataset, quantity)) {
        if (values.size() < 2) {
            report.spread_skipped_years.push_back(year);
            continue;
        }
        report.ratio_series.push_back(detail::ratio_row(year, values));
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        report.spread_series.push_back({year, std::log(*hi) - std::log(*lo)});
    }
    return report;
}

}  // namespace hypergrowth
