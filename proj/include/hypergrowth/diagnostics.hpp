#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

#include "hypergrowth/fitting.hpp"
#include "hypergrowth/models.hpp"
#include "hypergrowth/series.hpp"

namespace hypergrowth {

// Default thresholds. A takeoff candidate needs at least a tripling of the
// local relative growth rate after a below-median first half of the record;
// a departure needs a sustained signed deviation beyond 5% for 3+ points.
inline constexpr double kDefaultTakeoffJumpRatio = 3.0;
inline constexpr double kDefaultMinFlatFraction = 0.5;
inline constexpr double kSlopeFloor = 1e-12;  // per year, avoids 0/0 on flat segments
inline constexpr double kDefaultDepartureTolerance = 0.05;
inline constexpr std::size_t kDefaultDepartureRunLength = 3;
inline constexpr double kDefaultSemilogLinearTolerance = 1e-8;

enum class Monotonicity { monotone_increasing, not_monotone };

struct MonotonicityReport {
    Monotonicity verdict = Monotonicity::monotone_increasing;
    std::vector<double> violation_years;  // every t_i with v_i <= v_{i-1}
};

/// Lists every year whose value fails to exceed its predecessor.
inline MonotonicityReport check_monotonic(const TimeSeries& series) {
    validate_series(series);
    MonotonicityReport report;
    for (std::size_t i = 1; i < series.points.size(); ++i) {
        if (series.points[i].value <= series.points[i - 1].value) {
            report.violation_years.push_back(series.points[i].t);
        }
    }
    report.verdict = report.violation_years.empty() ? Monotonicity::monotone_increasing
                                                    : Monotonicity::not_monotone;
    return report;
}

enum class TakeoffVerdict { none, candidate };

struct TakeoffScanReport {
    TakeoffVerdict verdict = TakeoffVerdict::none;
    std::optional<double> candidate_time;
    std::vector<TimeValue> profile;      // (interval midpoint, local log-slope per year)
    double max_adjacent_rate_jump = 0.0; // over gate-eligible interval pairs
    double jump_ratio_threshold = kDefaultTakeoffJumpRatio;
    double min_flat_fraction = kDefaultMinFlatFraction;
};

/// Scans for a discontinuity-like jump in the local relative growth rate.
///
/// Local log-slopes r_i = (ln v_{i+1} - ln v_i)/(t_{i+1} - t_i) are compared
/// between adjacent intervals. A candidate is flagged at the earliest point
/// where r_i / max(r_{i-1}, floor) >= jump_ratio AND the record up to that
/// point looks like a flat preamble: it spans at least min_flat_fraction of
/// the total time and every slope in it lies at or below the record median.
///
/// Smooth trajectories whose growth rate rises monotonically (hyperbolic and
/// modulated-hyperbolic samples) have strictly increasing interval slopes on
/// any grid, so the preamble condition only holds in the first half of the
/// record, where dense-enough sampling keeps adjacent ratios small. A flat
/// stretch joined to a steep segment trips the scan at the kink.
inline TakeoffScanReport scan_takeoff(const TimeSeries& series,
                                      double jump_ratio = kDefaultTakeoffJumpRatio,
                                      double min_flat_fraction = kDefaultMinFlatFraction) {
    validate_series(series);
    if (!(jump_ratio > 0.0)) {
        raise(ErrorKind::invalid_argument, "takeoff jump ratio must be positive");
    }
    if (!(min_flat_fraction >= 0.0 && min_flat_fraction < 1.0)) {
        raise(ErrorKind::invalid_argument, "min_flat_fraction must lie in [0, 1)");
    }
    const std::vector<TimeValue>& pts = series.points;
    if (pts.size() < 3) {
        std::ostringstream os;
        os << "takeoff scan needs at least 3 points (2 adjacent intervals), got " << pts.size();
        raise(ErrorKind::insufficient_data, os.str());
    }

    TakeoffScanReport report;
    report.jump_ratio_threshold = jump_ratio;
    report.min_flat_fraction = min_flat_fraction;

    std::vector<double> slopes;
    slopes.reserve(pts.size() - 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double dt = pts[i + 1].t - pts[i].t;
        const double slope = (std::log(pts[i + 1].value) - std::log(pts[i].value)) / dt;
        slopes.push_back(slope);
        report.profile.push_back({(pts[i].t + pts[i + 1].t) / 2.0, slope});
    }

    std::vector<double> sorted = slopes;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median =
        (m % 2 == 1) ? sorted[m / 2] : (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0;

    const double span = pts.back().t - pts.front().t;
    bool preamble_below_median = true;
    for (std::size_t i = 1; i < slopes.size(); ++i) {
        preamble_below_median = preamble_below_median && (slopes[i - 1] <= median);
        const bool flat_enough = (pts[i].t - pts.front().t) >= min_flat_fraction * span;
        if (!preamble_below_median || !flat_enough) continue;

        const double jump = slopes[i] / std::max(slopes[i - 1], kSlopeFloor);
        report.max_adjacent_rate_jump = std::max(report.max_adjacent_rate_jump, jump);
        if (report.verdict == TakeoffVerdict::none && jump >= jump_ratio) {
            report.verdict = TakeoffVerdict::candidate;
            report.candidate_time = pts[i].t;
        }
    }
    return report;
}

enum class DepartureDirection { above, below };

inline const char* to_string(DepartureDirection d) {
    return d == DepartureDirection::above ? "above" : "below";
}

struct DepartureReport {
    std::optional<double> departure_time;
    std::optional<DepartureDirection> direction;  // present iff departed
    std::size_t run_length = 0;                   // trailing qualifying points
    double residual_threshold = kDefaultDepartureTolerance;
};

/// Finds the earliest year from which every remaining residual stays beyond
/// `tolerance` with one common sign, provided the run is at least `min_run`
/// points long. Data that keeps returning to the trajectory does not depart.
template <GrowthCurve M>
DepartureReport detect_departure(const TimeSeries& series, const M& model,
                                 double tolerance = kDefaultDepartureTolerance,
                                 std::size_t min_run = kDefaultDepartureRunLength) {
    if (!(tolerance > 0.0)) {
        raise(ErrorKind::invalid_argument, "departure tolerance must be positive");
    }
    if (min_run < 2) {
        raise(ErrorKind::invalid_argument, "departure run length must be at least 2");
    }
    const std::vector<TimeValue> residuals = residual_series(series, model);

    DepartureReport report;
    report.residual_threshold = tolerance;
    const std::size_t n = residuals.size();
    std::size_t start = n;
    bool positive = false;
    for (std::size_t i = n; i-- > 0;) {
        const double r = residuals[i].value;
        if (std::fabs(r) <= tolerance) break;
        const bool pos = r > 0.0;
        if (start != n && pos != positive) break;
        positive = pos;
        start = i;
    }
    report.run_length = n - start;
    if (report.run_length >= min_run) {
        report.departure_time = residuals[start].t;
        report.direction = positive ? DepartureDirection::above : DepartureDirection::below;
    }
    return report;
}

enum class SemilogShape { convex_hyperbolic_like, affine_exponential_like, concave, mixed };

inline const char* to_string(SemilogShape s) {
    switch (s) {
        case SemilogShape::convex_hyperbolic_like: return "convex-hyperbolic-like";
        case SemilogShape::affine_exponential_like: return "affine-exponential-like";
        case SemilogShape::concave: return "concave";
        case SemilogShape::mixed: return "mixed";
    }
    return "unknown";
}

struct SemilogProfile {
    std::vector<TimeValue> points;              // (t, ln v)
    std::vector<TimeValue> second_derivatives;  // interior-point curvature of ln v
    double convexity_index = 0.0;               // minimum second derivative
    SemilogShape classification = SemilogShape::mixed;
};

/// Log-transforms the series and classifies its shape from three-point
/// finite-difference second derivatives (non-uniform grids supported).
/// Exponential data is affine here; hyperbolic data is strictly convex with
/// curvature k^2/(a - k*t)^2.
inline SemilogProfile semilog_profile(const TimeSeries& series,
                                      double linear_tolerance = kDefaultSemilogLinearTolerance) {
    validate_series(series);
    if (!(linear_tolerance >= 0.0)) {
        raise(ErrorKind::invalid_argument, "semilog linearity tolerance must be non-negative");
    }
    const std::vector<TimeValue>& pts = series.points;
    if (pts.size() < 3) {
        std::ostringstream os;
        os << "semilog profile needs at least 3 points, got " << pts.size();
        raise(ErrorKind::insufficient_data, os.str());
    }

    SemilogProfile profile;
    profile.points.reserve(pts.size());
    for (const TimeValue& p : pts) profile.points.push_back({p.t, std::log(p.value)});

    bool all_within = true;
    bool none_concave = true;
    bool none_convex = true;
    double min_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j + 1 < pts.size(); ++j) {
        const double t0 = profile.points[j - 1].t;
        const double t1 = profile.points[j].t;
        const double t2 = profile.points[j + 1].t;
        const double y0 = profile.points[j - 1].value;
        const double y1 = profile.points[j].value;
        const double y2 = profile.points[j + 1].value;
        const double d2 = 2.0 * (y0 / ((t1 - t0) * (t2 - t0)) - y1 / ((t1 - t0) * (t2 - t1)) +
                                 y2 / ((t2 - t0) * (t2 - t1)));
        profile.second_derivatives.push_back({t1, d2});
        min_d2 = std::min(min_d2, d2);
        all_within = all_within && std::fabs(d2) <= linear_tolerance;
        none_concave = none_concave && d2 >= -linear_tolerance;
        none_convex = none_convex && d2 <= linear_tolerance;
    }
    profile.convexity_index = min_d2;
    if (all_within) {
        profile.classification = SemilogShape::affine_exponential_like;
    } else if (none_concave) {
        profile.classification = SemilogShape::convex_hyperbolic_like;
    } else if (none_convex) {
        profile.classification = SemilogShape::concave;
    } else {
        profile.classification = SemilogShape::mixed;
    }
    return profile;
}

}  // namespace hypergrowth
