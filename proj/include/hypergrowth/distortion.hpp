#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "hypergrowth/models.hpp"
#include "hypergrowth/series.hpp"

namespace hypergrowth {

inline constexpr std::size_t kDefaultDensePlotPoints = 512;

/// Straight-line interpolation through ordered knots: the "sample a smooth
/// curve at a few abscissae and join the dots" construction.
class PiecewiseLinearCurve {
public:
    explicit PiecewiseLinearCurve(std::vector<TimeValue> knots) : knots_(std::move(knots)) {
        if (knots_.size() < 2) {
            raise(ErrorKind::bad_grid, "a polyline needs at least 2 knots");
        }
        for (std::size_t i = 1; i < knots_.size(); ++i) {
            if (!(knots_[i - 1].t < knots_[i].t)) {
                std::ostringstream os;
                os << "polyline knots must be strictly increasing in x; offending x = "
                   << knots_[i].t;
                raise(ErrorKind::bad_grid, os.str());
            }
        }
    }

    const std::vector<TimeValue>& knots() const { return knots_; }
    std::size_t segment_count() const { return knots_.size() - 1; }

    bool in_domain(double x) const { return x >= knots_.front().t && x <= knots_.back().t; }

    /// Linear interpolation; evaluation at a knot returns its y exactly.
    double value(double x) const {
        if (!in_domain(x)) {
            std::ostringstream os;
            os << "x = " << x << " lies outside the knot span [" << knots_.front().t << ", "
               << knots_.back().t << "]";
            raise(ErrorKind::out_of_span, os.str());
        }
        auto hi = std::lower_bound(knots_.begin(), knots_.end(), x,
                                   [](const TimeValue& knot, double v) { return knot.t < v; });
        if (hi != knots_.end() && hi->t == x) return hi->value;
        auto lo = hi - 1;
        const double slope = (hi->value - lo->value) / (hi->t - lo->t);
        return lo->value + (x - lo->t) * slope;
    }

    double segment_slope(std::size_t i) const {
        const TimeValue& a = knots_[i];
        const TimeValue& b = knots_[i + 1];
        return (b.value - a.value) / (b.t - a.t);
    }

private:
    std::vector<TimeValue> knots_;
};

/// Evaluates `curve` at each sample abscissa and joins the values with
/// straight lines. The knots lie exactly on the curve; everything between
/// them is the distortion.
template <GrowthCurve C>
PiecewiseLinearCurve sample_and_join(const C& curve, std::span<const double> sample_xs) {
    if (sample_xs.size() < 2) {
        raise(ErrorKind::bad_grid, "sample grid needs at least 2 abscissae");
    }
    for (std::size_t i = 1; i < sample_xs.size(); ++i) {
        if (!(sample_xs[i - 1] < sample_xs[i])) {
            raise(ErrorKind::bad_grid, "sample grid must be strictly increasing");
        }
    }
    std::vector<TimeValue> knots;
    knots.reserve(sample_xs.size());
    for (double x : sample_xs) {
        knots.push_back({x, curve.value(x)});
    }
    return PiecewiseLinearCurve(std::move(knots));
}

/// Ratio of the last segment's slope to the first segment's: how much of a
/// "takeoff" the join manufactured. Collinear knots give 1; a zero first
/// slope before a rise gives +infinity.
inline double phantom_takeoff_index(const PiecewiseLinearCurve& curve) {
    if (curve.segment_count() < 2) {
        raise(ErrorKind::single_segment,
              "phantom takeoff index is undefined for a single straight segment");
    }
    const double first = curve.segment_slope(0);
    const double last = curve.segment_slope(curve.segment_count() - 1);
    if (first == 0.0) {
        if (last > 0.0) return std::numeric_limits<double>::infinity();
        if (last < 0.0) return -std::numeric_limits<double>::infinity();
        return 1.0;
    }
    return last / first;
}

/// Ratio of the family's value spread (max - min) at x_late to the spread at
/// x_early: how much "divergence" the joined curves display. An all-equal
/// family has no divergence; its index is 1 by convention.
inline double phantom_divergence_index(std::span<const PiecewiseLinearCurve> family,
                                       double x_early, double x_late) {
    if (family.size() < 2) {
        raise(ErrorKind::invalid_argument, "divergence index needs at least 2 curves");
    }
    auto spread = [&](double x) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const PiecewiseLinearCurve& c : family) {
            const double v = c.value(x);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi - lo;
    };
    const double early = spread(x_early);
    const double late = spread(x_late);
    if (early == 0.0) {
        return late > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    return late / early;
}

/// Smooth curves, their few-point caricatures, and the manufactured indices.
struct DistortionResult {
    std::vector<std::vector<TimeValue>> dense_originals;  // one fine-grid trace per curve
    std::vector<PiecewiseLinearCurve> distorted;
    std::vector<double> sample_xs;
    std::vector<double> phantom_takeoff_indices;  // per distorted curve
    double phantom_divergence = 1.0;              // spread(last x) / spread(first x)
};

/// Runs the whole demonstration: samples every model at `sample_xs`, joins
/// the samples with straight lines, quantifies the phantom takeoff of each
/// polyline and the phantom divergence of the family, and emits dense traces
/// of the originals for plotting. The dense grid runs from the first sample
/// abscissa to the family's common domain limit, stopping at the singularity
/// guard band.
inline DistortionResult distort_family(std::span<const ModulatedHyperbolicModel> models,
                                       std::vector<double> sample_xs,
                                       std::size_t dense_points = kDefaultDensePlotPoints) {
    if (models.size() < 2) {
        raise(ErrorKind::invalid_argument, "the distortion demo needs at least 2 curves");
    }
    if (dense_points < 2) {
        raise(ErrorKind::invalid_argument, "dense grid needs at least 2 points");
    }

    DistortionResult result;
    result.sample_xs = std::move(sample_xs);
    for (const ModulatedHyperbolicModel& m : models) {
        result.distorted.push_back(sample_and_join(m, std::span<const double>(result.sample_xs)));
        result.phantom_takeoff_indices.push_back(phantom_takeoff_index(result.distorted.back()));
    }
    result.phantom_divergence = phantom_divergence_index(
        std::span<const PiecewiseLinearCurve>(result.distorted), result.sample_xs.front(),
        result.sample_xs.back());

    double upper = std::numeric_limits<double>::infinity();
    for (const ModulatedHyperbolicModel& m : models) {
        upper = std::min(upper, m.domain_upper_bound());
    }
    const double lo = result.sample_xs.front();
    double hi;
    if (std::isfinite(upper)) {
        // Strictly inside every model's guard band, but never short of the
        // sampled span itself.
        hi = std::max(upper * (1.0 - 1e-12), result.sample_xs.back());
    } else {
        hi = result.sample_xs.back();
    }
    for (const ModulatedHyperbolicModel& m : models) {
        std::vector<TimeValue> trace;
        trace.reserve(dense_points);
        for (std::size_t i = 0; i < dense_points; ++i) {
            const double x =
                lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(dense_points - 1);
            trace.push_back({x, m.value(x)});
        }
        result.dense_originals.push_back(std::move(trace));
    }
    return result;
}

/// Default sample abscissae for the demonstration.
inline std::vector<double> default_demo_grid() { return {0.0, 150.0, 179.6}; }

/// Default demonstration trio: three modulated-hyperbolic curves that start
/// from approximately the same value at x = 0 (within 2%), increase
/// monotonically, and blow up within a few units of each other. Their
/// three-point caricatures nonetheless fan out into a manufactured
/// divergence with a kink at the middle abscissa. Parameters are
/// configuration, not constants; these are the shipped defaults.
inline std::vector<ModulatedHyperbolicModel> default_demo_models() {
    auto make = [](double start_value, double blowup_x) {
        const double ag = 1.0;
        const double kg = ag / blowup_x;
        const double ap = start_value * ag;
        const double kp = 0.3 * ap / blowup_x;  // numerator stays positive through blowup_x
        return ModulatedHyperbolicModel(ReciprocalLine{ap, kp}, ReciprocalLine{ag, kg});
    };
    return {make(1.00, 180.0), make(1.01, 180.5), make(0.99, 181.0)};
}

}  // namespace hypergrowth
