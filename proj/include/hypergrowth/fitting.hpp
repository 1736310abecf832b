#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "hypergrowth/models.hpp"
#include "hypergrowth/series.hpp"

namespace hypergrowth {

/// Result of a reciprocal-space least-squares fit of one hyperbola.
struct FitReport {
    HyperbolicModel model;
    Window window;                        // realized (first, last) in-window years
    double r_squared_reciprocal = 0.0;    // R^2 of the affine fit to 1/v, clamped to [0, 1]
    double rms_relative_residual = 0.0;   // RMS of (v_obs - v_fit)/v_fit over the window
    std::vector<TimeValue> residuals;     // per-point signed relative residuals
};

/// Same years, values replaced by their reciprocals. For data sampled from a
/// hyperbola the result lies on the straight line a - k*t.
inline std::vector<TimeValue> reciprocal_transform(const TimeSeries& series) {
    validate_series(series);
    std::vector<TimeValue> out;
    out.reserve(series.points.size());
    for (const TimeValue& p : series.points) {
        out.push_back({p.t, 1.0 / p.value});
    }
    return out;
}

namespace detail {

/// Ordinary least squares of y against t, returned as the declining-line
/// parameters of y = a - k*t. Exactly flat input short-circuits to the
/// constant line so constant series never pick up rounding noise.
inline ReciprocalLine reciprocal_ols(const std::vector<TimeValue>& pts) {
    const auto [y_min, y_max] =
        std::minmax_element(pts.begin(), pts.end(), [](const TimeValue& a, const TimeValue& b) {
            return a.value < b.value;
        });
    if (y_min->value == y_max->value) {
        return ReciprocalLine{y_min->value, 0.0};
    }

    const std::size_t n = pts.size();
    double t_mean = 0.0;
    double y_mean = 0.0;
    for (const TimeValue& p : pts) {
        t_mean += p.t;
        y_mean += p.value;
    }
    t_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);

    double stt = 0.0;
    double sty = 0.0;
    for (const TimeValue& p : pts) {
        const double dt = p.t - t_mean;
        stt += dt * dt;
        sty += dt * (p.value - y_mean);
    }
    const double slope = sty / stt;
    const double k = -slope;
    const double a = y_mean + k * t_mean;
    return ReciprocalLine{a, k};
}

inline double rms(const std::vector<TimeValue>& residuals) {
    if (residuals.empty()) return 0.0;
    double acc = 0.0;
    for (const TimeValue& r : residuals) acc += r.value * r.value;
    return std::sqrt(acc / static_cast<double>(residuals.size()));
}

}  // namespace detail

/// Signed relative residuals (v_obs - model(t)) / model(t), in input order.
template <GrowthCurve M>
std::vector<TimeValue> residual_series(const TimeSeries& series, const M& model) {
    validate_series(series);
    std::vector<TimeValue> out;
    out.reserve(series.points.size());
    for (const TimeValue& p : series.points) {
        const double m = model.value(p.t);
        out.push_back({p.t, (p.value - m) / m});
    }
    return out;
}

/// Fits S(t) = 1/(a - k*t) by unweighted least squares on the reciprocal
/// values over `window` (whole series when absent). Decaying data (reciprocal
/// slope positive, i.e. fitted k < 0) is flagged as not_growth_like rather
/// than silently returned.
///
/// Note the loss lives in reciprocal space, which overweights early/small
/// values; that is the documented trade-off for a closed-form linear fit.
inline FitReport fit_hyperbolic(const TimeSeries& series, std::optional<Window> window = {}) {
    validate_series(series);
    const std::vector<TimeValue> pts = points_in_window(series, window);
    if (pts.size() < 2) {
        std::ostringstream os;
        os << "fit for '" << series.region << "' needs at least 2 in-window points, got "
           << pts.size();
        raise(ErrorKind::insufficient_data, os.str());
    }

    std::vector<TimeValue> recip;
    recip.reserve(pts.size());
    for (const TimeValue& p : pts) recip.push_back({p.t, 1.0 / p.value});

    const ReciprocalLine line = detail::reciprocal_ols(recip);
    if (line.k < 0.0) {
        std::ostringstream os;
        os << "series '" << series.region << "' is not growth-like over ["
           << pts.front().t << ", " << pts.back().t << "]: fitted k = " << line.k
           << " implies a decaying hyperbola";
        raise(ErrorKind::not_growth_like, os.str());
    }
    if (!(line.a > 0.0)) {
        std::ostringstream os;
        os << "series '" << series.region << "' yields a non-positive reciprocal intercept a = "
           << line.a << "; no admissible hyperbola fits";
        raise(ErrorKind::not_growth_like, os.str());
    }
    HyperbolicModel model(line);
    if (!model.in_domain(pts.back().t)) {
        std::ostringstream os;
        os << "fitted singularity at t = " << line.a / line.k << " falls inside the fit window of '"
           << series.region << "'";
        raise(ErrorKind::domain_error, os.str());
    }

    // Goodness of the affine fit, in reciprocal space.
    double y_mean = 0.0;
    for (const TimeValue& p : recip) y_mean += p.value;
    y_mean /= static_cast<double>(recip.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (const TimeValue& p : recip) {
        const double e = p.value - line(p.t);
        const double d = p.value - y_mean;
        ss_res += e * e;
        ss_tot += d * d;
    }
    double r_squared;
    if (ss_tot > 0.0) {
        r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    } else {
        r_squared = ss_res == 0.0 ? 1.0 : 0.0;
    }

    std::vector<TimeValue> residuals;
    residuals.reserve(pts.size());
    for (const TimeValue& p : pts) {
        const double m = model.value(p.t);
        residuals.push_back({p.t, (p.value - m) / m});
    }

    return FitReport{model, Window{pts.front().t, pts.back().t}, r_squared,
                     detail::rms(residuals), std::move(residuals)};
}

/// Result of building the per-capita ratio model from component fits.
struct ModulatedFitReport {
    ModulatedHyperbolicModel model;
    FitReport gdp_fit;
    FitReport population_fit;
    Window window;                              // realized per-capita residual window
    double rms_relative_residual = 0.0;
    std::vector<TimeValue> observed_per_capita; // the series the residuals compare against
    std::vector<TimeValue> residuals;
};

/// Fits GDP and population hyperbolas separately and divides them: the
/// per-capita model is (aP - kP*t)/(aG - kG*t). Observed per-capita values
/// come from `observed_per_capita` when supplied (the authoritative column),
/// otherwise pointwise gdp.v / population.v at common years.
inline ModulatedFitReport fit_modulated_via_ratio(const TimeSeries& gdp,
                                                  const TimeSeries& population,
                                                  std::optional<Window> window = {},
                                                  const TimeSeries* observed_per_capita = nullptr) {
    if (gdp.region != population.region) {
        raise(ErrorKind::mismatched_regions,
              "cannot build a per-capita model from GDP of '" + gdp.region +
                  "' and population of '" + population.region + "'");
    }
    FitReport gdp_fit = fit_hyperbolic(gdp, window);
    FitReport population_fit = fit_hyperbolic(population, window);
    ModulatedHyperbolicModel model =
        ModulatedHyperbolicModel::from_components(gdp_fit.model, population_fit.model);

    std::vector<TimeValue> observed;
    if (observed_per_capita != nullptr) {
        validate_series(*observed_per_capita);
        observed = points_in_window(*observed_per_capita, window);
    } else {
        const std::vector<TimeValue> g = points_in_window(gdp, window);
        const std::vector<TimeValue> p = points_in_window(population, window);
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < g.size() && j < p.size()) {
            if (g[i].t < p[j].t) {
                ++i;
            } else if (p[j].t < g[i].t) {
                ++j;
            } else {
                observed.push_back({g[i].t, g[i].value / p[j].value});
                ++i;
                ++j;
            }
        }
    }
    if (observed.empty()) {
        raise(ErrorKind::no_common_years,
              "GDP and population series for '" + gdp.region + "' share no in-window years");
    }

    std::vector<TimeValue> residuals;
    residuals.reserve(observed.size());
    for (const TimeValue& p : observed) {
        const double m = model.value(p.t);
        residuals.push_back({p.t, (p.value - m) / m});
    }

    return ModulatedFitReport{std::move(model),
                              std::move(gdp_fit),
                              std::move(population_fit),
                              Window{observed.front().t, observed.back().t},
                              detail::rms(residuals),
                              std::move(observed),
                              std::move(residuals)};
}

}  // namespace hypergrowth
