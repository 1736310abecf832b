#include "hypergrowth/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace hypergrowth {
namespace {

using testing::random_hyperbola;
using testing::rel_diff;
using testing::sample_series;

TimeSeries series_of(std::vector<TimeValue> pts, Quantity q = Quantity::gdp_per_capita,
                     const std::string& region = "synthetic") {
    return make_series(region, q, "units", std::move(pts));
}

TEST(ReciprocalTransform, definition_examples) {
    const TimeSeries s = series_of({{0.0, 1.0}, {100.0, 2.0}});
    const std::vector<TimeValue> r = reciprocal_transform(s);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_DOUBLE_EQ(r[0].t, 0.0);
    EXPECT_DOUBLE_EQ(r[0].value, 1.0);
    EXPECT_DOUBLE_EQ(r[1].t, 100.0);
    EXPECT_DOUBLE_EQ(r[1].value, 0.5);

    const TimeSeries s2 = series_of({{0.0, 4.0}, {10.0, 5.0}});
    EXPECT_DOUBLE_EQ(reciprocal_transform(s2)[0].value, 0.25);
}

TEST(ReciprocalTransform, model_samples_lie_on_the_line) {
    const HyperbolicModel m(0.1, 0.0005);
    const TimeSeries s = sample_series(m, 0.0, 0.9, 20);
    for (const TimeValue& p : reciprocal_transform(s)) {
        EXPECT_LT(rel_diff(p.value, 0.1 - 0.0005 * p.t), 1e-12);
    }
}

TEST(FitHyperbolic, two_point_exact_solution) {
    // Solve 1/v = a - k t through (0, 1) and (100, 2) by hand:
    // a = 1, k = (1 - 0.5)/100 = 0.005.
    const FitReport fit = fit_hyperbolic(series_of({{0.0, 1.0}, {100.0, 2.0}}));
    EXPECT_NEAR(fit.model.a(), 1.0, 1e-14);
    EXPECT_NEAR(fit.model.k(), 0.005, 1e-16);
    EXPECT_DOUBLE_EQ(fit.r_squared_reciprocal, 1.0);
    EXPECT_DOUBLE_EQ(fit.window.lo, 0.0);
    EXPECT_DOUBLE_EQ(fit.window.hi, 100.0);
}

TEST(FitHyperbolic, recovers_generator_parameters_exactly) {
    const HyperbolicModel truth(0.1, 0.0005);
    const TimeSeries s = sample_series(truth, 0.0, 0.9, 20);  // t in [0, 180]
    const FitReport fit = fit_hyperbolic(s);
    EXPECT_LT(rel_diff(fit.model.a(), truth.a()), 1e-9);
    EXPECT_LT(rel_diff(fit.model.k(), truth.k()), 1e-9);
    EXPECT_LT(fit.rms_relative_residual, 1e-12);
    ASSERT_EQ(fit.residuals.size(), 20u);
}

TEST(FitHyperbolic, constant_series_fits_flat_line) {
    const TimeSeries s = series_of({{1700.0, 5.0}, {1820.0, 5.0}, {1900.0, 5.0}});
    const FitReport fit = fit_hyperbolic(s);
    EXPECT_DOUBLE_EQ(fit.model.a(), 0.2);
    EXPECT_DOUBLE_EQ(fit.model.k(), 0.0);
    EXPECT_DOUBLE_EQ(fit.rms_relative_residual, 0.0);
}

TEST(FitHyperbolic, decaying_data_is_flagged_not_silently_returned) {
    const TimeSeries s = series_of({{0.0, 4.0}, {50.0, 3.0}, {100.0, 2.0}});
    try {
        fit_hyperbolic(s);
        FAIL() << "expected not_growth_like";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_growth_like);
    }
}

TEST(FitHyperbolic, window_with_too_few_points) {
    const TimeSeries s = series_of({{0.0, 1.0}, {100.0, 2.0}, {150.0, 4.0}});
    try {
        fit_hyperbolic(s, make_window(120.0, 200.0));
        FAIL() << "expected insufficient_data";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
    }
}

TEST(FitHyperbolic, window_restricts_the_fit) {
    // On-model until 100, then flattened: fitting the early window recovers
    // the model regardless of the late distortion.
    const HyperbolicModel truth(1.0, 0.005);
    std::vector<TimeValue> pts;
    for (double t = 0.0; t <= 100.0; t += 10.0) pts.push_back({t, truth.value(t)});
    pts.push_back({150.0, truth.value(100.0)});
    pts.push_back({160.0, truth.value(100.0)});
    const FitReport fit = fit_hyperbolic(series_of(pts), make_window(0.0, 100.0));
    EXPECT_LT(rel_diff(fit.model.a(), 1.0), 1e-9);
    EXPECT_LT(rel_diff(fit.model.k(), 0.005), 1e-9);
    EXPECT_DOUBLE_EQ(fit.window.hi, 100.0);
}

TEST(FitModulatedViaRatio, noiseless_components_give_exact_ratio_model) {
    const HyperbolicModel gdp_truth(0.1, 0.0005);
    const HyperbolicModel pop_truth(1.0, 0.001);
    std::vector<TimeValue> gdp_pts;
    std::vector<TimeValue> pop_pts;
    for (double t = 0.0; t <= 150.0; t += 10.0) {
        gdp_pts.push_back({t, gdp_truth.value(t)});
        pop_pts.push_back({t, pop_truth.value(t)});
    }
    const TimeSeries gdp = make_series("region-a", Quantity::gdp, "units", gdp_pts);
    const TimeSeries pop = make_series("region-a", Quantity::population, "units", pop_pts);
    const ModulatedFitReport fit = fit_modulated_via_ratio(gdp, pop);
    EXPECT_NEAR(fit.model.value(0.0), 10.0, 1e-9);  // (1 - 0)/(0.1 - 0) by hand
    for (const TimeValue& r : fit.residuals) {
        EXPECT_LT(std::fabs(r.value), 1e-12);
    }
    EXPECT_LT(fit.rms_relative_residual, 1e-12);
}

TEST(FitModulatedViaRatio, constant_population_scales_the_gdp_hyperbola) {
    const HyperbolicModel gdp_truth(0.5, 0.002);
    const TimeSeries gdp = sample_series(gdp_truth, 0.0, 0.8, 12, "r", Quantity::gdp);
    std::vector<TimeValue> pop_pts;
    for (const TimeValue& p : gdp.points) pop_pts.push_back({p.t, 4.0});
    const TimeSeries pop = make_series("r", Quantity::population, "units", pop_pts);

    const ModulatedFitReport fit = fit_modulated_via_ratio(gdp, pop);
    for (const TimeValue& p : gdp.points) {
        EXPECT_LT(rel_diff(fit.model.value(p.t), gdp_truth.value(p.t) / 4.0), 1e-9);
    }
}

TEST(FitModulatedViaRatio, identical_series_give_identity_ratio) {
    const HyperbolicModel truth(0.2, 0.001);
    const TimeSeries gdp = sample_series(truth, 0.0, 0.8, 10, "r", Quantity::gdp);
    TimeSeries pop = gdp;
    pop.quantity = Quantity::population;
    const ModulatedFitReport fit = fit_modulated_via_ratio(gdp, pop);
    for (const TimeValue& p : gdp.points) {
        EXPECT_LT(rel_diff(fit.model.value(p.t), 1.0), 1e-9);
    }
}

TEST(FitModulatedViaRatio, region_mismatch_and_disjoint_years) {
    const HyperbolicModel truth(0.2, 0.001);
    const TimeSeries a = sample_series(truth, 0.0, 0.8, 10, "a", Quantity::gdp);
    const TimeSeries b = sample_series(truth, 0.0, 0.8, 10, "b", Quantity::population);
    EXPECT_THROW(fit_modulated_via_ratio(a, b), Error);

    const TimeSeries a_pop_shifted =
        sample_series(truth, 1.0, 0.8, 10, "a", Quantity::population);
    try {
        fit_modulated_via_ratio(a, a_pop_shifted);
        FAIL() << "expected no_common_years";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::no_common_years);
    }
}

TEST(FitModulatedViaRatio, supplied_per_capita_column_is_authoritative) {
    const HyperbolicModel gdp_truth(0.1, 0.0005);
    const HyperbolicModel pop_truth(1.0, 0.001);
    const TimeSeries gdp = sample_series(gdp_truth, 0.0, 0.75, 16, "r", Quantity::gdp);
    TimeSeries pop = gdp;
    pop.quantity = Quantity::population;
    for (TimeValue& p : pop.points) p.value = pop_truth.value(p.t);

    // A per-capita column 10% above the pointwise ratio must drive residuals.
    std::vector<TimeValue> pc_pts;
    for (const TimeValue& p : gdp.points) {
        pc_pts.push_back({p.t, 1.1 * gdp_truth.value(p.t) / pop_truth.value(p.t)});
    }
    const TimeSeries pc = make_series("r", Quantity::gdp_per_capita, "units", pc_pts);
    const ModulatedFitReport fit = fit_modulated_via_ratio(gdp, pop, {}, &pc);
    for (const TimeValue& r : fit.residuals) {
        EXPECT_LT(rel_diff(r.value, 0.1), 1e-9);
    }
}

TEST(ResidualSeries, examples) {
    const HyperbolicModel m(1.0, 0.005);
    const TimeSeries on_model = sample_series(m, 0.0, 0.9, 10);
    for (const TimeValue& r : residual_series(on_model, m)) {
        EXPECT_LT(std::fabs(r.value), 1e-12);
    }

    TimeSeries scaled = on_model;
    for (TimeValue& p : scaled.points) p.value *= 1.1;
    for (const TimeValue& r : residual_series(scaled, m)) {
        EXPECT_LT(rel_diff(r.value, 0.1), 1e-12);
    }

    // One doubled point: residual (2m - m)/m = 1 exactly there, 0 elsewhere.
    TimeSeries doubled = on_model;
    doubled.points[4].value *= 2.0;
    const std::vector<TimeValue> res = residual_series(doubled, m);
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (i == 4) {
            EXPECT_LT(rel_diff(res[i].value, 1.0), 1e-12);
        } else {
            EXPECT_LT(std::fabs(res[i].value), 1e-12);
        }
    }
}

TEST(ResidualSeries, domain_error_beyond_singularity) {
    const HyperbolicModel m(1.0, 0.005);  // blow-up at 200
    const TimeSeries s = series_of({{100.0, 2.0}, {250.0, 3.0}});
    EXPECT_THROW(residual_series(s, m), Error);
}

// --- randomized properties -------------------------------------------------

TEST(FitHyperbolicProperty, exact_recovery_on_noiseless_grids) {
    std::mt19937_64 rng(20260811);
    std::uniform_real_distribution<double> coverage(0.3, 0.95);
    std::uniform_real_distribution<double> start(-3000.0, 100.0);  // BC windows included
    std::uniform_int_distribution<int> n_dist(2, 60);
    for (int trial = 0; trial < 500; ++trial) {
        const HyperbolicModel truth = random_hyperbola(rng);
        const TimeSeries s = sample_series(truth, start(rng), coverage(rng), n_dist(rng));
        const FitReport fit = fit_hyperbolic(s);
        EXPECT_LT(rel_diff(fit.model.a(), truth.a()), 1e-9);
        EXPECT_LT(rel_diff(fit.model.k(), truth.k()), 1e-9);
    }
}

TEST(FitHyperbolicProperty, fitted_parameters_minimize_reciprocal_sse) {
    std::mt19937_64 rng(20260812);
    std::uniform_real_distribution<double> noise(-0.02, 0.02);
    auto sse = [](const std::vector<TimeValue>& recip, double a, double k) {
        double acc = 0.0;
        for (const TimeValue& p : recip) {
            const double e = p.value - (a - k * p.t);
            acc += e * e;
        }
        return acc;
    };
    for (int trial = 0; trial < 200; ++trial) {
        const HyperbolicModel truth = random_hyperbola(rng);
        TimeSeries s = sample_series(truth, 0.0, 0.9, 25);
        for (TimeValue& p : s.points) p.value *= 1.0 + noise(rng);
        const FitReport fit = fit_hyperbolic(s);
        const std::vector<TimeValue> recip = reciprocal_transform(s);
        const double best = sse(recip, fit.model.a(), fit.model.k());
        for (double da : {-1e-3, 0.0, 1e-3}) {
            for (double dk : {-1e-3, 0.0, 1e-3}) {
                if (da == 0.0 && dk == 0.0) continue;
                const double perturbed = sse(recip, fit.model.a() * (1.0 + da),
                                             fit.model.k() * (1.0 + dk));
                EXPECT_GE(perturbed, best - best * 1e-12);
            }
        }
    }
}

TEST(FitHyperbolicProperty, point_order_does_not_change_the_fit) {
    std::mt19937_64 rng(20260813);
    for (int trial = 0; trial < 100; ++trial) {
        const HyperbolicModel truth = random_hyperbola(rng);
        const TimeSeries s = sample_series(truth, 0.0, 0.9, 15);
        std::vector<TimeValue> shuffled = s.points;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const TimeSeries reordered =
            make_series(s.region, s.quantity, s.unit, std::move(shuffled));
        const FitReport f1 = fit_hyperbolic(s);
        const FitReport f2 = fit_hyperbolic(reordered);
        EXPECT_EQ(f1.model.a(), f2.model.a());
        EXPECT_EQ(f1.model.k(), f2.model.k());
    }
}

TEST(FitHyperbolicProperty, ratio_model_equals_component_fit_quotient) {
    std::mt19937_64 rng(20260814);
    for (int trial = 0; trial < 200; ++trial) {
        const HyperbolicModel gdp_truth = random_hyperbola(rng);
        const HyperbolicModel pop_truth = random_hyperbola(rng);
        const double upper =
            std::min(gdp_truth.domain_upper_bound(), pop_truth.domain_upper_bound());
        std::vector<TimeValue> gdp_pts;
        std::vector<TimeValue> pop_pts;
        for (int i = 0; i < 12; ++i) {
            const double t = 0.9 * upper * static_cast<double>(i) / 11.0;
            gdp_pts.push_back({t, gdp_truth.value(t)});
            pop_pts.push_back({t, pop_truth.value(t)});
        }
        const TimeSeries gdp = make_series("r", Quantity::gdp, "u", gdp_pts);
        const TimeSeries pop = make_series("r", Quantity::population, "u", pop_pts);
        const ModulatedFitReport fit = fit_modulated_via_ratio(gdp, pop);
        for (const TimeValue& p : gdp.points) {
            const double quotient =
                fit.gdp_fit.model.value(p.t) / fit.population_fit.model.value(p.t);
            EXPECT_LT(rel_diff(fit.model.value(p.t), quotient), 1e-12);
        }
    }
}

TEST(FitHyperbolicProperty, one_percent_noise_recovers_within_five_percent) {
    std::mt19937_64 rng(20260815);
    std::normal_distribution<double> noise(0.0, 0.01);
    int ok = 0;
    const int trials = 300;
    for (int trial = 0; trial < trials; ++trial) {
        const HyperbolicModel truth = random_hyperbola(rng);
        std::uniform_real_distribution<double> coverage(0.5, 0.9);
        TimeSeries s = sample_series(truth, 0.0, coverage(rng), 20);
        for (TimeValue& p : s.points) p.value *= 1.0 + noise(rng);
        try {
            const FitReport fit = fit_hyperbolic(s);
            if (rel_diff(fit.model.a(), truth.a()) < 0.05 &&
                rel_diff(fit.model.k(), truth.k()) < 0.05) {
                ++ok;
            }
        } catch (const Error&) {
            // a failed fit counts as a miss
        }
    }
    EXPECT_GE(ok, trials * 95 / 100);
}

}  // namespace
}  // namespace hypergrowth
