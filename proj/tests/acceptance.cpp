// Acceptance suite: one test per criterion, each printing a single
// "[acceptance] <name>: PASS|FAIL|SKIPPED" line. Everything is seeded and
// self-contained except the external-data criterion, which runs only when
// HYPERGROWTH_MADDISON_CSV points at a per-capita CSV export.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "hypergrowth/hypergrowth.hpp"
#include "test_support.hpp"

namespace hypergrowth {
namespace {

namespace fs = std::filesystem;
using testing::fresh_dir;
using testing::random_dataset;
using testing::random_hyperbola;
using testing::random_modulated;
using testing::read_file;
using testing::rel_diff;
using testing::report_rows;
using testing::report_value;
using testing::run_cli;
using testing::sample_series;
using testing::write_file;

class Acceptance : public ::testing::Test {
protected:
    void label(std::string text) { label_ = std::move(text); }
    void detail(std::string text) { detail_ = std::move(text); }
    void mark_skipped() { skipped_ = true; }

    void TearDown() override {
        std::string status = skipped_ ? "SKIPPED" : HasFailure() ? "FAIL" : "PASS";
        std::cout << "[acceptance] " << label_ << ": " << status;
        if (!detail_.empty()) std::cout << " (" << detail_ << ")";
        std::cout << std::endl;
    }

private:
    std::string label_ = "unnamed";
    std::string detail_;
    bool skipped_ = false;
};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TEST_F(Acceptance, c01_parameter_recovery) {
    label("01 parameter-recovery");
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> coverage(0.3, 0.95);
    int ok = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        const HyperbolicModel truth = random_hyperbola(rng);
        const FitReport fit = fit_hyperbolic(sample_series(truth, 0.0, coverage(rng), 20));
        if (rel_diff(fit.model.a(), truth.a()) < 1e-9 &&
            rel_diff(fit.model.k(), truth.k()) < 1e-9) {
            ++ok;
        }
    }
    const double seconds = elapsed_seconds(start);
    EXPECT_EQ(ok, trials);
    EXPECT_LT(seconds, 5.0);
    std::ostringstream d;
    d << ok << "/" << trials << " within 1e-9, " << seconds << " s";
    detail(d.str());
}

TEST_F(Acceptance, c02_noise_robustness) {
    label("02 noise-robustness");
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> coverage(0.5, 0.9);
    std::normal_distribution<double> noise(0.0, 0.01);
    int ok = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        const HyperbolicModel truth = random_hyperbola(rng);
        TimeSeries s = sample_series(truth, 0.0, coverage(rng), 20);
        for (TimeValue& p : s.points) p.value *= 1.0 + noise(rng);
        try {
            const FitReport fit = fit_hyperbolic(s);
            if (rel_diff(fit.model.a(), truth.a()) < 0.05 &&
                rel_diff(fit.model.k(), truth.k()) < 0.05) {
                ++ok;
            }
        } catch (const Error&) {
        }
    }
    EXPECT_GE(ok, 950);
    detail(std::to_string(ok) + "/1000 within 5%");
}

TEST_F(Acceptance, c03_takeoff_null_on_hyperbolas) {
    label("03 takeoff-null-on-hyperbolas");
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> coverage(0.3, 0.97);
    std::uniform_real_distribution<double> start_dist(-500.0, 50.0);
    std::uniform_int_distribution<int> n_dist(30, 200);
    int none = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        const HyperbolicModel m = random_hyperbola(rng);
        const TimeSeries s = sample_series(m, start_dist(rng), coverage(rng), n_dist(rng));
        if (scan_takeoff(s).verdict == TakeoffVerdict::none) ++none;
    }
    EXPECT_EQ(none, trials);
    detail(std::to_string(none) + "/1000 verdict none under defaults");
}

TEST_F(Acceptance, c04_distortion_contrast) {
    label("04 distortion-contrast");
    const HyperbolicModel f(200.0, 1.0);  // f(x) = 1/(200 - x)
    const std::vector<double> grid = {0.0, 150.0, 179.6};

    const PiecewiseLinearCurve poly = sample_and_join(f, grid);
    const double index = phantom_takeoff_index(poly);
    EXPECT_NEAR(index, 9.80, 0.05);

    std::vector<TimeValue> dense;
    for (int i = 0; i < 512; ++i) {
        const double x = 179.6 * static_cast<double>(i) / 511.0;
        dense.push_back({x, f.value(x)});
    }
    const TimeSeries fine = make_series("f", Quantity::gdp_per_capita, "units", dense);
    EXPECT_EQ(scan_takeoff(fine).verdict, TakeoffVerdict::none);

    const TimeSeries knots = make_series("f", Quantity::gdp_per_capita, "units", poly.knots());
    const TakeoffScanReport kinked = scan_takeoff(knots);
    EXPECT_EQ(kinked.verdict, TakeoffVerdict::candidate);
    ASSERT_TRUE(kinked.candidate_time.has_value());
    EXPECT_DOUBLE_EQ(*kinked.candidate_time, 150.0);

    std::ostringstream d;
    d << "index " << index << ", fine-grid none, 3-knot candidate at 150";
    detail(d.str());
}

TEST_F(Acceptance, c05_ratio_identity) {
    label("05 ratio-identity");
    std::mt19937_64 rng(105);
    double worst = 0.0;
    const int trials = 100000;
    for (int trial = 0; trial < trials; ++trial) {
        const ModulatedHyperbolicModel m = random_modulated(rng);
        std::uniform_real_distribution<double> t_dist(-500.0, 0.97 * m.domain_upper_bound());
        const double t = t_dist(rng);
        const double direct = m.value(t);
        const double via_components =
            m.gdp_component().value(t) / m.population_component().value(t);
        worst = std::max(worst, rel_diff(direct, via_components));
    }
    EXPECT_LE(worst, 1e-12);
    std::ostringstream d;
    d << trials << " draws, worst relative gap " << worst;
    detail(d.str());
}

TEST_F(Acceptance, c06_semilog_convexity) {
    label("06 semilog-convexity");
    std::mt19937_64 rng(106);
    std::uniform_real_distribution<double> coverage(0.5, 0.9);
    double worst = 0.0;
    double min_d2 = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 50; ++trial) {
        const HyperbolicModel m = random_hyperbola(rng);
        const TimeSeries s = sample_series(m, 0.0, coverage(rng), 2001);
        const SemilogProfile profile = semilog_profile(s);
        for (const TimeValue& d2 : profile.second_derivatives) {
            const double u = m.a() - m.k() * d2.t;
            const double analytic = (m.k() * m.k()) / (u * u);
            worst = std::max(worst, rel_diff(d2.value, analytic));
            min_d2 = std::min(min_d2, d2.value);
        }
    }
    EXPECT_LE(worst, 1e-4);
    EXPECT_GT(min_d2, 0.0);
    std::ostringstream d;
    d << "worst relative gap " << worst << ", min second derivative " << min_d2;
    detail(d.str());
}

TEST_F(Acceptance, c07_gradient_check) {
    label("07 gradient-check");
    std::mt19937_64 rng(107);
    double worst = 0.0;
    const int trials = 10000;
    for (int trial = 0; trial < trials; ++trial) {
        const HyperbolicModel m = random_hyperbola(rng);
        const double upper = m.domain_upper_bound();
        const double lo = -200.0;
        std::uniform_real_distribution<double> t_dist(lo, lo + 0.9 * (upper - lo));
        const double t = t_dist(rng);
        const double h = 1e-6 * (upper - lo);
        const double fd = (m.value(t + h) - m.value(t - h)) / (2.0 * h);
        worst = std::max(worst, rel_diff(m.gradient(t), fd));
    }
    EXPECT_LE(worst, 1e-6);
    std::ostringstream d;
    d << trials << " draws, worst relative gap " << worst;
    detail(d.str());
}

TEST_F(Acceptance, c08_departure_detection) {
    label("08 departure-detection");
    std::mt19937_64 rng(108);
    std::uniform_real_distribution<double> coverage(0.5, 0.9);
    std::uniform_real_distribution<double> drop(0.08, 0.4);
    std::uniform_int_distribution<int> n_dist(12, 60);
    int ok = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        const HyperbolicModel m = random_hyperbola(rng);
        const int n = n_dist(rng);
        TimeSeries s = sample_series(m, 0.0, coverage(rng), static_cast<std::size_t>(n));
        std::uniform_int_distribution<int> break_dist(n / 3, n - 4);
        const int break_index = break_dist(rng);
        const double break_year = s.points[static_cast<std::size_t>(break_index)].t;
        const double d = drop(rng);
        for (int i = break_index + 1; i < n; ++i) {
            s.points[static_cast<std::size_t>(i)].value *= 1.0 - d;
        }
        const double step = s.points[1].t - s.points[0].t;
        const DepartureReport report = detect_departure(s, m);
        if (report.departure_time.has_value() &&
            report.direction == DepartureDirection::below &&
            *report.departure_time > break_year &&
            *report.departure_time <= break_year + step * 1.000001) {
            ++ok;
        }
    }
    EXPECT_EQ(ok, trials);
    detail(std::to_string(ok) + "/100 within one sample interval of the break");
}

TEST_F(Acceptance, c09_maddison_reproduction) {
    label("09 maddison-reproduction [conditional]");
    const char* path = std::getenv("HYPERGROWTH_MADDISON_CSV");
    if (path == nullptr || std::string(path).empty()) {
        mark_skipped();
        detail("set HYPERGROWTH_MADDISON_CSV to a per-capita horizontal CSV export to run");
        GTEST_SKIP();
    }

    IngestManifest manifest;
    manifest.layout = CsvLayout::maddison_horizontal;
    manifest.quantity = Quantity::gdp_per_capita;
    manifest.unit = "1990 International Geary-Khamis dollars";
    manifest.provenance = "maddison-2010";
    const IngestResult ingested = ingest_csv_file(path, manifest);
    const RegionalDataset& ds = ingested.dataset;

    // Ratio sequence at the quoted years, within 20% each.
    const std::vector<double> years = {1820.0, 1870.0, 1913.0, 1950.0, 2001.0};
    const std::vector<double> expected = {3.0, 5.0, 9.0, 15.0, 18.0};
    const std::vector<RatioRow> rows = richest_poorest_ratio(ds, Quantity::gdp_per_capita, years);
    ASSERT_EQ(rows.size(), years.size());
    std::ostringstream d;
    d << "ratios";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_NEAR(rows[i].ratio, expected[i], 0.2 * expected[i])
            << "ratio at " << years[i] << " was " << rows[i].ratio;
        d << ' ' << rows[i].ratio;
    }

    // Departure years for the three regions the captions date, +-15 years.
    auto find_region = [&](const std::string& needle) -> const TimeSeries* {
        for (const auto& [name, rs] : ds.regions) {
            std::string lower = name;
            for (char& c : lower) c = static_cast<char>(std::tolower(c));
            if (lower.find(needle) != std::string::npos && rs.per_capita) {
                return &*rs.per_capita;
            }
        }
        return nullptr;
    };
    struct Target {
        const char* needle;
        double window_end;
        double expected_lo;
        double expected_hi;
    };
    const Target targets[] = {
        {"western europe", 1870.0, 1900.0 - 15.0, 1913.0 + 15.0},
        {"eastern europe", 1820.0, 1850.0 - 15.0, 1850.0 + 15.0},
        {"ussr", 1820.0, 1870.0 - 15.0, 1870.0 + 15.0},
    };
    for (const Target& target : targets) {
        const TimeSeries* series = find_region(target.needle);
        ASSERT_NE(series, nullptr) << "no region matching '" << target.needle << "'";
        const FitReport fit =
            fit_hyperbolic(*series, make_window(-10000.0, target.window_end));
        const DepartureReport departure = detect_departure(*series, fit.model);
        ASSERT_TRUE(departure.departure_time.has_value()) << target.needle;
        EXPECT_GE(*departure.departure_time, target.expected_lo) << target.needle;
        EXPECT_LE(*departure.departure_time, target.expected_hi) << target.needle;
        d << ", " << target.needle << " departs " << *departure.departure_time;
    }
    detail(d.str());
}

TEST_F(Acceptance, c10_divergence_verdict_separation) {
    label("10 divergence-verdict-separation");
    const auto start = std::chrono::steady_clock::now();

    const ModulatedHyperbolicModel m(ReciprocalLine{1.0, 0.001}, ReciprocalLine{0.1, 0.0005});
    auto sampled = [&](double lag, const std::string& region) {
        std::vector<TimeValue> pts;
        for (double t = 0.0; t <= 150.0; t += 10.0) pts.push_back({t, m.value(t - lag)});
        return make_series(region, Quantity::gdp_per_capita, "units", pts);
    };
    auto shifted = [&](double lag) {
        return ModulatedHyperbolicModel(
            ReciprocalLine{m.numerator().a + m.numerator().k * lag, m.numerator().k},
            ReciprocalLine{m.denominator().a + m.denominator().k * lag, m.denominator().k});
    };

    // Lagged family: one trajectory at three levels of development.
    RegionalDataset family;
    family.regions["ahead"].per_capita = sampled(0.0, "ahead");
    family.regions["middle"].per_capita = sampled(20.0, "middle");
    family.regions["trailing"].per_capita = sampled(40.0, "trailing");
    std::map<std::string, ModulatedHyperbolicModel> family_fits;
    family_fits.emplace("ahead", shifted(0.0));
    family_fits.emplace("middle", shifted(20.0));
    family_fits.emplace("trailing", shifted(40.0));
    const DivergenceReport family_report = divergence_verdict(family, family_fits);
    EXPECT_EQ(family_report.verdict, DivergenceVerdict::non_divergent_level_shifted);

    // Caricature: a hyperbolic riser plus a gentle straight line.
    RegionalDataset caricature;
    std::vector<TimeValue> steep_pts;
    std::vector<TimeValue> line_pts;
    for (double t = 0.0; t <= 190.0; t += 10.0) {
        steep_pts.push_back({t, m.value(t)});
        line_pts.push_back({t, 30.0 + 0.02 * t});
    }
    caricature.regions["steep"].per_capita =
        make_series("steep", Quantity::gdp_per_capita, "units", steep_pts);
    caricature.regions["gentle"].per_capita =
        make_series("gentle", Quantity::gdp_per_capita, "units", line_pts);
    std::map<std::string, ModulatedHyperbolicModel> caricature_fits;
    caricature_fits.emplace("steep", m);
    caricature_fits.emplace(
        "gentle", ModulatedHyperbolicModel::from_hyperbolic(
                      fit_hyperbolic(*caricature.find("gentle", Quantity::gdp_per_capita)).model));
    const DivergenceReport caricature_report = divergence_verdict(caricature, caricature_fits);
    EXPECT_EQ(caricature_report.verdict, DivergenceVerdict::divergent);

    const double seconds = elapsed_seconds(start);
    EXPECT_LT(seconds, 1.0);
    std::ostringstream d;
    d << "family non-divergent, caricature divergent, " << seconds << " s";
    detail(d.str());
}

TEST_F(Acceptance, c11_determinism_and_round_trip) {
    label("11 determinism-and-round-trip");

    // Dataset save/load round trip on randomized datasets.
    std::mt19937_64 rng(111);
    int round_trips = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const RegionalDataset ds = random_dataset(rng);
        std::ostringstream out;
        save_dataset(ds, out);
        std::istringstream in(out.str());
        const RegionalDataset loaded = load_dataset(in);
        std::ostringstream again;
        save_dataset(loaded, again);
        ASSERT_EQ(out.str(), again.str());
        ++round_trips;
    }

    // Byte-identical CLI outputs for identical config + inputs.
    ASSERT_FALSE(testing::cli_binary().empty()) << "HYPERGROWTH_BIN must be set";
    const fs::path dir = fresh_dir("acceptance_cli");
    std::ostringstream csv;
    csv << "region,year,quantity,value,unit\n";
    const HyperbolicModel gdp(2.04, 0.001);
    const HyperbolicModel pop(1.1, 0.0005);
    char buf[40];
    for (int year = 1820; year <= 2000; year += 20) {
        std::snprintf(buf, sizeof buf, "%.17g", gdp.value(year));
        csv << "alpha," << year << ",GDP," << buf << ",billions\n";
        std::snprintf(buf, sizeof buf, "%.17g", pop.value(year));
        csv << "alpha," << year << ",population," << buf << ",millions\n";
    }
    write_file(dir / "data.csv", csv.str());
    const std::string ds_path = (dir / "data.ds").string();
    ASSERT_EQ(run_cli("ingest --input " + (dir / "data.csv").string() +
                      " --layout tidy --provenance det --output " + ds_path)
                  .exit_code,
              0);

    for (const char* cmd : {"fit", "diagnose"}) {
        const std::string r1 = (dir / (std::string(cmd) + "1.txt")).string();
        const std::string r2 = (dir / (std::string(cmd) + "2.txt")).string();
        ASSERT_EQ(run_cli(std::string(cmd) + " --dataset " + ds_path + " --output " + r1)
                      .exit_code,
                  0);
        ASSERT_EQ(run_cli(std::string(cmd) + " --dataset " + ds_path + " --output " + r2)
                      .exit_code,
                  0);
        const std::string a = read_file(r1);
        ASSERT_FALSE(a.empty());
        EXPECT_EQ(a, read_file(r2)) << cmd;
    }
    const std::string p1 = (dir / "p1_").string();
    const std::string p2 = (dir / "p2_").string();
    ASSERT_EQ(run_cli("plotdata --dataset " + ds_path + " --output-prefix " + p1).exit_code, 0);
    ASSERT_EQ(run_cli("plotdata --dataset " + ds_path + " --output-prefix " + p2).exit_code, 0);
    EXPECT_EQ(read_file(p1 + "alpha_linear.csv"), read_file(p2 + "alpha_linear.csv"));

    detail(std::to_string(round_trips) + "/100 round trips, CLI outputs byte-identical");
}

}  // namespace
}  // namespace hypergrowth
