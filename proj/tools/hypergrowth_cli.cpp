// Command-line front end: ingestion, fitting, diagnostics, the geometric
// distortion demo, cross-region comparison and plot-data export.
//
// Exit codes: 0 success, 2 input/data errors, 3 numerical/fit errors,
// 4 configuration errors.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypergrowth/hypergrowth.hpp"

namespace hg = hypergrowth;

namespace {

constexpr const char* kReportSchema = "hypergrowth-report/1";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

int exit_code_for(hg::ErrorKind kind) {
    switch (kind) {
        case hg::ErrorKind::parse_error:
        case hg::ErrorKind::duplicate_year:
        case hg::ErrorKind::duplicate_series:
        case hg::ErrorKind::non_positive_value:
        case hg::ErrorKind::unit_mismatch:
        case hg::ErrorKind::schema_version_mismatch:
        case hg::ErrorKind::corrupt_file:
        case hg::ErrorKind::io_error:
        case hg::ErrorKind::mismatched_regions:
        case hg::ErrorKind::no_common_years:
        case hg::ErrorKind::year_unavailable:
        case hg::ErrorKind::quorum:
        case hg::ErrorKind::unknown_region:
            return 2;
        case hg::ErrorKind::domain_error:
        case hg::ErrorKind::insufficient_data:
        case hg::ErrorKind::not_growth_like:
        case hg::ErrorKind::out_of_span:
        case hg::ErrorKind::single_segment:
        case hg::ErrorKind::no_valid_lag:
            return 3;
        case hg::ErrorKind::bad_grid:
        case hg::ErrorKind::invalid_argument:
            return 4;
    }
    return 3;
}

[[noreturn]] void config_error(const std::string& message) {
    hg::raise(hg::ErrorKind::invalid_argument, message);
}

double parse_double(const std::string& token, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        config_error("malformed " + what + " '" + token + "'");
    }
    return v;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        out.push_back(parse_double(token, what));
    }
    return out;
}

/// Per-region fit windows, plus an optional window applied to every region.
struct WindowSpec {
    std::map<std::string, hg::Window> per_region;
    std::optional<hg::Window> all;

    std::optional<hg::Window> for_region(const std::string& region) const {
        auto it = per_region.find(region);
        if (it != per_region.end()) return it->second;
        return all;
    }
};

hg::Window parse_window_bounds(const std::string& text, const std::string& what) {
    const std::size_t colon = text.rfind(':');
    if (colon == std::string::npos) {
        config_error(what + " must look like LO:HI, got '" + text + "'");
    }
    return hg::make_window(parse_double(text.substr(0, colon), what + " lower bound"),
                           parse_double(text.substr(colon + 1), what + " upper bound"));
}

WindowSpec parse_windows(const std::vector<std::string>& per_region_flags,
                         const std::string& all_flag) {
    WindowSpec spec;
    for (const std::string& flag : per_region_flags) {
        const std::size_t eq = flag.rfind('=');
        if (eq == std::string::npos) {
            config_error("--window must look like REGION=LO:HI, got '" + flag + "'");
        }
        spec.per_region[flag.substr(0, eq)] =
            parse_window_bounds(flag.substr(eq + 1), "--window");
    }
    if (!all_flag.empty()) {
        spec.all = parse_window_bounds(all_flag, "--window-all");
    }
    return spec;
}

std::string region_slug(const std::string& region) {
    std::string slug;
    for (char c : region) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            slug += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!slug.empty() && slug.back() != '_') {
            slug += '_';
        }
    }
    while (!slug.empty() && slug.back() == '_') slug.pop_back();
    return slug.empty() ? "region" : slug;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        hg::raise(hg::ErrorKind::io_error, "cannot open '" + path + "' for writing");
    }
    return out;
}

hg::Quantity parse_quantity(const std::string& token) {
    const std::optional<hg::Quantity> q = hg::quantity_from_token(token);
    if (!q) {
        config_error("unknown quantity '" + token +
                     "' (expected GDP, population or GDP_per_capita)");
    }
    return *q;
}

std::string available_regions(const hg::RegionalDataset& dataset) {
    std::string out;
    for (const auto& [name, rs] : dataset.regions) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

const hg::RegionSeries& require_region(const hg::RegionalDataset& dataset,
                                       const std::string& region) {
    auto it = dataset.regions.find(region);
    if (it == dataset.regions.end()) {
        hg::raise(hg::ErrorKind::unknown_region, "region '" + region +
                                                     "' not in dataset; available regions: " +
                                                     available_regions(dataset));
    }
    return it->second;
}

/// Observed per-capita series for a region: the per-capita column when
/// present (authoritative), otherwise the pointwise GDP/population ratio at
/// common years.
std::optional<hg::TimeSeries> observed_per_capita(const hg::RegionSeries& rs,
                                                  const std::string& region) {
    if (rs.per_capita) return rs.per_capita;
    if (!rs.gdp || !rs.population) return std::nullopt;
    std::vector<hg::TimeValue> pts;
    std::size_t i = 0;
    std::size_t j = 0;
    const auto& g = rs.gdp->points;
    const auto& p = rs.population->points;
    while (i < g.size() && j < p.size()) {
        if (g[i].t < p[j].t) {
            ++i;
        } else if (p[j].t < g[i].t) {
            ++j;
        } else {
            pts.push_back({g[i].t, g[i].value / p[j].value});
            ++i;
            ++j;
        }
    }
    if (pts.empty()) return std::nullopt;
    return hg::make_series(region, hg::Quantity::gdp_per_capita,
                           rs.gdp->unit + " / " + rs.population->unit, std::move(pts));
}

/// One region's fit: a ratio fit when GDP and population are available for a
/// per-capita request, otherwise a direct hyperbola on the requested series.
struct RegionFit {
    std::string region;
    hg::Quantity quantity = hg::Quantity::gdp_per_capita;
    std::string kind;  // "ratio", "per-capita-direct" or "hyperbolic"
    std::optional<hg::ModulatedFitReport> ratio;
    std::optional<hg::FitReport> direct;

    hg::ModulatedHyperbolicModel model() const {
        if (ratio) return ratio->model;
        return hg::ModulatedHyperbolicModel::from_hyperbolic(direct->model);
    }

    const hg::Window& window() const { return ratio ? ratio->window : direct->window; }

    double rms_relative_residual() const {
        return ratio ? ratio->rms_relative_residual : direct->rms_relative_residual;
    }
};

RegionFit fit_region(const hg::RegionalDataset& dataset, const std::string& region,
                     hg::Quantity quantity, const std::optional<hg::Window>& window) {
    const hg::RegionSeries& rs = require_region(dataset, region);
    RegionFit fit;
    fit.region = region;
    fit.quantity = quantity;
    if (quantity == hg::Quantity::gdp_per_capita) {
        if (rs.gdp && rs.population) {
            fit.kind = "ratio";
            fit.ratio = hg::fit_modulated_via_ratio(*rs.gdp, *rs.population, window,
                                                    rs.per_capita ? &*rs.per_capita : nullptr);
            return fit;
        }
        if (rs.per_capita) {
            fit.kind = "per-capita-direct";
            fit.direct = hg::fit_hyperbolic(*rs.per_capita, window);
            return fit;
        }
        hg::raise(hg::ErrorKind::unknown_region,
                  "region '" + region +
                      "' has neither GDP+population nor a GDP_per_capita series");
    }
    const std::optional<hg::TimeSeries>& series = rs.by(quantity);
    if (!series) {
        hg::raise(hg::ErrorKind::unknown_region, "region '" + region + "' has no " +
                                                     hg::to_token(quantity) + " series");
    }
    fit.kind = "hyperbolic";
    fit.direct = hg::fit_hyperbolic(*series, window);
    return fit;
}

std::vector<std::string> select_regions(const hg::RegionalDataset& dataset,
                                        const std::vector<std::string>& requested,
                                        hg::Quantity quantity) {
    if (!requested.empty()) {
        std::vector<std::string> sorted = requested;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (const std::string& r : sorted) require_region(dataset, r);
        return sorted;
    }
    std::vector<std::string> out;
    for (const auto& [name, rs] : dataset.regions) {
        if (quantity == hg::Quantity::gdp_per_capita) {
            if (rs.per_capita || (rs.gdp && rs.population)) out.push_back(name);
        } else if (rs.by(quantity)) {
            out.push_back(name);
        }
    }
    if (out.empty()) {
        hg::raise(hg::ErrorKind::unknown_region,
                  std::string("no region carries ") + hg::to_token(quantity) +
                      " data; available regions: " + available_regions(dataset));
    }
    return out;
}

void write_window_echo(std::ostream& out, const WindowSpec& windows) {
    if (windows.all) {
        out << "window_all " << fmt(windows.all->lo) << ' ' << fmt(windows.all->hi) << '\n';
    }
    for (const auto& [region, w] : windows.per_region) {
        out << "window " << fmt(w.lo) << ' ' << fmt(w.hi) << ' ' << region << '\n';
    }
}

void write_fit_block(std::ostream& out, const RegionFit& fit) {
    out << "region " << fit.region << '\n';
    out << "quantity " << hg::to_token(fit.quantity) << '\n';
    out << "fit_kind " << fit.kind << '\n';
    out << "window " << fmt(fit.window().lo) << ' ' << fmt(fit.window().hi) << '\n';
    const hg::ModulatedHyperbolicModel model = fit.model();
    out << "numerator_a " << fmt(model.numerator().a) << '\n';
    out << "numerator_k " << fmt(model.numerator().k) << '\n';
    out << "denominator_a " << fmt(model.denominator().a) << '\n';
    out << "denominator_k " << fmt(model.denominator().k) << '\n';
    if (const std::optional<double> sing = model.singularity_time()) {
        out << "singularity_year " << fmt(*sing) << '\n';
    } else {
        out << "singularity_year none\n";
    }
    if (fit.ratio) {
        out << "gdp_r_squared_reciprocal " << fmt(fit.ratio->gdp_fit.r_squared_reciprocal)
            << '\n';
        out << "population_r_squared_reciprocal "
            << fmt(fit.ratio->population_fit.r_squared_reciprocal) << '\n';
    } else {
        out << "r_squared_reciprocal " << fmt(fit.direct->r_squared_reciprocal) << '\n';
    }
    out << "rms_relative_residual " << fmt(fit.rms_relative_residual()) << '\n';
    const std::vector<hg::TimeValue>& residuals =
        fit.ratio ? fit.ratio->residuals : fit.direct->residuals;
    for (const hg::TimeValue& r : residuals) {
        out << "residual " << fmt(r.t) << ' ' << fmt(r.value) << '\n';
    }
    out << "end\n";
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
    std::string input;
    std::string output;
    std::string layout = "horizontal";
    std::string quantity = "GDP_per_capita";
    std::string unit;
    std::string provenance;
    std::string year_column;
    std::vector<std::string> region_columns;
    std::string append_to;
};

void run_ingest(const IngestOptions& opt) {
    hg::IngestManifest manifest;
    if (opt.layout == "horizontal") {
        manifest.layout = hg::CsvLayout::maddison_horizontal;
        if (opt.unit.empty()) {
            config_error("--unit is required for the horizontal layout");
        }
    } else if (opt.layout == "tidy") {
        manifest.layout = hg::CsvLayout::tidy;
    } else {
        config_error("unknown layout '" + opt.layout + "' (expected horizontal or tidy)");
    }
    manifest.quantity = parse_quantity(opt.quantity);
    manifest.unit = opt.unit;
    manifest.provenance = opt.provenance;
    manifest.year_column = opt.year_column;
    manifest.region_columns = opt.region_columns;

    hg::IngestResult result = hg::ingest_csv_file(opt.input, manifest);
    hg::RegionalDataset dataset;
    if (!opt.append_to.empty()) {
        dataset = hg::load_dataset_file(opt.append_to);
        hg::merge_dataset(dataset, std::move(result.dataset));
    } else {
        dataset = std::move(result.dataset);
    }
    hg::save_dataset_file(dataset, opt.output);

    std::size_t series = 0;
    std::size_t points = 0;
    for (const auto& [name, rs] : dataset.regions) {
        series += rs.series_count();
        for (hg::Quantity q :
             {hg::Quantity::gdp, hg::Quantity::population, hg::Quantity::gdp_per_capita}) {
            if (rs.by(q)) points += rs.by(q)->points.size();
        }
    }
    std::cout << "ingested " << opt.input << ": regions=" << dataset.regions.size()
              << " series=" << series << " points=" << points
              << " skipped_cells=" << result.skipped_cells << '\n';
    for (const hg::SkippedCell& cell : result.skipped) {
        std::cout << "skipped row=" << cell.row << " column=" << cell.column << " content="
                  << cell.content << '\n';
    }
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
    std::string dataset;
    std::string output;
    std::string quantity = "GDP_per_capita";
    std::vector<std::string> regions;
    std::vector<std::string> window_flags;
    std::string window_all;
    long seed = 0;
};

void run_fit(const FitOptions& opt) {
    const hg::RegionalDataset dataset = hg::load_dataset_file(opt.dataset);
    const hg::Quantity quantity = parse_quantity(opt.quantity);
    const WindowSpec windows = parse_windows(opt.window_flags, opt.window_all);
    const std::vector<std::string> regions = select_regions(dataset, opt.regions, quantity);

    std::ofstream out = open_output(opt.output);
    out << kReportSchema << '\n';
    out << "command fit\n";
    out << "seed " << opt.seed << '\n';
    out << "dataset " << opt.dataset << '\n';
    out << "quantity " << hg::to_token(quantity) << '\n';
    write_window_echo(out, windows);
    for (const std::string& region : regions) {
        write_fit_block(out, fit_region(dataset, region, quantity, windows.for_region(region)));
    }
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseOptions {
    std::string dataset;
    std::string output;
    std::string quantity = "GDP_per_capita";
    std::vector<std::string> regions;
    std::vector<std::string> window_flags;
    std::string window_all;
    double jump_ratio = hg::kDefaultTakeoffJumpRatio;
    double flat_fraction = hg::kDefaultMinFlatFraction;
    double delta = hg::kDefaultDepartureTolerance;
    std::size_t min_run = hg::kDefaultDepartureRunLength;
    double linear_tolerance = hg::kDefaultSemilogLinearTolerance;
    long seed = 0;
};

const hg::TimeSeries& diagnostic_series(const hg::RegionalDataset& dataset,
                                        const std::string& region, hg::Quantity quantity,
                                        std::map<std::string, hg::TimeSeries>& computed) {
    const hg::RegionSeries& rs = require_region(dataset, region);
    if (const std::optional<hg::TimeSeries>& s = rs.by(quantity)) return *s;
    if (quantity == hg::Quantity::gdp_per_capita) {
        std::optional<hg::TimeSeries> pc = observed_per_capita(rs, region);
        if (pc) {
            return computed.emplace(region, std::move(*pc)).first->second;
        }
    }
    hg::raise(hg::ErrorKind::unknown_region,
              "region '" + region + "' has no " + hg::to_token(quantity) + " data");
}

void run_diagnose(const DiagnoseOptions& opt) {
    const hg::RegionalDataset dataset = hg::load_dataset_file(opt.dataset);
    const hg::Quantity quantity = parse_quantity(opt.quantity);
    const WindowSpec windows = parse_windows(opt.window_flags, opt.window_all);
    const std::vector<std::string> regions = select_regions(dataset, opt.regions, quantity);

    std::ofstream out = open_output(opt.output);
    out << kReportSchema << '\n';
    out << "command diagnose\n";
    out << "seed " << opt.seed << '\n';
    out << "dataset " << opt.dataset << '\n';
    out << "quantity " << hg::to_token(quantity) << '\n';
    out << "takeoff_jump_ratio " << fmt(opt.jump_ratio) << '\n';
    out << "takeoff_min_flat_fraction " << fmt(opt.flat_fraction) << '\n';
    out << "departure_tolerance " << fmt(opt.delta) << '\n';
    out << "departure_min_run " << opt.min_run << '\n';
    out << "semilog_linear_tolerance " << fmt(opt.linear_tolerance) << '\n';
    write_window_echo(out, windows);

    std::map<std::string, hg::TimeSeries> computed;
    for (const std::string& region : regions) {
        const hg::TimeSeries& series = diagnostic_series(dataset, region, quantity, computed);
        const RegionFit fit =
            fit_region(dataset, region, quantity, windows.for_region(region));
        const hg::ModulatedHyperbolicModel model = fit.model();

        out << "region " << region << '\n';
        const hg::MonotonicityReport mono = hg::check_monotonic(series);
        out << "monotonic "
            << (mono.verdict == hg::Monotonicity::monotone_increasing ? "yes" : "no") << '\n';
        for (double year : mono.violation_years) {
            out << "violation " << fmt(year) << '\n';
        }

        const hg::TakeoffScanReport takeoff =
            hg::scan_takeoff(series, opt.jump_ratio, opt.flat_fraction);
        out << "takeoff_verdict "
            << (takeoff.verdict == hg::TakeoffVerdict::candidate ? "candidate" : "none") << '\n';
        if (takeoff.candidate_time) {
            out << "takeoff_candidate_year " << fmt(*takeoff.candidate_time) << '\n';
        }
        out << "max_adjacent_rate_jump " << fmt(takeoff.max_adjacent_rate_jump) << '\n';

        const hg::DepartureReport departure =
            hg::detect_departure(series, model, opt.delta, opt.min_run);
        if (departure.departure_time) {
            out << "departure_year " << fmt(*departure.departure_time) << '\n';
            out << "departure_direction " << hg::to_string(*departure.direction) << '\n';
        } else {
            out << "departure_year none\n";
        }
        out << "departure_run_length " << departure.run_length << '\n';

        const hg::SemilogProfile semilog = hg::semilog_profile(series, opt.linear_tolerance);
        out << "semilog_classification " << hg::to_string(semilog.classification) << '\n';
        out << "convexity_index " << fmt(semilog.convexity_index) << '\n';
        out << "end\n";
    }
}

// ---------------------------------------------------------------------------
// distort

struct DistortOptions {
    std::string output_prefix;
    std::string grid = "0,150,179.6";
    std::vector<std::string> models;
    std::string hyperbola;
    std::size_t dense = hg::kDefaultDensePlotPoints;
    long seed = 0;
};

void write_curve_table(const std::string& path, const std::vector<std::vector<hg::TimeValue>>& curves,
                       bool log_scale) {
    std::ofstream out = open_output(path);
    out << "x";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        out << ',' << (log_scale ? "ln_f" : "f") << (c + 1);
    }
    out << '\n';
    for (std::size_t i = 0; i < curves.front().size(); ++i) {
        out << fmt(curves.front()[i].t);
        for (const auto& curve : curves) {
            out << ',' << fmt(log_scale ? std::log(curve[i].value) : curve[i].value);
        }
        out << '\n';
    }
}

void run_distort(const DistortOptions& opt) {
    const std::vector<double> grid = parse_double_list(opt.grid, "--grid abscissa");

    if (!opt.hyperbola.empty()) {
        // Single-curve mode: caricature one hyperbola and report its index.
        const std::vector<double> ak = parse_double_list(opt.hyperbola, "--hyperbola parameter");
        if (ak.size() != 2) config_error("--hyperbola expects 'a,k'");
        const hg::HyperbolicModel curve(ak[0], ak[1]);
        const hg::PiecewiseLinearCurve poly = hg::sample_and_join(curve, grid);

        std::ofstream report = open_output(opt.output_prefix + "report.txt");
        report << kReportSchema << '\n';
        report << "command distort\n";
        report << "seed " << opt.seed << '\n';
        report << "mode single-curve\n";
        report << "grid";
        for (double x : grid) report << ' ' << fmt(x);
        report << '\n';
        report << "hyperbola_a " << fmt(ak[0]) << '\n';
        report << "hyperbola_k " << fmt(ak[1]) << '\n';
        report << "phantom_takeoff_index " << fmt(hg::phantom_takeoff_index(poly)) << '\n';
        report << "end\n";

        write_curve_table(opt.output_prefix + "polyline_knots.csv", {poly.knots()}, false);
        return;
    }

    std::vector<hg::ModulatedHyperbolicModel> models;
    if (opt.models.empty()) {
        models = hg::default_demo_models();
    } else {
        for (const std::string& spec : opt.models) {
            const std::vector<double> p = parse_double_list(spec, "--model parameter");
            if (p.size() != 4) config_error("--model expects 'aP,kP,aG,kG'");
            models.emplace_back(hg::ReciprocalLine{p[0], p[1]}, hg::ReciprocalLine{p[2], p[3]});
        }
    }

    const hg::DistortionResult result = hg::distort_family(models, grid, opt.dense);

    std::ofstream report = open_output(opt.output_prefix + "report.txt");
    report << kReportSchema << '\n';
    report << "command distort\n";
    report << "seed " << opt.seed << '\n';
    report << "mode family\n";
    report << "grid";
    for (double x : result.sample_xs) report << ' ' << fmt(x);
    report << '\n';
    report << "dense_points " << opt.dense << '\n';
    for (const hg::ModulatedHyperbolicModel& m : models) {
        report << "model " << fmt(m.numerator().a) << ' ' << fmt(m.numerator().k) << ' '
               << fmt(m.denominator().a) << ' ' << fmt(m.denominator().k) << '\n';
    }
    for (double index : result.phantom_takeoff_indices) {
        report << "phantom_takeoff_index " << fmt(index) << '\n';
    }
    report << "phantom_divergence_index " << fmt(result.phantom_divergence) << '\n';
    report << "end\n";

    write_curve_table(opt.output_prefix + "originals_linear.csv", result.dense_originals, false);
    write_curve_table(opt.output_prefix + "originals_semilog.csv", result.dense_originals, true);

    std::vector<std::vector<hg::TimeValue>> knot_rows;
    for (const hg::PiecewiseLinearCurve& poly : result.distorted) {
        knot_rows.push_back(poly.knots());
    }
    write_curve_table(opt.output_prefix + "polylines_knots.csv", knot_rows, false);

    // Dense resample of the polylines so the straight segments are visible in
    // both projections.
    std::vector<std::vector<hg::TimeValue>> poly_dense(result.distorted.size());
    const double lo = result.sample_xs.front();
    const double hi = result.sample_xs.back();
    for (std::size_t i = 0; i < opt.dense; ++i) {
        const double x =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opt.dense - 1);
        for (std::size_t c = 0; c < result.distorted.size(); ++c) {
            poly_dense[c].push_back({x, result.distorted[c].value(x)});
        }
    }
    write_curve_table(opt.output_prefix + "polylines_linear.csv", poly_dense, false);
    write_curve_table(opt.output_prefix + "polylines_semilog.csv", poly_dense, true);
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
    std::string dataset;
    std::string output;
    std::string quantity = "GDP_per_capita";
    std::vector<std::string> window_flags;
    std::string window_all;
    double r_max = hg::kDefaultMaxAlignmentRms;
    double singularity_window = hg::kDefaultSingularityWindowYears;
    double lag_min = -200.0;
    double lag_max = 200.0;
    double lag_step = 1.0;
    std::string reference;
    std::vector<std::string> exclude;
    std::vector<std::string> include;
    std::string years;
    long seed = 0;
};

void run_compare(const CompareOptions& opt) {
    const hg::RegionalDataset dataset = hg::load_dataset_file(opt.dataset);
    const hg::Quantity quantity = parse_quantity(opt.quantity);
    if (quantity != hg::Quantity::gdp_per_capita) {
        config_error("compare operates on GDP_per_capita data");
    }
    const WindowSpec windows = parse_windows(opt.window_flags, opt.window_all);

    // Regions excluded from fitting (but not from ratio/spread): the flagged
    // poor-quality set by default, adjustable per run.
    std::set<std::string> excluded = {"Western Offshoots"};
    for (const std::string& name : opt.exclude) excluded.insert(name);
    for (const std::string& name : opt.include) excluded.erase(name);

    // Augment the dataset with computed per-capita series so both the fits
    // and the ratio/spread tables see every region that can report one.
    hg::RegionalDataset augmented = dataset;
    for (auto& [name, rs] : augmented.regions) {
        if (!rs.per_capita) {
            if (std::optional<hg::TimeSeries> pc = observed_per_capita(rs, name)) {
                rs.per_capita = std::move(*pc);
            }
        }
    }

    std::map<std::string, hg::ModulatedHyperbolicModel> fits;
    std::map<std::string, RegionFit> fit_details;
    for (const auto& [name, rs] : augmented.regions) {
        if (excluded.count(name) != 0 || !rs.per_capita) continue;
        RegionFit fit = fit_region(augmented, name, quantity, windows.for_region(name));
        fits.emplace(name, fit.model());
        fit_details.emplace(name, std::move(fit));
    }
    if (fits.size() < 2) {
        hg::raise(hg::ErrorKind::quorum,
                  "compare needs at least 2 fittable regions with per-capita data; available "
                  "regions: " +
                      available_regions(dataset));
    }

    hg::DivergenceThresholds thresholds;
    thresholds.max_alignment_rms = opt.r_max;
    thresholds.singularity_window_years = opt.singularity_window;
    thresholds.lag_range = hg::LagRange{opt.lag_min, opt.lag_max, opt.lag_step};
    if (!opt.reference.empty()) thresholds.reference_region = opt.reference;

    const hg::DivergenceReport report = hg::divergence_verdict(augmented, fits, thresholds);

    std::ofstream out = open_output(opt.output);
    out << kReportSchema << '\n';
    out << "command compare\n";
    out << "seed " << opt.seed << '\n';
    out << "dataset " << opt.dataset << '\n';
    out << "quantity " << hg::to_token(quantity) << '\n';
    out << "max_alignment_rms " << fmt(opt.r_max) << '\n';
    out << "singularity_window_years " << fmt(opt.singularity_window) << '\n';
    out << "lag_min " << fmt(opt.lag_min) << '\n';
    out << "lag_max " << fmt(opt.lag_max) << '\n';
    out << "lag_step " << fmt(opt.lag_step) << '\n';
    write_window_echo(out, windows);
    for (const std::string& name : excluded) {
        out << "excluded " << name << '\n';
    }
    out << "reference " << report.reference_region << '\n';
    out << "verdict " << hg::to_string(report.verdict) << '\n';
    for (const auto& entry : report.lag_table) {
        out << "align " << fmt(entry.lag) << ' ' << fmt(entry.rms_log_residual) << ' '
            << entry.region << '\n';
    }
    for (const auto& [name, sing] : report.singularity_times) {
        out << "singularity " << (sing ? fmt(*sing) : std::string("none")) << ' ' << name << '\n';
    }
    for (const auto& [name, grad] : report.terminal_gradients) {
        out << "terminal_gradient " << fmt(grad) << ' ' << name << '\n';
    }
    for (const auto& [name, fit] : fit_details) {
        const hg::ModulatedHyperbolicModel model = fit.model();
        out << "fit " << fmt(model.numerator().a) << ' ' << fmt(model.numerator().k) << ' '
            << fmt(model.denominator().a) << ' ' << fmt(model.denominator().k) << ' ' << name
            << '\n';
    }
    for (const hg::RatioRow& row : report.ratio_series) {
        out << "ratio " << fmt(row.year) << ' ' << fmt(row.richest) << ' ' << fmt(row.poorest)
            << ' ' << fmt(row.ratio) << '\n';
    }
    for (const hg::TimeValue& s : report.spread_series) {
        out << "spread " << fmt(s.t) << ' ' << fmt(s.value) << '\n';
    }
    for (double year : report.spread_skipped_years) {
        out << "skipped_year " << fmt(year) << '\n';
    }
    if (!opt.years.empty()) {
        const std::vector<double> years = parse_double_list(opt.years, "--years year");
        const std::vector<hg::RatioRow> rows =
            hg::richest_poorest_ratio(augmented, quantity, years);
        for (const hg::RatioRow& row : rows) {
            out << "ratio_at " << fmt(row.year) << ' ' << fmt(row.richest) << ' '
                << fmt(row.poorest) << ' ' << fmt(row.ratio) << '\n';
        }
    }
    out << "end\n";
}

// ---------------------------------------------------------------------------
// plotdata

struct PlotdataOptions {
    std::string dataset;
    std::string output_prefix;
    std::string quantity = "GDP_per_capita";
    std::vector<std::string> regions;
    std::vector<std::string> window_flags;
    std::string window_all;
    std::size_t dense = hg::kDefaultDensePlotPoints;
    long seed = 0;
};

void run_plotdata(const PlotdataOptions& opt) {
    if (opt.dense < 2) config_error("--dense must be at least 2");
    const hg::RegionalDataset dataset = hg::load_dataset_file(opt.dataset);
    const hg::Quantity quantity = parse_quantity(opt.quantity);
    const WindowSpec windows = parse_windows(opt.window_flags, opt.window_all);
    const std::vector<std::string> regions = select_regions(dataset, opt.regions, quantity);

    std::map<std::string, hg::TimeSeries> computed;
    for (const std::string& region : regions) {
        const hg::TimeSeries& series = diagnostic_series(dataset, region, quantity, computed);
        const RegionFit fit =
            fit_region(dataset, region, quantity, windows.for_region(region));
        const hg::ModulatedHyperbolicModel model = fit.model();

        // Rows: dense model grid from the first observation to the guard
        // band (or the last observation when the fit has no singularity),
        // merged with the observation years.
        const double lo = series.points.front().t;
        const double bound = model.domain_upper_bound();
        const double hi = std::isfinite(bound)
                              ? std::max(bound * (1.0 - 1e-12), series.points.back().t)
                              : series.points.back().t;
        std::map<double, std::pair<std::optional<double>, std::optional<double>>> rows;
        for (std::size_t i = 0; i < opt.dense; ++i) {
            const double t =
                lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opt.dense - 1);
            if (model.in_domain(t)) rows[t].second = model.value(t);
        }
        for (const hg::TimeValue& p : series.points) {
            auto& row = rows[p.t];
            row.first = p.value;
            if (model.in_domain(p.t)) row.second = model.value(p.t);
        }

        const std::string slug = region_slug(region);
        std::ofstream linear = open_output(opt.output_prefix + slug + "_linear.csv");
        linear << "t,observed,fitted\n";
        for (const auto& [t, row] : rows) {
            linear << fmt(t) << ',' << (row.first ? fmt(*row.first) : std::string()) << ','
                   << (row.second ? fmt(*row.second) : std::string()) << '\n';
        }
        std::ofstream semilog = open_output(opt.output_prefix + slug + "_semilog.csv");
        semilog << "t,ln_observed,ln_fitted\n";
        for (const auto& [t, row] : rows) {
            semilog << fmt(t) << ','
                    << (row.first ? fmt(std::log(*row.first)) : std::string()) << ','
                    << (row.second ? fmt(std::log(*row.second)) : std::string()) << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperbolic growth analysis toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "configuration file (flags win over file values)")
        ->envname("HYPERGROWTH_CONFIG");

    long seed = 0;
    app.add_option("--seed", seed, "seed echoed into reports")->capture_default_str();

    IngestOptions ingest;
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "read a CSV export into a dataset");
    ingest_cmd->add_option("--input", ingest.input, "CSV file")->required();
    ingest_cmd->add_option("--output", ingest.output, "dataset document to write")->required();
    ingest_cmd->add_option("--layout", ingest.layout, "horizontal or tidy")
        ->capture_default_str();
    ingest_cmd->add_option("--quantity", ingest.quantity, "quantity of a horizontal file")
        ->capture_default_str();
    ingest_cmd->add_option("--unit", ingest.unit, "unit label of a horizontal file");
    ingest_cmd->add_option("--provenance", ingest.provenance, "dataset provenance label");
    ingest_cmd->add_option("--year-column", ingest.year_column, "year column name");
    ingest_cmd->add_option("--region-column", ingest.region_columns,
                           "region columns to keep (default: all)");
    ingest_cmd->add_option("--append", ingest.append_to, "existing dataset to merge into");

    FitOptions fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit growth models per region");
    fit_cmd->add_option("--dataset", fit.dataset, "dataset document")->required();
    fit_cmd->add_option("--output", fit.output, "report file")->required();
    fit_cmd->add_option("--quantity", fit.quantity, "series to fit")->capture_default_str();
    fit_cmd->add_option("--region", fit.regions, "regions (default: all with data)");
    fit_cmd->add_option("--window", fit.window_flags, "per-region fit window REGION=LO:HI");
    fit_cmd->add_option("--window-all", fit.window_all, "fit window LO:HI for every region");

    DiagnoseOptions diagnose;
    CLI::App* diagnose_cmd =
        app.add_subcommand("diagnose", "monotonicity, takeoff, departure and semilog checks");
    diagnose_cmd->add_option("--dataset", diagnose.dataset, "dataset document")->required();
    diagnose_cmd->add_option("--output", diagnose.output, "report file")->required();
    diagnose_cmd->add_option("--quantity", diagnose.quantity, "series to diagnose")
        ->capture_default_str();
    diagnose_cmd->add_option("--region", diagnose.regions, "regions (default: all with data)");
    diagnose_cmd->add_option("--window", diagnose.window_flags,
                             "per-region fit window REGION=LO:HI");
    diagnose_cmd->add_option("--window-all", diagnose.window_all, "fit window for every region");
    diagnose_cmd->add_option("--jump-ratio", diagnose.jump_ratio, "takeoff jump-ratio threshold")
        ->capture_default_str();
    diagnose_cmd
        ->add_option("--flat-fraction", diagnose.flat_fraction,
                     "fraction of the record that must precede a takeoff")
        ->capture_default_str();
    diagnose_cmd->add_option("--delta", diagnose.delta, "departure residual tolerance")
        ->capture_default_str();
    diagnose_cmd->add_option("--min-run", diagnose.min_run, "departure minimum run length")
        ->capture_default_str();
    diagnose_cmd
        ->add_option("--linear-tolerance", diagnose.linear_tolerance,
                     "semilog affine classification tolerance")
        ->capture_default_str();

    DistortOptions distort;
    CLI::App* distort_cmd =
        app.add_subcommand("distort", "sample smooth curves, join them and emit the artifacts");
    distort_cmd->add_option("--output-prefix", distort.output_prefix, "prefix for output files")
        ->required();
    distort_cmd->add_option("--grid", distort.grid, "sample abscissae, comma separated")
        ->capture_default_str();
    distort_cmd->add_option("--model", distort.models,
                            "curve parameters aP,kP,aG,kG (repeatable; default: demo trio)");
    distort_cmd->add_option("--hyperbola", distort.hyperbola,
                            "single-curve mode: hyperbola parameters a,k");
    distort_cmd->add_option("--dense", distort.dense, "dense grid size")->capture_default_str();

    CompareOptions compare;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "cross-region ratios, spread, alignment and verdict");
    compare_cmd->add_option("--dataset", compare.dataset, "dataset document")->required();
    compare_cmd->add_option("--output", compare.output, "report file")->required();
    compare_cmd->add_option("--quantity", compare.quantity, "series to compare")
        ->capture_default_str();
    compare_cmd->add_option("--window", compare.window_flags,
                            "per-region fit window REGION=LO:HI");
    compare_cmd->add_option("--window-all", compare.window_all, "fit window for every region");
    compare_cmd->add_option("--r-max", compare.r_max, "max alignment rms (log units)")
        ->capture_default_str();
    compare_cmd
        ->add_option("--singularity-window", compare.singularity_window,
                     "max spread of fitted singularity years")
        ->capture_default_str();
    compare_cmd->add_option("--lag-min", compare.lag_min, "lag grid lower bound")
        ->capture_default_str();
    compare_cmd->add_option("--lag-max", compare.lag_max, "lag grid upper bound")
        ->capture_default_str();
    compare_cmd->add_option("--lag-step", compare.lag_step, "lag grid step")
        ->capture_default_str();
    compare_cmd->add_option("--reference", compare.reference,
                            "reference region (default: furthest ahead)");
    compare_cmd->add_option("--exclude", compare.exclude,
                            "regions excluded from fitting (adds to the default)");
    compare_cmd->add_option("--include", compare.include,
                            "regions to re-include despite the default exclusion");
    compare_cmd->add_option("--years", compare.years,
                            "comma-separated years for the ratio_at table");

    PlotdataOptions plotdata;
    CLI::App* plotdata_cmd =
        app.add_subcommand("plotdata", "per-region observed + fitted curves, both projections");
    plotdata_cmd->add_option("--dataset", plotdata.dataset, "dataset document")->required();
    plotdata_cmd->add_option("--output-prefix", plotdata.output_prefix, "prefix for CSV files")
        ->required();
    plotdata_cmd->add_option("--quantity", plotdata.quantity, "series to plot")
        ->capture_default_str();
    plotdata_cmd->add_option("--region", plotdata.regions, "regions (default: all with data)");
    plotdata_cmd->add_option("--window", plotdata.window_flags,
                             "per-region fit window REGION=LO:HI");
    plotdata_cmd->add_option("--window-all", plotdata.window_all, "fit window for every region");
    plotdata_cmd->add_option("--dense", plotdata.dense, "dense grid size")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    fit.seed = diagnose.seed = distort.seed = compare.seed = plotdata.seed = seed;
    try {
        if (*ingest_cmd) run_ingest(ingest);
        if (*fit_cmd) run_fit(fit);
        if (*diagnose_cmd) run_diagnose(diagnose);
        if (*distort_cmd) run_distort(distort);
        if (*compare_cmd) run_compare(compare);
        if (*plotdata_cmd) run_plotdata(plotdata);
    } catch (const hg::Error& e) {
        std::cerr << "error (" << hg::to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
