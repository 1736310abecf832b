#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <sstream>

#include "hypergrowth/errors.hpp"

namespace hypergrowth {

/// Relative half-width of the refusal band around a singularity. Evaluation
/// within guard * |singularity time| of the blow-up is a domain_error rather
/// than a platform-dependent overflow.
inline constexpr double kSingularityGuard = 1e-9;

/// Declining affine law u(t) = a - k*t, the reciprocal of a hyperbolic
/// trajectory. a > 0 and k >= 0; k == 0 degenerates to a constant.
struct ReciprocalLine {
    double a = 1.0;
    double k = 0.0;

    double operator()(double t) const { return a - k * t; }

    /// Year at which the line reaches zero (none for k == 0).
    std::optional<double> root() const {
        if (k == 0.0) return std::nullopt;
        return a / k;
    }

    /// Largest admissible year: strictly below the root, outside the guard
    /// band. +infinity when the line never reaches zero.
    double guarded_upper_bound() const {
        if (k == 0.0) return std::numeric_limits<double>::infinity();
        const double r = a / k;
        return r * (1.0 - kSingularityGuard);
    }

    bool admits(double t) const {
        if (!std::isfinite(t)) return false;
        if (k == 0.0) return true;
        const double r = a / k;
        // Refuse anything within the guard band of the root.
        return r - t > kSingularityGuard * r;
    }
};

inline void validate_line(const ReciprocalLine& line, const char* what) {
    if (!(line.a > 0.0) || !std::isfinite(line.a)) {
        std::ostringstream os;
        os << what << ": intercept a must be positive and finite, got " << line.a;
        raise(ErrorKind::invalid_argument, os.str());
    }
    if (!(line.k >= 0.0) || !std::isfinite(line.k)) {
        std::ostringstream os;
        os << what << ": decline rate k must be non-negative and finite, got " << line.k;
        raise(ErrorKind::invalid_argument, os.str());
    }
}

/// Two-parameter growth law S(t) = 1/(a - k*t): the reciprocal declines
/// linearly in time and the value blows up at the finite year a/k when k > 0.
/// Immutable after construction; all methods are pure.
class HyperbolicModel {
public:
    HyperbolicModel(double a, double k) : line_{a, k} {
        validate_line(line_, "HyperbolicModel");
    }

    explicit HyperbolicModel(const ReciprocalLine& line) : line_(line) {
        validate_line(line_, "HyperbolicModel");
    }

    double a() const { return line_.a; }
    double k() const { return line_.k; }
    const ReciprocalLine& reciprocal_line() const { return line_; }

    bool in_domain(double t) const { return line_.admits(t); }

    /// Largest admissible year (+infinity for a constant model).
    double domain_upper_bound() const { return line_.guarded_upper_bound(); }

    /// S(t) = 1/(a - k*t). Strictly positive and, for k > 0, strictly
    /// increasing on the valid domain.
    double value(double t) const {
        ensure_in_domain(t);
        return 1.0 / line_(t);
    }

    /// dS/dt = k * S(t)^2.
    double gradient(double t) const {
        const double s = value(t);
        return line_.k * s * s;
    }

    /// Relative growth rate (1/S) dS/dt = k/(a - k*t). Continuous and
    /// strictly increasing on the valid domain when k > 0: there is no
    /// interior point where it jumps.
    double growth_rate(double t) const {
        ensure_in_domain(t);
        return line_.k / line_(t);
    }

    /// Year a/k of the finite-time blow-up; none for a constant (k == 0).
    std::optional<double> singularity_time() const { return line_.root(); }

private:
    void ensure_in_domain(double t) const {
        if (!line_.admits(t)) {
            std::ostringstream os;
            os << "year " << t << " is at or beyond the singularity of 1/(" << line_.a << " - "
               << line_.k << "*t)";
            if (auto r = line_.root()) os << " at t = " << *r;
            raise(ErrorKind::domain_error, os.str());
        }
    }

    ReciprocalLine line_;
};

/// Ratio of two hyperbolic trajectories,
///   value(t) = (aP - kP*t) / (aG - kG*t),
/// i.e. GDP hyperbola divided by population hyperbola: the numerator is the
/// population's reciprocal line and the denominator the GDP's. This is the
/// per-capita trajectory family. The value blows up at the denominator root
/// aG/kG (the GDP singularity).
class ModulatedHyperbolicModel {
public:
    ModulatedHyperbolicModel(const ReciprocalLine& numerator, const ReciprocalLine& denominator)
        : num_(numerator), den_(denominator) {
        validate_line(num_, "ModulatedHyperbolicModel numerator");
        validate_line(den_, "ModulatedHyperbolicModel denominator");
    }

    /// Per-capita model from separately fitted GDP and population hyperbolas.
    static ModulatedHyperbolicModel from_components(const HyperbolicModel& gdp,
                                                    const HyperbolicModel& population) {
        return ModulatedHyperbolicModel(population.reciprocal_line(), gdp.reciprocal_line());
    }

    /// Degenerate wrapper: a plain hyperbola fitted directly to per-capita
    /// data, expressed as a ratio with a constant numerator.
    static ModulatedHyperbolicModel from_hyperbolic(const HyperbolicModel& per_capita) {
        return ModulatedHyperbolicModel(ReciprocalLine{1.0, 0.0}, per_capita.reciprocal_line());
    }

    const ReciprocalLine& numerator() const { return num_; }
    const ReciprocalLine& denominator() const { return den_; }

    /// The GDP hyperbola 1/(aG - kG*t) implied by the denominator.
    HyperbolicModel gdp_component() const { return HyperbolicModel(den_); }
    /// The population hyperbola 1/(aP - kP*t) implied by the numerator.
    HyperbolicModel population_component() const { return HyperbolicModel(num_); }

    bool in_domain(double t) const { return num_.admits(t) && den_.admits(t); }

    double domain_upper_bound() const {
        return std::min(num_.guarded_upper_bound(), den_.guarded_upper_bound());
    }

    double value(double t) const {
        ensure_in_domain(t);
        return num_(t) / den_(t);
    }

    /// Denominator root aG/kG: the year the per-capita value blows up.
    /// None when the GDP line is constant.
    std::optional<double> singularity_time() const { return den_.root(); }

private:
    void ensure_in_domain(double t) const {
        if (!in_domain(t)) {
            std::ostringstream os;
            os << "year " << t << " is outside the joint domain of (" << num_.a << " - " << num_.k
               << "*t)/(" << den_.a << " - " << den_.k << "*t)";
            raise(ErrorKind::domain_error, os.str());
        }
    }

    ReciprocalLine num_;
    ReciprocalLine den_;
};

/// Anything evaluable over a year range with an explicit validity test.
/// Satisfied by HyperbolicModel, ModulatedHyperbolicModel and
/// PiecewiseLinearCurve, so diagnostics and sampling work on all of them.
template <typename M>
concept GrowthCurve = requires(const M& m, double t) {
    { m.value(t) } -> std::convertible_to<double>;
    { m.in_domain(t) } -> std::convertible_to<bool>;
};

}  // namespace hypergrowth
