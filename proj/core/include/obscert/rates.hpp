#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "obscert/errors.hpp"

namespace obscert {

enum class RateKind { Polynomial, Exponential, LogPower, LogLogPower, Affine, Composite, Inverse, Custom };

// Growth class at infinity: r(λ) ≍ λ^p (ln λ)^q (ln ln λ)^w, or faster than any power.
struct Asymptotics {
    enum class Class { Power, Exponential, Unknown };
    Class cls = Class::Unknown;
    double p = 0.0;
    double q = 0.0;
    double w = 0.0;

    static Asymptotics power(double p, double q = 0.0, double w = 0.0) { return {Class::Power, p, q, w}; }
    static Asymptotics exponential() { return {Class::Exponential, 0.0, 0.0, 0.0}; }
    static Asymptotics unknown() { return {}; }
};

struct CustomRate {
    std::function<double(double)> evaluate;
    std::function<double(double)> inverse;  // optional
    bool increasing = false;
    bool bijective = false;
    Asymptotics at_infinity;
    double power_at_zero = NAN;  // b with r(t) ≍ t^b as t → 0+, NaN when unknown
    double max_log_arg = 700.0;  // evaluate is trusted for ln λ up to this value
    std::string label = "custom";
};

class RateFunction {
public:
    struct Node;

    // c·λ^γ
    static RateFunction polynomial(double c, double gamma);
    // c·e^λ
    static RateFunction exponential(double c = 1.0);
    // λ·(ln(1+λ))^s
    static RateFunction log_power(double s);
    // λ·ln(1+λ)·(ln(1+ln(1+λ)))^s
    static RateFunction log_log_power(double s);
    // a + b·λ
    static RateFunction affine(double b, double a = 0.0);
    static RateFunction identity() { return polynomial(1.0, 1.0); }
    // outer∘inner without simplification; prefer compose().
    static RateFunction composite(const RateFunction& outer, const RateFunction& inner);
    static RateFunction custom(CustomRate spec);

    RateKind kind() const;
    double operator()(double lambda) const { return evaluate(lambda); }
    double evaluate(double lambda) const;
    // ln r(e^L)
    double log_value(double L) const;
    // ln(r(e^L)/e^L), computed without cancellation for the closed kinds
    double log_excess(double L) const;
    double inverse(double y) const;
    // ln r^{-1}(e^Y)
    double log_inverse(double Y) const;
    bool has_inverse_hint() const;

    bool increasing() const;
    bool bijective() const;
    bool is_identity() const;
    // No custom callables anywhere in the expression tree.
    bool closed_form() const;
    double domain_floor() const;
    RateFunction with_domain_floor(double floor) const;
    Asymptotics asymptotics() const;
    double power_at_zero() const;
    double max_log_arg() const;
    std::string describe() const;

    // Parameters of the closed kinds (NaN when not applicable).
    double param_c() const;
    double param_gamma() const;
    double param_s() const;
    double param_a() const;
    double param_b() const;
    const RateFunction& outer() const;
    const RateFunction& inner() const;

    explicit RateFunction(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

private:
    std::shared_ptr<const Node> node_;
};

// outer∘inner with algebraic simplification of power and identity factors.
RateFunction compose(const RateFunction& outer, const RateFunction& inner);
// f^{-1} as a rate function.
RateFunction inverse_rate(const RateFunction& f);
// κ·g
RateFunction scale(const RateFunction& g, double kappa);

double invert(const RateFunction& r, double y);

struct GeometricGrid {
    double lo = 1e-6;
    double hi = 1e12;
    int points = 512;
};

struct MonotoneRatioResult {
    bool ok = true;
    int first_violation = -1;  // index i with ratio(i+1) > ratio(i)
    double lambda_lo = NAN;
    double lambda_hi = NAN;
    double log_ratio_lo = NAN;
    double log_ratio_hi = NAN;
};

// λ ↦ λ/g(f^{-1}(λ)) non-increasing on the grid.
MonotoneRatioResult check_monotone_ratio(const RateFunction& f, const RateFunction& g, const GeometricGrid& grid = {});

struct TailResult {
    double value = NAN;
    bool divergent = false;
    bool analytic = false;  // divergence decided from the growth classes, not the panel heuristic
    std::string reason;
    int panels = 0;
};

TailResult tail_integral(const RateFunction& f, const RateFunction& g, const RateFunction& h, double a, double m = 0.0);
TailResult tail_integral_log(const RateFunction& f, const RateFunction& g, const RateFunction& h, double log_a, double m = 0.0);

struct AdmissibilityReport {
    bool monotone_ratio_ok = false;
    bool integrable_ok = false;
    std::optional<double> lambda_T;
    double log_lambda_T = NAN;  // −inf when λ_T = 0
    double threshold = NAN;
    double T = NAN;
    double m = 0.0;
    double tail_at_lambda_T = NAN;
    MonotoneRatioResult ratio;
    std::string divergence;  // empty unless the tail integral diverged
    bool divergence_analytic = false;
    std::vector<std::string> warnings;
    std::string rejection;  // human-readable reason when lambda_T is absent

    bool admissible() const { return lambda_T.has_value(); }
};

class NotAdmissible : public Error {
public:
    explicit NotAdmissible(AdmissibilityReport r)
        : Error("not admissible: " + r.rejection), report_(std::move(r)) {}
    const AdmissibilityReport& report() const noexcept { return report_; }

private:
    AdmissibilityReport report_;
};

struct SolveOptions {
    GeometricGrid grid;
    double domain_floor = 1e-12;
};

AdmissibilityReport solve_lambda_T(const RateFunction& f, const RateFunction& g, const RateFunction& h, double T,
                                   double m = 0.0, const SolveOptions& opts = {});

inline double threshold_for(double T) { return std::log(2.0) / 4.0 * std::min(1.0, T); }

}  // namespace obscert
