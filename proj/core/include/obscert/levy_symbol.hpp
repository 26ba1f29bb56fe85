#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "obscert/rates.hpp"

namespace obscert {

// ρ(‖x‖) for a radially symmetric Lévy density on ℝⁿ.
struct RadialDensity {
    enum class Kind { Indicator, PowerLaw, FractionalStable, Custom };
    Kind kind = Kind::Indicator;
    double scale = 1.0;     // multiplies the shape below
    double lo = 0.0;        // Indicator: support (lo, hi)
    double hi = 1.0;
    double exponent = 0.0;  // PowerLaw: ρ(r) = scale·r^exponent
    double alpha = 0.5;     // FractionalStable: ρ(r) = c_{n,α}·r^{-n-2α}
    std::function<double(double)> custom;
    double support_hi = std::numeric_limits<double>::infinity();  // Custom support hint

    double operator()(double r) const;
    // Closure of the support as [lo, hi).
    std::pair<double, double> support() const;
};

// 4^α Γ(n/2+α) / (π^{n/2} |Γ(−α)|)
double fractional_stable_constant(int n, double alpha);

// Lévy measure on ℝⁿ∖{0}.
struct LevyMeasureRn {
    enum class Kind { Zero, Radial, Atoms };
    Kind kind = Kind::Zero;
    RadialDensity rho;
    std::vector<std::pair<Eigen::VectorXd, double>> atoms;  // (x_i, w_i)
};

struct SymbolModel {
    enum class ClosedForm { None, FractionalLaplacian };

    int n = 1;
    double c = 0.0;
    Eigen::VectorXd d;  // empty means zero
    Eigen::MatrixXd Q;  // empty means zero
    LevyMeasureRn mu;
    ClosedForm closed_form = ClosedForm::None;
    double closed_alpha = 0.5;  // ψ(ξ) = closed_scale·‖ξ‖^{2α}
    double closed_scale = 1.0;

    static SymbolModel indicator(int n);
    // ρ(r) = r^{-n-2+ε}
    static SymbolModel power_law(int n, double eps);
    static SymbolModel fractional_stable(int n, double alpha);
    static SymbolModel gaussian(const Eigen::MatrixXd& Q);

    // Dimension, PSD and ∫ min(‖x‖², 1) μ(dx) < ∞ checks.
    void validate() const;
    double min_eig_Q() const;
};

// |S^{n-1}|
double sphere_area(int n);

std::complex<double> psi_eval(const SymbolModel& m, const Eigen::VectorXd& xi);
double re_psi(const SymbolModel& m, const Eigen::VectorXd& xi);
// Re ψ from the measure by quadrature, ignoring any closed-form tag.
double re_psi_quadrature(const SymbolModel& m, const Eigen::VectorXd& xi);
// ∫_{B(0,1/‖ξ‖)} ⟨ξ,x⟩² μ(dx)
double phi_quadratic(const SymbolModel& m, const Eigen::VectorXd& xi);
// μ(ℝⁿ∖B(0,1/‖ξ‖))
double tail_mass(const SymbolModel& m, const Eigen::VectorXd& xi);

struct SandwichResult {
    bool lower_ok = false;
    bool upper_ok = false;
    double phi = NAN;
    double re_psi = NAN;
    double tail = NAN;
    double lower = NAN;  // (11/24)φ
    double upper = NAN;  // 2(φ + tail)
};

SandwichResult sandwich_check(const SymbolModel& m, const Eigen::VectorXd& xi, double abs_tol = 1e-7,
                              double rel_tol = 1e-7);

struct DissipationOptions {
    int face_points = 64;    // per face axis
    int ray_directions = 64;
    int ray_samples = 24;    // geometric in [1, ray_span]
    double ray_span = 1e4;
    int shell_levels = 40;   // radii λ·2^j in the fallback search
};

struct DissipationResult {
    double value = NAN;           // rate used downstream
    double boundary_value = NAN;  // (11/24)·min of φ over the cube boundary, plus c and the Q part
    double phi_min = NAN;         // inf φ found
    Eigen::VectorXd argmin;
    bool ray_monotone = false;
    bool heuristic = false;       // position-wise ray check failed, value from the shell search
    std::vector<std::string> warnings;
};

inline constexpr double kSandwichLower = 11.0 / 24.0;

DissipationResult dissipation_rate(const SymbolModel& m, double lambda, const DissipationOptions& opts = {});

// g(λ) from dissipation_rate packaged as a rate function; power-type radial kinds come out in closed form.
RateFunction symbol_rate(const SymbolModel& m, const DissipationOptions& opts = {});

struct Interpolated {
    double theta = NAN;
    double C = NAN;
    RateFunction rate = RateFunction::identity();
};

Interpolated interpolate_dissipation(double p, double p0, double C_p0, const RateFunction& g);

}  // namespace obscert
