#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

// Reference values computed independently of the library: closed forms and
// double-exponential quadrature from Boost.
namespace obscert::testing {

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kPi = std::numbers::pi;

// K = ln2/16 in the closed-form λ_T expressions (f = h = id).
inline double closed_K() { return kLn2 / 16.0; }

// ln λ_T for g = e^λ.
inline double closed_log_lambda_exponential(double T) {
    return std::log(std::log(1.0 / (closed_K() * std::min(1.0, T))));
}
// λ_T for g = λ^s.
inline double closed_lambda_power(double s, double T) {
    return std::pow(1.0 / ((s - 1.0) * closed_K() * std::min(1.0, T)), 1.0 / (s - 1.0));
}
// ln λ_T for g = λ(ln(1+λ))^s.
inline double closed_log_lambda_log_power(double s, double T) { return closed_lambda_power(s, T); }
// ln ln λ_T for g = λ ln(1+λ)(ln(1+ln(1+λ)))^s.
inline double closed_loglog_lambda_log_log_power(double s, double T) { return closed_lambda_power(s, T); }

// Closed-form K of the polynomial family.
inline double poly_K(double c1, double c2, double g1, double g2, double g3) {
    const double e = g1 * g3 / (g2 - g1);
    return std::pow(std::pow(c1, g2) / std::pow(c2, g1), 1.0 / (g2 - g1)) *
           std::pow(std::pow(4.0, 1.0 / g3) * e * 4.0 / kLn2, e);
}

// ∫_a^∞ h^{-1}(4λ/g(f^{-1}(λ))) dλ/λ for the polynomial family, by quadrature.
inline double poly_tail_quadrature(double c1, double c2, double g1, double g2, double g3, double a) {
    boost::math::quadrature::exp_sinh<double> es;
    auto F = [&](double u) {
        const double L = std::log(a) + u;
        return std::exp((std::log(4.0 / c2) + L - g2 / g1 * (L - std::log(c1))) / g3);
    };
    return es.integrate(F, 0.0, std::numeric_limits<double>::infinity());
}

// Density of the one-sided stable subordinator with Laplace exponent λ^{1/2}.
inline double stable_half_density(double t, double u) {
    return t / (2.0 * std::sqrt(kPi)) * std::pow(u, -1.5) * std::exp(-t * t / (4.0 * u));
}

// ∫ e^{-μu} η_t(u) du by quadrature.
inline double subordinated_multiplier_quadrature(double mu, double t) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate([&](double u) { return std::exp(-mu * u) * stable_half_density(t, u); }, 0.0,
                        std::numeric_limits<double>::infinity());
}

// φ(λ) for the triplet (0, 0, t^{-1-s} dt).
inline double stable_bernstein(double s, double lambda) {
    return boost::math::tgamma(1.0 - s) * std::pow(lambda, s) / s;
}

inline double fractional_stable_constant_oracle(int n, double alpha) {
    return std::pow(4.0, alpha) * boost::math::tgamma(n / 2.0 + alpha) /
           (std::pow(kPi, n / 2.0) * std::abs(boost::math::tgamma(-alpha)));
}

// Re ψ for the indicator density on the unit ball, by dimension.
inline double indicator_re_psi(int n, double k) {
    switch (n) {
        case 1: return 2.0 * (1.0 - std::sin(k) / k);
        case 2: return kPi - 2.0 * kPi * boost::math::cyl_bessel_j(1, k) / k;
        default: return 4.0 * kPi * (1.0 / 3.0 - (std::sin(k) - k * std::cos(k)) / (k * k * k));
    }
}

// φ(ξ) for the indicator density, n = 1, |ξ| ≥ 1.
inline double indicator_phi_1d(double k) { return 2.0 / (3.0 * k); }

// φ(ξ) and the tail mass for ρ(r) = r^{-3+ε}, n = 1.
inline double power_law_phi_1d(double eps, double k) { return 2.0 / eps * std::pow(k, 2.0 - eps); }
inline double power_law_tail_1d(double eps, double k) { return 2.0 / (2.0 - eps) * std::pow(k, 2.0 - eps); }

}  // namespace obscert::testing
