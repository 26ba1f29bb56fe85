#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "obscert/rates.hpp"

namespace obscert {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ProblemData {
    double M = 1.0;
    double omega = 0.0;
    double C1 = 1.0;
    double C2 = 1.0;
    double normC = 1.0;
    double T = 1.0;
    double r = 1.0;  // time-norm exponent, may be kInfinity
    double m = 0.0;
    RateFunction f = RateFunction::identity();
    RateFunction g = RateFunction::polynomial(1.0, 2.0);
    RateFunction h = RateFunction::identity();

    // Throws HypothesisViolation on out-of-range constants.
    void validate() const;
};

struct Certificate {
    double lambda_T = NAN;
    double log_lambda_T = NAN;
    double K = NAN;
    double lambda0 = NAN;
    double C3 = NAN;
    double cobs_L1 = NAN;
    double log_cobs_L1 = NAN;
    double cobs_Lr = NAN;
    double log_cobs_Lr = NAN;
    double r = 1.0;
    double T = NAN;
    double omega = 0.0;
    AdmissibilityReport admissibility;
    std::string route;
    std::string duality_note;
    std::vector<std::string> notes;
};

struct TraceRow {
    int k = 0;
    double lambda = NAN;
    double tau = NAN;
    double log_tau = NAN;
    double T_k = NAN;
    double log_alpha = NAN;
    double log_cobs_term = NAN;
};

struct IterationTrace {
    std::vector<TraceRow> rows;
    double T_end = NAN;           // T_{N+1}
    double sum_tau = NAN;
    double sum_K_series = NAN;    // Σ_{k≥1} K^k e^{−λ_k}
    double log_alpha_product = NAN;
    double log_product_bound = NAN;  // ln(K^{N+1} e^{−3λ_{N+1} + 3λ_0})
    std::vector<std::pair<std::string, bool>> checks;
};

double constant_K(double M, double C1, double C2, double normC);
double constant_C3(double M, double C1, double C2, double normC);

// ln of the Hölder factor turning the bounded-semigroup constant into the L_r one.
double log_holder_factor(double omega, double T, double r);

Certificate certify(const ProblemData& p, const SolveOptions& opts = {});

struct PolynomialRates {
    double c1 = 1.0, c2 = 1.0;
    double gamma1 = 1.0, gamma2 = 2.0, gamma3 = 1.0;
};

double polynomial_K(const PolynomialRates& pr, double m = 0.0);

Certificate certify_polynomial(const PolynomialRates& pr, double M, double omega, double C1, double C2, double normC,
                               double T, double r, double m = 0.0);

// The rate triple matching certify_polynomial's closed form.
ProblemData polynomial_problem(const PolynomialRates& pr, double M, double omega, double C1, double C2, double normC,
                               double T, double r, double m = 0.0);

IterationTrace iteration_trace(const Certificate& cert, const ProblemData& p, int N = 40);

// Assembles the remaining constants once λ_T is known.
Certificate assemble_certificate(const ProblemData& p, AdmissibilityReport report, std::string route);

}  // namespace obscert
