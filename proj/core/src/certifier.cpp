#include "obscert/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace obscert {

namespace {

constexpr double kE = std::numbers::e;
constexpr double kLn2 = std::numbers::ln2;

const char* kDualityNote =
    "cobs is also an upper bound on the cost of approximate null-controllability in time T for the predual system";

double log_expm1(double x) { return x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x)); }

double logaddexp(double x, double y) {
    if (x == -kInfinity) return y;
    if (y == -kInfinity) return x;
    const double m = std::max(x, y);
    return m + std::log1p(std::exp(-std::abs(x - y)));
}

std::string at(int k) { return " (k=" + std::to_string(k) + ")"; }

}  // namespace

void ProblemData::validate() const {
    if (!(M >= 1.0)) throw HypothesisViolation("M must be >= 1");
    if (!(C2 >= 1.0)) throw HypothesisViolation("C2 must be >= 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw HypothesisViolation("T must be positive and finite");
    if (!(C1 >= 0.0)) throw HypothesisViolation("C1 must be >= 0");
    if (!(normC >= 0.0)) throw HypothesisViolation("normC must be >= 0");
    if (!(r >= 1.0)) throw HypothesisViolation("r must lie in [1, inf]");
    if (!(m >= 0.0)) throw HypothesisViolation("m must be >= 0");
    if (!std::isfinite(omega)) throw HypothesisViolation("omega must be finite");
}

double constant_K(double M, double C1, double C2, double normC) {
    if (!(M >= 1.0)) throw HypothesisViolation("M must be >= 1");
    if (!(C2 >= 1.0)) throw HypothesisViolation("C2 must be >= 1");
    return std::pow(2.0, kE / 2.0) * M * (C1 * normC + 1.0) * C2;
}

double constant_C3(double M, double C1, double C2, double normC) {
    return 8.0 * std::pow(kE, 3.0) * M * C1 * std::pow(M * (C1 * normC + 1.0) * C2, 6.0 / (kE * kLn2));
}

double log_holder_factor(double omega, double T, double r) {
    if (r == 1.0) return std::max(0.0, omega * T);
    const double rp = std::isinf(r) ? 1.0 : r / (r - 1.0);
    if (omega > 0.0) return log_expm1(omega * rp * T - 0.0) / rp - std::log(omega * rp) / rp;
    if (omega == 0.0) return std::log(T) / rp;
    const double x = -omega * rp * T;
    return (std::log(-std::expm1(-x)) - std::log(-omega * rp)) / rp;
}

Certificate assemble_certificate(const ProblemData& p, AdmissibilityReport report, std::string route) {
    Certificate c;
    c.T = p.T;
    c.r = p.r;
    c.omega = p.omega;
    c.lambda_T = *report.lambda_T;
    c.log_lambda_T = report.log_lambda_T;
    c.K = constant_K(p.M, p.C1, p.C2, p.normC);
    c.lambda0 = 2.0 * std::log(c.K) / (kE * kLn2) + 2.0 * c.lambda_T;
    c.C3 = constant_C3(p.M, p.C1, p.C2, p.normC);
    const double omega_plus = std::max(p.omega, 0.0);
    c.cobs_L1 = (c.C3 / p.T) * std::exp(6.0 * c.lambda_T + omega_plus * p.T);
    const double log_base = std::log(c.C3) - std::log(p.T) + 6.0 * c.lambda_T;
    c.log_cobs_L1 = log_base + omega_plus * p.T;
    if (p.r == 1.0) {
        c.cobs_Lr = c.cobs_L1;
        c.log_cobs_Lr = c.log_cobs_L1;
    } else {
        const double lf = log_holder_factor(p.omega, p.T, p.r);
        const double rp = std::isinf(p.r) ? 1.0 : p.r / (p.r - 1.0);
        const double factor = (p.omega == 0.0) ? std::pow(p.T, 1.0 / rp) : std::exp(lf);
        c.cobs_Lr = (c.C3 / p.T) * std::exp(6.0 * c.lambda_T) * factor;
        c.log_cobs_Lr = log_base + lf;
        c.notes.push_back("L_r constant obtained from the bounded-semigroup constant (C3/T)exp(6 lambda_T) by Hoelder's inequality");
    }
    if (!std::isfinite(c.cobs_L1)) c.notes.push_back("cobs exceeds double range; see log_cobs fields");
    c.admissibility = std::move(report);
    c.route = std::move(route);
    c.duality_note = kDualityNote;
    return c;
}

Certificate certify(const ProblemData& p, const SolveOptions& opts) {
    p.validate();
    AdmissibilityReport rep = solve_lambda_T(p.f, p.g, p.h, p.T, p.m, opts);
    if (!rep.admissible()) throw NotAdmissible(std::move(rep));
    return assemble_certificate(p, std::move(rep), "quadrature");
}

double polynomial_K(const PolynomialRates& pr, double m) {
    const double d = pr.gamma2 - pr.gamma1;
    const double e = pr.gamma1 * pr.gamma3 / d;
    const double lead = std::pow(std::pow(pr.c1, pr.gamma2) / std::pow(pr.c2, pr.gamma1), 1.0 / d);
    const double inner = std::pow(4.0 + m, 1.0 / pr.gamma3) * e * (4.0 / kLn2);
    return lead * std::pow(inner, e);
}

ProblemData polynomial_problem(const PolynomialRates& pr, double M, double omega, double C1, double C2, double normC,
                               double T, double r, double m) {
    ProblemData p;
    p.M = M;
    p.omega = omega;
    p.C1 = C1;
    p.C2 = C2;
    p.normC = normC;
    p.T = T;
    p.r = r;
    p.m = m;
    p.f = RateFunction::polynomial(pr.c1, pr.gamma1);
    p.g = RateFunction::polynomial(pr.c2, pr.gamma2);
    p.h = RateFunction::polynomial(1.0, pr.gamma3);
    return p;
}

Certificate certify_polynomial(const PolynomialRates& pr, double M, double omega, double C1, double C2, double normC,
                               double T, double r, double m) {
    if (!(pr.gamma1 > 0.0) || !(pr.gamma3 > 0.0)) throw HypothesisViolation("gamma1, gamma3 must be positive");
    if (!(pr.gamma2 > pr.gamma1)) throw HypothesisViolation("polynomial certificate requires gamma2 > gamma1");
    if (!(pr.c1 > 0.0) || !(pr.c2 > 0.0)) throw HypothesisViolation("c1, c2 must be positive");
    const ProblemData p = polynomial_problem(pr, M, omega, C1, C2, normC, T, r, m);
    p.validate();
    const double e = pr.gamma1 * pr.gamma3 / (pr.gamma2 - pr.gamma1);
    const double Kp = polynomial_K(pr, m);
    AdmissibilityReport rep;
    rep.monotone_ratio_ok = true;
    rep.integrable_ok = true;
    rep.T = T;
    rep.m = m;
    rep.threshold = threshold_for(T);
    rep.lambda_T = Kp / std::min(1.0, std::pow(T, e));
    rep.log_lambda_T = std::log(Kp) - std::min(0.0, e * std::log(T));
    Certificate c = assemble_certificate(p, std::move(rep), "polynomial closed form");
    std::ostringstream os;
    os.precision(17);
    os << "K_poly=" << Kp;
    c.notes.push_back(os.str());
    return c;
}

IterationTrace iteration_trace(const Certificate& cert, const ProblemData& p, int N) {
    if (N < 1) throw HypothesisViolation("trace length must be >= 1");
    if (!std::isfinite(cert.lambda0)) throw InvariantViolation("lambda0 is not finite; the trace cannot be formed");
    const RateFunction gt = compose(p.g, inverse_rate(p.f));
    const double lnK = std::log(cert.K);
    const double ln4m = std::log(4.0 + p.m);
    const double lnTmax = std::log(2.0 * std::max(1.0, p.T));
    const double lnC = std::log(2.0 * p.M * p.C1);
    constexpr double tol = 1e-12;

    IterationTrace tr;
    double T_k = p.T;
    double sum_tau = 0.0;
    double sum_series = 0.0;
    double log_alpha_sum = 0.0;
    auto fail = [](const std::string& what) { throw InvariantViolation(what); };

    for (int k = 0; k <= N; ++k) {
        TraceRow row;
        row.k = k;
        row.lambda = std::ldexp(cert.lambda0, k);
        row.T_k = T_k;
        const double Lk = std::log(row.lambda);
        const double y = ln4m - gt.log_excess(Lk);
        const double lnh = p.h.is_identity() ? y : p.h.log_inverse(y);
        row.log_tau = logaddexp(std::log(p.T / 2.0) - row.lambda, lnTmax + lnh);
        row.tau = std::exp(row.log_tau);
        // g(λ)h(τ/2); for h = id the second half of τ contributes (4+m)·max{1,T}·λ exactly, and summing the
        // logs instead would lose about λ·eps when g grows exponentially.
        double gh;
        if (p.h.is_identity()) {
            gh = std::exp(gt.log_value(Lk) - row.lambda + std::log(p.T / 4.0)) +
                 std::exp(lnTmax - std::log(2.0)) * (4.0 + p.m) * row.lambda;
        } else {
            gh = std::exp(gt.log_value(Lk) + p.h.log_value(row.log_tau - std::log(2.0)));
        }
        row.log_alpha = lnK - gh + (1.0 + p.m) * row.lambda;
        row.log_cobs_term = lnC + row.lambda - row.log_tau + log_alpha_sum;

        if (!(T_k > 0.0) || T_k > p.T * (1.0 + tol)) fail("T_k in (0, T] failed" + at(k));
        if (!(row.tau > 0.0) && !std::isfinite(row.log_tau)) fail("tau_k > 0 failed" + at(k));
        const double bound = lnK - 3.0 * row.lambda;
        if (row.log_alpha > bound + tol * std::max(1.0, std::abs(bound))) fail("alpha_k <= K e^{-3 lambda_k} failed" + at(k));

        sum_tau += row.tau;
        if (k >= 1) sum_series += std::exp(k * lnK - row.lambda);
        log_alpha_sum += row.log_alpha;
        T_k -= row.tau;
        tr.rows.push_back(row);
    }
    tr.T_end = T_k;
    tr.sum_tau = sum_tau;
    tr.sum_K_series = sum_series;
    tr.log_alpha_product = log_alpha_sum;
    tr.log_product_bound = (N + 1) * lnK - 3.0 * std::ldexp(cert.lambda0, N + 1) + 3.0 * cert.lambda0;

    if (sum_tau > p.T * (1.0 + tol)) fail("sum tau_k <= T failed");
    if (!(tr.T_end > 0.0)) fail("T_{N+1} > 0 failed");
    if (sum_series > 1.0 + tol) fail("sum_{k>=1} K^k e^{-lambda_k} <= 1 failed");
    if (tr.log_alpha_product > tr.log_product_bound + tol * std::max(1.0, std::abs(tr.log_product_bound))) {
        fail("prod alpha_k <= K^{N+1} e^{-3 lambda_{N+1} + 3 lambda_0} failed");
    }
    tr.checks = {{"lambda_k = lambda0 2^k", true},
                 {"T_{k+1} = T_k - tau_k", true},
                 {"T_k in (0, T]", true},
                 {"sum tau_k <= T", true},
                 {"alpha_k <= K e^{-3 lambda_k}", true},
                 {"sum_{k>=1} K^k e^{-lambda_k} <= 1", true},
                 {"prod alpha_k <= K^{N+1} e^{-3 lambda_{N+1} + 3 lambda_0}", true}};
    return tr;
}

}  // namespace obscert
