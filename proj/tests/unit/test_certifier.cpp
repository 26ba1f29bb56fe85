#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gen.hpp"
#include "obscert/certifier.hpp"
#include "oracles.hpp"

using namespace obscert;
using obscert::testing::Gen;
using obscert::testing::rel_err;

namespace {

const double kE = std::numbers::e;

ProblemData square_problem() {
    ProblemData p;
    p.g = RateFunction::polynomial(1.0, 2.0);
    return p;
}

double holder_oracle(double omega, double T, double r) {
    if (r == 1.0) return std::max(1.0, std::exp(omega * T));
    const double rp = std::isinf(r) ? 1.0 : r / (r - 1.0);
    double base;
    if (omega > 0) base = std::expm1(omega * rp * T) / (omega * rp);
    else if (omega < 0) base = -std::expm1(omega * rp * T) / (-omega * rp);
    else base = T;
    return std::pow(base, 1.0 / rp);
}

}  // namespace

TEST(ConstantK, UnitData) {
    EXPECT_NEAR(constant_K(1, 1, 1, 1), 2.0 * std::pow(2.0, kE / 2.0), 1e-12);
    EXPECT_NEAR(constant_K(1, 1, 1, 1), 5.1307, 1e-4);
}

TEST(ConstantK, ObservationConstantDropsOut) {
    EXPECT_DOUBLE_EQ(constant_K(3.0, 0.0, 2.0, 7.0), std::pow(2.0, kE / 2.0) * 6.0);
}

TEST(ConstantK, MixedData) {
    EXPECT_NEAR(constant_K(2, 1, 3, 0.5), 9.0 * std::pow(2.0, kE / 2.0), 1e-12);
    EXPECT_NEAR(constant_K(2, 1, 3, 0.5), 23.088, 1e-3);
}

TEST(ConstantK, Hypotheses) {
    EXPECT_THROW(constant_K(0.5, 1, 1, 1), HypothesisViolation);
    EXPECT_THROW(constant_K(1, 1, 0.9, 1), HypothesisViolation);
}

TEST(Certify, UnitSquareExample) {
    const auto c = certify(square_problem());
    EXPECT_NEAR(c.lambda_T, 23.0831, 1e-4);
    EXPECT_NEAR(c.K, 5.1307, 1e-4);
    const double C3 = 8.0 * std::exp(3.0) * std::pow(2.0, 6.0 / (kE * std::numbers::ln2));
    EXPECT_LT(rel_err(c.C3, C3), 1e-12);
    EXPECT_NEAR(c.C3, 1.46e3, 0.01e3);
    EXPECT_LT(rel_err(c.log_cobs_L1, std::log(C3) + 6.0 * 16.0 / std::numbers::ln2), 1e-9);
    EXPECT_LT(rel_err(c.lambda0, 2.0 * std::log(c.K) / (kE * std::numbers::ln2) + 2.0 * c.lambda_T), 1e-14);
}

TEST(Certify, AssemblyIsExact) {
    Gen gen(3);
    for (int i = 0; i < 20; ++i) {
        auto p = square_problem();
        p.T = gen.log_uniform(0.2, 3.0);
        p.omega = gen.uniform(-1.0, 1.0);
        p.M = gen.uniform(1.0, 3.0);
        p.C1 = gen.uniform(0.0, 2.0);
        const auto c = certify(p);
        EXPECT_DOUBLE_EQ(c.cobs_L1, c.C3 / p.T * std::exp(6.0 * c.lambda_T + std::max(p.omega, 0.0) * p.T));
    }
}

TEST(Certify, ConstantInvariants) {
    Gen gen(4);
    for (int i = 0; i < 30; ++i) {
        ProblemData p = square_problem();
        p.M = gen.uniform(1.0, 4.0);
        p.C1 = gen.uniform(0.0, 3.0);
        p.C2 = gen.uniform(1.0, 4.0);
        p.normC = gen.uniform(0.0, 2.0);
        const auto c = certify(p);
        EXPECT_GE(c.K, std::pow(2.0, kE / 2.0));
        EXPECT_GE(c.lambda0, 1.0);
        if (p.M * (p.C1 * p.normC + 1.0) * p.C2 >= 1.0)
            EXPECT_GE(c.C3, 8.0 * std::exp(3.0) * p.M * p.C1 * (1.0 - 1e-15));
    }
}

TEST(Certify, NegativeGrowthLeavesL1Unchanged) {
    auto p = square_problem();
    const auto c0 = certify(p);
    p.omega = -2.0;
    const auto c1 = certify(p);
    EXPECT_DOUBLE_EQ(c0.cobs_L1, c1.cobs_L1);
}

TEST(Certify, RescalingByGrowthFactor) {
    for (double omega : {0.3, 1.0, 2.5}) {
        auto p = square_problem();
        p.T = 0.8;
        const auto base = certify(p);
        p.omega = omega;
        const auto grown = certify(p);
        EXPECT_NEAR(grown.log_cobs_L1 - base.log_cobs_L1, omega * p.T, 1e-12);
    }
}

TEST(Certify, HolderTwoAtZeroGrowth) {
    auto p = square_problem();
    p.T = 0.49;
    p.r = 2.0;
    const auto c = certify(p);
    EXPECT_NEAR(c.log_cobs_Lr - c.log_cobs_L1, 0.5 * std::log(0.49), 1e-12);
}

TEST(HolderFactor, MatchesFormula) {
    Gen gen(5);
    for (int i = 0; i < 50; ++i) {
        const double omega = gen.pick(std::vector<double>{0.0, gen.uniform(-3, 3)});
        const double T = gen.log_uniform(0.01, 5.0);
        const double r = gen.pick(std::vector<double>{1.0, 1.5, 2.0, 4.0, kInfinity});
        EXPECT_NEAR(log_holder_factor(omega, T, r), std::log(holder_oracle(omega, T, r)), 1e-12)
            << omega << " " << T << " " << r;
    }
}

TEST(Certify, MonotoneInConstants) {
    const auto base = certify(square_problem());
    auto bump = [&](auto set) {
        auto p = square_problem();
        set(p);
        return certify(p).log_cobs_L1;
    };
    EXPECT_GE(bump([](ProblemData& p) { p.M = 1.5; }), base.log_cobs_L1);
    EXPECT_GE(bump([](ProblemData& p) { p.C1 = 2.0; }), base.log_cobs_L1);
    EXPECT_GE(bump([](ProblemData& p) { p.C2 = 2.0; }), base.log_cobs_L1);
    EXPECT_GE(bump([](ProblemData& p) { p.normC = 3.0; }), base.log_cobs_L1);
    EXPECT_GE(bump([](ProblemData& p) { p.T = 0.3; }), base.log_cobs_L1);
}

TEST(Certify, RejectsNonIntegrable) {
    ProblemData p;
    p.g = RateFunction::log_power(1.0);
    EXPECT_THROW(certify(p), NotAdmissible);
    try {
        certify(p);
    } catch (const NotAdmissible& e) {
        EXPECT_FALSE(e.report().integrable_ok);
    }
}

TEST(Certify, ValidatesData) {
    auto p = square_problem();
    p.T = 0.0;
    EXPECT_THROW(certify(p), HypothesisViolation);
    p = square_problem();
    p.r = 0.5;
    EXPECT_THROW(certify(p), HypothesisViolation);
}

TEST(CertifyPolynomial, UnitK) {
    PolynomialRates pr;
    EXPECT_LT(rel_err(polynomial_K(pr), 16.0 / std::numbers::ln2), 1e-14);
    const auto c = certify_polynomial(pr, 1, 0, 1, 1, 1, 1.0, 1.0);
    EXPECT_LT(rel_err(c.lambda_T, 23.0831), 1e-5);
}

TEST(CertifyPolynomial, KMatchesFormula) {
    Gen gen(6);
    for (int i = 0; i < 30; ++i) {
        PolynomialRates pr;
        pr.c1 = gen.log_uniform(0.1, 10.0);
        pr.c2 = gen.log_uniform(0.1, 10.0);
        pr.gamma1 = gen.uniform(0.2, 2.0);
        pr.gamma2 = pr.gamma1 + gen.uniform(0.2, 2.0);
        pr.gamma3 = gen.uniform(0.2, 2.0);
        EXPECT_LT(rel_err(polynomial_K(pr), obscert::testing::poly_K(pr.c1, pr.c2, pr.gamma1, pr.gamma2, pr.gamma3)), 1e-12);
    }
}

TEST(CertifyPolynomial, ClampsAtUnitHorizon) {
    PolynomialRates pr{2.0, 0.5, 1.0, 2.5, 0.7};
    const auto a = certify_polynomial(pr, 1, 0, 1, 1, 1, 1.0, 1.0);
    const auto b = certify_polynomial(pr, 1, 0, 1, 1, 1, 7.0, 1.0);
    EXPECT_DOUBLE_EQ(a.lambda_T, b.lambda_T);
}

TEST(CertifyPolynomial, BlowUpShape) {
    PolynomialRates pr;
    const double C3 = certify_polynomial(pr, 1, 0, 1, 1, 1, 1.0, 1.0).C3;
    for (double T : {0.05, 0.1, 0.5}) {
        const auto c = certify_polynomial(pr, 1, 0, 1, 1, 1, T, 1.0);
        EXPECT_LT(rel_err(c.log_cobs_L1, std::log(C3 / T) + 6.0 * polynomial_K(pr) / T), 1e-12);
    }
}

TEST(CertifyPolynomial, AgreesWithQuadrature) {
    Gen gen(7);
    for (int i = 0; i < 10; ++i) {
        PolynomialRates pr;
        pr.c1 = gen.log_uniform(0.3, 3.0);
        pr.c2 = gen.log_uniform(0.3, 3.0);
        pr.gamma1 = gen.uniform(0.5, 1.5);
        pr.gamma2 = pr.gamma1 + gen.uniform(0.5, 1.5);
        pr.gamma3 = gen.uniform(0.5, 1.5);
        const double T = gen.log_uniform(0.1, 2.0);
        const auto closed = certify_polynomial(pr, 1, 0, 1, 1, 1, T, 2.0);
        const auto quad = certify(polynomial_problem(pr, 1, 0, 1, 1, 1, T, 2.0));
        EXPECT_LT(rel_err(quad.lambda_T, closed.lambda_T), 1e-6);
    }
}

TEST(CertifyPolynomial, Hypotheses) {
    EXPECT_THROW(certify_polynomial({1, 1, 2.0, 2.0, 1.0}, 1, 0, 1, 1, 1, 1, 1), HypothesisViolation);
    EXPECT_THROW(certify_polynomial({1, 1, 2.0, 1.0, 1.0}, 1, 0, 1, 1, 1, 1, 1), HypothesisViolation);
}

TEST(IterationTrace, InvariantsForSquareRate) {
    auto p = square_problem();
    const auto c = certify(p);
    const auto tr = iteration_trace(c, p, 40);
    ASSERT_EQ(tr.rows.size(), 41u);
    EXPECT_LE(tr.sum_tau, p.T);
    EXPECT_GT(tr.T_end, 0.0);
    EXPECT_LE(tr.sum_K_series, 1.0);
    for (std::size_t k = 0; k < tr.rows.size(); ++k) {
        const auto& row = tr.rows[k];
        EXPECT_DOUBLE_EQ(row.lambda, c.lambda0 * std::ldexp(1.0, static_cast<int>(k)));
        EXPECT_GT(row.T_k, 0.0);
        EXPECT_LE(row.T_k, p.T);
        EXPECT_LE(row.log_alpha, std::log(c.K) - 3.0 * row.lambda + 1e-12 * row.lambda);
        if (k + 1 < tr.rows.size()) EXPECT_DOUBLE_EQ(tr.rows[k + 1].T_k, row.T_k - row.tau);
    }
    EXPECT_LE(tr.log_alpha_product, tr.log_product_bound);
    for (const auto& [name, ok] : tr.checks) EXPECT_TRUE(ok) << name;
}

TEST(IterationTrace, TauDefinition) {
    auto p = square_problem();
    p.T = 2.0;
    const auto c = certify(p);
    const auto tr = iteration_trace(c, p, 5);
    for (const auto& row : tr.rows) {
        const double tau = p.T / 2.0 * std::exp(-row.lambda) + 2.0 * 2.0 * (4.0 * row.lambda / (row.lambda * row.lambda));
        EXPECT_LT(rel_err(row.tau, tau), 1e-13);
    }
}
