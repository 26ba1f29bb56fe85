#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gen.hpp"
#include "obscert/rates.hpp"
#include "oracles.hpp"

using namespace obscert;
using obscert::testing::Gen;
using obscert::testing::rel_err;

namespace {

const RateFunction id = RateFunction::identity();

RateFunction sqrt_rate() { return RateFunction::polynomial(1.0, 0.5); }

}  // namespace

TEST(Invert, PolynomialSquareRoot) {
    EXPECT_NEAR(invert(RateFunction::polynomial(1.0, 2.0), 4.0), 2.0, 1e-12);
}

TEST(Invert, ExponentialLog) {
    EXPECT_NEAR(invert(RateFunction::exponential(), std::numbers::e), 1.0, 1e-12);
}

TEST(Invert, LogPowerRoundTrip) {
    const auto g = RateFunction::log_power(2.0);
    const double y = g(5.0);
    EXPECT_LE(std::abs(g(invert(g, y)) - y), 1e-10 * (1.0 + y));
    EXPECT_NEAR(invert(g, y), 5.0, 1e-9);
}

TEST(Invert, RejectsNonMonotone) {
    CustomRate spec;
    spec.evaluate = [](double x) { return 1.0 + std::sin(x) * std::sin(x); };
    EXPECT_THROW(invert(RateFunction::custom(spec), 1.5), NonInvertible);
}

TEST(Invert, BisectionForCustomRates) {
    CustomRate spec;
    spec.evaluate = [](double x) { return x * x * x + x; };
    spec.increasing = true;
    spec.bijective = true;
    spec.at_infinity = Asymptotics::power(3.0);
    const auto r = RateFunction::custom(spec);
    for (double y : {1e-6, 0.5, 2.0, 1e6, 1e30}) {
        const double x = invert(r, y);
        EXPECT_LE(std::abs(r(x) - y), 1e-10 * (1.0 + y)) << y;
    }
}

TEST(RateInvariants, InverseHintRoundTrip) {
    Gen gen(11);
    const std::vector<RateFunction> rates = {
        RateFunction::polynomial(2.5, 1.7), RateFunction::exponential(0.3), RateFunction::log_power(1.5),
        RateFunction::log_log_power(2.0), RateFunction::affine(2.0, 0.5)};
    for (const auto& r : rates) {
        for (int i = 0; i < 64; ++i) {
            const double x = gen.log_uniform(1e-3, 1e2);
            EXPECT_LE(std::abs(r.inverse(r(x)) - x), 1e-9 * (1.0 + x)) << r.describe() << " at " << x;
        }
    }
}

TEST(RateInvariants, PositiveAndIncreasing) {
    Gen gen(12);
    const std::vector<RateFunction> rates = {RateFunction::polynomial(1.0, 0.3), RateFunction::log_power(3.0),
                                             RateFunction::log_log_power(1.5),
                                             compose(RateFunction::log_power(2.0), sqrt_rate())};
    for (const auto& r : rates) {
        const auto xs = gen.log_grid(128, 1e-6, 1e8);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            EXPECT_GT(r(xs[i]), 0.0);
            if (i > 0 && xs[i] > xs[i - 1]) EXPECT_LT(r(xs[i - 1]), r(xs[i])) << r.describe();
        }
    }
}

TEST(RateInvariants, LogValueMatchesEvaluate) {
    const auto g = RateFunction::log_power(2.0);
    for (double L : {-3.0, 0.0, 2.0, 10.0, 30.0}) {
        EXPECT_LT(rel_err(g.log_value(L), std::log(g(std::exp(L)))), 1e-12) << L;
    }
    // Far beyond the range of binary64 the log form stays finite.
    EXPECT_NEAR(g.log_value(1e4), 1e4 + 2.0 * std::log(1e4), 1e-6);
}

TEST(ComposeRates, PowerFactorsSimplify) {
    const auto r = compose(RateFunction::polynomial(1.0, 0.75), RateFunction::polynomial(1.0, 2.0));
    EXPECT_EQ(r.kind(), RateKind::Polynomial);
    EXPECT_DOUBLE_EQ(r.param_gamma(), 1.5);
    EXPECT_TRUE(compose(id, RateFunction::log_power(2.0)).kind() == RateKind::LogPower);
}

TEST(MonotoneRatio, SquareIsDecreasing) {
    EXPECT_TRUE(check_monotone_ratio(id, RateFunction::polynomial(1.0, 2.0)).ok);
}

TEST(MonotoneRatio, SqrtIsIncreasing) {
    const auto res = check_monotone_ratio(id, RateFunction::polynomial(1.0, 0.5));
    EXPECT_FALSE(res.ok);
    EXPECT_GE(res.first_violation, 0);
    EXPECT_LT(res.lambda_lo, res.lambda_hi);
}

TEST(MonotoneRatio, AnomalousDiffusionPair) {
    const auto g = compose(RateFunction::log_power(2.0), sqrt_rate());
    EXPECT_TRUE(check_monotone_ratio(sqrt_rate(), g).ok);
}

TEST(TailIntegral, InverseSquare) {
    const auto res = tail_integral(id, RateFunction::polynomial(1.0, 2.0), id, 10.0);
    ASSERT_FALSE(res.divergent);
    EXPECT_NEAR(res.value, 0.4, 1e-12);
}

TEST(TailIntegral, PolynomialClosedForm) {
    Gen gen(21);
    for (int i = 0; i < 20; ++i) {
        const double c1 = gen.log_uniform(0.2, 5.0), c2 = gen.log_uniform(0.2, 5.0);
        const double g1 = gen.uniform(0.3, 2.0), g2 = g1 + gen.uniform(0.3, 2.0), g3 = gen.uniform(0.3, 2.0);
        const double a = gen.log_uniform(0.5, 100.0);
        const double e = (g2 - g1) / (g1 * g3);
        const double closed = std::pow(4.0 * std::pow(c1, g2 / g1) / c2, 1.0 / g3) / e * std::pow(a, -e);
        const auto res = tail_integral(RateFunction::polynomial(c1, g1), RateFunction::polynomial(c2, g2),
                                       RateFunction::polynomial(1.0, g3), a);
        ASSERT_FALSE(res.divergent);
        EXPECT_LT(rel_err(res.value, closed), 1e-9);
        EXPECT_LT(rel_err(closed, obscert::testing::poly_tail_quadrature(c1, c2, g1, g2, g3, a)), 1e-8);
    }
}

TEST(TailIntegral, NearlyLinearRatesDiverge) {
    const auto res = tail_integral(id, RateFunction::log_power(1.0), id, 2.0);
    EXPECT_TRUE(res.divergent);
    EXPECT_TRUE(res.analytic);
    EXPECT_TRUE(tail_integral(id, id, id, 2.0).divergent);
}

TEST(TailIntegral, NonDecreasingInShift) {
    const auto g = RateFunction::log_power(2.0);
    double prev = 0.0;
    for (double m : {0.0, 0.5, 1.0, 4.0, 10.0}) {
        const double v = tail_integral(id, g, id, 50.0, m).value;
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(SolveLambdaT, PowerClosedForm) {
    const auto rep = solve_lambda_T(id, RateFunction::polynomial(1.0, 2.0), id, 1.0);
    ASSERT_TRUE(rep.admissible());
    EXPECT_LT(rel_err(*rep.lambda_T, 16.0 / std::numbers::ln2), 1e-9);
    EXPECT_NEAR(*rep.lambda_T, 23.0831, 1e-4);
    EXPECT_DOUBLE_EQ(rep.threshold, std::numbers::ln2 / 4.0);
}

TEST(SolveLambdaT, ExponentialClosedForm) {
    const auto rep = solve_lambda_T(id, RateFunction::exponential(), id, 1.0);
    ASSERT_TRUE(rep.admissible());
    EXPECT_NEAR(*rep.lambda_T, std::log(16.0 / std::numbers::ln2), 1e-9);
    EXPECT_NEAR(*rep.lambda_T, 3.1390, 1.5e-4);
}

TEST(SolveLambdaT, LogPowerClosedForm) {
    for (double s : {1.5, 2.0}) {
        for (double T : {0.1, 1.0, 10.0}) {
            const auto rep = solve_lambda_T(id, RateFunction::log_power(s), id, T);
            ASSERT_TRUE(rep.admissible());
            EXPECT_LT(rel_err(rep.log_lambda_T, obscert::testing::closed_log_lambda_log_power(s, T)), 1e-6) << s << " " << T;
        }
    }
}

TEST(SolveLambdaT, PowerClosedFormAcrossHorizons) {
    for (double s : {1.5, 2.0, 3.0}) {
        for (double T : {0.1, 1.0, 10.0}) {
            const auto rep = solve_lambda_T(id, RateFunction::polynomial(1.0, s), id, T);
            ASSERT_TRUE(rep.admissible());
            EXPECT_LT(rel_err(*rep.lambda_T, obscert::testing::closed_lambda_power(s, T)), 1e-6) << s << " " << T;
        }
    }
}

TEST(SolveLambdaT, ReportInvariants) {
    Gen gen(31);
    for (int i = 0; i < 30; ++i) {
        const double s = gen.uniform(1.2, 3.0);
        const double T = gen.log_uniform(0.05, 5.0);
        const auto rep = solve_lambda_T(id, gen.coin() ? RateFunction::polynomial(1.0, s) : RateFunction::log_power(s),
                                        id, T);
        ASSERT_TRUE(rep.admissible());
        EXPECT_TRUE(rep.monotone_ratio_ok && rep.integrable_ok);
        EXPECT_LE(rep.tail_at_lambda_T, rep.threshold * (1.0 + 1e-9));
        EXPECT_DOUBLE_EQ(rep.threshold, threshold_for(T));
    }
}

TEST(SolveLambdaT, ZeroWhenAlreadyBelowThreshold) {
    // From the domain floor 1e-12 the tail is 8e6/c, far below ln2/4.
    const auto rep = solve_lambda_T(id, RateFunction::polynomial(1e15, 1.5), id, 1.0);
    ASSERT_TRUE(rep.admissible());
    EXPECT_EQ(*rep.lambda_T, 0.0);
    EXPECT_TRUE(std::isinf(rep.log_lambda_T) && rep.log_lambda_T < 0);
}

TEST(SolveLambdaT, NonIncreasingInHorizon) {
    Gen gen(41);
    for (int i = 0; i < 10; ++i) {
        const double s = gen.uniform(1.3, 3.0);
        const auto g = RateFunction::log_power(s);
        double prev = INFINITY;
        for (double T : {0.05, 0.2, 0.5, 1.0, 3.0}) {
            const double L = solve_lambda_T(id, g, id, T).log_lambda_T;
            EXPECT_LE(L, prev * (1.0 + 1e-12));
            prev = L;
        }
    }
}

TEST(SolveLambdaT, ScalingGNeverIncreases) {
    Gen gen(42);
    for (int i = 0; i < 10; ++i) {
        const double s = gen.uniform(1.3, 3.0);
        const double kappa = gen.uniform(1.01, 50.0);
        const auto g = RateFunction::polynomial(1.0, s);
        const double a = *solve_lambda_T(id, g, id, 0.7).lambda_T;
        const double b = *solve_lambda_T(id, scale(g, kappa), id, 0.7).lambda_T;
        EXPECT_LE(b, a * (1.0 + 1e-9));
    }
}

TEST(SolveLambdaT, NonDecreasingInShift) {
    const auto g = RateFunction::log_power(2.0);
    double prev = 0.0;
    for (double m : {0.0, 1.0, 3.0, 10.0}) {
        const double L = solve_lambda_T(id, g, id, 1.0, m).log_lambda_T;
        EXPECT_GE(L, prev);
        prev = L;
    }
}

TEST(SolveLambdaT, RejectsDivergent) {
    for (const auto& g : {id, RateFunction::log_power(1.0)}) {
        const auto rep = solve_lambda_T(id, g, id, 1.0);
        EXPECT_FALSE(rep.admissible());
        EXPECT_FALSE(rep.integrable_ok);
        EXPECT_FALSE(rep.divergence.empty());
        EXPECT_FALSE(rep.rejection.empty());
    }
}

TEST(SolveLambdaT, RejectsIncreasingRatio) {
    const auto rep = solve_lambda_T(id, RateFunction::polynomial(1.0, 0.5), id, 1.0);
    EXPECT_FALSE(rep.admissible());
    EXPECT_FALSE(rep.monotone_ratio_ok);
}
