#include "obscert/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "obscert/quadrature.hpp"

namespace obscert {

struct RateFunction::Node {
    RateKind kind = RateKind::Custom;
    double c = NAN, gamma = NAN, s = NAN, a = NAN, b = NAN;
    std::optional<RateFunction> outer;
    std::optional<RateFunction> inner;
    CustomRate custom;
    double floor = 1e-12;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogHuge = 690.7755278982137;  // ln(1e300)
constexpr double kClosedMaxLog = 1e300;

double softplus(double L) { return L > 0.0 ? L + std::log1p(std::exp(-L)) : std::log1p(std::exp(L)); }

double log_softplus(double L) { return L < -30.0 ? L : std::log(softplus(L)); }

double log_log1p_softplus(double L) { return L < -30.0 ? L : std::log(std::log1p(softplus(L))); }

double logaddexp(double x, double y) {
    if (x == -kInf) return y;
    if (y == -kInf) return x;
    const double m = std::max(x, y);
    return m + std::log1p(std::exp(-std::abs(x - y)));
}

// Root of an increasing function F(x) = target, starting from guess; bisects to ulp level.
double solve_increasing(const std::function<double(double)>& F, double target, double guess, double lo_limit = -kInf,
                        double hi_limit = kInf) {
    double lo = guess, hi = guess;
    double step = 1.0;
    if (F(guess) > target) {
        for (int i = 0; i < 2100 && F(lo) > target; ++i) {
            hi = lo;
            lo = std::max(lo - step, lo_limit);
            step *= 2.0;
            if (lo == lo_limit && F(lo) > target) throw BracketFailure("no bracket below the admissible range");
        }
    } else {
        for (int i = 0; i < 2100 && F(hi) < target; ++i) {
            lo = hi;
            hi = std::min(hi + step, hi_limit);
            step *= 2.0;
            if (hi == hi_limit && F(hi) < target) throw BracketFailure("no bracket above the admissible range");
        }
    }
    for (int i = 0; i < 2200; ++i) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (F(mid) < target) lo = mid; else hi = mid;
    }
    return (std::abs(F(lo) - target) < std::abs(F(hi) - target)) ? lo : hi;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

}  // namespace

RateFunction RateFunction::polynomial(double c, double gamma) {
    if (!(c > 0.0) || !(gamma > 0.0)) throw HypothesisViolation("polynomial rate requires c > 0 and gamma > 0");
    auto n = std::make_shared<Node>();
    n->kind = RateKind::Polynomial;
    n->c = c;
    n->gamma = gamma;
    return RateFunction(n);
}

RateFunction RateFunction::exponential(double c) {
    if (!(c > 0.0)) throw HypothesisViolation("exponential rate requires c > 0");
    auto n = std::make_shared<Node>();
    n->kind = RateKind::Exponential;
    n->c = c;
    return RateFunction(n);
}

RateFunction RateFunction::log_power(double s) {
    if (!(s > 0.0)) throw HypothesisViolation("log-power rate requires s > 0");
    auto n = std::make_shared<Node>();
    n->kind = RateKind::LogPower;
    n->s = s;
    return RateFunction(n);
}

RateFunction RateFunction::log_log_power(double s) {
    if (!(s > 0.0)) throw HypothesisViolation("log-log-power rate requires s > 0");
    auto n = std::make_shared<Node>();
    n->kind = RateKind::LogLogPower;
    n->s = s;
    return RateFunction(n);
}

RateFunction RateFunction::affine(double b, double a) {
    if (!(b >= 0.0) || !(a >= 0.0) || (a == 0.0 && b == 0.0)) {
        throw HypothesisViolation("affine rate requires b >= 0, a >= 0, not both zero");
    }
    auto n = std::make_shared<Node>();
    n->kind = RateKind::Affine;
    n->a = a;
    n->b = b;
    return RateFunction(n);
}

RateFunction RateFunction::composite(const RateFunction& outer, const RateFunction& inner) {
    auto n = std::make_shared<Node>();
    n->kind = RateKind::Composite;
    n->outer = outer;
    n->inner = inner;
    n->floor = inner.domain_floor();
    return RateFunction(n);
}

RateFunction RateFunction::custom(CustomRate spec) {
    if (!spec.evaluate) throw HypothesisViolation("custom rate requires an evaluator");
    auto n = std::make_shared<Node>();
    n->kind = RateKind::Custom;
    n->custom = std::move(spec);
    return RateFunction(n);
}

RateKind RateFunction::kind() const { return node_->kind; }

double RateFunction::evaluate(double x) const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Polynomial: return n.c * std::pow(x, n.gamma);
        case RateKind::Exponential: return n.c * std::exp(x);
        case RateKind::LogPower: return x * std::pow(std::log1p(x), n.s);
        case RateKind::LogLogPower: return x * std::log1p(x) * std::pow(std::log1p(std::log1p(x)), n.s);
        case RateKind::Affine: return n.a + n.b * x;
        case RateKind::Composite: return n.outer->evaluate(n.inner->evaluate(x));
        case RateKind::Inverse: return n.inner->inverse(x);
        case RateKind::Custom: return n.custom.evaluate(x);
    }
    return NAN;
}

double RateFunction::log_value(double L) const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Polynomial: return std::log(n.c) + n.gamma * L;
        case RateKind::Exponential: return std::log(n.c) + std::exp(L);
        case RateKind::LogPower: return L + n.s * log_softplus(L);
        case RateKind::LogLogPower: return L + log_softplus(L) + n.s * log_log1p_softplus(L);
        case RateKind::Affine:
            if (n.b == 0.0) return std::log(n.a);
            if (n.a == 0.0) return std::log(n.b) + L;
            return logaddexp(std::log(n.a), std::log(n.b) + L);
        case RateKind::Composite: return n.outer->log_value(n.inner->log_value(L));
        case RateKind::Inverse: return n.inner->log_inverse(L);
        case RateKind::Custom: return std::log(n.custom.evaluate(std::exp(L)));
    }
    return NAN;
}

double RateFunction::log_excess(double L) const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Polynomial: return std::log(n.c) + (n.gamma - 1.0) * L;
        case RateKind::Exponential: return std::log(n.c) + std::exp(L) - L;
        case RateKind::LogPower: return n.s * log_softplus(L);
        case RateKind::LogLogPower: return log_softplus(L) + n.s * log_log1p_softplus(L);
        case RateKind::Affine:
            if (n.b == 0.0) return std::log(n.a) - L;
            if (n.a == 0.0) return std::log(n.b);
            return logaddexp(std::log(n.b), std::log(n.a) - L);
        case RateKind::Composite: return n.outer->log_excess(n.inner->log_value(L)) + n.inner->log_excess(L);
        case RateKind::Inverse: return n.inner->log_inverse(L) - L;
        case RateKind::Custom: return log_value(L) - L;
    }
    return NAN;
}

bool RateFunction::has_inverse_hint() const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Polynomial:
        case RateKind::Exponential:
        case RateKind::Inverse: return true;
        case RateKind::Affine: return n.b > 0.0;
        case RateKind::Composite: return n.outer->has_inverse_hint() && n.inner->has_inverse_hint();
        case RateKind::Custom: return static_cast<bool>(n.custom.inverse);
        default: return false;
    }
}

double RateFunction::inverse(double y) const { return invert(*this, y); }

double RateFunction::log_inverse(double Y) const {
    const Node& n = *node_;
    if (!increasing()) throw NonInvertible(describe() + " is not flagged strictly increasing");
    if (Y == -kInf) {
        // r^{-1}(0+) = 0 for rates vanishing at the origin.
        if (power_at_zero() > 0.0) return -kInf;
    }
    switch (n.kind) {
        case RateKind::Polynomial: return (Y - std::log(n.c)) / n.gamma;
        case RateKind::Exponential: {
            const double v = Y - std::log(n.c);
            if (!(v > 0.0)) throw BracketFailure("value below the range of " + describe());
            return std::log(v);
        }
        case RateKind::Affine: {
            if (n.a == 0.0) return Y - std::log(n.b);
            const double q = n.a * std::exp(-Y);
            if (!(q < 1.0)) throw BracketFailure("value below the range of " + describe());
            return Y + std::log1p(-q) - std::log(n.b);
        }
        case RateKind::Composite: return n.inner->log_inverse(n.outer->log_inverse(Y));
        case RateKind::Inverse: return n.inner->log_value(Y);
        case RateKind::Custom:
            if (n.custom.inverse) return std::log(n.custom.inverse(std::exp(Y)));
            [[fallthrough]];
        default: return solve_increasing([this](double L) { return log_value(L); }, Y, Y);
    }
}

bool RateFunction::increasing() const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Affine: return n.b > 0.0;
        case RateKind::Composite: return n.outer->increasing() && n.inner->increasing();
        case RateKind::Inverse: return true;
        case RateKind::Custom: return n.custom.increasing;
        default: return true;
    }
}

bool RateFunction::bijective() const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Polynomial:
        case RateKind::LogPower:
        case RateKind::LogLogPower:
        case RateKind::Inverse: return true;
        case RateKind::Exponential: return false;
        case RateKind::Affine: return n.b > 0.0 && n.a == 0.0;
        case RateKind::Composite: return n.outer->bijective() && n.inner->bijective();
        case RateKind::Custom: return n.custom.bijective;
    }
    return false;
}

bool RateFunction::is_identity() const {
    const Node& n = *node_;
    if (n.kind == RateKind::Polynomial) return n.c == 1.0 && n.gamma == 1.0;
    if (n.kind == RateKind::Affine) return n.b == 1.0 && n.a == 0.0;
    return false;
}

bool RateFunction::closed_form() const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Custom: return false;
        case RateKind::Composite: return n.outer->closed_form() && n.inner->closed_form();
        case RateKind::Inverse: return n.inner->closed_form();
        default: return true;
    }
}

double RateFunction::domain_floor() const { return node_->floor; }

RateFunction RateFunction::with_domain_floor(double floor) const {
    auto n = std::make_shared<Node>(*node_);
    n->floor = floor;
    return RateFunction(n);
}

Asymptotics RateFunction::asymptotics() const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Polynomial: return Asymptotics::power(n.gamma);
        case RateKind::Exponential: return Asymptotics::exponential();
        case RateKind::LogPower: return Asymptotics::power(1.0, n.s);
        case RateKind::LogLogPower: return Asymptotics::power(1.0, 1.0, n.s);
        case RateKind::Affine: return Asymptotics::power(n.b > 0.0 ? 1.0 : 0.0);
        case RateKind::Inverse: {
            const Asymptotics c = n.inner->asymptotics();
            if (c.cls == Asymptotics::Class::Power && c.p > 0.0) return Asymptotics::power(1.0 / c.p, -c.q / c.p, -c.w / c.p);
            if (c.cls == Asymptotics::Class::Exponential) return Asymptotics::power(0.0, 1.0);
            return Asymptotics::unknown();
        }
        case RateKind::Composite: {
            const Asymptotics o = n.outer->asymptotics();
            const Asymptotics i = n.inner->asymptotics();
            using C = Asymptotics::Class;
            if (i.cls == C::Power && i.p > 0.0) {
                if (o.cls == C::Power) return Asymptotics::power(o.p * i.p, o.p * i.q + o.q, o.p * i.w + o.w);
                if (o.cls == C::Exponential) return Asymptotics::exponential();
            }
            if (i.cls == C::Power && i.p == 0.0 && i.q == 0.0 && i.w == 0.0) return Asymptotics::power(0.0);
            if (i.cls == C::Exponential) {
                if (o.cls == C::Exponential || (o.cls == C::Power && o.p > 0.0)) return Asymptotics::exponential();
            }
            return Asymptotics::unknown();
        }
        case RateKind::Custom: return n.custom.at_infinity;
    }
    return Asymptotics::unknown();
}

double RateFunction::power_at_zero() const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Polynomial: return n.gamma;
        case RateKind::Exponential: return 0.0;
        case RateKind::LogPower: return 1.0 + n.s;
        case RateKind::LogLogPower: return 2.0 + n.s;
        case RateKind::Affine: return n.a > 0.0 ? 0.0 : 1.0;
        case RateKind::Inverse: {
            const double c = n.inner->power_at_zero();
            return c > 0.0 ? 1.0 / c : NAN;
        }
        case RateKind::Composite: {
            const double o = n.outer->power_at_zero();
            const double i = n.inner->power_at_zero();
            return (i > 0.0) ? o * i : NAN;
        }
        case RateKind::Custom: return n.custom.power_at_zero;
    }
    return NAN;
}

double RateFunction::max_log_arg() const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Composite: {
            // The outer bound applies to ln inner(λ), so map it back through the inner rate.
            const double Li = n.inner->max_log_arg(), Lo = n.outer->max_log_arg();
            double Y = kInf;
            try {
                Y = n.inner->log_value(Li);
            } catch (const std::exception&) {
            }
            if (!(Y > Lo)) return Li;
            try {
                return std::min(Li, n.inner->log_inverse(Lo));
            } catch (const std::exception&) {
                return std::min(Li, Lo);
            }
        }
        case RateKind::Inverse: return n.inner->max_log_arg();
        case RateKind::Custom: return n.custom.max_log_arg;
        default: return kClosedMaxLog;
    }
}

std::string RateFunction::describe() const {
    const Node& n = *node_;
    switch (n.kind) {
        case RateKind::Polynomial: return "polynomial(c=" + fmt(n.c) + ", gamma=" + fmt(n.gamma) + ")";
        case RateKind::Exponential: return "exponential(c=" + fmt(n.c) + ")";
        case RateKind::LogPower: return "log-power(s=" + fmt(n.s) + ")";
        case RateKind::LogLogPower: return "log-log-power(s=" + fmt(n.s) + ")";
        case RateKind::Affine: return "affine(b=" + fmt(n.b) + ", a=" + fmt(n.a) + ")";
        case RateKind::Composite: return n.outer->describe() + " o " + n.inner->describe();
        case RateKind::Inverse: return "inverse[" + n.inner->describe() + "]";
        case RateKind::Custom: return n.custom.label;
    }
    return "?";
}

double RateFunction::param_c() const { return node_->c; }
double RateFunction::param_gamma() const { return node_->gamma; }
double RateFunction::param_s() const { return node_->s; }
double RateFunction::param_a() const { return node_->a; }
double RateFunction::param_b() const { return node_->b; }

const RateFunction& RateFunction::outer() const {
    if (!node_->outer) throw Error("rate has no outer component");
    return *node_->outer;
}

const RateFunction& RateFunction::inner() const {
    if (!node_->inner) throw Error("rate has no inner component");
    return *node_->inner;
}

namespace {

// c·λ^γ view of power-type rates (polynomial, or affine without offset).
std::optional<std::pair<double, double>> as_power(const RateFunction& r) {
    if (r.kind() == RateKind::Polynomial) return std::make_pair(r.param_c(), r.param_gamma());
    if (r.kind() == RateKind::Affine && r.param_a() == 0.0 && r.param_b() > 0.0) return std::make_pair(r.param_b(), 1.0);
    return std::nullopt;
}

}  // namespace

RateFunction compose(const RateFunction& outer, const RateFunction& inner) {
    if (outer.is_identity()) return inner;
    if (inner.is_identity()) return outer;
    const auto po = as_power(outer);
    const auto pi = as_power(inner);
    if (po && pi) {
        const double c = po->first * std::pow(pi->first, po->second);
        const double g = po->second * pi->second;
        if (c == 1.0 && g == 1.0) return RateFunction::identity();
        return RateFunction::polynomial(c, g);
    }
    if (outer.kind() == RateKind::Composite) return compose(outer.outer(), compose(outer.inner(), inner));
    if (po && inner.kind() == RateKind::Composite && as_power(inner.outer())) {
        return compose(compose(outer, inner.outer()), inner.inner());
    }
    return RateFunction::composite(outer, inner);
}

RateFunction inverse_rate(const RateFunction& f) {
    if (!f.increasing()) throw NonInvertible(f.describe() + " is not flagged strictly increasing");
    if (auto p = as_power(f)) {
        const double g = 1.0 / p->second;
        return RateFunction::polynomial(std::pow(p->first, -g), g);
    }
    if (f.kind() == RateKind::Composite) return compose(inverse_rate(f.inner()), inverse_rate(f.outer()));
    if (f.kind() == RateKind::Inverse) return f.inner();
    auto n = std::make_shared<RateFunction::Node>();
    n->kind = RateKind::Inverse;
    n->inner = f;
    return RateFunction(n);
}

RateFunction scale(const RateFunction& g, double kappa) { return compose(RateFunction::affine(kappa, 0.0), g); }

double invert(const RateFunction& r, double y) {
    if (!r.increasing()) throw NonInvertible(r.describe() + " is not flagged strictly increasing");
    if (!(y > 0.0)) throw HypothesisViolation("invert requires y > 0");
    const auto within = [&](double x) { return std::abs(r.evaluate(x) - y) <= 1e-10 * (1.0 + y); };
    if (r.has_inverse_hint()) {
        double x = NAN;
        switch (r.kind()) {
            case RateKind::Polynomial: x = std::pow(y / r.param_c(), 1.0 / r.param_gamma()); break;
            case RateKind::Exponential:
                if (!(y > r.param_c())) throw BracketFailure("value below the range of " + r.describe());
                x = std::log(y / r.param_c());
                break;
            case RateKind::Affine:
                if (!(y > r.param_a())) throw BracketFailure("value below the range of " + r.describe());
                x = (y - r.param_a()) / r.param_b();
                break;
            case RateKind::Composite: x = invert(r.inner(), invert(r.outer(), y)); break;
            case RateKind::Inverse: x = r.inner().evaluate(y); break;
            default: break;
        }
        if (std::isnan(x)) x = std::exp(r.log_inverse(std::log(y)));
        if (!(x > 0.0) || !std::isfinite(x)) throw BracketFailure("inverse outside (0, inf) for " + r.describe());
        return x;
    }
    const double Y = std::log(y);
    const double L = solve_increasing([&](double t) { return r.log_value(t); }, Y, 0.0, -kLogHuge, kLogHuge);
    const double x = std::exp(L);
    if (!within(x)) throw BracketFailure("no root within tolerance for " + r.describe() + " at y=" + fmt(y));
    return x;
}

MonotoneRatioResult check_monotone_ratio(const RateFunction& f, const RateFunction& g, const GeometricGrid& grid) {
    const RateFunction gt = compose(g, inverse_rate(f));
    MonotoneRatioResult res;
    const double l0 = std::log(grid.lo);
    const double l1 = std::log(grid.hi);
    const int n = std::max(2, grid.points);
    double prev = NAN;
    for (int i = 0; i < n; ++i) {
        const double L = l0 + (l1 - l0) * i / (n - 1);
        const double lr = -gt.log_excess(L);
        if (i > 0) {
            const double tol = 1e-12 * std::max(1.0, std::abs(prev));
            if (std::isnan(lr) || lr - prev > tol) {
                res.ok = false;
                res.first_violation = i - 1;
                res.lambda_lo = std::exp(l0 + (l1 - l0) * (i - 1) / (n - 1));
                res.lambda_hi = std::exp(L);
                res.log_ratio_lo = prev;
                res.log_ratio_hi = lr;
                return res;
            }
        }
        prev = lr;
    }
    return res;
}

namespace {

// Largest grid index i with ratio(i+1) > ratio(i), or -1.
int last_ratio_violation(const RateFunction& f, const RateFunction& g, const GeometricGrid& grid) {
    const RateFunction gt = compose(g, inverse_rate(f));
    const double l0 = std::log(grid.lo);
    const double l1 = std::log(grid.hi);
    const int n = std::max(2, grid.points);
    int last = -1;
    double prev = NAN;
    for (int i = 0; i < n; ++i) {
        const double lr = -gt.log_excess(l0 + (l1 - l0) * i / (n - 1));
        if (i > 0 && (std::isnan(lr) || lr - prev > 1e-12 * std::max(1.0, std::abs(prev)))) last = i - 1;
        prev = lr;
    }
    return last;
}

enum class Verdict { Convergent, Divergent, Unknown };
enum class Shape { SuperExponential, ExpDecay, Algebraic, LogAlgebraic, None };

struct TailClass {
    Verdict verdict = Verdict::Unknown;
    Shape shape = Shape::None;
    double rate = 0.0;  // ExpDecay: F ≍ e^{-rate·L}
    double qp = 0.0;    // Algebraic/LogAlgebraic exponents of L and ln L
    double wp = 0.0;
    std::string why;
};

bool near(double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)); }

// Growth of λ/g̃(λ) decides the behaviour of the integrand h^{-1}(c·λ/g̃(λ)) in L = ln λ.
TailClass classify(const RateFunction& gt, const RateFunction& h) {
    TailClass t;
    const Asymptotics a = gt.asymptotics();
    const double b0 = h.power_at_zero();
    using C = Asymptotics::Class;
    if (a.cls == C::Unknown) return t;
    if (a.cls == C::Exponential) {
        if (b0 > 0.0) {
            t.verdict = Verdict::Convergent;
            t.shape = Shape::SuperExponential;
        }
        return t;
    }
    const double e = 1.0 - a.p;  // ratio ≍ λ^e (ln λ)^{-q} (ln ln λ)^{-w}
    const bool ratio_to_zero = (e < 0.0 && !near(e, 0.0)) ||
                               (near(e, 0.0) && (a.q > 0.0 && !near(a.q, 0.0))) ||
                               (near(e, 0.0) && near(a.q, 0.0) && a.w > 0.0 && !near(a.w, 0.0));
    if (!ratio_to_zero) {
        t.verdict = Verdict::Divergent;
        t.why = "lambda/g(f^-1(lambda)) does not tend to zero";
        return t;
    }
    if (!(b0 > 0.0)) return t;
    if (!near(e, 0.0)) {
        t.verdict = Verdict::Convergent;
        t.shape = Shape::ExpDecay;
        t.rate = -e / b0;
        return t;
    }
    t.qp = a.q / b0;
    t.wp = a.w / b0;
    if (t.qp > 1.0 && !near(t.qp, 1.0)) {
        t.verdict = Verdict::Convergent;
        t.shape = Shape::Algebraic;
    } else if (near(t.qp, 1.0) && t.wp > 1.0 && !near(t.wp, 1.0)) {
        t.verdict = Verdict::Convergent;
        t.shape = Shape::LogAlgebraic;
    } else {
        t.verdict = Verdict::Divergent;
        t.why = "integrand decays like (ln lambda)^-" + fmt(t.qp) + " (ln ln lambda)^-" + fmt(t.wp) +
                ", not integrable against d lambda/lambda";
    }
    return t;
}

double closure(const TailClass& t, double F_end, double X) {
    switch (t.shape) {
        case Shape::ExpDecay: return F_end / t.rate;
        case Shape::Algebraic: {
            const double k = t.qp - 1.0;
            const double corr = 1.0 - t.wp / (k * std::log(X));
            return F_end * X / k * std::max(corr, 0.0);
        }
        case Shape::LogAlgebraic: return F_end * X * std::log(X) / (t.wp - 1.0);
        default: return 0.0;
    }
}

}  // namespace

TailResult tail_integral(const RateFunction& f, const RateFunction& g, const RateFunction& h, double a, double m) {
    if (!(a > 0.0)) throw HypothesisViolation("tail_integral requires a > 0");
    return tail_integral_log(f, g, h, std::log(a), m);
}

TailResult tail_integral_log(const RateFunction& f, const RateFunction& g, const RateFunction& h, double log_a,
                             double m) {
    if (!f.increasing() || !f.bijective()) throw NonInvertible("f must be strictly increasing and bijective");
    if (!h.increasing() || !h.bijective()) throw NonInvertible("h must be strictly increasing and bijective");
    if (!(m >= 0.0)) throw HypothesisViolation("m must be non-negative");
    const RateFunction gt = compose(g, inverse_rate(f));
    const bool h_id = h.is_identity();
    const double log4m = std::log(4.0 + m);
    TailResult res;

    const TailClass cls = classify(gt, h);
    if (cls.verdict == Verdict::Divergent) {
        res.divergent = true;
        res.analytic = true;
        res.reason = cls.why;
        return res;
    }

    // User-supplied rates are themselves computed by quadrature, so asking for more is wasted work.
    const double tol = (gt.closed_form() && h.closed_form()) ? 1e-14 : 1e-10;
    bool clamped = false;
    auto F = [&](double L) -> double {
        double y = log4m - gt.log_excess(L);
        if (std::isnan(y)) throw QuadratureFailure("integrand undefined at ln(lambda)=" + fmt(L));
        if (y == -kInf || y < -1e300) return 0.0;
        if (y > kLogHuge) {
            clamped = true;
            y = kLogHuge;
        }
        const double x = h_id ? y : h.log_inverse(y);
        return std::exp(x);
    };

    const double Lmax = gt.max_log_arg();
    const double L1 = std::max(log_a, 1.0);
    try {
        double value = 0.0;
        if (log_a < L1) value += quad::finite(F, log_a, L1, tol);
        if (L1 >= Lmax) {
            if (cls.verdict != Verdict::Convergent) {
                res.divergent = true;
                res.reason = "lower limit beyond the trusted range of g";
                return res;
            }
            value += closure(cls, F(L1), L1);
        } else {
            quad::HalfLineOptions o;
            o.max_u = std::log(Lmax / L1);
            o.decay_heuristic = cls.verdict == Verdict::Unknown;
            o.panel_tol = tol;
            if (!(gt.closed_form() && h.closed_form())) o.max_width = 0.25;
            auto Fv = [&](double v) {
                const double L = L1 * std::exp(v);
                return F(L) * L;
            };
            const quad::HalfLineResult hr = quad::half_line(Fv, o);
            res.panels = hr.panels;
            if (hr.divergent) {
                res.divergent = true;
                res.reason = hr.reason;
                return res;
            }
            value += hr.value;
            if (!hr.converged) {
                if (cls.verdict != Verdict::Convergent) {
                    res.divergent = true;
                    res.reason = "integrand did not decay within the trusted range of g";
                    return res;
                }
                const double X = L1 * std::exp(hr.u_end);
                value += closure(cls, F(X), X);
            }
        }
        if (clamped) {
            res.divergent = true;
            res.reason = "h^-1 argument exceeded 1e300";
            return res;
        }
        res.value = value;
    } catch (const QuadratureFailure& e) {
        res.divergent = true;
        res.reason = e.what();
    }
    return res;
}

AdmissibilityReport solve_lambda_T(const RateFunction& f, const RateFunction& g, const RateFunction& h, double T,
                                   double m, const SolveOptions& opts) {
    if (!(T > 0.0)) throw HypothesisViolation("T must be positive");
    AdmissibilityReport rep;
    rep.T = T;
    rep.m = m;
    rep.threshold = threshold_for(T);

    const double l0 = std::log(opts.grid.lo), l1 = std::log(opts.grid.hi);
    for (int i = 0; i < opts.grid.points; ++i) {
        const double L = l0 + (l1 - l0) * i / std::max(1, opts.grid.points - 1);
        const double v = g.log_value(L);
        if (std::isnan(v) || v == -kInf) {
            rep.rejection = "g is not positive at lambda=" + fmt(std::exp(L));
            return rep;
        }
    }
    if (!g.increasing()) {
        rep.warnings.push_back("g is not flagged increasing; admitted on the strength of the ratio condition alone");
    }

    rep.ratio = check_monotone_ratio(f, g, opts.grid);
    rep.monotone_ratio_ok = rep.ratio.ok;
    // When the ratio only misbehaves at small lambda, g may be lowered there to λ/sup_{μ≥λ} ratio(μ).
    // That minorant is still a valid dissipation rate and leaves the tail integral above the last
    // violation untouched, so λ_T is admissible provided it lies beyond that point.
    double L_mono = -kInf;
    if (!rep.ratio.ok) {
        const int last = last_ratio_violation(f, g, opts.grid);
        if (last >= opts.grid.points - 2) {
            rep.rejection = "lambda/g(f^-1(lambda)) increases between lambda=" + fmt(rep.ratio.lambda_lo) + " and " +
                            fmt(rep.ratio.lambda_hi);
            return rep;
        }
        L_mono = l0 + (l1 - l0) * (last + 1) / std::max(1, opts.grid.points - 1);
    }

    const double Lf = std::log(opts.domain_floor);
    auto I = [&](double L) { return tail_integral_log(f, g, h, L, m); };
    const TailResult at_floor = I(Lf);
    if (at_floor.divergent) {
        rep.divergence = at_floor.reason;
        rep.divergence_analytic = at_floor.analytic;
        rep.rejection = "tail integral diverges (non-integrable): " + at_floor.reason;
        return rep;
    }
    rep.integrable_ok = true;
    if (at_floor.value <= rep.threshold) {
        rep.lambda_T = 0.0;
        rep.log_lambda_T = -kInf;
        rep.tail_at_lambda_T = at_floor.value;
        return rep;
    }

    auto above = [&](double L) {
        const TailResult r = I(L);
        return r.divergent || r.value > rep.threshold;
    };
    double lo = Lf;
    double step = 1.0;
    double hi = lo + step;
    while (above(hi)) {
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        if (!(hi < 1e300)) {
            rep.rejection = "threshold not reached for any representable lambda";
            return rep;
        }
    }
    for (int i = 0; i < 2200; ++i) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (above(mid)) lo = mid; else hi = mid;
    }
    if (hi < L_mono) {
        rep.rejection = "lambda/g(f^-1(lambda)) increases between lambda=" + fmt(rep.ratio.lambda_lo) + " and " +
                        fmt(rep.ratio.lambda_hi) + ", above the candidate lambda_T=" + fmt(std::exp(hi));
        return rep;
    }
    if (!rep.ratio.ok) {
        rep.monotone_ratio_ok = true;
        rep.warnings.push_back("lambda/g(f^-1(lambda)) is non-increasing only from lambda=" + fmt(std::exp(L_mono)) +
                               "; g is replaced below that point by its monotone-ratio minorant, which leaves lambda_T unchanged");
    }
    rep.log_lambda_T = hi;
    rep.lambda_T = std::exp(hi);
    rep.tail_at_lambda_T = I(hi).value;
    return rep;
}

}  // namespace obscert
