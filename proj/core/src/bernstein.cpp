#include "obscert/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "obscert/quadrature.hpp"

namespace obscert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

}  // namespace

HalfLineMeasure HalfLineMeasure::from_density(std::function<double(double)> rho, double lo, double hi) {
    if (!(lo >= 0.0) || !(hi > lo)) throw HypothesisViolation("density support must satisfy 0 <= lo < hi");
    HalfLineMeasure m;
    m.kind = Kind::Density;
    m.density = std::move(rho);
    m.support_lo = lo;
    m.support_hi = hi;
    return m;
}

HalfLineMeasure HalfLineMeasure::stable_power(double coefficient, double s) {
    if (!(coefficient > 0.0) || !(s > 0.0 && s < 1.0)) {
        throw HypothesisViolation("stable density requires coefficient > 0 and s in (0, 1)");
    }
    HalfLineMeasure m = from_density([coefficient, s](double t) { return coefficient * std::pow(t, -1.0 - s); });
    m.stable = std::make_pair(coefficient, s);
    return m;
}

HalfLineMeasure HalfLineMeasure::from_atoms(std::vector<std::pair<double, double>> atoms) {
    for (const auto& [t, w] : atoms) {
        if (!(t > 0.0) || !(w >= 0.0)) throw HypothesisViolation("atoms need t > 0 and w >= 0");
    }
    HalfLineMeasure m;
    m.kind = Kind::Atoms;
    m.atoms = std::move(atoms);
    return m;
}

double HalfLineMeasure::integrate(const std::function<double(double)>& w, double p, double q, double rel_tol) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Atoms: {
            double s = 0.0;
            for (const auto& [t, wt] : atoms) {
                if (t >= p && t < q) s += wt * w(t);
            }
            return s;
        }
        case Kind::Density: {
            const double lo = std::max(p, support_lo);
            const double hi = std::min(q, support_hi);
            if (!(hi > lo)) return 0.0;
            return quad::positive_range([&](double t) { return w(t) * density(t); }, lo, hi, rel_tol);
        }
    }
    return 0.0;
}

double LevyTriplet::integrability_mass() const {
    const auto one = [](double) { return 1.0; };
    const auto id = [](double t) { return t; };
    const double near = mu.integrate(id, 0.0, 1.0);
    const double far = mu.integrate(one, 1.0, kInf);
    if (!std::isfinite(near + far)) throw QuadratureFailure("integral of min(1,t) against mu is not finite");
    return near + far;
}

BernsteinFunction BernsteinFunction::power(double s) {
    if (!(s > 0.0 && s <= 1.0)) throw HypothesisViolation("power Bernstein function requires s in (0, 1]");
    BernsteinFunction f;
    f.kind_ = Kind::Power;
    f.s_ = s;
    return f;
}

BernsteinFunction BernsteinFunction::affine(double b, double a) {
    if (!(b >= 0.0) || !(a >= 0.0)) throw HypothesisViolation("affine Bernstein function requires a, b >= 0");
    BernsteinFunction f;
    f.kind_ = Kind::Affine;
    f.a_ = a;
    f.b_ = b;
    f.zero_ = a;
    return f;
}

BernsteinFunction BernsteinFunction::from_triplet(LevyTriplet t) {
    if (!(t.a >= 0.0) || !(t.b >= 0.0)) throw HypothesisViolation("triplet requires a, b >= 0");
    t.integrability_mass();
    BernsteinFunction f;
    f.kind_ = Kind::FromTriplet;
    f.a_ = t.a;
    f.b_ = t.b;
    f.zero_ = t.a;
    f.triplet_ = std::make_shared<const LevyTriplet>(std::move(t));
    return f;
}

BernsteinFunction BernsteinFunction::custom(std::function<double(double)> phi, double at_zero, std::string label) {
    BernsteinFunction f;
    f.kind_ = Kind::Custom;
    f.custom_ = std::move(phi);
    f.zero_ = at_zero;
    f.label_ = std::move(label);
    return f;
}

const LevyTriplet& BernsteinFunction::triplet() const {
    if (!triplet_) throw Error("Bernstein function has no triplet");
    return *triplet_;
}

double BernsteinFunction::operator()(double lambda) const { return phi_eval(*this, lambda); }

double BernsteinFunction::at_zero() const { return zero_; }

std::string BernsteinFunction::describe() const {
    switch (kind_) {
        case Kind::Power: return "power(s=" + fmt(s_) + ")";
        case Kind::Affine: return "affine(b=" + fmt(b_) + ", a=" + fmt(a_) + ")";
        case Kind::FromTriplet: return "triplet(a=" + fmt(a_) + ", b=" + fmt(b_) + ")";
        case Kind::Custom: return label_;
    }
    return "?";
}

double phi_eval(const BernsteinFunction& phi, double lambda) {
    if (!(lambda > 0.0)) throw HypothesisViolation("phi_eval requires lambda > 0");
    switch (phi.kind()) {
        case BernsteinFunction::Kind::Power: return phi.s() == 1.0 ? lambda : std::pow(lambda, phi.s());
        case BernsteinFunction::Kind::Affine: return phi.a() + phi.b() * lambda;
        case BernsteinFunction::Kind::Custom: return phi.custom_fn()(lambda);
        case BernsteinFunction::Kind::FromTriplet: {
            const LevyTriplet& t = phi.triplet();
            const auto w = [lambda](double x) { return -std::expm1(-lambda * x); };
            const double split = 1.0 / lambda;
            const double mass = t.mu.integrate(w, 0.0, split, 1e-11) + t.mu.integrate(w, split, kInf, 1e-11);
            return t.a + t.b * lambda + mass;
        }
    }
    return NAN;
}

PhiBounds phi_bounds(const LevyTriplet& t, double lambda) {
    if (t.a != 0.0 || t.b != 0.0) throw HypothesisViolation("phi_bounds applies to triplets with a = b = 0");
    if (!(lambda > 0.0)) throw HypothesisViolation("phi_bounds requires lambda > 0");
    const double split = 1.0 / lambda;
    const double first = t.mu.integrate([](double x) { return x; }, 0.0, split);
    const double tail = t.mu.integrate([](double) { return 1.0; }, split, kInf);
    return {0.5 * lambda * first, lambda * first + 2.0 * tail};
}

RateFunction triplet_minorant(const LevyTriplet& t) {
    if (t.b > 0.0) return RateFunction::affine(t.b, t.a);
    if (t.mu.stable) {
        const auto [coef, s] = *t.mu.stable;
        return RateFunction::polynomial(coef / (2.0 * (1.0 - s)), s);
    }
    CustomRate spec;
    spec.evaluate = [t](double lam) {
        LevyTriplet z = t;
        z.a = 0.0;
        return t.a + phi_bounds(z, lam).lower;
    };
    spec.increasing = false;
    spec.bijective = false;
    // Past this the split point 1/λ pushes the near-zero sweep into the range where densities overflow.
    spec.max_log_arg = 250.0;
    spec.label = "triplet lower bound";
    return RateFunction::custom(std::move(spec));
}

RateFunction subordinate_rate(const BernsteinFunction& phi, const RateFunction& g) {
    switch (phi.kind()) {
        case BernsteinFunction::Kind::Power:
            if (phi.s() == 1.0) return g;
            return compose(RateFunction::polynomial(1.0, phi.s()), g);
        case BernsteinFunction::Kind::Affine: return compose(RateFunction::affine(phi.b(), phi.a()), g);
        default: break;
    }
    CustomRate spec;
    spec.evaluate = [phi, g](double lam) { return phi_eval(phi, g(lam)); };
    spec.increasing = g.increasing();
    spec.bijective = false;
    spec.max_log_arg = std::min(700.0, g.max_log_arg());
    spec.label = phi.describe() + " o " + g.describe();
    return RateFunction::custom(std::move(spec));
}

Certificate certify_subordinated(const BernsteinFunction& phi, const ProblemData& p, const SolveOptions& opts) {
    p.validate();
    if (!p.h.is_identity()) throw HypothesisViolation("subordination transfer is only available for h(t) = t");
    if (p.omega > 0.0) throw HypothesisViolation("subordination needs a bounded semigroup (omega <= 0)");
    ProblemData q = p;
    std::string route = "subordinated by " + phi.describe();
    if (phi.kind() == BernsteinFunction::Kind::FromTriplet) {
        q.g = compose(triplet_minorant(phi.triplet()), p.g);
        route += " via triplet lower bound";
    } else {
        q.g = subordinate_rate(phi, p.g);
    }
    // The subordinated semigroup obeys ‖S_φ(t)‖ ≤ M e^{−φ(−ω)t}.
    q.omega = (p.omega < 0.0) ? -phi_eval(phi, -p.omega) : -phi.at_zero();
    if (q.omega == 0.0) q.omega = 0.0;
    AdmissibilityReport rep = solve_lambda_T(q.f, q.g, q.h, q.T, q.m, opts);
    if (!rep.admissible()) throw NotAdmissible(std::move(rep));
    Certificate c = assemble_certificate(q, std::move(rep), route);
    c.notes.push_back("dissipation rate " + q.g.describe() + ", constant C2 unchanged");
    return c;
}

std::vector<double> subordinate_diagonal(const std::vector<double>& eigen_rates, const BernsteinFunction& phi, double t) {
    if (!(t >= 0.0)) throw HypothesisViolation("t must be non-negative");
    std::vector<double> out;
    out.reserve(eigen_rates.size());
    for (double mu : eigen_rates) {
        if (!(mu >= 0.0)) throw HypothesisViolation("eigen rates must be non-negative");
        const double v = (mu == 0.0) ? phi.at_zero() : phi_eval(phi, mu);
        out.push_back(std::exp(-v * t));
    }
    return out;
}

SpotCheck complete_monotonicity_spot_check(const BernsteinFunction& phi, const std::vector<double>& lambdas,
                                           double rel_step, double tol) {
    SpotCheck sc;
    for (double lam : lambdas) {
        const double h = rel_step * lam;
        double f[4];
        for (int i = 0; i < 4; ++i) f[i] = phi_eval(phi, lam + i * h);
        if (f[0] < -tol * std::abs(f[0])) return {false, 0, lam, f[0]};
        const double d[3] = {f[1] - f[0], f[2] - 2.0 * f[1] + f[0], f[3] - 3.0 * f[2] + 3.0 * f[1] - f[0]};
        const double scale[3] = {std::abs(f[1]) + std::abs(f[0]), std::abs(f[2]) + 2.0 * std::abs(f[1]) + std::abs(f[0]),
                                 std::abs(f[3]) + 3.0 * std::abs(f[2]) + 3.0 * std::abs(f[1]) + std::abs(f[0])};
        for (int k = 0; k < 3; ++k) {
            const double signed_d = (k % 2 == 0) ? d[k] : -d[k];
            if (signed_d < -tol * scale[k]) return {false, k + 1, lam, d[k]};
        }
    }
    return sc;
}

}  // namespace obscert
