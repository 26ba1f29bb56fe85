#include "obscert/levy_symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "obscert/parallel.hpp"
#include "obscert/quadrature.hpp"

namespace obscert {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

const char* kFactorWarning =
    "rate uses the factor 11/24 of the Re psi lower bound; the factor 24/11 would not bound inf Re psi from below";

bool power_kind(const RadialDensity& r) {
    return r.kind == RadialDensity::Kind::PowerLaw || r.kind == RadialDensity::Kind::FractionalStable;
}

// ∫_a^b ρ(r) r^j dr restricted to the support.
double radial_moment(const RadialDensity& rho, int j, double a, double b) {
    const auto [slo, shi] = rho.support();
    const double lo = std::max(a, slo);
    const double hi = std::min(b, shi);
    if (!(hi > lo)) return 0.0;
    if (power_kind(rho) || rho.kind == RadialDensity::Kind::Indicator) {
        const double beta = rho.kind == RadialDensity::Kind::Indicator ? 0.0 : rho.exponent;
        const double e = beta + j + 1.0;
        if (e == 0.0) {
            if (lo == 0.0 || std::isinf(hi)) throw QuadratureFailure("radial moment diverges");
            return rho.scale * (std::log(hi) - std::log(lo));
        }
        if ((lo == 0.0 && e < 0.0) || (std::isinf(hi) && e > 0.0)) throw QuadratureFailure("radial moment diverges");
        const double top = std::isinf(hi) ? 0.0 : std::pow(hi, e);
        const double bot = lo == 0.0 ? 0.0 : std::pow(lo, e);
        return rho.scale * (top - bot) / e;
    }
    return quad::positive_range([&](double r) { return rho(r) * std::pow(r, j); }, lo, hi, 1e-11);
}

double one_minus_cos(double x) {
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

double one_minus_sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 0.1) {
        const double x2 = x * x;
        return x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
    }
    return 1.0 - std::sin(x) / x;
}

enum class Osc { Cos, Sinc };

using boost::math::quadrature::ooura_fourier_cos;
using boost::math::quadrature::ooura_fourier_sin;

ooura_fourier_cos<double>& cos_integrator() {
    thread_local ooura_fourier_cos<double> q(1e-12, 8);
    return q;
}

ooura_fourier_sin<double>& sin_integrator() {
    thread_local ooura_fourier_sin<double> q(1e-12, 8);
    return q;
}

// ∫_0^hi w(r)·K(kr) dr with K = 1 − cos or 1 − sin(x)/x.
double one_minus_integral(const std::function<double(double)>& w, double hi, double k, Osc kind) {
    if (!(k > 0.0)) return 0.0;
    auto K = [kind](double x) { return kind == Osc::Cos ? one_minus_cos(x) : one_minus_sinc(x); };
    auto full = [&](double r) { return w(r) * K(k * r); };
    const double r0 = 1.0 / k;
    const double near = quad::positive_range(full, 0.0, std::min(r0, hi), 1e-12);
    if (hi <= r0) return near;
    if (std::isfinite(hi)) {
        const double width = kPi / k;
        const long panels = std::min<long>(200000, static_cast<long>(std::ceil((hi - r0) / width)));
        const double h = (hi - r0) / static_cast<double>(panels);
        double s = 0.0;
        for (long i = 0; i < panels; ++i) {
            const double a = r0 + h * static_cast<double>(i);
            s += quad::finite(full, a, i + 1 == panels ? hi : a + h, 1e-12);
        }
        return near + s;
    }
    const double mass = quad::positive_range(w, r0, kInf, 1e-12);
    double osc = 0.0;
    const double c0 = std::cos(k * r0), s0 = std::sin(k * r0);
    if (kind == Osc::Cos) {
        auto shifted = [&](double s) { return w(r0 + s); };
        const double Ic = cos_integrator().integrate(shifted, k).first;
        const double Is = sin_integrator().integrate(shifted, k).first;
        osc = c0 * Ic - s0 * Is;
    } else {
        auto shifted = [&](double s) { return w(r0 + s) / (r0 + s); };
        const double Ic = cos_integrator().integrate(shifted, k).first;
        const double Is = sin_integrator().integrate(shifted, k).first;
        osc = (s0 * Ic + c0 * Is) / k;
    }
    const double v = near + mass - osc;
    if (!std::isfinite(v)) throw QuadratureFailure("radial symbol integral is not finite at |xi|=" + fmt(k));
    return v;
}

// ∫ (1 − cos⟨x,ξ⟩) ρ(‖x‖) dx for a radial density, ‖ξ‖ = k.
double radial_re_integral(const RadialDensity& rho, int n, double k) {
    if (k == 0.0) return 0.0;
    const double hi = rho.support().second;
    switch (n) {
        case 1: return one_minus_integral([&](double r) { return 2.0 * rho(r); }, hi, k, Osc::Cos);
        case 2: {
            // 4∫_0^{π/2} R(k cos θ) dθ with R the one-dimensional transform of ρ(r)·r; panels graded towards θ = π/2.
            const auto& gl = quad::gauss_legendre(20);
            auto w = [&](double r) { return rho(r) * r; };
            std::vector<double> cuts{0.0};
            for (int j = 1; j <= 12; ++j) cuts.push_back(0.5 * kPi * (1.0 - std::pow(4.0, -j)));
            cuts.push_back(0.5 * kPi);
            double s = 0.0;
            for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
                const double a = cuts[p], b = cuts[p + 1];
                const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
                for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                    const double th = mid + half * gl.nodes[i];
                    s += half * gl.weights[i] * one_minus_integral(w, hi, k * std::cos(th), Osc::Cos);
                }
            }
            return 4.0 * s;
        }
        case 3:
            return one_minus_integral([&](double r) { return 4.0 * kPi * rho(r) * r * r; }, hi, k, Osc::Sinc);
        default: throw UnsupportedDimension("quadrature symbols are limited to n <= 3");
    }
}

double quad_form(const SymbolModel& m, const Eigen::VectorXd& xi) {
    if (m.Q.size() == 0) return 0.0;
    return xi.dot(m.Q * xi);
}

double dot_d(const SymbolModel& m, const Eigen::VectorXd& xi) {
    if (m.d.size() == 0) return 0.0;
    return m.d.dot(xi);
}

void check_xi(const SymbolModel& m, const Eigen::VectorXd& xi) {
    if (xi.size() != m.n) throw HypothesisViolation("xi has dimension " + std::to_string(xi.size()) + ", model has " + std::to_string(m.n));
}

// Radial density implied by the closed-form tag when no measure is given.
RadialDensity implied_density(const SymbolModel& m) {
    RadialDensity r;
    r.kind = RadialDensity::Kind::FractionalStable;
    r.alpha = m.closed_alpha;
    r.exponent = -m.n - 2.0 * m.closed_alpha;
    r.scale = m.closed_scale * fractional_stable_constant(m.n, m.closed_alpha);
    return r;
}

const LevyMeasureRn& effective_measure(const SymbolModel& m, LevyMeasureRn& scratch) {
    if (m.mu.kind == LevyMeasureRn::Kind::Zero && m.closed_form == SymbolModel::ClosedForm::FractionalLaplacian) {
        scratch.kind = LevyMeasureRn::Kind::Radial;
        scratch.rho = implied_density(m);
        return scratch;
    }
    return m.mu;
}

double phi_of(const SymbolModel& m, const LevyMeasureRn& mu, const Eigen::VectorXd& xi) {
    const double k = xi.norm();
    if (!(k > 0.0)) throw HypothesisViolation("phi requires xi != 0");
    switch (mu.kind) {
        case LevyMeasureRn::Kind::Zero: return 0.0;
        case LevyMeasureRn::Kind::Atoms: {
            double s = 0.0;
            for (const auto& [x, w] : mu.atoms) {
                if (x.norm() < 1.0 / k) {
                    const double u = x.dot(xi);
                    s += w * u * u;
                }
            }
            return s;
        }
        case LevyMeasureRn::Kind::Radial:
            return k * k * sphere_area(m.n) / m.n * radial_moment(mu.rho, m.n + 1, 0.0, 1.0 / k);
    }
    return 0.0;
}

double min_eig(const Eigen::MatrixXd& Q) {
    if (Q.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Q contribution α·λ² to the rate; rejects singular nonzero Q.
double q_alpha(const SymbolModel& m) {
    if (m.Q.size() == 0 || m.Q.isZero(0.0)) return 0.0;
    const double a = min_eig(m.Q);
    const double scale = m.Q.cwiseAbs().maxCoeff();
    if (a <= 1e-12 * scale) {
        throw HypothesisViolation("dissipation rate supports Q = 0 or Q positive definite; Q is singular and nonzero");
    }
    return a;
}

}  // namespace

double RadialDensity::operator()(double r) const {
    switch (kind) {
        case Kind::Indicator: return (r > lo && r < hi) ? scale : 0.0;
        case Kind::PowerLaw:
        case Kind::FractionalStable: return scale * std::pow(r, exponent);
        case Kind::Custom: return r < support_hi ? custom(r) : 0.0;
    }
    return 0.0;
}

std::pair<double, double> RadialDensity::support() const {
    if (kind == Kind::Indicator) return {lo, hi};
    if (kind == Kind::Custom) return {0.0, support_hi};
    return {0.0, kInf};
}

double fractional_stable_constant(int n, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw HypothesisViolation("alpha must lie in (0, 1)");
    return std::pow(4.0, alpha) * std::tgamma(0.5 * n + alpha) /
           (std::pow(kPi, 0.5 * n) * std::abs(std::tgamma(-alpha)));
}

double sphere_area(int n) { return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n); }

SymbolModel SymbolModel::indicator(int n) {
    SymbolModel m;
    m.n = n;
    m.mu.kind = LevyMeasureRn::Kind::Radial;
    m.mu.rho.kind = RadialDensity::Kind::Indicator;
    return m;
}

SymbolModel SymbolModel::power_law(int n, double eps) {
    if (!(eps > 0.0 && eps < 2.0)) throw HypothesisViolation("power-law density needs eps in (0, 2)");
    SymbolModel m;
    m.n = n;
    m.mu.kind = LevyMeasureRn::Kind::Radial;
    m.mu.rho.kind = RadialDensity::Kind::PowerLaw;
    m.mu.rho.exponent = -n - 2.0 + eps;
    return m;
}

SymbolModel SymbolModel::fractional_stable(int n, double alpha) {
    SymbolModel m;
    m.n = n;
    m.mu.kind = LevyMeasureRn::Kind::Radial;
    m.mu.rho.kind = RadialDensity::Kind::FractionalStable;
    m.mu.rho.alpha = alpha;
    m.mu.rho.exponent = -n - 2.0 * alpha;
    m.mu.rho.scale = fractional_stable_constant(n, alpha);
    m.closed_form = ClosedForm::FractionalLaplacian;
    m.closed_alpha = alpha;
    return m;
}

SymbolModel SymbolModel::gaussian(const Eigen::MatrixXd& Q) {
    SymbolModel m;
    m.n = static_cast<int>(Q.rows());
    m.Q = Q;
    return m;
}

double SymbolModel::min_eig_Q() const { return min_eig(Q); }

void SymbolModel::validate() const {
    if (n < 1) throw HypothesisViolation("dimension must be >= 1");
    if (!(c >= 0.0)) throw HypothesisViolation("c must be >= 0");
    if (d.size() != 0 && d.size() != n) throw HypothesisViolation("d has the wrong dimension");
    if (Q.size() != 0) {
        if (Q.rows() != n || Q.cols() != n) throw HypothesisViolation("Q has the wrong shape");
        if (!(Q - Q.transpose()).isZero(1e-12)) throw HypothesisViolation("Q is not symmetric");
        if (min_eig(Q) < -1e-12) throw HypothesisViolation("Q is not positive semidefinite");
    }
    if (closed_form == ClosedForm::FractionalLaplacian && !(closed_alpha > 0.0 && closed_alpha < 1.0)) {
        throw HypothesisViolation("fractional Laplacian tag needs alpha in (0, 1)");
    }
    switch (mu.kind) {
        case LevyMeasureRn::Kind::Zero: break;
        case LevyMeasureRn::Kind::Atoms:
            for (const auto& [x, w] : mu.atoms) {
                if (x.size() != n) throw HypothesisViolation("atom has the wrong dimension");
                if (!(w >= 0.0)) throw HypothesisViolation("atom weights must be >= 0");
                if (x.norm() == 0.0) throw HypothesisViolation("the Levy measure has no mass at 0");
            }
            break;
        case LevyMeasureRn::Kind::Radial: {
            if (n > 3 && closed_form == ClosedForm::None) {
                throw UnsupportedDimension("quadrature symbols are limited to n <= 3");
            }
            const double area = sphere_area(n);
            const double v = area * (radial_moment(mu.rho, n + 1, 0.0, 1.0) + radial_moment(mu.rho, n - 1, 1.0, kInf));
            if (!std::isfinite(v)) throw QuadratureFailure("integral of min(|x|^2, 1) against mu is not finite");
            break;
        }
    }
}

double re_psi_quadrature(const SymbolModel& m, const Eigen::VectorXd& xi) {
    check_xi(m, xi);
    LevyMeasureRn scratch;
    const LevyMeasureRn& mu = effective_measure(m, scratch);
    double integral = 0.0;
    switch (mu.kind) {
        case LevyMeasureRn::Kind::Zero: break;
        case LevyMeasureRn::Kind::Atoms:
            for (const auto& [x, w] : mu.atoms) integral += w * one_minus_cos(x.dot(xi));
            break;
        case LevyMeasureRn::Kind::Radial: integral = radial_re_integral(mu.rho, m.n, xi.norm()); break;
    }
    return m.c + quad_form(m, xi) + integral;
}

std::complex<double> psi_eval(const SymbolModel& m, const Eigen::VectorXd& xi) {
    check_xi(m, xi);
    double re = m.c + quad_form(m, xi);
    double im = dot_d(m, xi);
    if (m.closed_form == SymbolModel::ClosedForm::FractionalLaplacian) {
        re += m.closed_scale * std::pow(xi.norm(), 2.0 * m.closed_alpha);
    } else if (m.mu.kind == LevyMeasureRn::Kind::Atoms) {
        for (const auto& [x, w] : m.mu.atoms) {
            const double u = x.dot(xi);
            re += w * one_minus_cos(u);
            im += w * (std::sin(u) - u / (1.0 + x.squaredNorm()));
        }
    } else if (m.mu.kind == LevyMeasureRn::Kind::Radial) {
        // The odd imaginary part integrates to zero against a radial density.
        re += radial_re_integral(m.mu.rho, m.n, xi.norm());
    }
    return {re, im};
}

double re_psi(const SymbolModel& m, const Eigen::VectorXd& xi) { return psi_eval(m, xi).real(); }

double phi_quadratic(const SymbolModel& m, const Eigen::VectorXd& xi) {
    check_xi(m, xi);
    LevyMeasureRn scratch;
    return phi_of(m, effective_measure(m, scratch), xi);
}

double tail_mass(const SymbolModel& m, const Eigen::VectorXd& xi) {
    check_xi(m, xi);
    const double k = xi.norm();
    if (!(k > 0.0)) throw HypothesisViolation("tail mass requires xi != 0");
    LevyMeasureRn scratch;
    const LevyMeasureRn& mu = effective_measure(m, scratch);
    switch (mu.kind) {
        case LevyMeasureRn::Kind::Zero: return 0.0;
        case LevyMeasureRn::Kind::Atoms: {
            double s = 0.0;
            for (const auto& [x, w] : mu.atoms) {
                if (x.norm() >= 1.0 / k) s += w;
            }
            return s;
        }
        case LevyMeasureRn::Kind::Radial: return sphere_area(m.n) * radial_moment(mu.rho, m.n - 1, 1.0 / k, kInf);
    }
    return 0.0;
}

SandwichResult sandwich_check(const SymbolModel& m, const Eigen::VectorXd& xi, double abs_tol, double rel_tol) {
    if (m.c != 0.0 || quad_form(m, xi) != 0.0) {
        throw HypothesisViolation("the sandwich bounds apply to symbols with c = 0 and Q = 0");
    }
    SandwichResult r;
    r.phi = phi_quadratic(m, xi);
    r.tail = tail_mass(m, xi);
    r.re_psi = re_psi_quadrature(m, xi);
    r.lower = kSandwichLower * r.phi;
    r.upper = 2.0 * (r.phi + r.tail);
    r.lower_ok = r.lower <= r.re_psi + abs_tol + rel_tol * std::abs(r.re_psi);
    r.upper_ok = r.re_psi <= r.upper + abs_tol + rel_tol * std::abs(r.upper);
    return r;
}

DissipationResult dissipation_rate(const SymbolModel& m, double lambda, const DissipationOptions& opts) {
    if (!(lambda > 0.0)) throw HypothesisViolation("dissipation rate requires lambda > 0");
    m.validate();
    const double alpha = q_alpha(m);
    LevyMeasureRn scratch;
    const LevyMeasureRn& mu = effective_measure(m, scratch);
    const int n = m.n;
    auto phi = [&](const Eigen::VectorXd& xi) { return phi_of(m, mu, xi); };

    // Face grid: ξ_a = ±λ, the remaining coordinates on a uniform grid in [−λ, λ].
    const int P = std::max(2, opts.face_points);
    std::size_t per_face = 1;
    for (int i = 1; i < n; ++i) per_face *= static_cast<std::size_t>(P);
    const std::size_t total = per_face * 2 * static_cast<std::size_t>(n);
    auto point = [&](std::size_t idx) {
        Eigen::VectorXd xi(n);
        const std::size_t face = idx / per_face;
        std::size_t rem = idx % per_face;
        const int axis = static_cast<int>(face / 2);
        xi[axis] = (face % 2 == 0) ? lambda : -lambda;
        for (int j = 0; j < n; ++j) {
            if (j == axis) continue;
            const std::size_t q = rem % static_cast<std::size_t>(P);
            rem /= static_cast<std::size_t>(P);
            xi[j] = -lambda + 2.0 * lambda * static_cast<double>(q) / (P - 1);
        }
        return xi;
    };
    std::vector<double> vals(total);
    parallel_for(total, [&](std::size_t i) { vals[i] = phi(point(i)); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < total; ++i) {
        if (vals[i] < vals[best]) best = i;
    }

    DissipationResult res;
    Eigen::VectorXd x = point(best);
    double fx = vals[best];
    if (n > 1) {
        const int axis = static_cast<int>((best / per_face) / 2);
        double step = 2.0 * lambda / (P - 1);
        while (step > 1e-10 * lambda) {
            bool moved = false;
            for (int j = 0; j < n; ++j) {
                if (j == axis) continue;
                for (double sgn : {1.0, -1.0}) {
                    Eigen::VectorXd y = x;
                    y[j] = std::clamp(y[j] + sgn * step, -lambda, lambda);
                    const double fy = phi(y);
                    if (fy < fx) {
                        x = y;
                        fx = fy;
                        moved = true;
                    }
                }
            }
            if (!moved) step *= 0.5;
        }
    }
    const double boundary_phi = fx;
    res.argmin = x;

    // Ray monotonicity on a strided subset of face points plus the minimiser.
    std::vector<Eigen::VectorXd> dirs{x};
    const int want = std::max(1, opts.ray_directions);
    const std::size_t stride = std::max<std::size_t>(1, total / static_cast<std::size_t>(want));
    for (std::size_t i = 0; i < total && static_cast<int>(dirs.size()) < want; i += stride) dirs.push_back(point(i));
    const int S = std::max(2, opts.ray_samples);
    std::vector<char> mono(dirs.size(), 1);
    parallel_for(dirs.size(), [&](std::size_t di) {
        double prev = phi(dirs[di]);
        for (int j = 1; j < S; ++j) {
            const double s = std::pow(opts.ray_span, static_cast<double>(j) / (S - 1));
            const double v = phi(s * dirs[di]);
            if (v < prev * (1.0 - 1e-9)) {
                mono[di] = 0;
                return;
            }
            prev = v;
        }
    });
    res.ray_monotone = std::all_of(mono.begin(), mono.end(), [](char c) { return c != 0; });

    double inf_phi = boundary_phi;
    if (!res.ray_monotone) {
        res.heuristic = true;
        std::vector<double> shell(dirs.size() * static_cast<std::size_t>(opts.shell_levels + 1));
        parallel_for(shell.size(), [&](std::size_t i) {
            const std::size_t di = i % dirs.size();
            const int level = static_cast<int>(i / dirs.size());
            shell[i] = phi(std::ldexp(1.0, level) * dirs[di]);
        });
        for (std::size_t i = 0; i < shell.size(); ++i) {
            if (shell[i] < inf_phi) {
                inf_phi = shell[i];
                res.argmin = std::ldexp(1.0, static_cast<int>(i / dirs.size())) * dirs[i % dirs.size()];
            }
        }
        res.warnings.push_back("phi is not monotone along rays; the infimum comes from an expanding-shell search and is heuristic");
    }
    res.phi_min = inf_phi;
    const double base = m.c + alpha * lambda * lambda;
    res.boundary_value = base + kSandwichLower * boundary_phi;
    res.value = base + kSandwichLower * inf_phi;
    res.warnings.push_back(kFactorWarning);
    return res;
}

RateFunction symbol_rate(const SymbolModel& m, const DissipationOptions& opts) {
    m.validate();
    const double alpha = q_alpha(m);
    LevyMeasureRn scratch;
    const LevyMeasureRn& mu = effective_measure(m, scratch);
    if (mu.kind == LevyMeasureRn::Kind::Radial && power_kind(mu.rho)) {
        // φ(ξ) = D·‖ξ‖^γ with γ = −β − n, increasing along rays.
        const double beta = mu.rho.exponent;
        const double gamma = -beta - m.n;
        if (gamma > 0.0 && gamma < 2.0) {
            const double D = kSandwichLower * sphere_area(m.n) / m.n * mu.rho.scale / (beta + m.n + 2.0);
            if (m.c == 0.0 && alpha == 0.0) return RateFunction::polynomial(D, gamma);
            CustomRate spec;
            const double c = m.c;
            spec.evaluate = [c, alpha, D, gamma](double lam) { return c + alpha * lam * lam + D * std::pow(lam, gamma); };
            spec.increasing = true;
            spec.at_infinity = Asymptotics::power(alpha > 0.0 ? 2.0 : gamma);
            spec.power_at_zero = c > 0.0 ? 0.0 : gamma;
            spec.label = "symbol rate " + fmt(c) + " + " + fmt(alpha) + " l^2 + " + fmt(D) + " l^" + fmt(gamma);
            return RateFunction::custom(std::move(spec));
        }
    }
    CustomRate spec;
    spec.evaluate = [m, opts](double lam) { return dissipation_rate(m, lam, opts).value; };
    spec.increasing = false;
    spec.label = "symbol rate (numeric)";
    return RateFunction::custom(std::move(spec));
}

Interpolated interpolate_dissipation(double p, double p0, double C_p0, const RateFunction& g) {
    if (!(p > 1.0) || !std::isfinite(p)) throw HypothesisViolation("p must lie in (1, inf)");
    if (!(p0 >= 1.0) || !std::isfinite(p0)) throw HypothesisViolation("p0 must lie in [1, inf)");
    if (!(C_p0 >= 0.0)) throw HypothesisViolation("C_p0 must be >= 0");
    Interpolated out;
    if (p == 2.0) {
        out.theta = 1.0;
        out.C = 1.0;
        out.rate = g;
        return out;
    }
    const bool between = (p0 < p && p < 2.0) || (2.0 < p && p < p0);
    if (!between) throw HypothesisViolation("p must lie strictly between p0 and 2");
    out.theta = (1.0 / p0 - 1.0 / p) / (1.0 / p0 - 0.5);
    out.C = std::pow(C_p0, 1.0 - out.theta);
    out.rate = scale(g, out.theta);
    return out;
}

}  // namespace obscert
