#include "obscert/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "obscert/errors.hpp"

namespace obscert::quad {

double finite(const Fn& f, double a, double b, double rel_tol, double* error) {
    if (a == b) {
        if (error) *error = 0.0;
        return 0.0;
    }
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 12, rel_tol, &err);
    if (!std::isfinite(v)) {
        throw QuadratureFailure("non-finite panel value on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    if (error) *error = err;
    return v;
}

HalfLineResult half_line(const Fn& F, const HalfLineOptions& opts) {
    HalfLineResult res;
    double u = 0.0;
    double w = opts.first_width;
    double prev = std::numeric_limits<double>::quiet_NaN();
    int small = 0;
    int grow = 0;
    while (res.panels < opts.max_panels && u < opts.max_u) {
        const double b = std::min(u + w, opts.max_u);
        double c = 0.0;
        try {
            c = finite(F, u, b, opts.panel_tol);
        } catch (const QuadratureFailure&) {
            res.divergent = true;
            res.reason = "integrand not finite near u=" + std::to_string(b);
            res.u_end = b;
            return res;
        }
        res.value += c;
        ++res.panels;
        res.u_end = b;
        if (std::abs(res.value) > opts.divergence_cap) {
            res.divergent = true;
            res.reason = "accumulated value exceeds cap";
            return res;
        }
        if (std::abs(c) <= opts.stop_ratio * std::abs(res.value)) {
            if (++small >= 2) {
                res.converged = true;
                return res;
            }
        } else {
            small = 0;
        }
        if (opts.decay_heuristic && res.panels >= 6 && std::isfinite(prev) && c != 0.0) {
            grow = (std::abs(c) >= std::abs(prev) * (1.0 - 1e-3)) ? grow + 1 : 0;
            if (grow >= 4) {
                res.divergent = true;
                res.reason = "panel contributions stopped decreasing";
                return res;
            }
        }
        prev = c;
        u = b;
        w = std::min(2.0 * w, opts.max_width);
    }
    return res;
}

namespace {

double log_panels(const Fn& f, double p, double q, double rel_tol) {
    const double y0 = std::log(p);
    const double y1 = std::log(q);
    const int n = std::max(1, static_cast<int>(std::ceil((y1 - y0) / 2.0)));
    const double h = (y1 - y0) / n;
    auto g = [&](double y) {
        const double t = std::exp(y);
        return f(t) * t;
    };
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = y0 + i * h;
        const double b = (i + 1 == n) ? y1 : a + h;
        s += finite(g, a, b, rel_tol);
    }
    return s;
}

}  // namespace

double positive_range(const Fn& f, double p, double q, double rel_tol) {
    if (!(q > p)) return 0.0;
    if (p == 0.0 && std::isinf(q)) {
        return positive_range(f, 0.0, 1.0, rel_tol) + positive_range(f, 1.0, q, rel_tol);
    }
    HalfLineOptions o;
    o.stop_ratio = rel_tol * 0.1;
    o.panel_tol = std::min(1e-13, rel_tol * 0.01);
    o.max_width = 16.0;
    o.divergence_cap = 1e300;  // values far above 1 are legitimate here; growth is caught by the decay test
    HalfLineResult r;
    if (p == 0.0) {
        o.max_u = 740.0 + std::log(q);
        r = half_line([&](double u) {
            const double t = q * std::exp(-u);
            return t > 0.0 ? f(t) * t : 0.0;
        }, o);
    } else if (std::isinf(q)) {
        o.max_u = 709.0 - std::log(p);
        r = half_line([&](double u) {
            const double t = p * std::exp(u);
            return std::isfinite(t) ? f(t) * t : 0.0;
        }, o);
    } else {
        return log_panels(f, p, q, rel_tol);
    }
    if (r.divergent) throw QuadratureFailure("improper integral does not converge: " + r.reason);
    return r.value;
}

namespace {

template <int N>
Rule expand() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            r.nodes.push_back(0.0);
            r.weights.push_back(w[i]);
        } else {
            r.nodes.push_back(-x[i]);
            r.weights.push_back(w[i]);
            r.nodes.push_back(x[i]);
            r.weights.push_back(w[i]);
        }
    }
    std::vector<std::size_t> idx(r.nodes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r.nodes[a] < r.nodes[b]; });
    Rule s;
    for (auto i : idx) {
        s.nodes.push_back(r.nodes[i]);
        s.weights.push_back(r.weights[i]);
    }
    return s;
}

}  // namespace

const Rule& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    Rule r;
    switch (order) {
        case 7: r = expand<7>(); break;
        case 10: r = expand<10>(); break;
        case 15: r = expand<15>(); break;
        case 20: r = expand<20>(); break;
        case 25: r = expand<25>(); break;
        case 30: r = expand<30>(); break;
        default: throw Error("unsupported Gauss-Legendre order " + std::to_string(order));
    }
    return cache.emplace(order, std::move(r)).first->second;
}

}  // namespace obscert::quad
