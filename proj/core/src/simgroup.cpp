#include "obscert/simgroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include <fftw3.h>

#include "obscert/parallel.hpp"

namespace obscert {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> geometry_weights(const GridGeometry& g) {
    std::vector<double> w(g.size(), 1.0);
    std::size_t stride = 1;
    for (int a = g.n - 1; a >= 0; --a) {
        const int P = g.points[a];
        for (std::size_t i = 0; i < w.size(); ++i) {
            const int q = static_cast<int>((i / stride) % static_cast<std::size_t>(P));
            double f = g.spacing[a];
            if (!g.periodic && (q == 0 || q == P - 1)) f *= 0.5;
            w[i] *= f;
        }
        stride *= static_cast<std::size_t>(P);
    }
    return w;
}

double lp_norm(const cvec& f, const std::vector<double>& w, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            if (w[i] > 0.0) m = std::max(m, std::abs(f[i]));
        }
        return m;
    }
    double s = 0.0;
    if (p == 2.0) {
        for (Eigen::Index i = 0; i < f.size(); ++i) s += w[i] * std::norm(f[i]);
        return std::sqrt(s);
    }
    for (Eigen::Index i = 0; i < f.size(); ++i) s += w[i] * std::pow(std::abs(f[i]), p);
    return std::pow(s, 1.0 / p);
}

// ∑ over a cyclic or valid window of length m along one axis.
std::vector<long long> window_sums(const std::vector<long long>& a, std::vector<int>& dims, int axis, int m,
                                   bool periodic) {
    const int P = dims[axis];
    const int starts = periodic ? P : P - m + 1;
    std::size_t inner = 1;
    for (std::size_t k = axis + 1; k < dims.size(); ++k) inner *= static_cast<std::size_t>(dims[k]);
    std::size_t outer = 1;
    for (int k = 0; k < axis; ++k) outer *= static_cast<std::size_t>(dims[k]);
    std::vector<long long> out(outer * static_cast<std::size_t>(starts) * inner);
    std::vector<long long> prefix(static_cast<std::size_t>(2 * P + 1));
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            prefix[0] = 0;
            for (int q = 0; q < 2 * P; ++q) {
                const std::size_t src = (o * P + static_cast<std::size_t>(q % P)) * inner + in;
                prefix[q + 1] = prefix[q] + a[src];
            }
            for (int s = 0; s < starts; ++s) {
                out[(o * starts + static_cast<std::size_t>(s)) * inner + in] = prefix[s + m] - prefix[s];
            }
        }
    }
    dims[axis] = starts;
    return out;
}

double min_eig_sym(const Eigen::MatrixXd& Q) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double quadratic_alpha(const SymbolModel& s) {
    if (s.Q.size() == 0 || s.Q.isZero(0.0)) return 0.0;
    const double a = min_eig_sym(s.Q);
    if (a <= 1e-12 * s.Q.cwiseAbs().maxCoeff()) {
        throw HypothesisViolation("lattice dissipation rate supports Q = 0 or Q positive definite");
    }
    return a;
}

bool isotropic_measure(const SymbolModel& s) { return s.mu.kind != LevyMeasureRn::Kind::Atoms; }

}  // namespace

std::size_t GridGeometry::size() const {
    std::size_t s = 1;
    for (int p : points) s *= static_cast<std::size_t>(p);
    return s;
}

double GridGeometry::coordinate(std::size_t flat, int axis) const {
    std::size_t stride = 1;
    for (int a = n - 1; a > axis; --a) stride *= static_cast<std::size_t>(points[a]);
    const std::size_t q = (flat / stride) % static_cast<std::size_t>(points[axis]);
    return static_cast<double>(q) * spacing[axis];
}

double ThickSet::measure() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

std::pair<double, std::size_t> thickness_scan(const GridGeometry& g, const std::vector<unsigned char>& mask,
                                              const std::vector<double>& L) {
    if (mask.size() != g.size()) throw HypothesisViolation("mask size does not match the grid");
    if (static_cast<int>(L.size()) != g.n) throw HypothesisViolation("L must have one entry per axis");
    std::vector<int> m(g.n);
    double cells = 1.0;
    for (int a = 0; a < g.n; ++a) {
        m[a] = std::max(1, static_cast<int>(std::lround(L[a] / g.spacing[a])));
        if (m[a] > g.points[a]) throw HypothesisViolation("reference box exceeds the grid along axis " + std::to_string(a));
        cells *= m[a];
    }
    std::vector<long long> acc(mask.begin(), mask.end());
    std::vector<int> dims = g.points;
    for (int a = 0; a < g.n; ++a) acc = window_sums(acc, dims, a, m[a], g.periodic);
    std::size_t worst = 0;
    for (std::size_t i = 1; i < acc.size(); ++i) {
        if (acc[i] < acc[worst]) worst = i;
    }
    // Map the corner in window coordinates back to a grid flat index.
    std::size_t flat = 0, rem = worst;
    std::vector<std::size_t> coord(g.n);
    for (int a = g.n - 1; a >= 0; --a) {
        coord[a] = rem % static_cast<std::size_t>(dims[a]);
        rem /= static_cast<std::size_t>(dims[a]);
    }
    for (int a = 0; a < g.n; ++a) flat = flat * static_cast<std::size_t>(g.points[a]) + coord[a];
    return {static_cast<double>(acc[worst]) / cells, flat};
}

ThickSet make_thick_set(const GridGeometry& g, const ThickSetSpec& spec) {
    if (!(spec.rho > 0.0 && spec.rho <= 1.0)) throw HypothesisViolation("rho must lie in (0, 1]");
    ThickSet E;
    E.geometry = g;
    E.rho = spec.rho;
    E.mask.assign(g.size(), 0);
    using P = ThickSetSpec::Pattern;
    std::vector<double> L = spec.L;
    switch (spec.pattern) {
        case P::Full:
            std::fill(E.mask.begin(), E.mask.end(), 1);
            E.pattern = "full";
            if (L.empty()) L = g.spacing;
            break;
        case P::PeriodicSlabs: {
            if (!(spec.period > 0.0) || !(spec.width > 0.0 && spec.width <= spec.period)) {
                throw HypothesisViolation("slabs need period > 0 and 0 < width <= period");
            }
            const double eps = 1e-9 * g.spacing[0];
            for (std::size_t i = 0; i < E.mask.size(); ++i) {
                const double x = g.coordinate(i, 0);
                E.mask[i] = std::fmod(x + eps, spec.period) < spec.width - eps ? 1 : 0;
            }
            E.pattern = "periodic-slabs";
            if (L.empty()) {
                L = g.spacing;
                L[0] = spec.period;
            }
            break;
        }
        case P::Checkerboard: {
            if (!(spec.period > 0.0)) throw HypothesisViolation("checkerboard needs a positive cell side");
            for (std::size_t i = 0; i < E.mask.size(); ++i) {
                long long s = 0;
                for (int a = 0; a < g.n; ++a) s += static_cast<long long>(std::floor(g.coordinate(i, a) / spec.period + 1e-9));
                E.mask[i] = (s % 2 == 0) ? 1 : 0;
            }
            E.pattern = "checkerboard";
            if (L.empty()) L.assign(g.n, 2.0 * spec.period);
            break;
        }
        case P::Custom:
            if (spec.mask.size() != g.size()) throw HypothesisViolation("custom mask size does not match the grid");
            E.mask = spec.mask;
            E.pattern = "custom";
            if (L.empty()) L = g.spacing;
            break;
    }
    E.L = L;
    const auto [frac, offset] = thickness_scan(g, E.mask, L);
    E.rho_actual = frac;
    if (frac < spec.rho * (1.0 - 1e-12)) {
        throw NotThick("set is not thick: translate at grid offset " + std::to_string(offset) + " covers fraction " +
                           fmt(frac) + " < rho=" + fmt(spec.rho),
                       offset, frac);
    }
    const auto w = geometry_weights(g);
    E.weights.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) E.weights[i] = E.mask[i] ? w[i] : 0.0;
    return E;
}

// ---------------------------------------------------------------------------------------------

Eigen::MatrixXcd SpectralModel::observation_gram(const ThickSet& E, const std::vector<std::size_t>& modes) const {
    const std::size_t k = modes.size();
    std::vector<cvec> f(k);
    for (std::size_t a = 0; a < k; ++a) {
        cvec e = cvec::Zero(static_cast<Eigen::Index>(this->modes()));
        e[static_cast<Eigen::Index>(modes[a])] = 1.0;
        f[a] = synthesize(e);
    }
    Eigen::MatrixXcd M(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            std::complex<double> s = 0.0;
            for (std::size_t i = 0; i < E.weights.size(); ++i) {
                if (E.weights[i] > 0.0) s += E.weights[i] * std::conj(f[a][i]) * f[b][i];
            }
            M(a, b) = s;
            M(b, a) = std::conj(s);
        }
    }
    return M;
}

cvec SpectralModel::evolve(const cvec& modal, double t) const {
    if (!(t >= 0.0)) throw HypothesisViolation("t must be >= 0");
    cvec out = modal;
    if (t == 0.0) return out;
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] *= std::exp(-psi(static_cast<std::size_t>(j)) * t);
    return out;
}

cvec SpectralModel::project(const cvec& modal, double lambda) const {
    cvec out = modal;
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        if (!in_band(static_cast<std::size_t>(j), lambda)) out[j] = 0.0;
    }
    return out;
}

double SpectralModel::norm(const cvec& modal) const {
    if (p() == 2.0) return modal.norm();
    return lp_norm(synthesize(modal), point_weights(), p());
}

double SpectralModel::observe(const ThickSet& E, const cvec& modal) const {
    if (E.weights.size() != point_weights().size()) throw HypothesisViolation("thick set does not match the model grid");
    return lp_norm(synthesize(modal), E.weights, p());
}

std::vector<std::size_t> SpectralModel::band(double lambda) const {
    std::vector<std::size_t> b;
    for (std::size_t j = 0; j < modes(); ++j) {
        if (in_band(j, lambda)) b.push_back(j);
    }
    return b;
}

std::size_t SpectralModel::slowest_excluded(double lambda) const {
    std::size_t best = modes();
    for (std::size_t j = 0; j < modes(); ++j) {
        if (in_band(j, lambda)) continue;
        if (best == modes() || psi(j).real() < psi(best).real()) best = j;
    }
    return best;
}

// ---------------------------------------------------------------------------------------------

DiagonalModel::DiagonalModel(int N, const RateFunction& g, double L, int G) {
    if (N < 1) throw HypothesisViolation("N must be >= 1");
    if (!(L > 0.0)) throw HypothesisViolation("L must be positive");
    base_.resize(N);
    mu_.resize(N);
    for (int k = 1; k <= N; ++k) {
        const double s = k * kPi / L;
        base_[k - 1] = s * s;
        mu_[k - 1] = g(s);
        if (!(mu_[k - 1] >= 0.0)) throw HypothesisViolation("decay rates must be non-negative");
    }
    g_thm_ = compose(g, RateFunction::polynomial(1.0, 0.5));
    build(G, L);
}

DiagonalModel DiagonalModel::with_rates(std::vector<double> mu, double L, int G) {
    if (mu.empty()) throw HypothesisViolation("need at least one mode");
    if (!(L > 0.0)) throw HypothesisViolation("L must be positive");
    DiagonalModel m;
    m.mu_ = std::move(mu);
    m.base_.resize(m.mu_.size());
    for (std::size_t k = 0; k < m.mu_.size(); ++k) {
        if (!(m.mu_[k] >= 0.0)) throw HypothesisViolation("decay rates must be non-negative");
        const double s = static_cast<double>(k + 1) * kPi / L;
        m.base_[k] = s * s;
    }
    m.build(G, L);
    return m;
}

void DiagonalModel::build(int G, double L) {
    const int N = static_cast<int>(mu_.size());
    if (G <= N) throw HypothesisViolation("grid points G must exceed N for discrete orthonormality");
    L_ = L;
    G_ = G;
    geom_.n = 1;
    geom_.points = {G + 1};
    geom_.spacing = {L / G};
    geom_.periodic = false;
    weights_ = geometry_weights(geom_);
    basis_.resize(G + 1, N);
    const double amp = std::sqrt(2.0 / L);
    for (int i = 0; i <= G; ++i) {
        for (int k = 1; k <= N; ++k) {
            // Integer reduction keeps sin exact at the nodes.
            const long long q = (static_cast<long long>(k) * i) % (2LL * G);
            basis_(i, k - 1) = amp * std::sin(kPi * static_cast<double>(q) / G);
        }
    }
    const double defect = orthonormality_defect();
    if (defect > 1e-10) throw InvariantViolation("discrete orthonormality defect " + fmt(defect));
}

DiagonalModel DiagonalModel::subordinate(const BernsteinFunction& phi) const {
    DiagonalModel m = *this;
    for (double& v : m.mu_) v = (v == 0.0) ? phi.at_zero() : phi_eval(phi, v);
    m.g_thm_ = subordinate_rate(phi, g_thm_);
    return m;
}

cvec DiagonalModel::synthesize(const cvec& modal) const { return basis_.cast<std::complex<double>>() * modal; }

Eigen::MatrixXcd DiagonalModel::observation_gram(const ThickSet& E, const std::vector<std::size_t>& modes) const {
    if (E.weights.size() != weights_.size()) throw HypothesisViolation("thick set does not match the model grid");
    Eigen::MatrixXd B(basis_.rows(), static_cast<Eigen::Index>(modes.size()));
    for (std::size_t a = 0; a < modes.size(); ++a) B.col(static_cast<Eigen::Index>(a)) = basis_.col(static_cast<Eigen::Index>(modes[a]));
    const Eigen::Map<const Eigen::VectorXd> w(E.weights.data(), static_cast<Eigen::Index>(E.weights.size()));
    const Eigen::MatrixXd M = B.transpose() * w.asDiagonal() * B;
    return M.cast<std::complex<double>>();
}

double DiagonalModel::orthonormality_defect() const {
    const Eigen::Map<const Eigen::VectorXd> w(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
    const Eigen::MatrixXd M = basis_.transpose() * w.asDiagonal() * basis_;
    return (M - Eigen::MatrixXd::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff();
}

Eigen::VectorXd DiagonalModel::evolve_real(const Eigen::VectorXd& a, double t) const {
    if (!(t >= 0.0)) throw HypothesisViolation("t must be >= 0");
    Eigen::VectorXd out = a;
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] *= std::exp(-mu_[j] * t);
    return out;
}

std::string DiagonalModel::describe() const {
    return "diagonal Dirichlet model N=" + std::to_string(mu_.size()) + " L=" + fmt(L_) + " G=" + std::to_string(G_);
}

// ---------------------------------------------------------------------------------------------

struct GridModel::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::size_t size = 0;
};

GridModel::GridModel(const SymbolModel& symbol, double box, int G, double p)
    : symbol_(symbol), box_(box), G_(G), p_(p) {
    symbol_.validate();
    if (!(box > 0.0)) throw HypothesisViolation("box length must be positive");
    if (G < 2 || (G & (G - 1)) != 0) throw HypothesisViolation("G must be a power of two");
    if (!(p >= 1.0)) throw HypothesisViolation("p must be >= 1");
    const int n = symbol_.n;
    geom_.n = n;
    geom_.points.assign(n, G);
    geom_.spacing.assign(n, box / G);
    geom_.periodic = true;
    weights_ = geometry_weights(geom_);
    const std::size_t D = geom_.size();

    plans_ = std::make_unique<Plans>();
    plans_->size = D;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        std::vector<int> dims(n, G);
        auto* a = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * D));
        auto* b = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * D));
        plans_->fwd = fftw_plan_dft(n, dims.data(), a, b, FFTW_FORWARD, FFTW_ESTIMATE);
        plans_->bwd = fftw_plan_dft(n, dims.data(), a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_free(a);
        fftw_free(b);
    }

    // The measure part depends on |ξ| only for radial data; evaluate it once per |m|².
    psi_.resize(D);
    SymbolModel bare = symbol_;
    bare.c = 0.0;
    bare.d.resize(0);
    bare.Q.resize(0, 0);
    const double k0 = 2.0 * kPi / box;
    std::map<long long, double> radial;
    if (isotropic_measure(symbol_)) {
        for (std::size_t j = 0; j < D; ++j) {
            long long key = 0;
            std::size_t rem = j;
            for (int a = 0; a < n; ++a) {
                long long q = static_cast<long long>(rem % G);
                rem /= G;
                if (q >= G / 2) q -= G;
                key += q * q;
            }
            radial.emplace(key, 0.0);
        }
        std::vector<long long> keys;
        for (const auto& kv : radial) keys.push_back(kv.first);
        std::vector<double> vals(keys.size());
        parallel_for(keys.size(), [&](std::size_t i) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
            x[0] = k0 * std::sqrt(static_cast<double>(keys[i]));
            vals[i] = psi_eval(bare, x).real();
        });
        for (std::size_t i = 0; i < keys.size(); ++i) radial[keys[i]] = vals[i];
    }
    parallel_for(D, [&](std::size_t j) {
        const Eigen::VectorXd x = xi(j);
        std::complex<double> v;
        if (isotropic_measure(symbol_)) {
            long long key = 0;
            for (int a = 0; a < n; ++a) {
                const long long q = std::llround(x[a] / k0);
                key += q * q;
            }
            v = radial.at(key);
            v += symbol_.c;
            if (symbol_.Q.size() != 0) v += x.dot(symbol_.Q * x);
            if (symbol_.d.size() != 0) v += std::complex<double>(0.0, symbol_.d.dot(x));
        } else {
            v = psi_eval(symbol_, x);
        }
        if (v.real() < -1e-12 * (1.0 + std::abs(v))) throw InvariantViolation("Re psi < 0 on the lattice");
        psi_[j] = {std::max(0.0, v.real()), v.imag()};
    });
}

GridModel::~GridModel() {
    if (!plans_) return;
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
    if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

void GridModel::transform(const cvec& in, cvec& out, bool forward) const {
    const std::size_t D = plans_->size;
    if (static_cast<std::size_t>(in.size()) != D) throw HypothesisViolation("state size does not match the grid");
    auto* a = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * D));
    auto* b = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * D));
    for (std::size_t i = 0; i < D; ++i) {
        a[i][0] = in[static_cast<Eigen::Index>(i)].real();
        a[i][1] = in[static_cast<Eigen::Index>(i)].imag();
    }
    fftw_execute_dft(forward ? plans_->fwd : plans_->bwd, a, b);
    out.resize(static_cast<Eigen::Index>(D));
    for (std::size_t i = 0; i < D; ++i) out[static_cast<Eigen::Index>(i)] = {b[i][0], b[i][1]};
    fftw_free(a);
    fftw_free(b);
}

cvec GridModel::analyze(const cvec& field) const {
    cvec out;
    transform(field, out, true);
    const double vol = std::pow(box_, geom_.n);
    return out * (std::sqrt(vol) / static_cast<double>(plans_->size));
}

cvec GridModel::synthesize(const cvec& modal) const {
    cvec out;
    transform(modal, out, false);
    return out / std::sqrt(std::pow(box_, geom_.n));
}

cvec GridModel::evolve_field(const cvec& field, double t) const { return synthesize(evolve(analyze(field), t)); }

cvec GridModel::project_field(const cvec& field, double lambda) const {
    return synthesize(project(analyze(field), lambda));
}

double GridModel::field_norm(const cvec& field) const { return lp_norm(field, weights_, p_); }

double GridModel::observe_field(const ThickSet& E, const cvec& field) const {
    if (E.weights.size() != weights_.size()) throw HypothesisViolation("thick set does not match the model grid");
    return lp_norm(field, E.weights, p_);
}

Eigen::VectorXd GridModel::xi(std::size_t j) const {
    const int n = geom_.n;
    Eigen::VectorXd x(n);
    std::size_t rem = j;
    for (int a = n - 1; a >= 0; --a) {
        long long q = static_cast<long long>(rem % static_cast<std::size_t>(G_));
        rem /= static_cast<std::size_t>(G_);
        if (q >= G_ / 2) q -= G_;
        x[a] = 2.0 * kPi * static_cast<double>(q) / box_;
    }
    return x;
}

double GridModel::max_abs_xi(std::size_t j) const { return xi(j).cwiseAbs().maxCoeff(); }

bool GridModel::in_band(std::size_t j, double lambda) const { return max_abs_xi(j) < lambda; }

Eigen::MatrixXcd GridModel::observation_gram(const ThickSet& E, const std::vector<std::size_t>& modes) const {
    if (E.mask.size() != plans_->size) throw HypothesisViolation("thick set does not match the model grid");
    cvec mask(static_cast<Eigen::Index>(plans_->size));
    for (std::size_t i = 0; i < plans_->size; ++i) mask[static_cast<Eigen::Index>(i)] = E.mask[i] ? 1.0 : 0.0;
    cvec hat;
    transform(mask, hat, true);
    const int n = geom_.n;
    auto index_of = [&](std::size_t j) {
        std::vector<long long> q(n);
        std::size_t rem = j;
        for (int a = n - 1; a >= 0; --a) {
            q[a] = static_cast<long long>(rem % static_cast<std::size_t>(G_));
            rem /= static_cast<std::size_t>(G_);
        }
        return q;
    };
    const std::size_t k = modes.size();
    std::vector<std::vector<long long>> idx(k);
    for (std::size_t a = 0; a < k; ++a) idx[a] = index_of(modes[a]);
    Eigen::MatrixXcd M(k, k);
    const double inv = 1.0 / static_cast<double>(plans_->size);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            std::size_t flat = 0;
            for (int ax = 0; ax < n; ++ax) {
                const long long d = ((idx[a][ax] - idx[b][ax]) % G_ + G_) % G_;
                flat = flat * static_cast<std::size_t>(G_) + static_cast<std::size_t>(d);
            }
            M(a, b) = hat[static_cast<Eigen::Index>(flat)] * inv;
        }
    }
    return M;
}

double GridModel::lattice_dissipation_rate(double lambda) const {
    if (!(lambda > 0.0)) throw HypothesisViolation("lambda must be positive");
    const double alpha = quadratic_alpha(symbol_);
    double best = std::numeric_limits<double>::infinity();
    std::map<long long, double> cache;
    const double k0 = 2.0 * kPi / box_;
    for (std::size_t j = 0; j < modes(); ++j) {
        if (in_band(j, lambda)) continue;
        const Eigen::VectorXd x = xi(j);
        double ph;
        if (isotropic_measure(symbol_)) {
            long long key = 0;
            for (int a = 0; a < geom_.n; ++a) {
                const long long q = std::llround(x[a] / k0);
                key += q * q;
            }
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, phi_quadratic(symbol_, x)).first;
            ph = it->second;
        } else {
            ph = phi_quadratic(symbol_, x);
        }
        best = std::min(best, ph);
    }
    if (std::isinf(best)) return best;
    return symbol_.c + alpha * lambda * lambda + kSandwichLower * best;
}

std::string GridModel::describe() const {
    return "periodic grid model n=" + std::to_string(geom_.n) + " G=" + std::to_string(G_) + " box=" + fmt(box_) +
           " p=" + fmt(p_);
}

// ---------------------------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(splitmix64(seed) ^ splitmix64(~stream)); }

cvec random_state(const SpectralModel& m, const std::vector<std::size_t>& support, std::uint64_t seed, bool real_only) {
    if (support.empty()) throw HypothesisViolation("random state needs a non-empty mode set");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> N01(0.0, 1.0);
    cvec x = cvec::Zero(static_cast<Eigen::Index>(m.modes()));
    for (std::size_t j : support) {
        const double re = N01(gen);
        const double im = real_only ? 0.0 : N01(gen);
        x[static_cast<Eigen::Index>(j)] = {re, im};
    }
    const double nx = m.norm(x);
    if (!(nx > 0.0)) throw HypothesisViolation("random state has zero norm");
    return x / nx;
}

LsConstants estimate_ls_constants(const SpectralModel& m, const ThickSet& E, const std::vector<double>& lambdas,
                                  int samples, std::uint64_t seed, int jobs) {
    if (samples < 1) throw HypothesisViolation("samples must be >= 1");
    if (lambdas.size() < 2) throw DegenerateFit("need at least two lambda values to fit (d0, d1)");
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > lambdas[i - 1])) throw HypothesisViolation("lambda list must be increasing");
    }
    LsConstants out;
    out.lambdas = lambdas;
    out.samples = samples;
    const bool l2 = m.p() == 2.0;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const auto band = m.band(lambdas[li]);
        if (band.empty()) throw HypothesisViolation("no modes below lambda=" + fmt(lambdas[li]));
        Eigen::MatrixXcd M;
        if (l2) M = m.observation_gram(E, band);
        std::vector<double> r(static_cast<std::size_t>(samples));
        parallel_for(r.size(), [&](std::size_t s) {
            const cvec x = random_state(m, band, stream_seed(seed, li * 1000003ULL + s), m.real_basis());
            if (l2) {
                cvec xb(static_cast<Eigen::Index>(band.size()));
                for (std::size_t a = 0; a < band.size(); ++a) xb[static_cast<Eigen::Index>(a)] = x[static_cast<Eigen::Index>(band[a])];
                const double obs = std::sqrt(std::max(0.0, (xb.adjoint() * M * xb)(0, 0).real()));
                r[s] = xb.norm() / obs;
            } else {
                r[s] = m.norm(x) / m.observe(E, x);
            }
        }, jobs);
        double best = *std::max_element(r.begin(), r.end());
        if (l2) {
            // The extremal band-limited state for p = 2 is the bottom eigenvector of M_E.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues().minCoeff();
            best = std::max(best, lo > 0.0 ? 1.0 / std::sqrt(lo) : std::numeric_limits<double>::infinity());
        }
        if (!std::isfinite(best)) {
            throw DegenerateFit("E does not observe some band-limited state at lambda=" + fmt(lambdas[li]));
        }
        out.max_ratio.push_back(best);
    }
    const double e = m.fit_exponent();
    const std::size_t K = lambdas.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < K; ++i) {
        const double x = std::pow(lambdas[i], e);
        const double y = std::log(out.max_ratio[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = K * sxx - sx * sx;
    if (!(den > 0.0)) throw DegenerateFit("lambda values collapse to a single fit abscissa");
    out.slope_ls = (K * sxy - sx * sy) / den;
    out.d1 = std::max(0.0, out.slope_ls);
    // Envelope: the smallest d0 with max_ratio ≤ d0·e^{d1 x} at every fitted point.
    double d0 = 0.0;
    for (std::size_t i = 0; i < K; ++i) d0 = std::max(d0, out.max_ratio[i] * std::exp(-out.d1 * std::pow(lambdas[i], e)));
    out.d0 = d0;
    out.f = RateFunction::polynomial(std::max(out.d1, out.d1_floor), e);
    return out;
}

}  // namespace obscert
