#include "obscert/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "obscert/errors.hpp"
#include "obscert/parallel.hpp"
#include "obscert/quadrature.hpp"

namespace obscert {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

// Above this mode count observations go through synthesis instead of the dense modal Gram.
constexpr std::size_t kDenseGramModes = 256;

std::vector<std::size_t> all_modes(const SpectralModel& m) {
    std::vector<std::size_t> v(m.modes());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = j;
    return v;
}

std::size_t slowest_mode(const SpectralModel& m) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.modes(); ++j) {
        if (m.psi(j).real() < m.psi(best).real()) best = j;
    }
    return best;
}

cvec unit_mode(const SpectralModel& m, std::size_t j) {
    cvec x = cvec::Zero(static_cast<Eigen::Index>(m.modes()));
    x[static_cast<Eigen::Index>(j)] = 1.0;
    return x / m.norm(x);
}

double quad_form(const Eigen::MatrixXcd& M, const cvec& x) { return std::max(0.0, (x.adjoint() * M * x)(0, 0).real()); }

// ‖C S(t_i) x‖ at every node, by the modal Gram when it is available.
class Observer {
public:
    Observer(const SpectralModel& m, const ThickSet& E) : m_(m), E_(E) {
        if (E.weights.size() != m.point_weights().size()) throw HypothesisViolation("thick set does not match the model grid");
        dense_ = m.p() == 2.0 && m.modes() <= kDenseGramModes;
        if (dense_) {
            const Eigen::MatrixXcd M = m.observation_gram(E, all_modes(m));
            Eigen::LLT<Eigen::MatrixXcd> llt(M);
            if (llt.info() == Eigen::Success) {
                R_ = llt.matrixU();
                chol_ = true;
            } else {
                M_ = M;
            }
        }
    }

    double observe(const cvec& x) const {
        if (!dense_) return m_.observe(E_, x);
        if (chol_) return (R_ * x).norm();
        return std::sqrt(quad_form(M_, x));
    }

private:
    const SpectralModel& m_;
    const ThickSet& E_;
    bool dense_ = false;
    bool chol_ = false;
    Eigen::MatrixXcd R_, M_;
};

double log_time_norm(const std::vector<double>& obs, const TimeRule& rule, double r) {
    if (std::isinf(r)) {
        double mx = 0.0;
        for (double o : obs) mx = std::max(mx, o);
        return std::log(mx);
    }
    // log Σ w_i o_i^r computed against the largest term.
    double lmax = kNegInf;
    std::vector<double> terms(obs.size(), kNegInf);
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs[i] > 0.0) terms[i] = std::log(rule.weights[i]) + r * std::log(obs[i]);
        lmax = std::max(lmax, terms[i]);
    }
    if (lmax == kNegInf) return kNegInf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - lmax);
    return (lmax + std::log(s)) / r;
}

// log(‖S(T)x‖ / ‖C S(·)x‖_{L_r}) on the given rule; −∞ for the zero state.
double log_obs_ratio(const SpectralModel& m, const Observer& ob, const TimeRule& rule, double T, double r,
                     const cvec& x) {
    const double lhs = m.norm(m.evolve(x, T));
    if (!(lhs > 0.0)) return kNegInf;
    std::vector<double> obs(rule.nodes.size());
    for (std::size_t i = 0; i < obs.size(); ++i) obs[i] = ob.observe(m.evolve(x, rule.nodes[i]));
    if (std::isinf(r)) obs.push_back(ob.observe(x));
    const double lt = log_time_norm(obs, rule, r);
    if (lt == kNegInf) return std::numeric_limits<double>::infinity();
    return std::log(lhs) - lt;
}

std::string null_direction(const Eigen::VectorXcd& v) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(v.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(v[static_cast<Eigen::Index>(a)]) > std::abs(v[static_cast<Eigen::Index>(b)]);
    });
    std::ostringstream os;
    os.precision(6);
    for (std::size_t q = 0; q < std::min<std::size_t>(3, idx.size()); ++q) {
        if (q) os << ", ";
        os << "mode " << idx[q] << ": " << std::abs(v[static_cast<Eigen::Index>(idx[q])]);
    }
    return os.str();
}

}  // namespace

bool VerificationReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const VerificationRow& r) { return r.pass; });
}

void VerificationReport::echo(const std::string& key, const std::string& value) { environment.emplace_back(key, value); }

void VerificationReport::echo(const std::string& key, double value) { environment.emplace_back(key, fmt(value)); }

void finalize_row(VerificationRow& row) {
    row.max_ratio = std::exp(row.log_max_ratio);
    row.certified_bound = std::exp(row.log_certified_bound);
    row.pass = !row.degenerate && !std::isnan(row.log_max_ratio) &&
               row.log_max_ratio <= row.log_certified_bound + std::log1p(kVerifyRelTol);
}

TimeRule time_rule(double T, int panels, int order) {
    if (!(T > 0.0)) throw HypothesisViolation("T must be positive");
    if (panels < 1) throw HypothesisViolation("time_panels must be >= 1");
    const auto& gl = quad::gauss_legendre(order);
    TimeRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * gl.nodes.size());
    rule.weights.reserve(rule.nodes.capacity());
    for (int i = 0; i < panels; ++i) {
        const double a = T * std::pow(static_cast<double>(i) / panels, 3);
        const double b = T * std::pow(static_cast<double>(i + 1) / panels, 3);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            rule.nodes.push_back(mid + half * gl.nodes[q]);
            rule.weights.push_back(half * gl.weights[q]);
        }
    }
    return rule;
}

VerificationRow check_dissipation(const SpectralModel& m, const RateFunction& g, const RateFunction& h, double C2,
                                  double omega, const std::vector<double>& lambdas, const std::vector<double>& times,
                                  int samples, std::uint64_t seed, int jobs) {
    if (!(C2 >= 1.0)) throw HypothesisViolation("C2 must be >= 1");
    if (samples < 0) throw HypothesisViolation("samples must be >= 0");
    for (double t : times) {
        if (!(t >= 0.0)) throw HypothesisViolation("times must be >= 0");
    }
    VerificationRow row;
    row.name = "dissipation";
    const auto modes = all_modes(m);
    // Sample 0 is the slowest excluded mode at each λ; the rest are random unit states.
    const std::size_t total = static_cast<std::size_t>(samples) + 1;
    std::vector<double> best(total, kNegInf);
    parallel_for(total, [&](std::size_t s) {
        cvec x;
        if (s > 0) x = random_state(m, modes, stream_seed(seed, s), m.real_basis());
        double b = kNegInf;
        for (double lam : lambdas) {
            if (s == 0) {
                const std::size_t j = m.slowest_excluded(lam);
                if (j == m.modes()) continue;
                x = unit_mode(m, j);
            }
            const double glam = g(lam);
            for (double t : times) {
                cvec y = m.evolve(x, t);
                for (Eigen::Index j = 0; j < y.size(); ++j) {
                    if (m.in_band(static_cast<std::size_t>(j), lam)) y[j] = 0.0;
                }
                const double num = m.norm(y);
                if (!(num > 0.0)) continue;
                const double ht = t == 0.0 ? 0.0 : glam * h(t);
                b = std::max(b, std::log(num) - (std::log(C2) - ht + omega * t));
            }
        }
        best[s] = b;
    }, jobs);
    row.samples = static_cast<int>(total);
    row.log_max_ratio = *std::max_element(best.begin(), best.end());
    row.log_certified_bound = 0.0;
    row.detail = "lambdas=" + std::to_string(lambdas.size()) + " times=" + std::to_string(times.size());
    finalize_row(row);
    return row;
}

VerificationRow check_uncertainty(const SpectralModel& m, const ThickSet& E, const RateFunction& f, double C1,
                                  const std::vector<double>& lambdas, int samples, std::uint64_t seed, int jobs) {
    if (!(C1 > 0.0)) throw HypothesisViolation("C1 must be positive");
    VerificationRow row;
    row.name = "uncertainty";
    row.log_max_ratio = kNegInf;
    const bool l2 = m.p() == 2.0;
    int count = 0;
    std::vector<std::string> degenerate_at;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const double lam = lambdas[li];
        const auto band = m.band(lam);
        if (band.empty()) continue;
        const double log_bound = std::log(C1) + f(lam);
        Eigen::MatrixXcd M;
        if (l2) M = m.observation_gram(E, band);
        std::vector<double> r(static_cast<std::size_t>(samples), kNegInf);
        std::vector<unsigned char> degen(r.size(), 0);
        parallel_for(r.size(), [&](std::size_t s) {
            const cvec x = random_state(m, band, stream_seed(seed, li * 1000003ULL + s), m.real_basis());
            double num, obs;
            if (l2) {
                cvec xb(static_cast<Eigen::Index>(band.size()));
                for (std::size_t a = 0; a < band.size(); ++a) xb[static_cast<Eigen::Index>(a)] = x[static_cast<Eigen::Index>(band[a])];
                num = xb.norm();
                obs = std::sqrt(quad_form(M, xb));
            } else {
                num = m.norm(x);
                obs = m.observe(E, x);
            }
            if (!(obs > 0.0)) {
                degen[s] = 1;
                return;
            }
            r[s] = std::log(num) - std::log(obs) - log_bound;
        }, jobs);
        count += samples;
        if (l2) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues().minCoeff();
            ++count;
            if (lo > 0.0) {
                r.push_back(-0.5 * std::log(lo) - log_bound);
            } else {
                degen.push_back(1);
            }
        }
        if (std::any_of(degen.begin(), degen.end(), [](unsigned char d) { return d != 0; })) {
            row.degenerate = true;
            degenerate_at.push_back(fmt(lam));
        }
        for (double v : r) row.log_max_ratio = std::max(row.log_max_ratio, v);
    }
    row.samples = count;
    row.log_certified_bound = 0.0;
    if (row.degenerate) {
        row.detail = "degenerate observation: E does not see a band-limited state at lambda=";
        for (std::size_t i = 0; i < degenerate_at.size(); ++i) row.detail += (i ? "," : "") + degenerate_at[i];
    }
    finalize_row(row);
    return row;
}

VerificationRow check_observability(const SpectralModel& m, const ThickSet& E, double T, double log_cobs, double r,
                                    int samples, int time_panels, std::uint64_t seed, int jobs) {
    if (!(r >= 1.0)) throw HypothesisViolation("r must lie in [1, inf]");
    VerificationRow row;
    row.name = "observability";
    const TimeRule rule = time_rule(T, time_panels);
    const Observer ob(m, E);
    const auto modes = all_modes(m);
    const std::size_t total = static_cast<std::size_t>(samples) + 1;
    std::vector<double> best(total, kNegInf);
    parallel_for(total, [&](std::size_t s) {
        const cvec x = s == 0 ? unit_mode(m, slowest_mode(m))
                              : random_state(m, modes, stream_seed(seed, s), m.real_basis());
        best[s] = log_obs_ratio(m, ob, rule, T, r, x);
    }, jobs);
    row.samples = static_cast<int>(total);
    row.log_max_ratio = *std::max_element(best.begin(), best.end());
    row.log_certified_bound = log_cobs;
    row.degenerate = std::isinf(row.log_max_ratio) && row.log_max_ratio > 0.0;
    row.detail = "T=" + fmt(T) + " r=" + fmt(r) + " time_panels=" + std::to_string(time_panels);
    if (row.degenerate) row.detail += "; some state is unobserved on [0, T]";
    finalize_row(row);
    return row;
}

Eigen::MatrixXcd observability_gramian(const SpectralModel& m, const ThickSet& E, const TimeRule& rule) {
    const std::size_t N = m.modes();
    const Eigen::MatrixXcd M = m.observation_gram(E, all_modes(m));
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    Eigen::VectorXcd decay(static_cast<Eigen::Index>(N));
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        for (std::size_t j = 0; j < N; ++j) decay[static_cast<Eigen::Index>(j)] = std::exp(-m.psi(j) * rule.nodes[i]);
        W.noalias() += rule.weights[i] * (decay.conjugate() * decay.transpose());
    }
    return M.cwiseProduct(W);
}

Eigen::MatrixXcd observability_gramian_exact(const SpectralModel& m, const ThickSet& E, double T) {
    const std::size_t N = m.modes();
    Eigen::MatrixXcd G = m.observation_gram(E, all_modes(m));
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t k = 0; k < N; ++k) {
            const std::complex<double> s = std::conj(m.psi(j)) + m.psi(k);
            const std::complex<double> z = s * T;
            std::complex<double> I;
            if (std::abs(z) < 1e-4) {
                I = T * (1.0 - z / 2.0 + z * z / 6.0);
            } else if (z.imag() == 0.0) {
                I = -std::expm1(-z.real()) / s;
            } else {
                I = (1.0 - std::exp(-z)) / s;
            }
            G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *= I;
        }
    }
    return G;
}

OptimalConstant optimal_constant_l2(const SpectralModel& m, const ThickSet& E, double T, int time_panels) {
    if (m.p() != 2.0) throw HypothesisViolation("optimal_constant_l2 needs a p = 2 model");
    const Eigen::Index N = static_cast<Eigen::Index>(m.modes());
    const TimeRule rule = time_rule(T, time_panels);
    const Eigen::MatrixXcd G = observability_gramian(m, E, rule);
    // Jacobi scaling: G_s = D G D with D = diag(G)^{-1/2}; F_s = D F D stays diagonal.
    Eigen::VectorXd D(N), fs(N);
    for (Eigen::Index j = 0; j < N; ++j) {
        const double gjj = G(j, j).real();
        if (!(gjj > 0.0)) {
            throw SingularGramian("observability Gramian has a zero diagonal entry", "mode " + std::to_string(j) + ": 1");
        }
        D[j] = 1.0 / std::sqrt(gjj);
        fs[j] = std::exp(-2.0 * m.psi(static_cast<std::size_t>(j)).real() * T) * D[j] * D[j];
    }
    const Eigen::MatrixXcd Gs = D.asDiagonal() * G * D.asDiagonal();
    const double floor = 1e-13 * static_cast<double>(N);
    OptimalConstant out;
    out.time_panels = time_panels;
    Eigen::LLT<Eigen::MatrixXcd> llt(Gs);
    if (N <= 512) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Gs);
        if (es.eigenvalues()[0] < floor || llt.info() != Eigen::Success) {
            throw SingularGramian("observability Gramian is numerically singular (scaled min eigenvalue " +
                                      fmt(es.eigenvalues()[0]) + ")",
                                  null_direction(es.eigenvectors().col(0)));
        }
        Eigen::MatrixXcd A = fs.cwiseSqrt().cast<std::complex<double>>().asDiagonal();
        llt.matrixL().solveInPlace(A);
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
        const double smax = svd.singularValues()[0];
        out.value = smax;
        out.log_value = std::log(smax);
        out.method = "dense";
        return out;
    }
    if (llt.info() != Eigen::Success) {
        throw SingularGramian("observability Gramian is not positive definite", "unavailable");
    }
    // Inverse iteration for λ_min(G_s), then power iteration on A*A with A = L^{-1} F_s^{1/2}.
    std::mt19937_64 gen(0x5eed);
    std::normal_distribution<double> N01;
    Eigen::VectorXcd v(N);
    for (Eigen::Index j = 0; j < N; ++j) v[j] = N01(gen);
    v.normalize();
    double inv_max = 0.0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXcd w = llt.solve(v);
        const double nw = w.norm();
        const bool done = std::abs(nw - inv_max) <= 1e-10 * nw;
        inv_max = nw;
        v = w / nw;
        if (done) break;
    }
    if (1.0 / inv_max < floor) {
        throw SingularGramian("observability Gramian is numerically singular (scaled min eigenvalue " +
                                  fmt(1.0 / inv_max) + ")",
                              null_direction(v));
    }
    const Eigen::VectorXcd sq = fs.cwiseSqrt().cast<std::complex<double>>();
    for (Eigen::Index j = 0; j < N; ++j) v[j] = N01(gen);
    v.normalize();
    double mu = 0.0;
    int it = 0;
    for (; it < 20000; ++it) {
        Eigen::VectorXcd w = sq.cwiseProduct(v);
        llt.matrixL().solveInPlace(w);
        llt.matrixU().solveInPlace(w);
        w = sq.cwiseProduct(w);
        const double nw = w.norm();
        const bool done = std::abs(nw - mu) <= 1e-15 * nw;
        mu = nw;
        v = w / nw;
        if (done) break;
    }
    out.value = std::sqrt(mu);
    out.log_value = 0.5 * std::log(mu);
    out.method = "power-iteration";
    out.iterations = it + 1;
    return out;
}

LowerBound empirical_lower_bound(const SpectralModel& m, const ThickSet& E, double T, double r,
                                 const AscentOptions& opts, std::uint64_t seed, int jobs) {
    if (!(r >= 1.0)) throw HypothesisViolation("r must lie in [1, inf]");
    if (opts.restarts < 1 || opts.steps < 0 || opts.directions < 1) throw HypothesisViolation("invalid ascent options");
    const TimeRule rule = time_rule(T, opts.time_panels);
    const std::size_t N = m.modes();
    const bool rayleigh = r == 2.0 && m.p() == 2.0;
    Eigen::MatrixXcd G;
    Eigen::VectorXd F;
    std::unique_ptr<Observer> ob;
    if (rayleigh) {
        // r = 2: the ratio squared is x*Fx / x*G_T x on the same time nodes as the exact oracle.
        G = observability_gramian(m, E, rule);
        F.resize(static_cast<Eigen::Index>(N));
        for (std::size_t j = 0; j < N; ++j) F[static_cast<Eigen::Index>(j)] = std::exp(-2.0 * m.psi(j).real() * T);
    } else {
        ob = std::make_unique<Observer>(m, E);
    }
    auto objective = [&](const cvec& x) {
        if (rayleigh) {
            const double num = x.cwiseAbs2().dot(F);
            const double den = quad_form(G, x);
            if (!(num > 0.0)) return kNegInf;
            if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
            return 0.5 * (std::log(num) - std::log(den));
        }
        return log_obs_ratio(m, *ob, rule, T, r, x);
    };
    const auto modes = all_modes(m);
    std::vector<double> best(static_cast<std::size_t>(opts.restarts), kNegInf);
    std::vector<int> evals(best.size(), 0);
    parallel_for(best.size(), [&](std::size_t k) {
        std::mt19937_64 gen(stream_seed(seed, 7919ULL * (k + 1)));
        std::normal_distribution<double> N01;
        cvec x = k == 0 ? unit_mode(m, slowest_mode(m)) : random_state(m, modes, stream_seed(seed, k), m.real_basis());
        x.normalize();
        double val = objective(x);
        int ev = 1;
        double eta = 0.5;
        const int half = std::max(1, opts.directions / 2);
        for (int step = 0; step < opts.steps && eta > 1e-8 && std::isfinite(val); ++step) {
            cvec grad = cvec::Zero(static_cast<Eigen::Index>(N));
            for (int q = 0; q < opts.directions; ++q) {
                cvec u = cvec::Zero(static_cast<Eigen::Index>(N));
                if (q < half) {
                    u[static_cast<Eigen::Index>((static_cast<std::size_t>(step) * half + q) % N)] = 1.0;
                } else {
                    for (std::size_t j = 0; j < N; ++j) {
                        u[static_cast<Eigen::Index>(j)] = {N01(gen), m.real_basis() ? 0.0 : N01(gen)};
                    }
                    u.normalize();
                }
                const double hstep = opts.fd_step;
                const double up = objective(x + hstep * u), dn = objective(x - hstep * u);
                ev += 2;
                if (std::isfinite(up) && std::isfinite(dn)) grad += ((up - dn) / (2.0 * hstep)) * u;
            }
            const double gn = grad.norm();
            if (!(gn > 0.0)) break;
            bool improved = false;
            for (int tries = 0; tries < 12 && eta > 1e-8; ++tries) {
                cvec trial = x + (eta / gn) * grad;
                trial.normalize();
                const double tv = objective(trial);
                ++ev;
                if (tv > val) {
                    x = trial;
                    val = tv;
                    eta = std::min(1.0, eta * 1.5);
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if (!improved) break;
        }
        best[k] = val;
        evals[k] = ev;
    }, jobs);
    LowerBound out;
    out.log_value = *std::max_element(best.begin(), best.end());
    out.value = std::exp(out.log_value);
    for (int e : evals) out.evaluations += e;
    return out;
}

}  // namespace obscert
