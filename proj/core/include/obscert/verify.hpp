#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "obscert/rates.hpp"
#include "obscert/simgroup.hpp"

namespace obscert {

inline constexpr double kVerifyRelTol = 1e-9;

struct VerificationRow {
    std::string name;
    int samples = 0;
    double max_ratio = NAN;
    double log_max_ratio = NAN;
    double certified_bound = NAN;
    double log_certified_bound = NAN;
    bool pass = false;
    bool degenerate = false;  // some observed norm vanished on a nonzero state
    std::string detail;
};

struct VerificationReport {
    std::vector<VerificationRow> rows;
    std::vector<std::pair<std::string, std::string>> environment;  // insertion order is kept
    std::vector<std::string> warnings;

    bool all_pass() const;
    void echo(const std::string& key, const std::string& value);
    void echo(const std::string& key, double value);
};

// Sets pass from the log values: log_max ≤ log_bound + log(1 + 1e-9).
void finalize_row(VerificationRow& row);

// Composite Gauss–Legendre rule on [0, T] with panel ends T·(i/P)³, graded toward t = 0.
struct TimeRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
TimeRule time_rule(double T, int panels, int order = 10);

// ‖(I−P_λ)S(t)x‖ / (C2·e^{−g(λ)h(t)+ωt}·‖x‖), maximised over samples and the (λ, t) grid; bound 1.
VerificationRow check_dissipation(const SpectralModel& m, const RateFunction& g, const RateFunction& h, double C2,
                                  double omega, const std::vector<double>& lambdas, const std::vector<double>& times,
                                  int samples, std::uint64_t seed, int jobs = 0);

// ‖P_λx‖ / (C1·e^{f(λ)}·‖C P_λx‖) over band-limited samples; bound 1.
VerificationRow check_uncertainty(const SpectralModel& m, const ThickSet& E, const RateFunction& f, double C1,
                                  const std::vector<double>& lambdas, int samples, std::uint64_t seed, int jobs = 0);

// ‖S(T)x‖ / ‖τ ↦ ‖C S(τ)x‖‖_{L_r(0,T)} over samples, compared with the certified constant.
VerificationRow check_observability(const SpectralModel& m, const ThickSet& E, double T, double log_cobs, double r,
                                    int samples, int time_panels, std::uint64_t seed, int jobs = 0);

// Modal Gramian Σ_i w_i S(t_i)* M_E S(t_i) over all modes.
Eigen::MatrixXcd observability_gramian(const SpectralModel& m, const ThickSet& E, const TimeRule& rule);
// Same with the exact ∫_0^T e^{−(ψ̄_j+ψ_k)t} dt; a cross-check for the quadrature.
Eigen::MatrixXcd observability_gramian_exact(const SpectralModel& m, const ThickSet& E, double T);

struct OptimalConstant {
    double value = NAN;
    double log_value = NAN;
    int time_panels = 0;
    std::string method;  // "dense" or "power-iteration"
    int iterations = 0;
};

// sqrt of the largest generalized eigenvalue of (S(T)*S(T), G_T); p = 2 models only.
OptimalConstant optimal_constant_l2(const SpectralModel& m, const ThickSet& E, double T, int time_panels = 256);

struct AscentOptions {
    int restarts = 8;
    int steps = 40;
    int directions = 16;      // per step, half coordinate and half random
    int time_panels = 64;
    double fd_step = 1e-6;
};

struct LowerBound {
    double value = NAN;
    double log_value = NAN;
    int evaluations = 0;
};

// Best ratio found by restarts plus finite-difference ascent; a lower bound on the optimal constant.
LowerBound empirical_lower_bound(const SpectralModel& m, const ThickSet& E, double T, double r,
                                 const AscentOptions& opts, std::uint64_t seed, int jobs = 0);

}  // namespace obscert
