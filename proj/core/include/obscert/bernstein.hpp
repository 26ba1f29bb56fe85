#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obscert/certifier.hpp"
#include "obscert/rates.hpp"

namespace obscert {

// Radon measure on (0, ∞): a density with support hint, or finitely many atoms.
struct HalfLineMeasure {
    enum class Kind { Zero, Density, Atoms };
    Kind kind = Kind::Zero;
    std::function<double(double)> density;
    double support_lo = 0.0;
    double support_hi = std::numeric_limits<double>::infinity();
    // Set when density(t) = coefficient·t^{-1-s}; enables closed-form minorants.
    std::optional<std::pair<double, double>> stable;
    std::vector<std::pair<double, double>> atoms;  // (t_i, w_i)

    static HalfLineMeasure zero() { return {}; }
    static HalfLineMeasure from_density(std::function<double(double)> rho, double lo = 0.0,
                                        double hi = std::numeric_limits<double>::infinity());
    static HalfLineMeasure stable_power(double coefficient, double s);
    static HalfLineMeasure from_atoms(std::vector<std::pair<double, double>> atoms);

    // ∫_{[p,q)} w(t) μ(dt) with atoms counted when p ≤ t_i < q.
    double integrate(const std::function<double(double)>& w, double p, double q, double rel_tol = 1e-11) const;
};

struct LevyTriplet {
    double a = 0.0;
    double b = 0.0;
    HalfLineMeasure mu;

    // ∫ min(1, t) μ(dt); throws QuadratureFailure when it does not converge.
    double integrability_mass() const;
};

class BernsteinFunction {
public:
    enum class Kind { Power, Affine, FromTriplet, Custom };

    static BernsteinFunction power(double s);
    static BernsteinFunction affine(double b, double a = 0.0);
    static BernsteinFunction from_triplet(LevyTriplet t);
    static BernsteinFunction custom(std::function<double(double)> phi, double at_zero, std::string label = "custom");

    Kind kind() const { return kind_; }
    double s() const { return s_; }
    double a() const { return a_; }
    double b() const { return b_; }
    const LevyTriplet& triplet() const;
    const std::function<double(double)>& custom_fn() const { return custom_; }
    double operator()(double lambda) const;
    // φ(0+)
    double at_zero() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::Power;
    double s_ = 1.0, a_ = 0.0, b_ = 0.0, zero_ = 0.0;
    std::shared_ptr<const LevyTriplet> triplet_;
    std::function<double(double)> custom_;
    std::string label_;
};

double phi_eval(const BernsteinFunction& phi, double lambda);

struct PhiBounds {
    double lower = 0.0;
    double upper = 0.0;
};

PhiBounds phi_bounds(const LevyTriplet& t, double lambda);

// λ ↦ φ(g(λ)); the dissipation constant C2 carries over unchanged.
RateFunction subordinate_rate(const BernsteinFunction& phi, const RateFunction& g);

// Increasing minorant of φ built from a + bλ and the lower growth bound of the measure.
RateFunction triplet_minorant(const LevyTriplet& t);

Certificate certify_subordinated(const BernsteinFunction& phi, const ProblemData& p, const SolveOptions& opts = {});

std::vector<double> subordinate_diagonal(const std::vector<double>& eigen_rates, const BernsteinFunction& phi, double t);

struct SpotCheck {
    bool ok = true;
    int order = 0;  // derivative order that failed
    double lambda = 0.0;
    double value = 0.0;
};

// Signs of the first three forward differences of a Bernstein function.
SpotCheck complete_monotonicity_spot_check(const BernsteinFunction& phi, const std::vector<double>& lambdas,
                                           double rel_step = 0.1, double tol = 1e-6);

}  // namespace obscert
