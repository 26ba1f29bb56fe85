#pragma once

#include <functional>
#include <string>
#include <vector>

namespace obscert::quad {

using Fn = std::function<double(double)>;

// Adaptive Gauss-Kronrod on [a, b].
double finite(const Fn& f, double a, double b, double rel_tol = 1e-13, double* error = nullptr);

struct HalfLineOptions {
    double stop_ratio = 1e-12;     // a panel below this fraction of the running total ends the sweep
    double panel_tol = 1e-13;
    double first_width = 0.5;
    double max_width = 1e300;      // panel widths double up to this cap
    double max_u = 1e300;          // integration never goes beyond this abscissa
    double divergence_cap = 1e12;  // running total above this is treated as divergent
    bool decay_heuristic = true;   // declare divergence when panels stop shrinking
    int max_panels = 4000;
};

struct HalfLineResult {
    double value = 0.0;
    double u_end = 0.0;
    int panels = 0;
    bool converged = false;  // stopped on the panel criterion
    bool divergent = false;
    std::string reason;
};

// Integral of F over [0, ∞) using panels whose widths double.
HalfLineResult half_line(const Fn& F, const HalfLineOptions& opts = {});

// ∫_p^q f(t) dt for 0 ≤ p < q ≤ ∞, integrated in logarithmic coordinates so that
// singular behaviour at 0 and algebraic tails are resolved.
double positive_range(const Fn& f, double p, double q, double rel_tol = 1e-11);

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule; order must be one of 7, 10, 15, 20, 25, 30.
const Rule& gauss_legendre(int order);

}  // namespace obscert::quad
