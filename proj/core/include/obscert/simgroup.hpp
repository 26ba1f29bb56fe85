#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obscert/bernstein.hpp"
#include "obscert/levy_symbol.hpp"
#include "obscert/rates.hpp"

namespace obscert {

using cvec = Eigen::VectorXcd;

// Sample points of a model: a periodic lattice or the closed-interval trapezoid nodes.
struct GridGeometry {
    int n = 1;
    std::vector<int> points;      // per axis
    std::vector<double> spacing;  // per axis
    bool periodic = true;

    std::size_t size() const;
    double coordinate(std::size_t flat, int axis) const;
};

struct ThickSetSpec {
    enum class Pattern { Full, PeriodicSlabs, Checkerboard, Custom };
    Pattern pattern = Pattern::Full;
    double rho = 1.0;             // required thickness
    std::vector<double> L;        // reference box side per axis; empty means one cell
    double period = 0.0;          // slabs: x_0 mod period < width; checkerboard: cell side
    double width = 0.0;
    std::vector<unsigned char> mask;  // Custom, row-major with the last axis fastest
};

struct ThickSet {
    GridGeometry geometry;
    std::vector<unsigned char> mask;
    std::vector<double> weights;  // quadrature weight of each point (0 off the set)
    double rho = 1.0;             // requested
    double rho_actual = 1.0;      // min over grid translates
    std::vector<double> L;
    std::string pattern;

    double measure() const;
};

// Builds the set and scans every grid translate of the L-box; throws NotThick on failure.
ThickSet make_thick_set(const GridGeometry& geometry, const ThickSetSpec& spec);

// Minimum fraction over translates and the flat index of the worst translate's corner.
std::pair<double, std::size_t> thickness_scan(const GridGeometry& geometry, const std::vector<unsigned char>& mask,
                                              const std::vector<double>& L);

// Common modal view: an orthonormal basis in which S(t) is diagonal with entries e^{−ψ_j t}.
class SpectralModel {
public:
    virtual ~SpectralModel() = default;

    virtual std::size_t modes() const = 0;
    virtual std::complex<double> psi(std::size_t j) const = 0;
    // True when mode j survives P_λ.
    virtual bool in_band(std::size_t j, double lambda) const = 0;
    // e with log(‖x‖/‖x‖_E) fitted against λ^e: the frequency scale of the spectral parameter.
    virtual double fit_exponent() const = 0;
    // Modal coefficients of physically real states are real.
    virtual bool real_basis() const { return false; }
    virtual const GridGeometry& geometry() const = 0;
    virtual double p() const { return 2.0; }
    // Physical samples of a modal state.
    virtual cvec synthesize(const cvec& modal) const = 0;
    // ∫ over every grid point: weight of point i.
    virtual const std::vector<double>& point_weights() const = 0;
    virtual std::string describe() const = 0;

    // M_E[j,k] = ⟨e_j, e_k⟩_{L2(E)} restricted to the listed modes.
    virtual Eigen::MatrixXcd observation_gram(const ThickSet& E, const std::vector<std::size_t>& modes) const;

    cvec evolve(const cvec& modal, double t) const;
    cvec project(const cvec& modal, double lambda) const;
    // ‖x‖_{L_p(Ω)}; p = 2 uses Parseval in the modal basis
    double norm(const cvec& modal) const;
    // ‖x‖_{L_p(E)} by quadrature on the masked points
    double observe(const ThickSet& E, const cvec& modal) const;
    std::vector<std::size_t> band(double lambda) const;
    // Index of the excluded mode with the smallest Re ψ, or modes() if none.
    std::size_t slowest_excluded(double lambda) const;
};

class DiagonalModel final : public SpectralModel {
public:
    // Dirichlet Laplacian eigenbasis on (0, L) with decay μ_k = g(√λ_k).
    DiagonalModel(int N, const RateFunction& g, double L = 3.14159265358979323846, int G = 2048);
    // Explicit decay rates μ_k (base eigenvalues still (kπ/L)²).
    static DiagonalModel with_rates(std::vector<double> mu, double L = 3.14159265358979323846, int G = 2048);
    // μ_k ↦ φ(μ_k)
    DiagonalModel subordinate(const BernsteinFunction& phi) const;

    std::size_t modes() const override { return mu_.size(); }
    std::complex<double> psi(std::size_t j) const override { return mu_[j]; }
    bool in_band(std::size_t j, double lambda) const override { return base_[j] <= lambda; }
    double fit_exponent() const override { return 0.5; }
    bool real_basis() const override { return true; }
    const GridGeometry& geometry() const override { return geom_; }
    cvec synthesize(const cvec& modal) const override;
    const std::vector<double>& point_weights() const override { return weights_; }
    std::string describe() const override;
    Eigen::MatrixXcd observation_gram(const ThickSet& E, const std::vector<std::size_t>& modes) const override;

    const std::vector<double>& base_eigenvalues() const { return base_; }
    const std::vector<double>& decay_rates() const { return mu_; }
    double length() const { return L_; }
    int grid_points() const { return G_; }
    // max |⟨φ_j, φ_k⟩_G − δ_jk|
    double orthonormality_defect() const;
    // The rate seen by the theorem in the spectral parameter λ: g∘√ when built from g.
    const RateFunction& theorem_g() const { return g_thm_; }
    // Real coefficient vector ↦ evolved coefficients.
    Eigen::VectorXd evolve_real(const Eigen::VectorXd& a, double t) const;

private:
    DiagonalModel() = default;
    void build(int G, double L);

    std::vector<double> base_, mu_;
    double L_ = 0.0;
    int G_ = 0;
    GridGeometry geom_;
    std::vector<double> weights_;
    Eigen::MatrixXd basis_;  // (G+1) × N samples of φ_k
    RateFunction g_thm_ = RateFunction::identity();
};

class GridModel final : public SpectralModel {
public:
    // Periodic box [0, box)^n with G points per axis; frequencies 2π m / box.
    GridModel(const SymbolModel& symbol, double box, int G, double p = 2.0);
    ~GridModel() override;
    GridModel(const GridModel&) = delete;
    GridModel& operator=(const GridModel&) = delete;

    std::size_t modes() const override { return psi_.size(); }
    std::complex<double> psi(std::size_t j) const override { return psi_[j]; }
    bool in_band(std::size_t j, double lambda) const override;
    double fit_exponent() const override { return 1.0; }
    const GridGeometry& geometry() const override { return geom_; }
    double p() const override { return p_; }
    cvec synthesize(const cvec& modal) const override;
    const std::vector<double>& point_weights() const override { return weights_; }
    std::string describe() const override;
    Eigen::MatrixXcd observation_gram(const ThickSet& E, const std::vector<std::size_t>& modes) const override;

    cvec analyze(const cvec& field) const;
    // Physical-space operations via forward transform, multiplier, inverse transform.
    cvec evolve_field(const cvec& field, double t) const;
    cvec project_field(const cvec& field, double lambda) const;
    double field_norm(const cvec& field) const;
    double observe_field(const ThickSet& E, const cvec& field) const;

    // Frequency vector of mode j.
    Eigen::VectorXd xi(std::size_t j) const;
    double max_abs_xi(std::size_t j) const;
    const SymbolModel& symbol() const { return symbol_; }
    int n() const { return geom_.n; }
    int G() const { return G_; }
    double box() const { return box_; }
    // c + α_min(Q)λ² + (11/24)·min φ(ξ) over lattice ξ outside (−λ,λ)^n.
    double lattice_dissipation_rate(double lambda) const;

private:
    struct Plans;
    void transform(const cvec& in, cvec& out, bool forward) const;

    SymbolModel symbol_;
    double box_;
    int G_;
    double p_;
    GridGeometry geom_;
    std::vector<double> weights_;
    std::vector<std::complex<double>> psi_;
    std::unique_ptr<Plans> plans_;
};

// Deterministic per-stream seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

// Standard complex Gaussian on the listed modes (real Gaussian when real_only), normalised to ‖x‖ = 1.
cvec random_state(const SpectralModel& m, const std::vector<std::size_t>& support, std::uint64_t seed, bool real_only);

struct LsConstants {
    double d0 = NAN;
    double d1 = NAN;             // raw fitted slope, clamped at 0
    double slope_ls = NAN;       // least-squares slope before clamping
    std::vector<double> lambdas;
    std::vector<double> max_ratio;
    RateFunction f = RateFunction::identity();  // d1'·λ^e with d1' = max(d1, floor)
    double d1_floor = 1e-6;
    int samples = 0;
};

// Empirical spectral-inequality constants; an estimate, not a proof.
LsConstants estimate_ls_constants(const SpectralModel& m, const ThickSet& E, const std::vector<double>& lambdas,
                                  int samples, std::uint64_t seed, int jobs = 0);

}  // namespace obscert
