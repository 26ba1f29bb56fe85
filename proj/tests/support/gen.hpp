#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace obscert::testing {

// Seeded value generator for property tests. Every draw is reproducible from the seed.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    template <class T>
    const T& pick(const std::vector<T>& xs) {
        return xs[static_cast<std::size_t>(integer(0, static_cast<int>(xs.size()) - 1))];
    }

    // Sorted sample of n values, log-uniform in [lo, hi].
    std::vector<double> log_grid(int n, double lo, double hi) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = log_uniform(lo, hi);
        std::sort(v.begin(), v.end());
        return v;
    }

    // Random direction scaled to a norm drawn log-uniformly from [lo, hi].
    Eigen::VectorXd vector(int n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v.normalized() * log_uniform(lo, hi);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace obscert::testing
