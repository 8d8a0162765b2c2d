#pragma once

// Small seeded generators for property tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace gen {

class Source {
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    /// Log-uniform in [lo, hi], both > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::complex<double> passive_impedance(double scale) {
        return {log_uniform(1e-3, 1.0) * scale * (coin() ? 1.0 : 0.0), uniform(-1.0, 1.0) * scale};
    }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(std::complex<double> a, std::complex<double> b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace gen
