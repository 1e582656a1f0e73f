// core.hpp — shared aliases, error types, deterministic RNG, special functions

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wcl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

constexpr Complex kI{0.0, 1.0};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// An algebraic hypothesis failed numerically; message carries the residual.
struct ValidationError : Error {
    using Error::Error;
};

// A construction refused to proceed because a precondition gate failed.
struct GateError : Error {
    using Error::Error;
};

struct QuadratureError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Deterministic random source. The raw engine is std::mt19937_64 (its output
// stream is fixed by the standard); all real-valued draws are derived from it
// with explicit arithmetic below, so identical seeds give identical matrices
// on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // [0,1) with 53-bit resolution
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one spare cached
    double normal();

    Complex cnormal() { return {normal() * M_SQRT1_2, normal() * M_SQRT1_2}; }

    // GUE-style hermitian matrix, entries O(1)
    Matrix hermitian(Index n);

    // Haar-like unitary: QR of a complex Ginibre matrix, phases fixed
    Matrix unitary(Index n);

    // random full-rank density matrix (G G^dag normalized)
    Matrix density(Index n);

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Dawson integral D(x) = exp(-x^2) int_0^x exp(t^2) dt, accurate to ~1e-14.
double dawson(double x);

}  // namespace wcl
