#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wakeup {

template <typename Real>
using CVecT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVecT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using CVec = CVecT<double>;
using RVec = RVecT<double>;

using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

struct InvalidParameters : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InconsistentMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok)
        throw InvalidParameters(what);
}

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial)
{
    return mix64(mix64(mix64(master) ^ point) ^ trial);
}

inline Rng make_rng(std::uint64_t seed)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

// circularly-symmetric complex gaussian with E|z|^2 = var
inline cplx complex_normal(Rng& rng, double var = 1.0)
{
    std::normal_distribution<double> n(0.0, std::sqrt(var / 2.0));
    double re = n(rng);
    double im = n(rng);
    return {re, im};
}

inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace wakeup
