#pragma once

#include <cmath>

#include <unsupported/Eigen/FFT>

#include "wakeup/common.hpp"

namespace wakeup {

namespace detail {
template <typename Real>
Eigen::FFT<Real>& fft_engine()
{
    thread_local Eigen::FFT<Real> eng = [] {
        Eigen::FFT<Real> e;
        e.SetFlag(Eigen::FFT<Real>::Unscaled);
        return e;
    }();
    return eng;
}
} // namespace detail

// orthonormal forward DFT, X[k] = 1/sqrt(n) sum x[t] e^{-j2pi kt/n}
template <typename Real>
CVecT<Real> fft(const CVecT<Real>& x)
{
    const auto n = x.size();
    CVecT<Real> out(n);
    if (n == 0)
        return out;
    detail::fft_engine<Real>().fwd(out.data(), x.data(), n);
    out /= std::sqrt(Real(n));
    return out;
}

// orthonormal inverse DFT
template <typename Real>
CVecT<Real> ifft(const CVecT<Real>& x)
{
    const auto n = x.size();
    CVecT<Real> out(n);
    if (n == 0)
        return out;
    detail::fft_engine<Real>().inv(out.data(), x.data(), n);
    out /= std::sqrt(Real(n));
    return out;
}

// unnormalised inverse sum, out[l] = sum_k X[k] e^{+j2pi kl/n}
template <typename Real>
CVecT<Real> ifft_sum(const CVecT<Real>& x)
{
    const auto n = x.size();
    CVecT<Real> out(n);
    if (n == 0)
        return out;
    detail::fft_engine<Real>().inv(out.data(), x.data(), n);
    return out;
}

} // namespace wakeup
