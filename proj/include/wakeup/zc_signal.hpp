#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "wakeup/common.hpp"
#include "wakeup/fft.hpp"

namespace wakeup {

template <typename Real = double>
struct ZcSequence {
    int root = 0;
    int length = 0;
    CVecT<Real> time_samples;
    CVecT<Real> spectrum; // orthonormal DFT, |Z[k]| = 1
};

enum class ShiftConvention {
    AsPrinted,   // Z[k] exp(-j2pi r tau / K)
    CyclicShift, // Z[k] exp(-j2pi k tau / K)
};

std::string to_string(ShiftConvention c);
ShiftConvention shift_convention_from_string(const std::string& s);

struct PdwchGroupConfig {
    int K = 117;
    int K_cs = 13;
    int M = 7;
    int root = 31;
    int freq_offset = 1; // first PDWCH bin, DC stays empty
    int N_g = 10;
    ShiftConvention convention = ShiftConvention::CyclicShift;

    int shift(int m) const { return m * K_cs; }
    int max_devices() const { return K / K_cs - 1; }
    void validate() const;
};

struct WakeIndicators {
    std::vector<std::uint8_t> bits; // bits[m-1] is device m

    WakeIndicators() = default;
    explicit WakeIndicators(int M) : bits(static_cast<std::size_t>(M), 0) {}
    WakeIndicators(std::initializer_list<int> b)
    {
        for (int v : b)
            bits.push_back(static_cast<std::uint8_t>(v != 0));
    }
    int size() const { return static_cast<int>(bits.size()); }
    bool operator[](int m) const { return bits.at(static_cast<std::size_t>(m - 1)) != 0; }
    void set(int m, bool v) { bits.at(static_cast<std::size_t>(m - 1)) = v ? 1 : 0; }
    int count() const { return std::accumulate(bits.begin(), bits.end(), 0); }
};

template <typename Real = double>
ZcSequence<Real> gen_root_zc(int r, int K)
{
    require(K > 0 && K % 2 == 1, "ZC length must be odd and positive");
    require(r >= 1 && r < K, "ZC root must satisfy 1 <= r < K");
    require(std::gcd(r, K) == 1, "ZC root must be coprime with K");

    ZcSequence<Real> seq;
    seq.root = r;
    seq.length = K;
    seq.time_samples.resize(K);
    const std::int64_t two_k = 2 * static_cast<std::int64_t>(K);
    for (int n = 0; n < K; ++n) {
        // reduce r n(n+1) mod 2K so the phase argument stays small
        std::int64_t e = (static_cast<std::int64_t>(n) * (n + 1)) % two_k;
        e = (e * r) % two_k;
        const Real ph = -Real(EIGEN_PI) * Real(e) / Real(K);
        seq.time_samples[n] = std::polar(Real(1), ph);
    }
    seq.spectrum = fft<Real>(seq.time_samples);
    return seq;
}

template <typename Real = double>
CVecT<Real> shift_spectrum(const ZcSequence<Real>& seq, int tau,
                           ShiftConvention conv = ShiftConvention::CyclicShift)
{
    const int K = seq.length;
    require(tau >= 0 && tau < K, "cyclic shift out of range");
    CVecT<Real> out(K);
    for (int k = 0; k < K; ++k) {
        std::int64_t e = conv == ShiftConvention::AsPrinted
                             ? static_cast<std::int64_t>(seq.root) * tau
                             : static_cast<std::int64_t>(k) * tau;
        e %= K;
        out[k] = seq.spectrum[k] * std::polar(Real(1), -2 * Real(EIGEN_PI) * Real(e) / Real(K));
    }
    return out;
}

// true when the inverse DFT of the shifted spectrum is z[n - tau]
template <typename Real = double>
bool passes_rotation_oracle(const ZcSequence<Real>& seq, int tau, ShiftConvention conv,
                            Real tol = Real(1e-9))
{
    const int K = seq.length;
    CVecT<Real> t = ifft<Real>(shift_spectrum(seq, tau, conv));
    for (int n = 0; n < K; ++n) {
        const int src = ((n - tau) % K + K) % K;
        if (std::abs(t[n] - seq.time_samples[src]) > tol)
            return false;
    }
    return true;
}

// the printed convention wins if it passes, otherwise the cyclic one
template <typename Real = double>
ShiftConvention resolve_shift_convention(const ZcSequence<Real>& seq, int tau)
{
    if (passes_rotation_oracle(seq, tau, ShiftConvention::AsPrinted))
        return ShiftConvention::AsPrinted;
    if (passes_rotation_oracle(seq, tau, ShiftConvention::CyclicShift))
        return ShiftConvention::CyclicShift;
    throw InvalidParameters("no shift convention reproduces a cyclic rotation");
}

template <typename Real = double>
CVecT<Real> build_pdwch_spectrum(const PdwchGroupConfig& cfg, const ZcSequence<Real>& root,
                                 const WakeIndicators& wi)
{
    require(wi.size() == cfg.M, "wake indicator count must equal M");
    CVecT<Real> y = root.spectrum;
    for (int m = 1; m <= cfg.M; ++m)
        if (wi[m])
            y += shift_spectrum(root, cfg.shift(m), cfg.convention);
    return y;
}

template <typename Real = double>
CVecT<Real> build_pdwch_spectrum(const PdwchGroupConfig& cfg, const WakeIndicators& wi)
{
    cfg.validate();
    return build_pdwch_spectrum(cfg, gen_root_zc<Real>(cfg.root, cfg.K), wi);
}

} // namespace wakeup
