#include "wakeup/ofdm_link.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "wakeup/fft.hpp"

namespace wakeup {

int OfdmParams::symbol_offset(int q) const
{
    int off = 0;
    for (int s = 1; s < q; ++s)
        off += cp_length(s) + N;
    return off;
}

void OfdmParams::validate() const
{
    require(N >= 8, "N too small");
    require(N_cp >= 1 && N_cp < N, "N_cp must satisfy 1 <= N_cp < N");
    require(first_cp >= 0 && first_cp < N, "first_cp out of range");
    require(subcarrier_spacing > 0, "subcarrier spacing must be positive");
}

std::string PdwchLayout::describe() const
{
    std::ostringstream os;
    os << "pdwch bins " << first_bin << ".." << (first_bin + K - 1) << " (mod " << N << "), guards "
       << guards_low << " low / " << guards_high << " high, requested " << requested_guards << " per side";
    return os.str();
}

PdwchLayout plan_layout(const PdwchGroupConfig& cfg, const OfdmParams& params)
{
    cfg.validate();
    params.validate();
    require(cfg.K + 1 <= params.N, "configuration overflow: PDWCH does not fit next to DC");

    PdwchLayout lay;
    lay.N = params.N;
    lay.K = cfg.K;
    lay.first_bin = ((cfg.freq_offset % params.N) + params.N) % params.N;
    lay.requested_guards = cfg.N_g;

    std::vector<char> used(static_cast<std::size_t>(params.N), 0);
    used[0] = 1; // DC
    for (int k = 0; k < cfg.K; ++k) {
        const int b = lay.bin(k);
        require(!used[static_cast<std::size_t>(b)], "PDWCH overlaps the DC bin");
        used[static_cast<std::size_t>(b)] = 1;
        lay.pdwch_bins.push_back(b);
    }
    // high side first, then whatever is left below the block
    for (int g = 0; g < cfg.N_g; ++g) {
        const int b = lay.bin(cfg.K + g);
        if (used[static_cast<std::size_t>(b)])
            break;
        used[static_cast<std::size_t>(b)] = 1;
        lay.guard_bins.push_back(b);
        ++lay.guards_high;
    }
    for (int g = 1; g <= cfg.N_g; ++g) {
        int b = lay.bin(-g);
        if (b == 0)
            continue;
        if (used[static_cast<std::size_t>(b)])
            break;
        used[static_cast<std::size_t>(b)] = 1;
        lay.guard_bins.push_back(b);
        ++lay.guards_low;
    }
    return lay;
}

void ImpairmentSpec::validate(int search_span_a) const
{
    require(eps_f >= -0.5 && eps_f < 0.5, "eps_f must lie in [-0.5, 0.5)");
    require(std::abs(eps_i) <= (search_span_a - 1) / 2, "eps_i outside the search span");
    require(delta >= 0, "delta must be non-negative");
    require(pdwch_symbol_index >= 1, "pdwch symbol index is 1-based");
}

void qpsk_filler(CVec& bins, const std::vector<int>& skip, Rng& rng)
{
    const double a = 1.0 / std::sqrt(2.0);
    std::uniform_int_distribution<int> bit(0, 1);
    for (Eigen::Index k = 0; k < bins.size(); ++k) {
        if (std::find(skip.begin(), skip.end(), static_cast<int>(k)) != skip.end())
            continue;
        bins[k] = {bit(rng) ? a : -a, bit(rng) ? a : -a};
    }
}

Frame modulate_frame(const CVec& Y, const PdwchLayout& layout, const OfdmParams& params,
                     const ImpairmentSpec& spec, int x, Rng& rng, const FillerGenerator& filler,
                     int tail_symbols)
{
    params.validate();
    require(Y.size() == layout.K, "PDWCH spectrum length must equal K");
    require(x >= 1, "x must be at least 1");
    require(spec.pdwch_symbol_index >= 1 && spec.pdwch_symbol_index <= x, "PDWCH symbol index outside 1..x");
    require(spec.delta >= 0, "delta must be non-negative");
    require(tail_symbols >= 0, "tail_symbols must be non-negative");

    const int N = params.N;
    const int total = x + tail_symbols;
    Frame fr;
    fr.delta = spec.delta;
    fr.symbols = total;
    fr.samples = CVec::Zero(spec.delta + params.symbol_offset(total + 1));

    std::vector<int> dc_only{0};
    std::vector<int> pdwch_skip = layout.pdwch_bins;
    pdwch_skip.insert(pdwch_skip.end(), layout.guard_bins.begin(), layout.guard_bins.end());
    pdwch_skip.push_back(0);

    for (int q = 1; q <= total; ++q) {
        CVec bins = CVec::Zero(N);
        if (q == spec.pdwch_symbol_index) {
            for (int k = 0; k < layout.K; ++k)
                bins[layout.pdwch_bins[static_cast<std::size_t>(k)]] = Y[k];
            if (filler && static_cast<int>(pdwch_skip.size()) < N)
                filler(bins, pdwch_skip, rng);
        } else if (filler) {
            filler(bins, dc_only, rng);
        }
        const CVec body = ifft<double>(bins);
        const int cp = params.cp_length(q);
        const int start = spec.delta + params.symbol_offset(q);
        fr.samples.segment(start, cp) = body.tail(cp);
        fr.samples.segment(start + cp, N) = body;
    }
    return fr;
}

FadingChannel FadingChannel::epa()
{
    FadingChannel ch;
    ch.tap_delays = {0e-9, 30e-9, 70e-9, 90e-9, 110e-9, 190e-9, 410e-9};
    ch.tap_powers_db = {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8};
    return ch;
}

FadingChannel FadingChannel::flat()
{
    FadingChannel ch;
    ch.tap_delays = {0.0};
    ch.tap_powers_db = {0.0};
    return ch;
}

FadingChannel FadingChannel::none()
{
    return FadingChannel{};
}

void FadingChannel::validate() const
{
    require(tap_delays.size() == tap_powers_db.size(), "tap delay and power lists differ in length");
    for (double d : tap_delays)
        require(d >= 0, "tap delays must be non-negative");
    require(doppler >= 0, "doppler must be non-negative");
}

std::vector<ChannelTap> quantize_taps(const FadingChannel& ch, double sample_rate)
{
    ch.validate();
    double total = 0;
    for (double p : ch.tap_powers_db)
        total += std::pow(10.0, p / 10.0);
    std::map<int, double> merged;
    for (std::size_t i = 0; i < ch.tap_delays.size(); ++i) {
        const int off = static_cast<int>(std::lround(ch.tap_delays[i] * sample_rate));
        merged[off] += std::pow(10.0, ch.tap_powers_db[i] / 10.0) / total;
    }
    std::vector<ChannelTap> taps;
    for (auto [off, p] : merged)
        taps.push_back({off, p});
    return taps;
}

namespace {

// sum-of-sinusoids Rayleigh process for one path
struct SosPath {
    double power;
    std::vector<double> freq;
    std::vector<double> phase;

    cplx at(double t) const
    {
        cplx g{0, 0};
        for (std::size_t s = 0; s < freq.size(); ++s)
            g += std::polar(1.0, 2 * kPi * freq[s] * t + phase[s]);
        return g * std::sqrt(power / static_cast<double>(freq.size()));
    }
};

} // namespace

CVec apply_channel(const CVec& stream, const FadingChannel& ch, const OfdmParams& params, Rng& rng)
{
    require(stream.size() > 0, "empty stream");
    if (ch.is_identity())
        return stream;
    const double fs = params.sample_rate();
    const auto taps = quantize_taps(ch, fs);
    const Eigen::Index n = stream.size();
    CVec out = CVec::Zero(n);

    if (ch.doppler <= 0) {
        std::vector<cplx> g;
        double pw = 0;
        for (const auto& t : taps) {
            g.push_back(complex_normal(rng, t.power));
            pw += std::norm(g.back());
        }
        if (ch.normalize_realization && pw > 0)
            for (auto& v : g)
                v /= std::sqrt(pw);
        for (std::size_t i = 0; i < taps.size(); ++i) {
            const int o = taps[i].offset;
            if (o < n)
                out.tail(n - o) += g[i] * stream.head(n - o);
        }
        return out;
    }

    constexpr int sinusoids = 16;
    std::vector<SosPath> paths;
    for (const auto& t : taps) {
        SosPath p{t.power, {}, {}};
        const double theta = 2 * kPi * uniform01(rng);
        for (int s = 0; s < sinusoids; ++s) {
            const double alpha = (2 * kPi * s + theta) / sinusoids;
            p.freq.push_back(ch.doppler * std::cos(alpha));
            p.phase.push_back(2 * kPi * uniform01(rng));
        }
        paths.push_back(std::move(p));
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / fs;
        double pw = 0;
        std::vector<cplx> g;
        for (const auto& p : paths) {
            g.push_back(p.at(t));
            pw += std::norm(g.back());
        }
        if (ch.normalize_realization && pw > 0)
            for (auto& v : g)
                v /= std::sqrt(pw);
        for (std::size_t i = 0; i < taps.size(); ++i) {
            const Eigen::Index src = k - taps[i].offset;
            if (src >= 0)
                out[k] += g[i] * stream[src];
        }
    }
    return out;
}

double noise_variance(double snr_db)
{
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

CVec apply_impairments(const CVec& stream, const ImpairmentSpec& spec, const OfdmParams& params, Rng& rng)
{
    require(stream.size() > 0, "empty stream");
    CVec out = stream;
    const double eps = spec.eps_i + spec.eps_f;
    if (eps != 0.0) {
        for (Eigen::Index n = 0; n < out.size(); ++n) {
            // reduce the phase argument before polar() to keep it exact for integer eps
            const double cyc = std::fmod(eps * static_cast<double>(n), static_cast<double>(params.N));
            out[n] *= std::polar(1.0, 2 * kPi * cyc / params.N);
        }
    }
    const double var = noise_variance(spec.snr_db);
    if (var > 0)
        for (Eigen::Index n = 0; n < out.size(); ++n)
            out[n] += complex_normal(rng, var);
    return out;
}

} // namespace wakeup
