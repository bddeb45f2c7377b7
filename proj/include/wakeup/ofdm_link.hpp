#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wakeup/common.hpp"
#include "wakeup/zc_signal.hpp"

namespace wakeup {

struct OfdmParams {
    int N = 128;
    int N_cp = 9;
    int first_cp = 0; // 0 means "same as N_cp"
    double subcarrier_spacing = 15e3;

    int N_b() const { return N; }
    double sample_rate() const { return N * subcarrier_spacing; }
    int cp_length(int symbol) const { return (symbol == 1 && first_cp > 0) ? first_cp : N_cp; }
    // start of symbol q (1-based) relative to the CP start of symbol 1
    int symbol_offset(int q) const;
    void validate() const;
};

// where PDWCH and its guards sit inside the N-point grid
struct PdwchLayout {
    int N = 0;
    int first_bin = 0;
    int K = 0;
    std::vector<int> pdwch_bins;
    std::vector<int> guard_bins;
    int guards_low = 0;
    int guards_high = 0;
    int requested_guards = 0;

    bool fits_both_sides() const { return guards_low >= requested_guards && guards_high >= requested_guards; }
    int bin(int k) const { return ((first_bin + k) % N + N) % N; }
    std::string describe() const;
};

PdwchLayout plan_layout(const PdwchGroupConfig& cfg, const OfdmParams& params);

struct ImpairmentSpec {
    int eps_i = 0;
    double eps_f = 0.0;
    int delta = 0;
    double snr_db = std::numeric_limits<double>::infinity();
    int pdwch_symbol_index = 1;

    void validate(int search_span_a) const;
};

// fills one OFDM symbol's spectrum (bins outside "skip" are written)
using FillerGenerator = std::function<void(CVec& bins, const std::vector<int>& skip, Rng& rng)>;

void qpsk_filler(CVec& bins, const std::vector<int>& skip, Rng& rng);

struct Frame {
    CVec samples;
    int delta = 0;
    int symbols = 0;
};

Frame modulate_frame(const CVec& Y, const PdwchLayout& layout, const OfdmParams& params,
                     const ImpairmentSpec& spec, int x, Rng& rng,
                     const FillerGenerator& filler = qpsk_filler, int tail_symbols = 1);

struct FadingChannel {
    std::vector<double> tap_delays;    // s
    std::vector<double> tap_powers_db; // average
    double doppler = 0.0;              // Hz, 0 = block fading
    bool normalize_realization = false;

    static FadingChannel epa();
    static FadingChannel flat();
    static FadingChannel none(); // unit gain, no randomness
    bool is_identity() const { return tap_delays.empty(); }
    void validate() const;
};

struct ChannelTap {
    int offset = 0;
    double power = 0.0; // linear, normalised
};

// taps merged by rounded sample offset
std::vector<ChannelTap> quantize_taps(const FadingChannel& ch, double sample_rate);

CVec apply_channel(const CVec& stream, const FadingChannel& ch, const OfdmParams& params, Rng& rng);

double noise_variance(double snr_db);

CVec apply_impairments(const CVec& stream, const ImpairmentSpec& spec, const OfdmParams& params, Rng& rng);

} // namespace wakeup
