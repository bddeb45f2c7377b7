#include "wakeup/link.hpp"

#include <cmath>

namespace wakeup {

bool LinkTrial::cfo_ok() const
{
    const double total_err = (result.eps_i_hat + result.eps_f_hat) - (truth.eps_i + truth.eps_f);
    return std::lround(total_err) == 0;
}

LinkSimulator::LinkSimulator(LinkScenario sc)
    : sc_(std::move(sc)), det_(sc_.detector, sc_.pdwch, sc_.ofdm)
{
    sc_.channel.validate();
    require(sc_.device >= 1 && sc_.device <= sc_.pdwch.M, "device under test outside 1..M");
    require(sc_.others_active >= 0 && sc_.others_active <= 1, "others_active must be a probability");
}

LinkTrial LinkSimulator::run(bool device_active, Rng& rng) const
{
    const DetectorConfig& dc = sc_.detector;
    ImpairmentSpec spec;
    spec.snr_db = sc_.snr_db;
    if (sc_.random_eps_i)
        spec.eps_i = std::uniform_int_distribution<int>(-dc.span(), dc.span())(rng);
    if (sc_.random_eps_f)
        spec.eps_f = uniform01(rng) - 0.5;
    if (sc_.random_delta)
        spec.delta = std::uniform_int_distribution<int>(0, sc_.ofdm.N)(rng);
    spec.pdwch_symbol_index = sc_.random_symbol ? std::uniform_int_distribution<int>(1, dc.x)(rng) : 1;

    WakeIndicators wi(sc_.pdwch.M);
    for (int m = 1; m <= sc_.pdwch.M; ++m) {
        if (m == sc_.device)
            wi.set(m, device_active);
        else if (sc_.others_active > 0)
            wi.set(m, uniform01(rng) < sc_.others_active);
    }
    return run(wi, spec, rng);
}

LinkTrial LinkSimulator::run(const WakeIndicators& wi, const ImpairmentSpec& spec, Rng& rng) const
{
    spec.validate(sc_.detector.a);
    LinkTrial t;
    t.truth = spec;
    t.wi = wi;
    const CVec Y = build_pdwch_spectrum(sc_.pdwch, det_.root(), wi);
    const Frame fr = modulate_frame(Y, det_.layout(), sc_.ofdm, spec, sc_.detector.x, rng, qpsk_filler,
                                    sc_.tail_symbols);
    const CVec faded = apply_channel(fr.samples, sc_.channel, sc_.ofdm, rng);
    const CVec rx = apply_impairments(faded, spec, sc_.ofdm, rng);
    t.result = det_.detect(rx);
    return t;
}

} // namespace wakeup
