#pragma once

#include "wakeup/ofdm_link.hpp"
#include "wakeup/wrx.hpp"
#include "wakeup/zc_signal.hpp"

namespace wakeup {

// one link-level operating point: transmitter, channel and receiver settings
struct LinkScenario {
    PdwchGroupConfig pdwch;
    OfdmParams ofdm;
    DetectorConfig detector = DetectorConfig::make(0.1, 13);
    FadingChannel channel = FadingChannel::epa();
    double snr_db = 0.0;
    int device = 1;               // device under test
    double others_active = 0.0;   // activation probability of the other devices
    bool random_eps_i = true;
    bool random_eps_f = true;
    bool random_delta = true;
    bool random_symbol = true;
    int tail_symbols = 1;
};

struct LinkTrial {
    ImpairmentSpec truth;
    WakeIndicators wi;
    DetectionResult result;

    bool device_active(int m) const { return wi[m]; }
    bool symbol_ok() const { return result.s_hat == truth.pdwch_symbol_index; }
    bool cfo_ok() const;
};

class LinkSimulator {
public:
    explicit LinkSimulator(LinkScenario sc);

    // device under test on/off; everything else drawn from rng
    LinkTrial run(bool device_active, Rng& rng) const;
    LinkTrial run(const WakeIndicators& wi, const ImpairmentSpec& spec, Rng& rng) const;

    const LinkScenario& scenario() const { return sc_; }
    const Detector& detector() const { return det_; }

private:
    LinkScenario sc_;
    Detector det_;
};

} // namespace wakeup
