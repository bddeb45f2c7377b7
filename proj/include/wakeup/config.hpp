#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "wakeup/link.hpp"
#include "wakeup/semi_markov.hpp"
#include "wakeup/sysim.hpp"

namespace wakeup {

struct Grids {
    std::vector<double> roc_snr_db{-10.0, -7.0, -4.0};
    std::vector<double> roc_pfa_nominal{1e-3, 2e-3, 5e-3, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> pmd_snr_db{-10.0, -8.0, -6.0, -5.0, -4.0, -3.8, -3.5, -3.0, -2.6, -2.0, -1.0, 0.0};
    std::vector<double> sync_snr_db{-10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0};
    std::vector<double> pfa_targets{0.05, 0.1};
    std::vector<std::array<double, 2>> error_pairs{{0.1, 0.01}, {0.1, 0.05}, {0.05, 0.01}, {0.05, 0.05}};
    std::vector<double> t_c{5e-3, 10e-3, 20e-3, 50e-3, 100e-3, 250e-3};
    std::vector<double> T_ON{1e-3, 5e-3, 10e-3, 20e-3};
    std::vector<double> T_I{4e-3, 12e-3, 30e-3, 80e-3};
    std::vector<double> drx_short_cycle{10e-3, 15e-3, 20e-3, 40e-3, 80e-3, 160e-3, 340e-3};
    double target_delay = 25e-3;
};

struct RunSettings {
    std::uint64_t seed = 1;
    int trials = 10000;
    int workers = 1;
    double duration = 1000.0; // simulated seconds per replication
    int replications = 20;
};

struct ExperimentConfig {
    std::string shift_convention = "auto"; // auto picks whichever passes the rotation oracle
    PdwchGroupConfig pdwch;
    OfdmParams ofdm;
    DetectorConfig detector = DetectorConfig::make(0.1, 13);
    FadingChannel channel = FadingChannel::epa();
    double others_active = 0.0;
    int device = 1;
    WakeupSystemParams sys;
    PowerProfile profile;
    TrafficParams traffic;
    DrxConfig drx;
    ServiceModel service = ServiceModel::CallHolding;
    double forced_visit = -1.0;
    Grids grids;
    RunSettings run;

    // recompute derived thresholds and check everything
    void finalize();
    LinkScenario link(double snr_db, double pfa_target) const;
    SimConfig sim(const WakeupSystemParams& sys_override) const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// keys present in j override cfg; unknown keys are an error
void apply_json(const nlohmann::json& j, ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

} // namespace wakeup
