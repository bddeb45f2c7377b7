#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wakeup/semi_markov.hpp"
#include "wakeup/traffic.hpp"

namespace wakeup {

enum class DetectionMode { FixedRates, CoupledPhy };
enum class ServiceModel {
    CallHolding,      // stay active until T_I after the last packet of the current call
    PacketInactivity, // T_I restarts on every packet
};

std::string to_string(ServiceModel s);
ServiceModel service_model_from_string(const std::string& s);

// decides the decoded WI given the true one (coupled PHY mode)
using WiOracle = std::function<bool(bool truth, Rng& rng)>;

// time, event, state, energy spent in that step
using TraceSink = std::function<void(double, const std::string&, const std::string&, double)>;

struct SimConfig {
    WakeupSystemParams sys;
    PowerProfile profile;
    TrafficParams traffic;
    double duration = 1000.0;
    std::uint64_t seed = 1;
    DetectionMode detection_mode = DetectionMode::FixedRates;
    WiOracle oracle;
    ServiceModel service = ServiceModel::CallHolding;
    double forced_visit = -1.0; // active time of an N_w forced wake-up, < 0 means T_ON

    void validate() const;
};

struct SimStats {
    double avg_power = 0.0;              // W
    double avg_buffer_delay = 0.0;       // s, oldest buffered packet per wake-up with data
    double avg_packet_delay = 0.0;       // s, over all packets
    double avg_buffered_packet_delay = 0.0;
    double duration = 0.0;               // simulated time, s
    double energy = 0.0;                 // J

    std::vector<std::string> state_names;
    std::vector<double> occupancy;       // fraction of time per state
    std::vector<double> state_energy;    // J per state

    std::int64_t cycles = 0;             // WRx monitoring occasions
    std::int64_t idle_cycles = 0;        // occasions with nothing buffered
    std::int64_t busy_cycles = 0;
    std::int64_t wakeups = 0;
    std::int64_t false_alarms = 0;
    std::int64_t misdetections = 0;
    std::int64_t forced_wakeups = 0;
    std::int64_t packets = 0;
    std::int64_t buffered_packets = 0;
    std::int64_t episodes = 0;

    double false_alarm_rate() const { return idle_cycles ? double(false_alarms) / double(idle_cycles) : 0.0; }
    double misdetection_rate() const { return busy_cycles ? double(misdetections) / double(busy_cycles) : 0.0; }
    double occupancy_of(const std::string& state) const;
};

SimStats simulate_nm(const SimConfig& cfg, const TraceSink& trace = {});
SimStats simulate_nm(const SimConfig& cfg, const ArrivalTimeline& timeline, const TraceSink& trace = {});

struct DrxConfig {
    double short_cycle = 20e-3;
    int long_factor = 4;
    double short_drx_timer = 16e-3;
    double on_duration = 1e-3;
    double inactivity_timer = 12e-3;
    double PW_active = 0.850;
    double PW_short_sleep = 0.395;
    double PW_long_sleep = 0.0098;
    double short_t_su = 1e-3;
    double short_t_pd = 1e-3;
    double long_t_su = 15e-3;
    double long_t_sync = 10e-3;
    double long_t_pd = 10e-3;
    ServiceModel service = ServiceModel::CallHolding;

    double long_cycle() const { return long_factor * short_cycle; }
    void validate() const;
};

SimStats simulate_drx(const DrxConfig& drx, const TrafficParams& traffic, double duration, std::uint64_t seed,
                      const TraceSink& trace = {});
SimStats simulate_drx(const DrxConfig& drx, const ArrivalTimeline& timeline, const TraceSink& trace = {});

// csv writer for TraceSink
TraceSink csv_trace(std::ostream& os);

} // namespace wakeup
