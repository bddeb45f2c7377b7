#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wakeup/common.hpp"

namespace wakeup {

struct TrafficParams {
    double lambda_s = 1.0 / 60.0; // sessions per s
    double lambda_pc = 1.0 / 0.2; // packet calls per s
    double lambda_p = 1.0 / 0.01; // packets per s within a call
    double eta_s = 6.0;           // mean calls per session
    double eta_pc = 50.0;         // mean packets per call

    double p_ns() const { return 1.0 / eta_s; }
    double p_os() const { return 1.0 - p_ns(); }
    void validate() const;
};

struct PacketArrival {
    double time = 0.0;
    std::int64_t session_id = 0;
    std::int64_t call_id = 0; // global call counter
    std::int64_t packet_id = 0; // global packet counter
    double call_end = 0.0; // arrival time of the last packet of this call
};

struct ArrivalTimeline {
    std::vector<PacketArrival> packets;
    double duration = 0.0;

    std::size_t size() const { return packets.size(); }
    bool empty() const { return packets.empty(); }
};

double exp_cdf(double t, double lambda);

ArrivalTimeline generate_timeline(const TrafficParams& params, double duration, std::uint64_t seed);

void write_timeline_csv(const ArrivalTimeline& tl, std::ostream& os);

} // namespace wakeup
