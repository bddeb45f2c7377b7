#include <doctest.h>

#include <numeric>
#include <sstream>

#include "wakeup/sysim.hpp"

using namespace wakeup;

namespace {

SimConfig base(double duration = 300.0, std::uint64_t seed = 5)
{
    SimConfig c;
    c.duration = duration;
    c.seed = seed;
    return c;
}

void check_accounting(const SimStats& s)
{
    const double occ = std::accumulate(s.occupancy.begin(), s.occupancy.end(), 0.0);
    CHECK(occ == doctest::Approx(1.0).epsilon(1e-9));
    const double e = std::accumulate(s.state_energy.begin(), s.state_energy.end(), 0.0);
    CHECK(e == doctest::Approx(s.energy).epsilon(1e-9));
    CHECK(s.avg_power == doctest::Approx(s.energy / s.duration).epsilon(1e-12));
}

} // namespace

TEST_SUITE("sysim")
{
    TEST_CASE("energy and time add up")
    {
        const SimStats s = simulate_nm(base());
        check_accounting(s);
        CHECK(s.packets > 0);
        CHECK(s.cycles == s.idle_cycles + s.busy_cycles);
        CHECK(s.avg_buffer_delay > 0);
    }

    TEST_CASE("same seed, same run")
    {
        const SimStats a = simulate_nm(base()), b = simulate_nm(base());
        CHECK(a.energy == b.energy);
        CHECK(a.avg_buffer_delay == b.avg_buffer_delay);
        CHECK(simulate_nm(base(300.0, 6)).energy != a.energy);
    }

    TEST_CASE("detection error rates follow the configured probabilities")
    {
        SimConfig c = base(1000.0);
        c.sys.P_fa = 0.1;
        c.sys.P_md = 0.05;
        const SimStats s = simulate_nm(c);
        CHECK(s.false_alarm_rate() == doctest::Approx(0.1).epsilon(0.05));
        CHECK(s.misdetection_rate() == doctest::Approx(0.05).epsilon(0.3));
    }

    TEST_CASE("perfect detection without traffic only wakes on the timer")
    {
        SimConfig c = base(120.0);
        c.sys.P_fa = 0.0;
        c.sys.P_md = 0.0;
        c.traffic.lambda_s = 1e-9;
        const SimStats s = simulate_nm(c);
        CHECK(s.packets == 0);
        CHECK(s.false_alarms == 0);
        CHECK(s.forced_wakeups > 0);
        CHECK(s.wakeups == 0);
        // one forced wake per N_w sleeping cycles
        CHECK(double(s.cycles) / s.forced_wakeups == doctest::Approx(60.0).epsilon(0.05));
        check_accounting(s);
    }

    TEST_CASE("shared timeline and trace output")
    {
        const SimConfig c = base(30.0);
        const ArrivalTimeline tl = generate_timeline(c.traffic, c.duration, derive_seed(c.seed, 1, 0));
        const SimStats a = simulate_nm(c), b = simulate_nm(c, tl);
        CHECK(a.energy == b.energy);

        std::ostringstream os;
        const SimStats t = simulate_nm(c, tl, csv_trace(os));
        CHECK(t.energy == a.energy);
        const std::string out = os.str();
        CHECK(out.rfind("time,event,state,energy\n", 0) == 0);
        CHECK(out.find("start_up") != std::string::npos);
    }

    TEST_CASE("coupled detection mode uses the oracle")
    {
        SimConfig c = base(200.0);
        c.detection_mode = DetectionMode::CoupledPhy;
        c.oracle = [](bool truth, Rng&) { return truth; };
        const SimStats s = simulate_nm(c);
        CHECK(s.false_alarms == 0);
        CHECK(s.misdetections == 0);
        c.oracle = nullptr;
        CHECK_THROWS_AS(simulate_nm(c), InvalidParameters);
    }

    TEST_CASE("longer cycles trade power for delay")
    {
        SimConfig a = base(1000.0), b = base(1000.0);
        b.sys.t_c = 50e-3;
        const SimStats sa = simulate_nm(a), sb = simulate_nm(b);
        CHECK(sb.avg_power < sa.avg_power);
        CHECK(sb.avg_buffer_delay > sa.avg_buffer_delay);
    }

    TEST_CASE("service models")
    {
        CHECK(service_model_from_string("packet_inactivity") == ServiceModel::PacketInactivity);
        CHECK(to_string(ServiceModel::CallHolding) == "call_holding");
        SimConfig c = base(500.0);
        c.service = ServiceModel::PacketInactivity;
        const SimStats p = simulate_nm(c);
        check_accounting(p);
        CHECK(p.avg_power < simulate_nm(base(500.0)).avg_power);
    }

    TEST_CASE("drx baseline")
    {
        DrxConfig d;
        const SimStats s = simulate_drx(d, TrafficParams{}, 500.0, 3);
        check_accounting(s);
        CHECK(s.packets > 0);
        CHECK(s.occupancy_of("sync") > 0);
        DrxConfig slow = d;
        slow.short_cycle = 80e-3;
        const SimStats t = simulate_drx(slow, TrafficParams{}, 500.0, 3);
        CHECK(t.avg_power < s.avg_power);
        CHECK(t.avg_buffer_delay > s.avg_buffer_delay);
        d.long_factor = 0;
        CHECK_THROWS_AS(d.validate(), InvalidParameters);
    }
}
