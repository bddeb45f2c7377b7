#include "wakeup/sysim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace wakeup {

std::string to_string(ServiceModel s)
{
    return s == ServiceModel::CallHolding ? "call_holding" : "packet_inactivity";
}

ServiceModel service_model_from_string(const std::string& s)
{
    if (s == "call_holding")
        return ServiceModel::CallHolding;
    if (s == "packet_inactivity")
        return ServiceModel::PacketInactivity;
    throw InvalidParameters("unknown service model: " + s);
}

void SimConfig::validate() const
{
    sys.validate(profile);
    traffic.validate();
    require(duration >= 0, "duration must be non-negative");
    require(detection_mode == DetectionMode::FixedRates || static_cast<bool>(oracle),
            "coupled PHY mode needs a WI oracle");
}

double SimStats::occupancy_of(const std::string& state) const
{
    for (std::size_t i = 0; i < state_names.size(); ++i)
        if (state_names[i] == state)
            return occupancy[i];
    throw InvalidParameters("unknown state: " + state);
}

void DrxConfig::validate() const
{
    require(short_cycle > 0, "short cycle must be positive");
    require(long_factor >= 1, "long factor must be at least 1");
    require(on_duration > 0 && on_duration < short_cycle, "on-duration must be shorter than the short cycle");
    require(short_drx_timer >= 0 && inactivity_timer >= 0, "timers must be non-negative");
    require(short_t_su >= 0 && short_t_pd >= 0 && long_t_su >= 0 && long_t_sync >= 0 && long_t_pd >= 0,
            "transition times must be non-negative");
    require(PW_active >= 0 && PW_short_sleep >= 0 && PW_long_sleep >= 0, "powers must be non-negative");
}

TraceSink csv_trace(std::ostream& os)
{
    os << "time,event,state,energy\n";
    return [&os](double t, const std::string& ev, const std::string& st, double e) {
        os << std::setprecision(17) << t << ',' << ev << ',' << st << ',' << e << '\n';
    };
}

namespace {

// time/energy bookkeeping per state
class Meter {
public:
    Meter(std::vector<std::string> names, const TraceSink& trace)
        : names_(std::move(names)), time_(names_.size(), 0.0), energy_(names_.size(), 0.0), trace_(trace)
    {
    }

    // spend dt in state at constant power
    void spend(double& t, std::size_t state, double dt, double power, const char* event)
    {
        if (dt <= 0)
            return;
        const double e = power * dt;
        time_[state] += dt;
        energy_[state] += e;
        if (trace_)
            trace_(t, event, names_[state], e);
        t += dt;
    }

    // energy without duration (zero-length transition)
    void lump(double t, std::size_t state, double energy, const char* event)
    {
        if (energy <= 0)
            return;
        energy_[state] += energy;
        if (trace_)
            trace_(t, event, names_[state], energy);
    }

    void fill(SimStats& s) const
    {
        s.state_names = names_;
        s.state_energy = energy_;
        double T = 0, E = 0;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            T += time_[i];
            E += energy_[i];
        }
        s.duration = T;
        s.energy = E;
        s.avg_power = T > 0 ? E / T : 0.0;
        s.occupancy.assign(names_.size(), 0.0);
        if (T > 0)
            for (std::size_t i = 0; i < names_.size(); ++i)
                s.occupancy[i] = time_[i] / T;
    }

private:
    std::vector<std::string> names_;
    std::vector<double> time_;
    std::vector<double> energy_;
    const TraceSink& trace_;
};

// packet buffering and delivery shared by both simulators
class PacketQueue {
public:
    PacketQueue(const ArrivalTimeline& tl, ServiceModel service, double T_I)
        : p_(tl.packets), service_(service), T_I_(T_I)
    {
    }

    bool pending() const { return next_ < p_.size(); }
    double next_arrival() const
    {
        return pending() ? p_[next_].time : std::numeric_limits<double>::infinity();
    }
    bool buffered() const { return !buf_.empty(); }
    bool done() const { return !pending() && buf_.empty(); }

    // arrivals before `until` while the device cannot receive
    void absorb(double until)
    {
        while (next_ < p_.size() && p_[next_].time < until)
            buf_.push_back(next_++);
    }

    // hand over everything buffered at `now`; returns the new inactivity deadline
    double deliver(double now)
    {
        double deadline = now + T_I_;
        if (buf_.empty())
            return deadline;
        ++episodes_;
        episode_delay_ += now - p_[buf_.front()].time;
        for (std::size_t i : buf_) {
            const double d = now - p_[i].time;
            delay_sum_ += d;
            buffered_delay_sum_ += d;
            ++delivered_;
            ++buffered_count_;
            deadline = std::max(deadline, hold_until(i, now));
        }
        buf_.clear();
        return deadline;
    }

    // serve the next arrival while active
    double serve_next(double deadline)
    {
        const std::size_t i = next_++;
        ++delivered_;
        return std::max(deadline, hold_until(i, p_[i].time));
    }

    void fill(SimStats& s) const
    {
        s.packets = static_cast<std::int64_t>(delivered_);
        s.buffered_packets = static_cast<std::int64_t>(buffered_count_);
        s.episodes = static_cast<std::int64_t>(episodes_);
        s.avg_packet_delay = delivered_ ? delay_sum_ / double(delivered_) : 0.0;
        s.avg_buffered_packet_delay = buffered_count_ ? buffered_delay_sum_ / double(buffered_count_) : 0.0;
        s.avg_buffer_delay = episodes_ ? episode_delay_ / double(episodes_) : 0.0;
    }

private:
    double hold_until(std::size_t i, double now) const
    {
        if (service_ == ServiceModel::CallHolding)
            return std::max(now, p_[i].call_end) + T_I_;
        return now + T_I_;
    }

    const std::vector<PacketArrival>& p_;
    ServiceModel service_;
    double T_I_;
    std::size_t next_ = 0;
    std::vector<std::size_t> buf_;
    std::size_t delivered_ = 0, buffered_count_ = 0, episodes_ = 0;
    double delay_sum_ = 0, buffered_delay_sum_ = 0, episode_delay_ = 0;
};

enum NmState : std::size_t { S0, S1, S2, S3, OFFSET, STARTUP, POWERDOWN };

double next_boundary(double t, double period)
{
    const double k = std::ceil(t / period - 1e-9);
    return std::max(0.0, k) * period;
}

} // namespace

SimStats simulate_nm(const SimConfig& cfg, const TraceSink& trace)
{
    cfg.validate();
    const ArrivalTimeline tl = generate_timeline(cfg.traffic, cfg.duration, derive_seed(cfg.seed, 1, 0));
    return simulate_nm(cfg, tl, trace);
}

SimStats simulate_nm(const SimConfig& cfg, const ArrivalTimeline& tl, const TraceSink& trace)
{
    cfg.validate();
    const auto& sys = cfg.sys;
    const auto& pr = cfg.profile;
    const int Nw = sys.wake_cycles();
    const double forced_on = cfg.forced_visit < 0 ? sys.T_ON : cfg.forced_visit;
    const double p_su = pr.t_su > 0 ? pr.e_su / pr.t_su : 0.0;
    const double p_pd = pr.t_pd > 0 ? pr.e_pd / pr.t_pd : 0.0;

    Meter meter({"S0", "S1", "S2", "S3", "offset", "start_up", "power_down"}, trace);
    PacketQueue q(tl, cfg.service, sys.T_I);
    Rng rng = make_rng(derive_seed(cfg.seed, 2, 0));
    SimStats st;

    double t = 0.0;
    int empty_run = 0;
    enum class Next { Monitor, ActiveOn, PowerDown } next = Next::Monitor;
    double on_window = sys.T_ON;
    // transition energy spread evenly over its duration
    auto lump = [&](std::size_t state, double dt, double power, double energy, const char* ev) {
        if (dt > 0) {
            q.absorb(t + dt);
            meter.spend(t, state, dt, power, ev);
        } else {
            meter.lump(t, state, energy, ev);
        }
    };

    while (true) {
        if (next == Next::Monitor) {
            if (t >= cfg.duration && q.done())
                break;
            // S2 at the cycle boundary t
            q.absorb(t);
            const bool truth = q.buffered();
            q.absorb(t + sys.t_on);
            meter.spend(t, S2, sys.t_on, pr.PW[2], "monitor");
            ++st.cycles;
            bool wi;
            if (cfg.detection_mode == DetectionMode::CoupledPhy)
                wi = cfg.oracle(truth, rng);
            else
                wi = truth ? uniform01(rng) >= sys.P_md : uniform01(rng) < sys.P_fa;
            if (truth) {
                ++st.busy_cycles;
                if (!wi)
                    ++st.misdetections;
            } else {
                ++st.idle_cycles;
                if (wi)
                    ++st.false_alarms;
            }
            if (wi) {
                ++st.wakeups;
                const double off = sys.t_of - pr.t_su;
                q.absorb(t + off);
                meter.spend(t, OFFSET, off, pr.PW[3], "offset");
                lump(STARTUP, pr.t_su, p_su, pr.e_su, "start_up");
                on_window = sys.T_ON;
                next = Next::ActiveOn;
                continue;
            }
            ++empty_run;
            const double nb = t + sys.t_sl();
            q.absorb(nb);
            meter.spend(t, S3, nb - t, pr.PW[3], "sleep");
            t = nb; // keep the grid exact
            if (empty_run >= Nw) {
                ++st.forced_wakeups;
                lump(STARTUP, pr.t_su, p_su, pr.e_su, "forced_start_up");
                on_window = forced_on;
                next = Next::ActiveOn;
            }
            continue;
        }

        if (next == Next::ActiveOn) {
            empty_run = 0;
            double deadline;
            if (q.buffered()) {
                deadline = q.deliver(t);
            } else {
                const double ta = q.next_arrival();
                if (ta < t + on_window) {
                    meter.spend(t, S0, ta - t, pr.PW[0], "active_on");
                    t = ta;
                    deadline = q.serve_next(-1.0);
                } else {
                    meter.spend(t, S0, on_window, pr.PW[0], "active_on");
                    next = Next::PowerDown;
                    continue;
                }
            }
            // S1 until the inactivity deadline passes without arrivals
            while (q.next_arrival() <= deadline) {
                const double ta = q.next_arrival();
                meter.spend(t, S1, ta - t, pr.PW[1], "active");
                t = ta;
                deadline = q.serve_next(deadline);
            }
            meter.spend(t, S1, deadline - t, pr.PW[1], "active");
            t = deadline;
            next = Next::PowerDown;
            continue;
        }

        // power-down, then sleep to the next WRx occasion
        lump(POWERDOWN, pr.t_pd, p_pd, pr.e_pd, "power_down");
        const double nb = next_boundary(t, sys.t_c);
        q.absorb(nb);
        meter.spend(t, S3, nb - t, pr.PW[3], "sleep");
        t = nb;
        next = Next::Monitor;
    }

    meter.fill(st);
    q.fill(st);
    return st;
}

namespace {

enum DrxState : std::size_t { ACTIVE, ON_DURATION, LIGHT_SLEEP, DEEP_SLEEP, D_STARTUP, D_SYNC, D_POWERDOWN };

} // namespace

SimStats simulate_drx(const DrxConfig& drx, const TrafficParams& traffic, double duration, std::uint64_t seed,
                      const TraceSink& trace)
{
    const ArrivalTimeline tl = generate_timeline(traffic, duration, derive_seed(seed, 1, 0));
    return simulate_drx(drx, tl, trace);
}

SimStats simulate_drx(const DrxConfig& drx, const ArrivalTimeline& tl, const TraceSink& trace)
{
    drx.validate();
    const double Ts = drx.short_cycle;
    const double Tl = drx.long_cycle();
    const double ramp_short = 0.5 * (drx.PW_active + drx.PW_short_sleep);
    const double ramp_long = 0.5 * (drx.PW_active + drx.PW_long_sleep);
    const double long_overhead = drx.long_t_pd + drx.long_t_su + drx.long_t_sync;
    const double short_overhead = drx.short_t_pd + drx.short_t_su;

    Meter meter({"active", "on_duration", "light_sleep", "deep_sleep", "start_up", "sync", "power_down"}, trace);
    PacketQueue q(tl, drx.service, drx.inactivity_timer);
    SimStats st;

    double t = 0.0;
    double short_until = -1.0; // no recent activity: start in long cycles
    const double horizon = tl.duration;

    auto active_period = [&](double deadline) {
        while (q.next_arrival() <= deadline) {
            const double ta = q.next_arrival();
            meter.spend(t, ACTIVE, ta - t, drx.PW_active, "active");
            t = ta;
            deadline = q.serve_next(deadline);
        }
        meter.spend(t, ACTIVE, deadline - t, drx.PW_active, "active");
        t = deadline;
        short_until = t + drx.short_drx_timer;
    };

    while (!(t >= horizon && q.done())) {
        // next on-duration: short grid while the short-cycle timer runs, long grid after
        double o = next_boundary(t, Ts);
        const bool short_phase = o < short_until;
        if (short_phase) {
            if (o - t >= short_overhead) {
                const double sleep = o - t - short_overhead;
                q.absorb(o);
                meter.spend(t, D_POWERDOWN, drx.short_t_pd, ramp_short, "power_down");
                meter.spend(t, LIGHT_SLEEP, sleep, drx.PW_short_sleep, "light_sleep");
                meter.spend(t, D_STARTUP, drx.short_t_su, ramp_short, "start_up");
            } else {
                q.absorb(o);
                meter.spend(t, ACTIVE, o - t, drx.PW_active, "awake_gap");
            }
        } else {
            o = next_boundary(t, Tl);
            while (o - t < long_overhead)
                o += Tl;
            const double sleep = o - t - long_overhead;
            q.absorb(o);
            meter.spend(t, D_POWERDOWN, drx.long_t_pd, ramp_long, "power_down");
            meter.spend(t, DEEP_SLEEP, sleep, drx.PW_long_sleep, "deep_sleep");
            meter.spend(t, D_STARTUP, drx.long_t_su, ramp_long, "start_up");
            meter.spend(t, D_SYNC, drx.long_t_sync, drx.PW_active, "sync");
        }
        t = o;
        ++st.cycles;
        // on-duration: PDCCH tells about anything buffered
        if (q.buffered()) {
            ++st.busy_cycles;
            ++st.wakeups;
            active_period(q.deliver(t));
            continue;
        }
        ++st.idle_cycles;
        const double ta = q.next_arrival();
        if (ta < t + drx.on_duration) {
            meter.spend(t, ON_DURATION, ta - t, drx.PW_active, "on_duration");
            t = ta;
            ++st.wakeups;
            active_period(q.serve_next(-1.0));
            continue;
        }
        meter.spend(t, ON_DURATION, drx.on_duration, drx.PW_active, "on_duration");
    }

    meter.fill(st);
    q.fill(st);
    return st;
}

} // namespace wakeup
