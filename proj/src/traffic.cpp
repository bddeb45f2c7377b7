#include "wakeup/traffic.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace wakeup {

void TrafficParams::validate() const
{
    require(lambda_s > 0 && lambda_pc > 0 && lambda_p > 0, "traffic rates must be positive");
    require(eta_s >= 1 && eta_pc >= 1, "mean counts must be at least 1");
}

double exp_cdf(double t, double lambda)
{
    if (t < 0)
        throw std::domain_error("exp_cdf: negative time");
    require(lambda > 0, "exp_cdf: rate must be positive");
    return -std::expm1(-lambda * t);
}

namespace {

// geometric on {1, 2, ...} with the given mean
std::int64_t draw_count(Rng& rng, double mean)
{
    if (mean <= 1.0)
        return 1;
    std::geometric_distribution<std::int64_t> g(1.0 / mean);
    return g(rng) + 1;
}

} // namespace

ArrivalTimeline generate_timeline(const TrafficParams& params, double duration, std::uint64_t seed)
{
    params.validate();
    ArrivalTimeline tl;
    tl.duration = duration;
    if (!(duration > 0))
        return tl;

    Rng rng = make_rng(seed);
    std::exponential_distribution<double> gap_s(params.lambda_s);
    std::exponential_distribution<double> gap_pc(params.lambda_pc);
    std::exponential_distribution<double> gap_p(params.lambda_p);

    double t = gap_s(rng);
    std::int64_t session = 0, call = 0, packet = 0;
    while (t < duration) {
        const std::int64_t calls = draw_count(rng, params.eta_s);
        for (std::int64_t c = 0; c < calls && t < duration; ++c) {
            if (c > 0)
                t += gap_pc(rng);
            const std::int64_t n = draw_count(rng, params.eta_pc);
            const std::size_t first = tl.packets.size();
            for (std::int64_t k = 0; k < n && t < duration; ++k) {
                if (k > 0)
                    t += gap_p(rng);
                if (t >= duration)
                    break;
                tl.packets.push_back({t, session, call, packet++, 0.0});
            }
            const double end = tl.packets.size() > first ? tl.packets.back().time : t;
            for (std::size_t i = first; i < tl.packets.size(); ++i)
                tl.packets[i].call_end = end;
            ++call;
        }
        ++session;
        t += gap_s(rng);
    }
    return tl;
}

void write_timeline_csv(const ArrivalTimeline& tl, std::ostream& os)
{
    os << "timestamp,session_id,call_id,packet_id\n";
    os << std::setprecision(17);
    for (const auto& p : tl.packets)
        os << p.time << ',' << p.session_id << ',' << p.call_id << ',' << p.packet_id << '\n';
}

} // namespace wakeup
