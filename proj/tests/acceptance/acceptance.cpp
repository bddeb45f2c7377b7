#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wakeup/experiments.hpp"
#include "wakeup/fft.hpp"

using namespace wakeup;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

int g_scale = 1; // --quick divides sample sizes by 10
int g_failed = 0;

std::int64_t sized(std::int64_t n)
{
    return std::max<std::int64_t>(1, n / g_scale);
}

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...)
{
    va_list ap;
    va_start(ap, fmt);
    std::printf("    ");
    std::vprintf(fmt, ap);
    std::printf("\n");
    va_end(ap);
    std::fflush(stdout);
}

void verdict(int id, bool ok, const std::string& what, double seconds)
{
    if (!ok)
        ++g_failed;
    std::printf("%s criterion %d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), seconds);
    std::fflush(stdout);
}

void run(int id, const std::string& what, const std::function<bool()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body();
    } catch (const std::exception& e) {
        detail("exception: %s", e.what());
    }
    verdict(id, ok, what, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

ExperimentConfig defaults()
{
    ExperimentConfig c = load_config(WAKEUP_DEFAULT_CONFIG);
    c.run.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    c.finalize();
    return c;
}

bool zc_suite()
{
    const PdwchGroupConfig g;
    const auto z = gen_root_zc(g.root, g.K);
    double side = 0;
    for (int lag = 1; lag < g.K; ++lag) {
        cplx s = 0;
        for (int n = 0; n < g.K; ++n)
            s += z.time_samples[n] * std::conj(z.time_samples[(n + lag) % g.K]);
        side = std::max(side, std::abs(s));
    }
    cplx peak0 = z.time_samples.squaredNorm();
    const bool auto_ok = std::abs(std::abs(peak0) - g.K) < 1e-9 && side <= 1e-9 * g.K;
    detail("autocorrelation peak %.12f, worst side lobe %.3e", std::abs(peak0), side);

    double leak = 0;
    bool windows_ok = true;
    for (int m = 0; m <= g.M; ++m) {
        const RVec psi = compute_pdp(shift_spectrum(z, g.shift(m), g.convention), z.spectrum, 1);
        const double own = window_energy(psi, m, 1, g.K_cs);
        for (int w = 0; w <= g.M; ++w)
            if (w != m)
                leak = std::max(leak, window_energy(psi, w, 1, g.K_cs) / own);
        Eigen::Index at = 0;
        psi.maxCoeff(&at);
        windows_ok = windows_ok && at / g.K_cs == m;
    }
    detail("8 shifts, worst cross-window leakage %.3e, peaks in own window: %s", leak, windows_ok ? "yes" : "no");
    return auto_ok && windows_ok && leak < 1e-9;
}

bool threshold_calibration(const ExperimentConfig& cfg)
{
    const std::int64_t n = sized(100000);
    bool ok = true;
    std::uint64_t point = 100;
    for (double target : {0.05, 0.1}) {
        for (double snr : {0.0, -4.0}) {
            const LinkPointStats s = measure_link_point(cfg, snr, target, n, 0, point++);
            const double sigma = std::sqrt(target * (1 - target) / double(n));
            const bool hit = std::abs(s.p_fa - target) <= 3 * sigma;
            ok = ok && hit;
            detail("target %.2f snr %+.0f dB: measured %.4f over %lld trials, 3 sigma %.4f %s", target, snr, s.p_fa,
                   static_cast<long long>(n), 3 * sigma, hit ? "ok" : "off");
        }
    }
    return ok;
}

bool operating_points(const ExperimentConfig& cfg)
{
    struct Point {
        double pfa, pmd, snr;
    };
    const std::int64_t n = sized(10000);
    bool ok = true;
    std::uint64_t point = 200;
    for (const Point& p : {Point{0.05, 0.01, -2.6}, Point{0.1, 0.01, -3.0}, Point{0.1, 0.05, -3.8},
                           Point{0.05, 0.05, -3.5}}) {
        const LinkPointStats s = measure_link_point(cfg, p.snr, p.pfa, 0, n, point++);
        const bool hit = std::abs(s.p_md - p.pmd) <= 0.02;
        ok = ok && hit;
        detail("P_fa %.2f at %.1f dB: P_md %.4f (expected %.2f +/- 0.02) %s", p.pfa, p.snr, s.p_md, p.pmd,
               hit ? "ok" : "off");
    }

    ExperimentConfig rc = cfg;
    rc.run.trials = static_cast<int>(n);
    rc.grids.roc_snr_db = {-10.0, -7.0, -4.0};
    const Table roc = run_roc(rc);
    const std::size_t per = rc.grids.roc_pfa_nominal.size();
    bool ordered = true;
    for (std::size_t j = 0; j < per; ++j) {
        const double a = roc.num(j, "p_md"), b = roc.num(per + j, "p_md"), c = roc.num(2 * per + j, "p_md");
        const bool mono = a > b && b > c;
        ordered = ordered && mono;
        detail("roc Gamma_r %.2f: P_md %.4f > %.4f > %.4f across -10/-7/-4 dB %s", roc.num(j, "gamma_r"), a, b, c,
               mono ? "ok" : "not strict");
    }
    return ok && ordered;
}

bool symbol_detection(const ExperimentConfig& cfg)
{
    const std::int64_t n = sized(10000);
    const LinkPointStats s = measure_link_point(cfg, -10.0, cfg.detector.pfa_target, 0, n, 300);
    detail("symbol index correct in %.4f of %lld trials at -10 dB (need 0.999)", s.symbol_detection,
           static_cast<long long>(n));
    return s.symbol_detection >= 0.999;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

bool semi_markov_checks()
{
    Rng rng = make_rng(12345);
    auto U = [&](double a, double b) { return a + (b - a) * uniform01(rng); };
    double worst_ss = 0, worst_int = 0;
    const int draws = static_cast<int>(sized(1000));
    for (int i = 0; i < draws; ++i) {
        WakeupSystemParams sys;
        sys.t_c = U(2e-3, 0.3);
        sys.t_on = U(0.05, 0.5) * sys.t_c;
        sys.T_ON = U(0, 0.05);
        sys.T_I = U(0, 0.2);
        sys.t_of = U(0.012, 0.05);
        sys.P_fa = U(0, 0.3);
        sys.P_md = U(0, 0.3);
        TrafficParams tr;
        tr.lambda_s = U(1e-3, 1);
        tr.lambda_pc = U(0.1, 50);
        tr.lambda_p = U(10, 1000);
        tr.eta_s = U(1, 20);
        tr.eta_pc = U(1, 100);
        const TransitionMatrix P = transition_probs(sys, tr);
        worst_ss = std::max(worst_ss, (steady_state_closed_form(P) - steady_state_balance(P)).cwiseAbs().maxCoeff());

        if (i % 10 == 0) {
            const double pos = tr.p_os(), pns = tr.p_ns();
            const auto f = [&](double t) {
                return pos * tr.lambda_pc * std::exp(-tr.lambda_pc * t) + pns * tr.lambda_s * std::exp(-tr.lambda_s * t);
            };
            const auto tail_mean = [&](double T) {
                return simpson([&](double t) { return t * f(t); }, 0, T) + T * (1 - simpson(f, 0, T));
            };
            // holding time of S0 and the inactivity mean
            const Eigen::Vector4d w = holding_times(sys, tr);
            worst_int = std::max(worst_int, std::abs(w[0] - tail_mean(sys.T_ON)));
            worst_int = std::max(worst_int, std::abs(inactivity_mean(sys, tr) - tail_mean(sys.T_I)));
            // delay integrals
            const auto weight = [&](double c, double T) {
                return simpson([&](double t) { return (c - t) * f(t); }, 0, T);
            };
            worst_int = std::max(worst_int, std::abs(delay_d2(sys, tr) - weight(sys.t_of, sys.t_of)));
            const int Nw = sys.wake_cycles();
            const int u = 1 + i % Nw;
            const int last = Nw - u + 1;
            double q = 0;
            for (int k = 1; k <= last; ++k)
                q += (1 - sys.P_md) * std::pow(sys.P_md, k - 1) * weight(k * sys.t_c + sys.t_of, sys.t_sl());
            q += std::pow(sys.P_md, last) * weight(last * sys.t_c + sys.t_of, sys.t_sl());
            worst_int = std::max(worst_int, std::abs(delay_d1(sys, tr, u) - q));
        }
    }
    detail("%d draws: closed form vs balance solve max diff %.3e (limit 1e-12)", draws, worst_ss);
    detail("integrals vs quadrature max diff %.3e (limit 1e-9)", worst_int);
    return worst_ss <= 1e-12 && worst_int <= 1e-9;
}

bool analytic_agreement(const ExperimentConfig& base)
{
    ExperimentConfig cfg = base;
    cfg.run.replications = static_cast<int>(std::max<std::int64_t>(2, sized(20)));
    cfg.run.duration = 1000.0;
    bool ok = true;
    for (double tc : {10e-3, 50e-3, 100e-3, 250e-3}) {
        WakeupSystemParams sys = cfg.sys;
        sys.t_c = tc;
        sys.P_fa = 0.1;
        sys.P_md = 0.01;
        const SemiMarkovSolution a = solve_semi_markov(sys, cfg.traffic, cfg.profile);
        const SimSummary s = simulate_nm_replicated(cfg, sys, 0);
        const double r = std::sqrt(double(s.replications));
        const double ep = s.power_mean / a.avg_power - 1, ed = s.delay_mean / a.avg_delay - 1;
        const bool pw_ok = std::abs(ep) <= 0.10 && s.power_mean >= a.avg_power - 3 * s.power_sd / r;
        const bool d_ok = std::abs(ed) <= 0.10 && s.delay_mean >= a.avg_delay - 3 * s.delay_sd / r;
        ok = ok && pw_ok && d_ok;
        detail("t_c %3.0f ms: power sim %.4f W vs model %.4f W (%+.1f%%) %s; delay sim %.2f ms vs model %.2f ms "
               "(%+.1f%%) %s [per-arrival model delay %.2f ms]",
               tc * 1e3, s.power_mean, a.avg_power, 100 * ep, pw_ok ? "ok" : "off", s.delay_mean * 1e3,
               a.avg_delay * 1e3, 100 * ed, d_ok ? "ok" : "off", a.avg_delay_conditional * 1e3);
    }
    return ok;
}

bool drx_comparison(const ExperimentConfig& base)
{
    ExperimentConfig cfg = base;
    cfg.run.replications = static_cast<int>(std::max<std::int64_t>(2, sized(20)));
    json summary;
    const Table t = run_compare_drx(cfg, &summary);
    for (std::size_t i = 0; i < t.rows(); ++i)
        detail("%-3s cycle %5.0f ms: power %.1f mW, delay %.1f ms", t.str(i, "scheme").c_str(),
               t.num(i, "cycle") * 1e3, t.num(i, "power_mean") * 1e3, t.num(i, "delay_mean") * 1e3);
    const double nm = summary["nm_power"], drx = summary["drx_power"], saving = summary["saving"];
    const bool nm_ok = std::abs(nm / 0.100 - 1) <= 0.15;
    const bool drx_ok = std::abs(drx / 0.140 - 1) <= 0.15;
    const bool save_ok = saving >= 0.20;
    detail("at %.0f ms delay (lambda_p %.0f/s): NM %.1f mW %s, DRX %.1f mW%s %s, saving %.0f%% %s",
           cfg.grids.target_delay * 1e3, cfg.traffic.lambda_p, nm * 1e3, nm_ok ? "ok" : "off", drx * 1e3,
           summary["drx_extrapolated"].get<bool>() ? " (extrapolated)" : "", drx_ok ? "ok" : "off", 100 * saving,
           save_ok ? "ok" : "off");
    return nm_ok && drx_ok && save_ok;
}

bool trends(const ExperimentConfig& base)
{
    ExperimentConfig cfg = base;
    cfg.run.replications = static_cast<int>(std::max<std::int64_t>(2, sized(20)));
    cfg.grids.t_c = {10e-3, 50e-3, 100e-3, 250e-3};
    cfg.grids.error_pairs = {{0.1, 0.01}};
    bool ok = true;

    struct Rule {
        SweepParam p;
        int power_dir; // +1 increases, -1 decreases
        int delay_dir;
        bool delay_weak;
    };
    for (const Rule& r : {Rule{SweepParam::CycleLength, -1, +1, false}, Rule{SweepParam::OnTimer, +1, -1, true},
                          Rule{SweepParam::InactivityTimer, +1, -1, false}}) {
        const Table t = run_sweep(cfg, r.p);
        for (const char* src : {"analytic", "sim"}) {
            const std::string pc = std::string(src) + (src[0] == 'a' ? "_power" : "_power_mean");
            const std::string dc = std::string(src) + (src[0] == 'a' ? "_delay" : "_delay_mean");
            bool pw_ok = true, d_ok = true;
            std::ostringstream os;
            for (std::size_t i = 0; i < t.rows(); ++i) {
                os << " " << format_number(t.num(i, "value") * 1e3) << "ms:" << t.num(i, pc) * 1e3 << "mW/"
                   << t.num(i, dc) * 1e3 << "ms";
                if (i == 0)
                    continue;
                const double dp = (t.num(i, pc) - t.num(i - 1, pc)) * r.power_dir;
                const double dd = (t.num(i, dc) - t.num(i - 1, dc)) * r.delay_dir;
                pw_ok = pw_ok && dp > 0;
                d_ok = d_ok && (r.delay_weak ? dd >= 0 : dd > 0);
            }
            ok = ok && pw_ok && d_ok;
            detail("%-3s %-8s power %s, delay %s:%s", to_string(r.p).c_str(), src, pw_ok ? "ok" : "wrong",
                   d_ok ? "ok" : "wrong", os.str().c_str());
        }
    }
    return ok;
}

bool determinism(const ExperimentConfig& base)
{
    ExperimentConfig cfg = base;
    cfg.run.trials = 200;
    cfg.run.replications = 3;
    cfg.run.duration = 100.0;
    cfg.run.seed = 99;
    cfg.grids.pmd_snr_db = {-6.0, -3.0};
    cfg.grids.sync_snr_db = {-4.0, 4.0};
    const fs::path dir = fs::temp_directory_path() / "wakeup_acceptance";
    fs::create_directories(dir);
    bool ok = true;
    for (const auto& id : experiment_ids()) {
        for (OutputFormat f : {OutputFormat::Csv, OutputFormat::Json}) {
            const fs::path out = dir / (id + "." + to_string(f));
            run_and_write(id, cfg, out.string(), f);
            std::ifstream side(sidecar_path(out.string()));
            const json meta = json::parse(side);
            const fs::path again = dir / (id + ".replay." + to_string(f));
            replay(meta, again.string());
            std::ifstream a(out, std::ios::binary), b(again, std::ios::binary);
            std::ostringstream sa, sb;
            sa << a.rdbuf();
            sb << b.rdbuf();
            const bool same = sa.str() == sb.str() && !sa.str().empty();
            ok = ok && same;
            detail("%-12s %-4s %zu bytes, replay %s", id.c_str(), to_string(f).c_str(), sa.str().size(),
                   same ? "identical" : "DIFFERENT");
        }
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0)
            g_scale = 10;
    const ExperimentConfig cfg = defaults();
    std::printf("acceptance run, git %s, %d worker(s)%s\n", git_describe().c_str(), cfg.run.workers,
                g_scale > 1 ? ", quick sizes" : "");

    run(1, "ZC autocorrelation and shift separation", zc_suite);
    run(2, "false-alarm rate matches the target", [&] { return threshold_calibration(cfg); });
    run(3, "miss-detection operating points and ROC ordering", [&] { return operating_points(cfg); });
    run(4, "PDWCH symbol index detection at -10 dB", [&] { return symbol_detection(cfg); });
    run(5, "semi-Markov closed form and integrals", semi_markov_checks);
    run(6, "simulated vs analytic power and delay", [&] { return analytic_agreement(cfg); });
    run(7, "power saving against DRX at 25 ms", [&] { return drx_comparison(cfg); });
    run(8, "power and delay trends", [&] { return trends(cfg); });
    run(9, "replay from sidecar is bit identical", [&] { return determinism(cfg); });

    std::printf("%d of 9 criteria failed\n", g_failed);
    return g_failed ? 1 : 0;
}
