#include "wakeup/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#ifndef WAKEUP_GIT_DESCRIBE
#define WAKEUP_GIT_DESCRIBE "unknown"
#endif

namespace wakeup {

using json = nlohmann::json;

Table::Table(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns))
{
}

void Table::add(std::vector<Cell> row)
{
    require(row.size() == columns_.size(), "row width does not match the table columns");
    rows_.push_back(std::move(row));
}

std::size_t Table::index(const std::string& column) const
{
    auto it = std::find(columns_.begin(), columns_.end(), column);
    if (it == columns_.end())
        throw std::out_of_range("no column " + column);
    return static_cast<std::size_t>(it - columns_.begin());
}

const Table::Cell& Table::at(std::size_t row, const std::string& column) const
{
    return rows_.at(row).at(index(column));
}

double Table::num(std::size_t row, const std::string& column) const
{
    const Cell& c = at(row, column);
    if (auto d = std::get_if<double>(&c))
        return *d;
    if (auto i = std::get_if<std::int64_t>(&c))
        return static_cast<double>(*i);
    throw std::invalid_argument("column " + column + " is not numeric");
}

std::string Table::str(std::size_t row, const std::string& column) const
{
    const Cell& c = at(row, column);
    if (auto s = std::get_if<std::string>(&c))
        return *s;
    if (auto d = std::get_if<double>(&c))
        return format_number(*d);
    return std::to_string(std::get<std::int64_t>(c));
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void Table::write_csv(std::ostream& os) const
{
    for (std::size_t i = 0; i < columns_.size(); ++i)
        os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                os << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        os << format_number(v);
                    else
                        os << v;
                },
                row[i]);
        }
        os << '\n';
    }
}

json Table::to_json() const
{
    json rows = json::array();
    for (const auto& row : rows_) {
        json r = json::array();
        for (const auto& c : row)
            std::visit([&](const auto& v) { r.push_back(v); }, c);
        rows.push_back(std::move(r));
    }
    return {{"schema", schema_}, {"columns", columns_}, {"rows", std::move(rows)}};
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn)
{
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load())
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

double binomial_halfwidth(double p, std::int64_t n)
{
    if (n <= 0)
        return std::numeric_limits<double>::quiet_NaN();
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

namespace {

struct TrialOutcome {
    bool present = false;
    bool decided = false;
    bool symbol_ok = false;
    bool cfo_ok = false;
    double stat = 0.0;
    double cfo_err = 0.0;
    double timing_err = 0.0;
};

double mean(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v)
{
    if (v.size() < 2)
        return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

SimSummary summarize(const std::vector<SimStats>& runs)
{
    std::vector<double> pw, d, pd, fa, md;
    for (const auto& s : runs) {
        pw.push_back(s.avg_power);
        d.push_back(s.avg_buffer_delay);
        pd.push_back(s.avg_packet_delay);
        fa.push_back(s.false_alarm_rate());
        md.push_back(s.misdetection_rate());
    }
    SimSummary out;
    out.power_mean = mean(pw);
    out.power_sd = sample_sd(pw);
    out.delay_mean = mean(d);
    out.delay_sd = sample_sd(d);
    out.packet_delay_mean = mean(pd);
    out.false_alarm_rate = mean(fa);
    out.misdetection_rate = mean(md);
    out.replications = static_cast<int>(runs.size());
    return out;
}

struct NmJob {
    WakeupSystemParams sys;
    std::uint64_t point = 0;
};

// every job runs run.replications times; returns one summary per job
std::vector<SimSummary> run_nm_jobs(const ExperimentConfig& cfg, const std::vector<NmJob>& jobs)
{
    const auto reps = static_cast<std::size_t>(cfg.run.replications);
    std::vector<SimStats> stats(jobs.size() * reps);
    parallel_for(stats.size(), cfg.run.workers, [&](std::size_t i) {
        const NmJob& job = jobs[i / reps];
        SimConfig sc = cfg.sim(job.sys);
        sc.seed = derive_seed(cfg.run.seed, job.point, i % reps);
        stats[i] = simulate_nm(sc);
    });
    std::vector<SimSummary> out;
    for (std::size_t j = 0; j < jobs.size(); ++j)
        out.push_back(summarize({stats.begin() + static_cast<std::ptrdiff_t>(j * reps),
                                 stats.begin() + static_cast<std::ptrdiff_t>((j + 1) * reps)}));
    return out;
}

struct DrxJob {
    DrxConfig drx;
    std::uint64_t point = 0;
};

std::vector<SimSummary> run_drx_jobs(const ExperimentConfig& cfg, const std::vector<DrxJob>& jobs)
{
    const auto reps = static_cast<std::size_t>(cfg.run.replications);
    std::vector<SimStats> stats(jobs.size() * reps);
    parallel_for(stats.size(), cfg.run.workers, [&](std::size_t i) {
        const DrxJob& job = jobs[i / reps];
        stats[i] = simulate_drx(job.drx, cfg.traffic, cfg.run.duration,
                                derive_seed(cfg.run.seed, job.point, i % reps));
    });
    std::vector<SimSummary> out;
    for (std::size_t j = 0; j < jobs.size(); ++j)
        out.push_back(summarize({stats.begin() + static_cast<std::ptrdiff_t>(j * reps),
                                 stats.begin() + static_cast<std::ptrdiff_t>((j + 1) * reps)}));
    return out;
}

} // namespace

LinkPointStats measure_link_point(const ExperimentConfig& cfg, double snr_db, double pfa_target,
                                  std::int64_t n_absent, std::int64_t n_present, std::uint64_t point)
{
    require(n_absent >= 0 && n_present >= 0 && n_absent + n_present > 0, "trial counts must be positive");
    const LinkSimulator sim(cfg.link(snr_db, pfa_target));
    const int dev = cfg.device;
    std::vector<TrialOutcome> out(static_cast<std::size_t>(n_absent + n_present));
    parallel_for(out.size(), cfg.run.workers, [&](std::size_t i) {
        Rng rng = make_rng(derive_seed(cfg.run.seed, point, i));
        const bool present = static_cast<std::int64_t>(i) >= n_absent;
        const LinkTrial t = sim.run(present, rng);
        TrialOutcome& o = out[i];
        o.present = present;
        o.decided = t.result.indicator(dev);
        o.stat = t.result.statistic(dev);
        o.symbol_ok = t.symbol_ok();
        o.cfo_ok = t.cfo_ok();
        o.cfo_err = (t.result.eps_i_hat + t.result.eps_f_hat) - (t.truth.eps_i + t.truth.eps_f);
        o.timing_err = t.result.delta_hat - t.truth.delta;
    });

    LinkPointStats s;
    s.absent_trials = n_absent;
    s.present_trials = n_present;
    std::int64_t fa = 0, md = 0, sym = 0, fail = 0;
    double cfo = 0.0, timing = 0.0;
    for (const auto& o : out) {
        if (!o.present) {
            fa += o.decided;
            s.absent_stats.push_back(o.stat);
            continue;
        }
        md += !o.decided;
        sym += o.symbol_ok;
        fail += !(o.symbol_ok && o.cfo_ok);
        cfo += o.cfo_err * o.cfo_err;
        timing += o.timing_err * o.timing_err;
        s.present_stats.push_back(o.stat);
    }
    const auto na = static_cast<double>(n_absent), np = static_cast<double>(n_present);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.p_fa = n_absent ? fa / na : nan;
    s.p_md = n_present ? md / np : nan;
    s.symbol_detection = n_present ? sym / np : nan;
    s.sync_failure = n_present ? fail / np : nan;
    s.cfo_mse = n_present ? cfo / np : nan;
    s.timing_rmse = n_present ? std::sqrt(timing / np) : nan;
    return s;
}

SimSummary simulate_nm_replicated(const ExperimentConfig& cfg, const WakeupSystemParams& sys, std::uint64_t point)
{
    return run_nm_jobs(cfg, {{sys, point}}).front();
}

SimSummary simulate_drx_replicated(const ExperimentConfig& cfg, const DrxConfig& drx, std::uint64_t point)
{
    return run_drx_jobs(cfg, {{drx, point}}).front();
}

double power_at_delay(const std::vector<double>& delay, const std::vector<double>& power, double target)
{
    require(delay.size() == power.size() && delay.size() >= 2, "need at least two curve points");
    std::vector<std::size_t> order(delay.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return delay[a] < delay[b]; });
    // interior segment containing the target, otherwise the nearest end segment
    std::size_t k = 0;
    while (k + 2 < order.size() && delay[order[k + 1]] < target)
        ++k;
    const double d0 = delay[order[k]], d1 = delay[order[k + 1]];
    const double p0 = power[order[k]], p1 = power[order[k + 1]];
    if (d1 == d0)
        return 0.5 * (p0 + p1);
    return p0 + (p1 - p0) * (target - d0) / (d1 - d0);
}

std::string to_string(SweepParam p)
{
    switch (p) {
    case SweepParam::CycleLength:
        return "tc";
    case SweepParam::OnTimer:
        return "ton";
    case SweepParam::InactivityTimer:
        return "ti";
    }
    return "?";
}

SweepParam sweep_param_from_string(const std::string& s)
{
    if (s == "tc")
        return SweepParam::CycleLength;
    if (s == "ton")
        return SweepParam::OnTimer;
    if (s == "ti")
        return SweepParam::InactivityTimer;
    throw InvalidParameters("unknown sweep parameter " + s + " (expected tc, ton or ti)");
}

namespace {

const std::vector<double>& sweep_values(const ExperimentConfig& cfg, SweepParam p)
{
    switch (p) {
    case SweepParam::CycleLength:
        return cfg.grids.t_c;
    case SweepParam::OnTimer:
        return cfg.grids.T_ON;
    case SweepParam::InactivityTimer:
        break;
    }
    return cfg.grids.T_I;
}

WakeupSystemParams with_param(WakeupSystemParams sys, SweepParam p, double v)
{
    switch (p) {
    case SweepParam::CycleLength:
        sys.t_c = v;
        break;
    case SweepParam::OnTimer:
        sys.T_ON = v;
        break;
    case SweepParam::InactivityTimer:
        sys.T_I = v;
        break;
    }
    return sys;
}

WakeupSystemParams with_errors(WakeupSystemParams sys, const std::array<double, 2>& pair)
{
    sys.P_fa = pair[0];
    sys.P_md = pair[1];
    return sys;
}

} // namespace

Table run_roc(const ExperimentConfig& cfg)
{
    Table t("roc/1", {"snr_db", "pfa_nominal", "gamma_r", "p_fa", "p_md", "ci_halfwidth", "ci_pfa_halfwidth",
                      "trials"});
    const int n = cfg.run.trials;
    for (std::size_t p = 0; p < cfg.grids.roc_snr_db.size(); ++p) {
        const double snr = cfg.grids.roc_snr_db[p];
        const LinkPointStats s = measure_link_point(cfg, snr, cfg.detector.pfa_target, n, n, p);
        for (double nominal : cfg.grids.roc_pfa_nominal) {
            const double gamma = solve_gamma_r(nominal, cfg.detector.L, cfg.pdwch.K_cs);
            const auto fa = std::count_if(s.absent_stats.begin(), s.absent_stats.end(),
                                          [&](double x) { return x >= gamma; });
            const auto md = std::count_if(s.present_stats.begin(), s.present_stats.end(),
                                          [&](double x) { return x < gamma; });
            const double pfa = double(fa) / n, pmd = double(md) / n;
            t.add({snr, nominal, gamma, pfa, pmd, binomial_halfwidth(pmd, n), binomial_halfwidth(pfa, n),
                   std::int64_t{n}});
        }
    }
    return t;
}

Table run_pmd_vs_snr(const ExperimentConfig& cfg)
{
    Table t("pmd-snr/1", {"snr_db", "pfa_target", "gamma_r", "p_fa", "p_md", "ci_halfwidth", "symbol_detection",
                          "trials"});
    const int n = cfg.run.trials;
    for (double target : cfg.grids.pfa_targets) {
        for (std::size_t p = 0; p < cfg.grids.pmd_snr_db.size(); ++p) {
            const double snr = cfg.grids.pmd_snr_db[p];
            // same trials for every target
            const LinkPointStats s = measure_link_point(cfg, snr, target, n, n, p);
            t.add({snr, target, solve_gamma_r(target, cfg.detector.L, cfg.pdwch.K_cs), s.p_fa, s.p_md,
                   binomial_halfwidth(s.p_md, n), s.symbol_detection, std::int64_t{n}});
        }
    }
    return t;
}

Table run_sync_stats(const ExperimentConfig& cfg)
{
    Table t("sync/1", {"snr_db", "sync_failure", "symbol_error", "cfo_mse", "timing_rmse", "ci_halfwidth",
                       "trials"});
    const int n = cfg.run.trials;
    for (std::size_t p = 0; p < cfg.grids.sync_snr_db.size(); ++p) {
        const double snr = cfg.grids.sync_snr_db[p];
        const LinkPointStats s = measure_link_point(cfg, snr, cfg.detector.pfa_target, 0, n, p);
        t.add({snr, s.sync_failure, 1.0 - s.symbol_detection, s.cfo_mse, s.timing_rmse,
               binomial_halfwidth(s.sync_failure, n), std::int64_t{n}});
    }
    return t;
}

Table run_sweep(const ExperimentConfig& cfg, SweepParam param)
{
    Table t("sweep/1", {"param", "value", "p_fa", "p_md", "analytic_power", "analytic_delay",
                        "analytic_delay_conditional", "sim_power_mean", "sim_power_sd", "sim_delay_mean",
                        "sim_delay_sd", "sim_packet_delay_mean", "sim_false_alarm_rate", "sim_misdetection_rate",
                        "replications"});
    const auto& values = sweep_values(cfg, param);
    std::vector<NmJob> jobs;
    for (std::size_t k = 0; k < cfg.grids.error_pairs.size(); ++k)
        for (double v : values)
            jobs.push_back({with_param(with_errors(cfg.sys, cfg.grids.error_pairs[k]), param, v), k});
    for (const auto& j : jobs)
        j.sys.validate(cfg.profile);
    const std::vector<SimSummary> sims = run_nm_jobs(cfg, jobs);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& sys = jobs[i].sys;
        const SemiMarkovSolution a = solve_semi_markov(sys, cfg.traffic, cfg.profile);
        const SimSummary& s = sims[i];
        t.add({to_string(param), values[i % values.size()], sys.P_fa, sys.P_md, a.avg_power, a.avg_delay,
               a.avg_delay_conditional, s.power_mean, s.power_sd, s.delay_mean, s.delay_sd, s.packet_delay_mean,
               s.false_alarm_rate, s.misdetection_rate, std::int64_t{s.replications}});
    }
    return t;
}

Table run_compare_drx(const ExperimentConfig& cfg, json* summary)
{
    Table t("compare-drx/1", {"scheme", "cycle", "power_mean", "power_sd", "delay_mean", "delay_sd",
                              "packet_delay_mean", "replications"});
    std::vector<NmJob> nm_jobs;
    for (double tc : cfg.grids.t_c) {
        WakeupSystemParams sys = cfg.sys;
        sys.t_c = tc;
        sys.validate(cfg.profile);
        nm_jobs.push_back({sys, 0});
    }
    std::vector<DrxJob> drx_jobs;
    for (double ts : cfg.grids.drx_short_cycle) {
        DrxConfig d = cfg.drx;
        d.short_cycle = ts;
        d.validate();
        drx_jobs.push_back({d, 1});
    }
    const auto nm = run_nm_jobs(cfg, nm_jobs);
    const auto drx = run_drx_jobs(cfg, drx_jobs);

    std::vector<double> nd, np, dd, dp;
    for (std::size_t i = 0; i < nm.size(); ++i) {
        const auto& s = nm[i];
        t.add({std::string("nm"), cfg.grids.t_c[i], s.power_mean, s.power_sd, s.delay_mean, s.delay_sd,
               s.packet_delay_mean, std::int64_t{s.replications}});
        nd.push_back(s.delay_mean);
        np.push_back(s.power_mean);
    }
    for (std::size_t i = 0; i < drx.size(); ++i) {
        const auto& s = drx[i];
        t.add({std::string("drx"), cfg.grids.drx_short_cycle[i], s.power_mean, s.power_sd, s.delay_mean,
               s.delay_sd, s.packet_delay_mean, std::int64_t{s.replications}});
        dd.push_back(s.delay_mean);
        dp.push_back(s.power_mean);
    }
    if (summary && nd.size() >= 2 && dd.size() >= 2) {
        const double target = cfg.grids.target_delay;
        const auto inside = [&](const std::vector<double>& d) {
            const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
            return *lo <= target && target <= *hi;
        };
        const double pn = power_at_delay(nd, np, target), pd = power_at_delay(dd, dp, target);
        *summary = {{"target_delay", target},
                    {"nm_power", pn},
                    {"drx_power", pd},
                    {"saving", 1.0 - pn / pd},
                    {"nm_extrapolated", !inside(nd)},
                    {"drx_extrapolated", !inside(dd)}};
    }
    return t;
}

Table run_analytic(const ExperimentConfig& cfg)
{
    Table t("analytic/1", {"param", "value", "t_c", "T_ON", "T_I", "p_fa", "p_md", "N_w", "avg_power",
                           "avg_delay", "avg_delay_conditional", "P0", "P1", "P2", "P3"});
    for (SweepParam p : {SweepParam::CycleLength, SweepParam::OnTimer, SweepParam::InactivityTimer}) {
        for (const auto& pair : cfg.grids.error_pairs) {
            for (double v : sweep_values(cfg, p)) {
                const WakeupSystemParams sys = with_param(with_errors(cfg.sys, pair), p, v);
                const SemiMarkovSolution a = solve_semi_markov(sys, cfg.traffic, cfg.profile);
                t.add({to_string(p), v, sys.t_c, sys.T_ON, sys.T_I, sys.P_fa, sys.P_md, std::int64_t{a.N_w},
                       a.avg_power, a.avg_delay, a.avg_delay_conditional, a.P_k[0], a.P_k[1], a.P_k[2],
                       a.P_k[3]});
            }
        }
    }
    return t;
}

std::vector<std::string> experiment_ids()
{
    return {"roc", "pmd-snr", "sync", "sweep-tc", "sweep-ton", "sweep-ti", "compare-drx", "analytic"};
}

Table run_experiment(const std::string& id, const ExperimentConfig& cfg, json* summary)
{
    if (id == "roc")
        return run_roc(cfg);
    if (id == "pmd-snr")
        return run_pmd_vs_snr(cfg);
    if (id == "sync")
        return run_sync_stats(cfg);
    if (id.rfind("sweep-", 0) == 0)
        return run_sweep(cfg, sweep_param_from_string(id.substr(6)));
    if (id == "compare-drx")
        return run_compare_drx(cfg, summary);
    if (id == "analytic")
        return run_analytic(cfg);
    throw InvalidParameters("unknown experiment " + id);
}

std::string to_string(OutputFormat f)
{
    return f == OutputFormat::Json ? "json" : "csv";
}

OutputFormat output_format_from_string(const std::string& s)
{
    if (s == "csv")
        return OutputFormat::Csv;
    if (s == "json")
        return OutputFormat::Json;
    throw InvalidParameters("unknown output format " + s);
}

std::string git_describe()
{
    return WAKEUP_GIT_DESCRIBE;
}

json make_sidecar(const RunRecord& rec, const ExperimentConfig& cfg, const Table& table)
{
    return {{"sidecar_version", 1},
            {"experiment", rec.experiment},
            {"schema", table.schema()},
            {"output", rec.out_path},
            {"format", to_string(rec.format)},
            {"seed", cfg.run.seed},
            {"trials", cfg.run.trials},
            {"workers", cfg.run.workers},
            {"git_describe", git_describe()},
            {"wall_time_s", rec.wall_time},
            {"summary", rec.summary},
            {"config", to_json(cfg)}};
}

std::string sidecar_path(const std::string& out_path)
{
    return out_path + ".meta.json";
}

void write_table(const Table& table, OutputFormat format, std::ostream& os)
{
    if (format == OutputFormat::Csv)
        table.write_csv(os);
    else
        os << table.to_json().dump(2) << '\n';
}

namespace {

void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    fn(os);
    if (!os)
        throw std::runtime_error("write failed for " + path);
}

} // namespace

RunRecord run_and_write(const std::string& id, const ExperimentConfig& cfg, const std::string& out_path,
                        OutputFormat format)
{
    RunRecord rec;
    rec.experiment = id;
    rec.out_path = out_path;
    rec.format = format;
    const auto t0 = std::chrono::steady_clock::now();
    const Table table = run_experiment(id, cfg, &rec.summary);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(out_path, [&](std::ostream& os) { write_table(table, format, os); });
    write_file(sidecar_path(out_path), [&](std::ostream& os) { os << make_sidecar(rec, cfg, table).dump(2) << '\n'; });
    return rec;
}

RunRecord replay(const json& sidecar, const std::string& out_path)
{
    for (const char* key : {"experiment", "config", "format", "output"})
        if (!sidecar.contains(key))
            throw InvalidParameters(std::string("sidecar is missing ") + key);
    const ExperimentConfig cfg = config_from_json(sidecar.at("config"));
    const std::string path = out_path.empty() ? sidecar.at("output").get<std::string>() : out_path;
    return run_and_write(sidecar.at("experiment").get<std::string>(), cfg, path,
                         output_format_from_string(sidecar.at("format").get<std::string>()));
}

} // namespace wakeup
