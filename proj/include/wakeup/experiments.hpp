#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wakeup/config.hpp"

namespace wakeup {

// result table; numbers are written in shortest round-trip form
class Table {
public:
    using Cell = std::variant<double, std::int64_t, std::string>;

    Table() = default;
    Table(std::string schema, std::vector<std::string> columns);

    const std::string& schema() const { return schema_; }
    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }

    void add(std::vector<Cell> row);
    const Cell& at(std::size_t row, const std::string& column) const;
    double num(std::size_t row, const std::string& column) const;
    std::string str(std::size_t row, const std::string& column) const;

    void write_csv(std::ostream& os) const;
    nlohmann::json to_json() const;

private:
    std::size_t index(const std::string& column) const;

    std::string schema_;
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_number(double v);

// runs fn(0..n-1) on `workers` threads; the first exception is rethrown
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// 95% normal-approximation half-width of a binomial proportion
double binomial_halfwidth(double p, std::int64_t n);

struct LinkPointStats {
    std::int64_t absent_trials = 0;
    std::int64_t present_trials = 0;
    double p_fa = 0.0;
    double p_md = 0.0;
    double symbol_detection = 0.0; // over present trials
    double sync_failure = 0.0;     // wrong symbol index or wrong integer CFO
    double cfo_mse = 0.0;          // total CFO, subcarrier units squared
    double timing_rmse = 0.0;      // samples
    std::vector<double> absent_stats;  // E(device)/beta, trial order
    std::vector<double> present_stats;
};

// absent trials use trial ids [0, n_absent), present trials [n_absent, n_absent + n_present)
LinkPointStats measure_link_point(const ExperimentConfig& cfg, double snr_db, double pfa_target,
                                  std::int64_t n_absent, std::int64_t n_present, std::uint64_t point);

struct SimSummary {
    double power_mean = 0.0;
    double power_sd = 0.0;
    double delay_mean = 0.0;
    double delay_sd = 0.0;
    double packet_delay_mean = 0.0;
    double false_alarm_rate = 0.0;
    double misdetection_rate = 0.0;
    int replications = 0;
};

// NM replications use seeds derive_seed(run.seed, point, rep)
SimSummary simulate_nm_replicated(const ExperimentConfig& cfg, const WakeupSystemParams& sys,
                                  std::uint64_t point);
SimSummary simulate_drx_replicated(const ExperimentConfig& cfg, const DrxConfig& drx, std::uint64_t point);

// power at the given delay by linear interpolation along a (delay, power) curve
double power_at_delay(const std::vector<double>& delay, const std::vector<double>& power, double target);

enum class SweepParam { CycleLength, OnTimer, InactivityTimer };
std::string to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& s); // tc | ton | ti

Table run_roc(const ExperimentConfig& cfg);
Table run_pmd_vs_snr(const ExperimentConfig& cfg);
Table run_sync_stats(const ExperimentConfig& cfg);
Table run_sweep(const ExperimentConfig& cfg, SweepParam param);
Table run_compare_drx(const ExperimentConfig& cfg, nlohmann::json* summary = nullptr);
Table run_analytic(const ExperimentConfig& cfg);

// experiment ids: roc, pmd-snr, sync, sweep-tc, sweep-ton, sweep-ti, compare-drx, analytic
std::vector<std::string> experiment_ids();
Table run_experiment(const std::string& id, const ExperimentConfig& cfg, nlohmann::json* summary = nullptr);

enum class OutputFormat { Csv, Json };
std::string to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& s);

std::string git_describe();

struct RunRecord {
    std::string experiment;
    std::string out_path;
    OutputFormat format = OutputFormat::Csv;
    double wall_time = 0.0;
    nlohmann::json summary;
};

nlohmann::json make_sidecar(const RunRecord& rec, const ExperimentConfig& cfg, const Table& table);
std::string sidecar_path(const std::string& out_path);
void write_table(const Table& table, OutputFormat format, std::ostream& os);

// runs, writes out_path and its sidecar; returns the record
RunRecord run_and_write(const std::string& id, const ExperimentConfig& cfg, const std::string& out_path,
                        OutputFormat format);
// re-runs the experiment described by a sidecar; out_path empty means the recorded path
RunRecord replay(const nlohmann::json& sidecar, const std::string& out_path = {});

} // namespace wakeup
