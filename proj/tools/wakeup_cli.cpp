#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wakeup/experiments.hpp"

using namespace wakeup;
using json = nlohmann::json;

namespace {

struct Common {
    std::string config_path = WAKEUP_DEFAULT_CONFIG;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> workers;
    std::string out;
    std::string format = "csv";
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config_path, "JSON config file")->capture_default_str();
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--trials", c.trials, "trials per operating point")->check(CLI::PositiveNumber);
    app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output path (default <experiment>.<format>)");
    app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig load(const Common& c)
{
    ExperimentConfig cfg = load_config(c.config_path);
    if (c.seed)
        cfg.run.seed = *c.seed;
    if (c.trials)
        cfg.run.trials = *c.trials;
    if (c.workers)
        cfg.run.workers = *c.workers;
    cfg.finalize();
    return cfg;
}

void report(const RunRecord& rec)
{
    json j = {{"experiment", rec.experiment},
              {"output", rec.out_path},
              {"sidecar", sidecar_path(rec.out_path)},
              {"wall_time_s", rec.wall_time}};
    if (!rec.summary.is_null())
        j["summary"] = rec.summary;
    std::cout << j.dump() << '\n';
}

void fail(const std::string& kind, const std::string& message, int code)
{
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
    std::exit(code);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"wake-up receiver experiments"};
    app.require_subcommand(1);

    Common common;
    std::string sweep_param;
    std::string replay_sidecar, replay_out;
    std::string timeline_out, trace_out;
    double timeline_duration = 60.0;

    struct Sub {
        const char* name;
        const char* help;
    };
    for (const Sub& s : {Sub{"roc", "false-alarm / miss-detection trade-off per SNR"},
                         Sub{"pmd-snr", "miss-detection probability against SNR"},
                         Sub{"sync", "synchronization failure and CFO error against SNR"},
                         Sub{"compare-drx", "power-delay curves of the wake-up scheme and DRX"},
                         Sub{"analytic", "semi-Markov power and delay on the sweep grids"}})
        add_common(app.add_subcommand(s.name, s.help), common);

    auto* sweep = app.add_subcommand("sweep", "simulated and analytic power/delay against one timer");
    add_common(sweep, common);
    sweep->add_option("--param", sweep_param, "tc, ton or ti")
        ->required()
        ->check(CLI::IsMember({"tc", "ton", "ti"}));

    auto* rep = app.add_subcommand("replay", "re-run an experiment from its .meta.json sidecar");
    rep->add_option("sidecar", replay_sidecar, "sidecar file")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", replay_out, "write here instead of the recorded path");

    auto* tl = app.add_subcommand("timeline", "export a packet arrival timeline as CSV");
    tl->add_option("--config", common.config_path, "JSON config file")->capture_default_str();
    tl->add_option("--seed", common.seed, "master seed");
    tl->add_option("--duration", timeline_duration, "seconds")->capture_default_str();
    tl->add_option("--out", timeline_out, "CSV path")->required();

    auto* tr = app.add_subcommand("trace", "per-event CSV trace of one wake-up scheme run");
    tr->add_option("--config", common.config_path, "JSON config file")->capture_default_str();
    tr->add_option("--seed", common.seed, "master seed");
    tr->add_option("--duration", timeline_duration, "seconds")->capture_default_str();
    tr->add_option("--out", trace_out, "CSV path")->required();

    bool builtin_defaults = false;
    auto* show = app.add_subcommand("show-config", "print the effective config as JSON");
    show->add_option("--config", common.config_path, "JSON config file")->capture_default_str();
    show->add_flag("--builtin", builtin_defaults, "ignore the config file, print compiled-in defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fail("usage", e.what(), 2);
    }

    try {
        auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "show-config") {
            ExperimentConfig cfg;
            if (builtin_defaults)
                cfg.finalize();
            else
                cfg = load(common);
            std::cout << to_json(cfg).dump(2) << '\n';
            return 0;
        }
        if (name == "replay") {
            std::ifstream in(replay_sidecar);
            const json side = json::parse(in);
            report(replay(side, replay_out));
            return 0;
        }
        if (name == "timeline" || name == "trace") {
            ExperimentConfig cfg = load(common);
            const std::string& path = name == "timeline" ? timeline_out : trace_out;
            std::ofstream os(path);
            if (!os)
                throw std::runtime_error("cannot write " + path);
            if (name == "timeline") {
                // same stream the simulator draws for this seed
                write_timeline_csv(generate_timeline(cfg.traffic, timeline_duration, derive_seed(cfg.run.seed, 1, 0)), os);
            } else {
                cfg.run.duration = timeline_duration;
                SimConfig sc = cfg.sim(cfg.sys);
                sc.seed = cfg.run.seed;
                simulate_nm(sc, csv_trace(os));
            }
            std::cout << json{{"output", path}}.dump() << '\n';
            return 0;
        }
        const std::string id = name == "sweep" ? "sweep-" + sweep_param : name;
        const ExperimentConfig cfg = load(common);
        const std::string out = common.out.empty() ? id + "." + common.format : common.out;
        report(run_and_write(id, cfg, out, output_format_from_string(common.format)));
        return 0;
    } catch (const InvalidParameters& e) {
        fail("invalid_parameters", e.what(), 3);
    } catch (const json::exception& e) {
        fail("invalid_json", e.what(), 3);
    } catch (const std::exception& e) {
        fail("runtime", e.what(), 4);
    }
    return 0;
}
