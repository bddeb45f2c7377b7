#include "wakeup/config.hpp"

#include <fstream>
#include <set>

namespace wakeup {

using json = nlohmann::json;

namespace {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw InvalidParameters(path_ + " must be an object");
    }

    template <typename T>
    void get(const char* key, T& v)
    {
        auto it = j_.find(key);
        if (it == j_.end())
            return;
        seen_.insert(key);
        try {
            v = it->get<T>();
        } catch (const json::exception& e) {
            throw InvalidParameters(path_ + "." + key + ": " + e.what());
        }
    }

    template <typename F>
    void section(const char* key, F&& fn)
    {
        auto it = j_.find(key);
        if (it == j_.end())
            return;
        seen_.insert(key);
        Reader sub(*it, path_ + "." + key);
        fn(sub);
        sub.finish();
    }

    void ignore(const char* key) { seen_.insert(key); }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw InvalidParameters("unknown config key " + path_ + "." + it.key());
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace

void ExperimentConfig::finalize()
{
    if (shift_convention == "auto")
        pdwch.convention = resolve_shift_convention(gen_root_zc<double>(pdwch.root, pdwch.K), pdwch.K_cs);
    else
        pdwch.convention = shift_convention_from_string(shift_convention);
    pdwch.validate();
    ofdm.validate();
    detector.set_pfa(detector.pfa_target, pdwch.K_cs);
    detector.validate();
    channel.validate();
    require(device >= 1 && device <= pdwch.M, "device outside 1..M");
    require(others_active >= 0 && others_active <= 1, "others_active must be a probability");
    sys.validate(profile);
    traffic.validate();
    drx.service = service;
    drx.validate();
    require(run.trials >= 1, "trials must be at least 1");
    require(run.workers >= 1, "workers must be at least 1");
    require(run.replications >= 1, "replications must be at least 1");
    require(run.duration > 0, "duration must be positive");
    require(!grids.roc_snr_db.empty() && !grids.pmd_snr_db.empty() && !grids.sync_snr_db.empty(),
            "SNR grids must be non-empty");
    require(!grids.pfa_targets.empty() && !grids.error_pairs.empty(), "error grids must be non-empty");
    require(!grids.t_c.empty() && !grids.T_ON.empty() && !grids.T_I.empty() && !grids.drx_short_cycle.empty(),
            "timer grids must be non-empty");
}

LinkScenario ExperimentConfig::link(double snr_db, double pfa_target) const
{
    LinkScenario sc;
    sc.pdwch = pdwch;
    sc.ofdm = ofdm;
    sc.detector = detector;
    sc.detector.set_pfa(pfa_target, pdwch.K_cs);
    sc.channel = channel;
    sc.snr_db = snr_db;
    sc.device = device;
    sc.others_active = others_active;
    return sc;
}

SimConfig ExperimentConfig::sim(const WakeupSystemParams& s) const
{
    SimConfig c;
    c.sys = s;
    c.profile = profile;
    c.traffic = traffic;
    c.duration = run.duration;
    c.service = service;
    c.forced_visit = forced_visit;
    return c;
}

json to_json(const ExperimentConfig& c)
{
    json j;
    j["pdwch"] = {{"K", c.pdwch.K},
                  {"K_cs", c.pdwch.K_cs},
                  {"M", c.pdwch.M},
                  {"root", c.pdwch.root},
                  {"freq_offset", c.pdwch.freq_offset},
                  {"N_g", c.pdwch.N_g},
                  {"shift_convention", c.shift_convention},
                  {"shift_convention_resolved", to_string(c.pdwch.convention)}};
    j["ofdm"] = {{"N", c.ofdm.N},
                 {"N_cp", c.ofdm.N_cp},
                 {"first_cp", c.ofdm.first_cp},
                 {"subcarrier_spacing", c.ofdm.subcarrier_spacing}};
    j["detector"] = {{"x", c.detector.x},
                     {"a", c.detector.a},
                     {"L", c.detector.L},
                     {"pfa_target", c.detector.pfa_target},
                     {"noise_floor", to_string(c.detector.floor_mode)},
                     {"noise_normalizer", to_string(c.detector.normalizer)},
                     {"sync_periods", c.detector.sync_periods},
                     {"sync_rho", c.detector.sync_rho},
                     {"timing_backoff", c.detector.timing_backoff},
                     {"gamma_r", c.detector.gamma_r},
                     {"upsilon_r", c.detector.upsilon_r}};
    j["channel"] = {{"tap_delays", c.channel.tap_delays},
                    {"tap_powers_db", c.channel.tap_powers_db},
                    {"doppler", c.channel.doppler},
                    {"normalize_realization", c.channel.normalize_realization},
                    {"snr_definition", "per PDWCH subcarrier"}};
    j["link"] = {{"device", c.device}, {"others_active", c.others_active}};
    j["system"] = {{"t_c", c.sys.t_c},
                   {"t_on", c.sys.t_on},
                   {"t_of", c.sys.t_of},
                   {"T_ON", c.sys.T_ON},
                   {"T_I", c.sys.T_I},
                   {"N_w", c.sys.N_w},
                   {"wake_timer", c.sys.wake_timer},
                   {"P_fa", c.sys.P_fa},
                   {"P_md", c.sys.P_md},
                   {"service", to_string(c.service)},
                   {"forced_visit", c.forced_visit}};
    j["profile"] = {{"PW", c.profile.PW},
                    {"e_su", c.profile.e_su},
                    {"e_pd", c.profile.e_pd},
                    {"t_su", c.profile.t_su},
                    {"t_pd", c.profile.t_pd}};
    j["traffic"] = {{"lambda_s", c.traffic.lambda_s},
                    {"lambda_pc", c.traffic.lambda_pc},
                    {"lambda_p", c.traffic.lambda_p},
                    {"eta_s", c.traffic.eta_s},
                    {"eta_pc", c.traffic.eta_pc}};
    j["drx"] = {{"short_cycle", c.drx.short_cycle},
                {"long_factor", c.drx.long_factor},
                {"short_drx_timer", c.drx.short_drx_timer},
                {"on_duration", c.drx.on_duration},
                {"inactivity_timer", c.drx.inactivity_timer},
                {"PW_active", c.drx.PW_active},
                {"PW_short_sleep", c.drx.PW_short_sleep},
                {"PW_long_sleep", c.drx.PW_long_sleep},
                {"short_t_su", c.drx.short_t_su},
                {"short_t_pd", c.drx.short_t_pd},
                {"long_t_su", c.drx.long_t_su},
                {"long_t_sync", c.drx.long_t_sync},
                {"long_t_pd", c.drx.long_t_pd}};
    j["grids"] = {{"roc_snr_db", c.grids.roc_snr_db},
                  {"roc_pfa_nominal", c.grids.roc_pfa_nominal},
                  {"pmd_snr_db", c.grids.pmd_snr_db},
                  {"sync_snr_db", c.grids.sync_snr_db},
                  {"pfa_targets", c.grids.pfa_targets},
                  {"error_pairs", c.grids.error_pairs},
                  {"t_c", c.grids.t_c},
                  {"T_ON", c.grids.T_ON},
                  {"T_I", c.grids.T_I},
                  {"drx_short_cycle", c.grids.drx_short_cycle},
                  {"target_delay", c.grids.target_delay}};
    j["run"] = {{"seed", c.run.seed},
                {"trials", c.run.trials},
                {"workers", c.run.workers},
                {"duration", c.run.duration},
                {"replications", c.run.replications}};
    return j;
}

void apply_json(const json& j, ExperimentConfig& c)
{
    Reader r(j, "config");
    r.section("pdwch", [&](Reader& s) {
        s.get("K", c.pdwch.K);
        s.get("K_cs", c.pdwch.K_cs);
        s.get("M", c.pdwch.M);
        s.get("root", c.pdwch.root);
        s.get("freq_offset", c.pdwch.freq_offset);
        s.get("N_g", c.pdwch.N_g);
        s.get("shift_convention", c.shift_convention);
        s.ignore("shift_convention_resolved");
    });
    r.section("ofdm", [&](Reader& s) {
        s.get("N", c.ofdm.N);
        s.get("N_cp", c.ofdm.N_cp);
        s.get("first_cp", c.ofdm.first_cp);
        s.get("subcarrier_spacing", c.ofdm.subcarrier_spacing);
    });
    r.section("detector", [&](Reader& s) {
        std::string floor = to_string(c.detector.floor_mode), norm = to_string(c.detector.normalizer);
        s.get("x", c.detector.x);
        s.get("a", c.detector.a);
        s.get("L", c.detector.L);
        s.get("pfa_target", c.detector.pfa_target);
        s.get("noise_floor", floor);
        s.get("noise_normalizer", norm);
        s.get("sync_periods", c.detector.sync_periods);
        s.get("sync_rho", c.detector.sync_rho);
        s.get("timing_backoff", c.detector.timing_backoff);
        s.ignore("gamma_r");
        s.ignore("upsilon_r");
        c.detector.floor_mode = noise_floor_mode_from_string(floor);
        c.detector.normalizer = noise_normalizer_from_string(norm);
    });
    r.section("channel", [&](Reader& s) {
        s.get("tap_delays", c.channel.tap_delays);
        s.get("tap_powers_db", c.channel.tap_powers_db);
        s.get("doppler", c.channel.doppler);
        s.get("normalize_realization", c.channel.normalize_realization);
        s.ignore("snr_definition");
    });
    r.section("link", [&](Reader& s) {
        s.get("device", c.device);
        s.get("others_active", c.others_active);
    });
    r.section("system", [&](Reader& s) {
        std::string service = to_string(c.service);
        s.get("t_c", c.sys.t_c);
        s.get("t_on", c.sys.t_on);
        s.get("t_of", c.sys.t_of);
        s.get("T_ON", c.sys.T_ON);
        s.get("T_I", c.sys.T_I);
        s.get("N_w", c.sys.N_w);
        s.get("wake_timer", c.sys.wake_timer);
        s.get("P_fa", c.sys.P_fa);
        s.get("P_md", c.sys.P_md);
        s.get("service", service);
        s.get("forced_visit", c.forced_visit);
        c.service = service_model_from_string(service);
    });
    r.section("profile", [&](Reader& s) {
        s.get("PW", c.profile.PW);
        s.get("e_su", c.profile.e_su);
        s.get("e_pd", c.profile.e_pd);
        s.get("t_su", c.profile.t_su);
        s.get("t_pd", c.profile.t_pd);
    });
    r.section("traffic", [&](Reader& s) {
        s.get("lambda_s", c.traffic.lambda_s);
        s.get("lambda_pc", c.traffic.lambda_pc);
        s.get("lambda_p", c.traffic.lambda_p);
        s.get("eta_s", c.traffic.eta_s);
        s.get("eta_pc", c.traffic.eta_pc);
    });
    r.section("drx", [&](Reader& s) {
        s.get("short_cycle", c.drx.short_cycle);
        s.get("long_factor", c.drx.long_factor);
        s.get("short_drx_timer", c.drx.short_drx_timer);
        s.get("on_duration", c.drx.on_duration);
        s.get("inactivity_timer", c.drx.inactivity_timer);
        s.get("PW_active", c.drx.PW_active);
        s.get("PW_short_sleep", c.drx.PW_short_sleep);
        s.get("PW_long_sleep", c.drx.PW_long_sleep);
        s.get("short_t_su", c.drx.short_t_su);
        s.get("short_t_pd", c.drx.short_t_pd);
        s.get("long_t_su", c.drx.long_t_su);
        s.get("long_t_sync", c.drx.long_t_sync);
        s.get("long_t_pd", c.drx.long_t_pd);
    });
    r.section("grids", [&](Reader& s) {
        s.get("roc_snr_db", c.grids.roc_snr_db);
        s.get("roc_pfa_nominal", c.grids.roc_pfa_nominal);
        s.get("pmd_snr_db", c.grids.pmd_snr_db);
        s.get("sync_snr_db", c.grids.sync_snr_db);
        s.get("pfa_targets", c.grids.pfa_targets);
        s.get("error_pairs", c.grids.error_pairs);
        s.get("t_c", c.grids.t_c);
        s.get("T_ON", c.grids.T_ON);
        s.get("T_I", c.grids.T_I);
        s.get("drx_short_cycle", c.grids.drx_short_cycle);
        s.get("target_delay", c.grids.target_delay);
    });
    r.section("run", [&](Reader& s) {
        s.get("seed", c.run.seed);
        s.get("trials", c.run.trials);
        s.get("workers", c.run.workers);
        s.get("duration", c.run.duration);
        s.get("replications", c.run.replications);
    });
    r.finish();
}

ExperimentConfig config_from_json(const json& j)
{
    ExperimentConfig c;
    apply_json(j, c);
    c.finalize();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidParameters("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidParameters("config file " + path + ": " + e.what());
    }
    return config_from_json(j);
}

} // namespace wakeup
