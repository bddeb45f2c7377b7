#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wakeup/experiments.hpp"

using namespace wakeup;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// small fixed-seed settings pinned by the golden files
ExperimentConfig golden_config()
{
    return load_config((fs::path(WAKEUP_GOLDEN_DIR) / "config.json").string());
}

std::string csv_of(const Table& t)
{
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "wakeup_tests";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_SUITE("experiments")
{
    TEST_CASE("number formatting is shortest round trip")
    {
        CHECK(format_number(0.1) == "0.1");
        CHECK(format_number(1e-3) == "0.001");
        CHECK(format_number(-2.5) == "-2.5");
        CHECK(format_number(std::nan("")) == "nan");
        CHECK(std::stod(format_number(0.1183142150901113)) == 0.1183142150901113);
    }

    TEST_CASE("table output")
    {
        Table t("demo/1", {"name", "x", "n"});
        t.add({std::string("a"), 0.5, std::int64_t{3}});
        CHECK(csv_of(t) == "name,x,n\na,0.5,3\n");
        CHECK(t.num(0, "x") == 0.5);
        CHECK(t.num(0, "n") == 3.0);
        CHECK(t.str(0, "name") == "a");
        CHECK_THROWS(t.num(0, "name"));
        CHECK_THROWS(t.add({0.1}));
        const json j = t.to_json();
        CHECK(j["schema"] == "demo/1");
        CHECK(j["rows"][0][1] == 0.5);
    }

    TEST_CASE("parallel_for covers every index and rethrows")
    {
        std::vector<int> hit(1000, 0);
        parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
        CHECK(std::count(hit.begin(), hit.end(), 1) == 1000);
        CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                            if (i == 5)
                                throw std::runtime_error("boom");
                        }),
                        std::runtime_error);
    }

    TEST_CASE("results do not depend on the worker count")
    {
        ExperimentConfig a = golden_config(), b = golden_config();
        b.run.workers = 3;
        const LinkPointStats sa = measure_link_point(a, -4.0, 0.1, 30, 30, 0);
        const LinkPointStats sb = measure_link_point(b, -4.0, 0.1, 30, 30, 0);
        CHECK(sa.absent_stats == sb.absent_stats);
        CHECK(sa.present_stats == sb.present_stats);
        CHECK(csv_of(run_sweep(a, SweepParam::CycleLength)) == csv_of(run_sweep(b, SweepParam::CycleLength)));
    }

    TEST_CASE("interpolation along a power-delay curve")
    {
        const std::vector<double> d{0.01, 0.02, 0.04}, p{0.3, 0.2, 0.1};
        CHECK(power_at_delay(d, p, 0.015) == doctest::Approx(0.25));
        CHECK(power_at_delay(d, p, 0.03) == doctest::Approx(0.15));
        CHECK(power_at_delay(d, p, 0.005) == doctest::Approx(0.35)); // end segment
        CHECK(power_at_delay({0.04, 0.01, 0.02}, {0.1, 0.3, 0.2}, 0.015) == doctest::Approx(0.25));
    }

    TEST_CASE("roc limits")
    {
        ExperimentConfig c = golden_config();
        c.grids.roc_snr_db = {30.0};
        c.grids.roc_pfa_nominal = {1e-3, 0.999999};
        c.channel = FadingChannel::none();
        const Table t = run_roc(c);
        REQUIRE(t.rows() == 2);
        CHECK(t.num(0, "p_md") == 0.0);   // noiseless-like link, finite threshold
        CHECK(t.num(1, "p_fa") >= 0.9);   // vanishing threshold
        CHECK(t.num(1, "p_md") == 0.0);
    }

    TEST_CASE("experiment registry")
    {
        for (const auto& id : experiment_ids())
            CHECK_FALSE(id.empty());
        CHECK_THROWS_AS(run_experiment("fig99", golden_config()), InvalidParameters);
        CHECK_THROWS_AS(sweep_param_from_string("tx"), InvalidParameters);
        CHECK(output_format_from_string("json") == OutputFormat::Json);
    }

    TEST_CASE("golden results")
    {
        const ExperimentConfig c = golden_config();
        for (const std::string id : {"roc", "sweep-tc", "analytic"}) {
            CAPTURE(id);
            const fs::path golden = fs::path(WAKEUP_GOLDEN_DIR) / (id + ".csv");
            REQUIRE(fs::exists(golden));
            CHECK(csv_of(run_experiment(id, c)) == slurp(golden));
        }
    }

    TEST_CASE("replay from the sidecar is bit identical")
    {
        const ExperimentConfig c = golden_config();
        for (const std::string id : {"roc", "sync", "sweep-ton", "compare-drx", "analytic"}) {
            for (OutputFormat f : {OutputFormat::Csv, OutputFormat::Json}) {
                const fs::path out = scratch(id + "." + to_string(f));
                const RunRecord rec = run_and_write(id, c, out.string(), f);
                const std::string first = slurp(out);
                const json side = json::parse(slurp(sidecar_path(out.string())));
                CHECK(side["experiment"] == id);
                CHECK(side["seed"] == 7);
                CHECK(side.contains("git_describe"));
                CHECK(side["config"]["channel"]["snr_definition"] == "per PDWCH subcarrier");
                const fs::path again = scratch(id + ".replay." + to_string(f));
                replay(side, again.string());
                CHECK(slurp(again) == first);
                (void)rec;
            }
        }
    }
}
