#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "cortexlab/persistence/plan_dir.hpp"

namespace fs = std::filesystem;
using namespace cortexlab;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(CORTEXLAB_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("cortexlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string p(const std::string& rel) const { return (dir / rel).string(); }
};

std::size_t lines(const fs::path& f) {
    const auto t = persistence::read_text(f);
    return static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n'));
}

}  // namespace

TEST_F(Cli, TrainWritesRecordsAndSummary) {
    ASSERT_EQ(run("train --condition addon --env std1d --steps 1000 --seeds 0,1,2 --out " + p("run")), 0);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(p("run/records"))) n += e.path().extension() == ".json";
    EXPECT_EQ(n, 3u);
    EXPECT_EQ(lines(p("run/summary.csv")), 2u);
    const auto rec = persistence::read_json(p("run/records/addon_std1d_1000_s1.json"));
    EXPECT_EQ(rec.at("schema_version"), experiments::kSchemaVersion);
    EXPECT_EQ(rec.at("config_hash"), persistence::read_json(p("run/plan.json")).at("config_hash"));
    EXPECT_TRUE(fs::exists(p("run/checkpoints/addon_std1d_1000_s1.json")));
}

TEST_F(Cli, BadNamesExitTwo) {
    EXPECT_EQ(run("train --condition bogus --out " + p("a")), 2);
    EXPECT_EQ(run("train --condition addon --env std3d --out " + p("b")), 2);
    EXPECT_EQ(run("train --condition addon --seeds x --out " + p("c")), 2);
    EXPECT_FALSE(fs::exists(p("a")));
}

TEST_F(Cli, OutputCollisionNeedsForce) {
    ASSERT_EQ(run("train --condition nosm --steps 100 --seeds 0 --out " + p("run")), 0);
    EXPECT_EQ(run("train --condition nosm --steps 100 --seeds 0 --out " + p("run")), 3);
    EXPECT_EQ(run("train --condition nosm --steps 100 --seeds 0 --force --out " + p("run")), 0);
}

TEST_F(Cli, OutputDirFromEnvironment) {
    const std::string cmd = "CORTEXLAB_OUT=" + p("env") + " " + CORTEXLAB_CLI + " train --condition nosm --steps 60 --seeds 4 >/dev/null 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(p("env/records/nosm_std1d_60_s4.json")));
}

TEST_F(Cli, ConfigFileReproducesFlagHash) {
    ASSERT_EQ(run("train --condition addon,structural --env nonstat1d --steps 120 --seeds 0-1 --out " + p("flags")), 0);
    persistence::write_json(p("plan.json"), {{"conditions", {"addon", "structural"}},
                                             {"variants", {"nonstat1d"}},
                                             {"steps", 120},
                                             {"seeds", {0, 1}},
                                             {"out", p("cfg")}});
    ASSERT_EQ(run("train --config " + p("plan.json")), 0);
    EXPECT_EQ(persistence::read_json(p("flags/plan.json")).at("config_hash"),
              persistence::read_json(p("cfg/plan.json")).at("config_hash"));
    EXPECT_EQ(persistence::read_text(p("flags/summary.csv")), persistence::read_text(p("cfg/summary.csv")));
    persistence::write_json(p("bad.json"), {{"conditions", {"addon"}}, {"colour", "red"}});
    EXPECT_EQ(run("train --config " + p("bad.json") + " --out " + p("bad")), 2);
}

TEST_F(Cli, DiagnoseEmitsReportAndCsv) {
    ASSERT_EQ(run("train --condition nosm,addon --steps 200 --seeds 0 --out " + p("run")), 0);
    ASSERT_EQ(run("diagnose --record " + p("run/records/nosm_std1d_200_s0.json")), 0);
    const auto nosm = persistence::read_json(p("run/diagnostics/nosm_std1d_200_s0.report.json"));
    EXPECT_EQ(nosm.at("collapse"), "not_applicable");
    EXPECT_EQ(lines(p("run/diagnostics/nosm_std1d_200_s0.collapse.csv")), 201u);
    ASSERT_EQ(run("diagnose --sensitivity --probe-steps 200 --record " + p("run/records/addon_std1d_200_s0.json")), 0);
    const auto addon = persistence::read_json(p("run/diagnostics/addon_std1d_200_s0.report.json"));
    EXPECT_TRUE(addon.at("collapse").at("confidence").contains("std"));
    EXPECT_EQ(addon.at("sensitivity").at("predictability"), "not_applicable");
    EXPECT_TRUE(addon.at("sensitivity").at("confidence").contains("mean_kl"));
}

TEST_F(Cli, DiagnoseWithoutTelemetryExitsFour) {
    ASSERT_EQ(run("train --condition nosm --steps 50 --seeds 0 --out " + p("run")), 0);
    auto rec = persistence::read_json(p("run/records/nosm_std1d_50_s0.json"));
    rec.erase("telemetry");
    persistence::write_json(p("stripped.json"), rec);
    EXPECT_EQ(run("diagnose --record " + p("stripped.json")), 4);
}

TEST_F(Cli, ReportIsIdempotentAndShowsGaps) {
    ASSERT_EQ(run("train --condition addon,nosm --steps 150 --seeds 0,1 --out " + p("run")), 0);
    const auto before = persistence::read_text(p("run/comparisons.csv"));
    ASSERT_EQ(run("report --plan-dir " + p("run")), 0);
    EXPECT_EQ(persistence::read_text(p("run/comparisons.csv")), before);
    EXPECT_EQ(lines(p("run/comparisons.csv")), 2u);
    ASSERT_EQ(run("report --plan-dir " + p("run")), 0);
    EXPECT_EQ(persistence::read_text(p("run/comparisons.csv")), before);

    fs::remove(p("run/records/nosm_std1d_150_s0.json"));
    fs::remove(p("run/records/nosm_std1d_150_s1.json"));
    ASSERT_EQ(run("report --plan-dir " + p("run")), 0);
    const auto csv = persistence::read_text(p("run/summary.csv"));
    EXPECT_NE(csv.find("nosm,std1d,150,0,,,,"), std::string::npos);
    EXPECT_NE(persistence::read_text(p("run/summary.txt")).find("missing record"), std::string::npos);
}

TEST_F(Cli, ReportRefusesMixedCodeVersions) {
    ASSERT_EQ(run("train --condition nosm --steps 50 --seeds 0,1 --out " + p("run")), 0);
    auto rec = persistence::read_json(p("run/records/nosm_std1d_50_s1.json"));
    rec["code_version"] = "cortexlab-0.0.9";
    persistence::write_json(p("run/records/nosm_std1d_50_s1.json"), rec);
    EXPECT_EQ(run("report --plan-dir " + p("run")), 5);
}
