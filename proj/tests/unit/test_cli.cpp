#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dynmte/cli/commands.hpp"

using namespace dynmte;

namespace {

namespace fs = std::filesystem;

fs::path scratch() {
    const auto dir = fs::temp_directory_path() / "dynmte_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string path_of(const std::string& name) { return (scratch() / name).string(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(std::vector<std::string> args, std::string* err_out = nullptr) {
    args.insert(args.begin(), "dynmte");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream log, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), log, err);
    if (err_out) *err_out = err.str();
    return code;
}

}  // namespace

TEST(Cli, SimulateTwiceIsByteIdentical) {
    const auto a = path_of("sim_a.csv"), b = path_of("sim_b.csv");
    ASSERT_EQ(run_cli({"simulate", "--seed", "42", "--n", "300", "--out", a}), 0);
    ASSERT_EQ(run_cli({"simulate", "--seed", "42", "--n", "300", "--out", b}), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(load_panel(a).n(), 300U);
    ASSERT_TRUE(fs::exists(a + ".manifest.json"));
    const auto m = json::parse(slurp(a + ".manifest.json"));
    EXPECT_EQ(m["command"], "simulate");
    EXPECT_EQ(m["seed"], 42);
    EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16U);
    EXPECT_TRUE(m["versions"].contains("eigen"));
}

TEST(Cli, EstimateOfIdenticalArmsIsZero) {
    const auto data = path_of("est.csv"), cfg = path_of("est_config.json"), out = path_of("est.json");
    ASSERT_EQ(run_cli({"simulate", "--seed", "1", "--n", "891", "--out", data}), 0);
    EstimationConfig config;
    config.bootstrap_reps = 5;
    save_estimation_config(config, cfg);
    ASSERT_EQ(run_cli({"estimate", "--data", data, "--config", cfg, "--contrast", "11:11", "--out", out}), 0);
    const auto records = json::parse(slurp(out));
    ASSERT_EQ(records.size(), 1U);
    EXPECT_EQ(records[0]["point"], 0.0);
    EXPECT_EQ(records[0]["contrast"], "11:11");
    EXPECT_EQ(records[0]["kind"], "ate");
    EXPECT_EQ(records[0]["n_boot"], 5);
    EXPECT_TRUE(fs::exists(out + ".manifest.json"));
}

TEST(Cli, EstimateWritesMteGrid) {
    const auto data = path_of("grid.csv"), cfg = path_of("grid_config.json"), out = path_of("grid.json");
    ASSERT_EQ(run_cli({"simulate", "--seed", "2", "--n", "2000", "--out", data}), 0);
    EstimationConfig config;
    config.bootstrap_reps = 3;
    save_estimation_config(config, cfg);
    const auto grid = path_of("grid_cells.csv");
    ASSERT_EQ(run_cli({"estimate", "--data", data, "--config", cfg, "--contrast", "11:00", "--kind", "mte", "--v",
                       "0.25,0.75", "--grid", "3", "--grid-out", grid, "--out", out}),
              0);
    const auto text = slurp(grid);
    EXPECT_EQ(text.substr(0, text.find('\n')), "v1,v2,estimate,ci_lo,ci_hi");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
}

TEST(Cli, MonteCarloCsvHeaderAndSidecar) {
    const auto out = path_of("mc.csv");
    ASSERT_EQ(run_cli({"montecarlo", "--table", "2", "--reps", "3", "--no-bootstrap", "--truth-draws", "1000000",
                       "--threads", "1", "--out", out}),
              0);
    const auto text = slurp(out);
    EXPECT_EQ(text.substr(0, text.find('\n')), "target,avg_bias,med_bias,rmse,coverage,ci_length");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
    EXPECT_TRUE(fs::exists(path_of("mc.json")));
    EXPECT_TRUE(fs::exists(out + ".manifest.json"));
}

TEST(Cli, OracleCsvByExtension) {
    const auto out = path_of("oracle.csv");
    ASSERT_EQ(run_cli({"oracle", "--contrast", "11:11", "--contrast", "10:01", "--kind", "mte", "--v", "0.5,0.5",
                       "--draws", "100000", "--threads", "1", "--out", out}),
              0);
    const auto text = slurp(out);
    EXPECT_EQ(text.substr(0, text.find('\n')), "contrast,value,se");
    EXPECT_NE(text.find("11:11,0,0\n"), std::string::npos) << text;
}

TEST(Cli, InvalidInputExitsWithTwo) {
    std::string err;
    EXPECT_EQ(run_cli({"estimate", "--data", path_of("missing.csv"), "--contrast", "11:00", "--out", path_of("x.json")},
                      &err),
              2);
    EXPECT_NE(err.find("missing.csv"), std::string::npos) << err;
    EXPECT_EQ(run_cli({"simulate"}), 2);
    EXPECT_EQ(run_cli({"frobnicate"}), 2);
    EXPECT_EQ(run_cli({"oracle", "--contrast", "11:0", "--out", path_of("o.json")}), 2);
}

TEST(Cli, NumericalFailureExitsWithThree) {
    const auto data = path_of("tiny.csv");
    ASSERT_EQ(run_cli({"simulate", "--seed", "3", "--n", "40", "--out", data}), 0);
    std::string err;
    EXPECT_EQ(run_cli({"estimate", "--data", data, "--contrast", "11:00", "--out", path_of("tiny.json")}, &err), 3);
    EXPECT_FALSE(err.empty());
}

TEST(Cli, HelpExitsWithZero) { EXPECT_EQ(run_cli({"--help"}), 0); }
