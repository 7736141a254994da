#include "cli/app.hpp"
#include "cli/config.hpp"
#include "cli/report.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace anisolab::cli;

namespace {

constexpr const char* exit_time_yaml = R"(experiment: exit-time
seed: 7
indices: [1.0, 1.5]
coefficients:
  preset: identity
sampling:
  n_paths: 500
parameters:
  center: [0, 0]
  r_list: [0.1, 0.2, 0.4, 0.8]
)";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

/// CSV text with the wall-clock column removed from every line.
std::string without_wall_time(const std::string& csv) {
    std::string out;
    for (const auto& line : lines(csv)) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
    return out;
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;
    std::ostringstream out, err;

    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("anisolab_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    fs::path write(const std::string& name, const std::string& text) {
        const fs::path p = dir / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    int run(std::vector<std::string> args) {
        out.str("");
        err.str("");
        args.insert(args.begin(), "anisolab");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    }
};

} // namespace

TEST(Report, HeaderIsExact) {
    EXPECT_EQ(csv_header,
              "experiment,param_name,param_value,estimate,std_error,ci95_lo,ci95_hi,n_samples,censored_fraction,seed,"
              "wall_time_s");
}

TEST_F(Cli, RunWritesCsvAndSidecar) {
    const auto cfg = write("scan.yaml", exit_time_yaml);
    ASSERT_EQ(run({"run", cfg.string(), "--out", (dir / "o").string()}), exit_ok) << err.str();
    const auto rows = lines(slurp(dir / "o" / "scan.csv"));
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], csv_header);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split(rows[i]);
        ASSERT_EQ(cells.size(), 11u);
        EXPECT_EQ(cells[0], "exit-time");
        EXPECT_EQ(cells[9], "7");
        EXPECT_LE(std::stod(cells[5]), std::stod(cells[3]));
        EXPECT_GE(std::stod(cells[6]), std::stod(cells[3]));
    }
    EXPECT_EQ(split(rows[1])[1], "r");
    EXPECT_EQ(split(rows[5])[1], "slope");

    const auto sidecar = nlohmann::json::parse(slurp(dir / "o" / "scan.json"));
    EXPECT_EQ(sidecar["config"]["experiment"], "exit-time");
    EXPECT_EQ(sidecar["config"]["seed"], 7);
    EXPECT_EQ(sidecar["config"]["sampling"]["n_paths"], 500);
    EXPECT_EQ(sidecar["config"]["sampling"]["max_censored_fraction"], 0.01);
    EXPECT_EQ(sidecar["config"]["parameters"]["r_list"].size(), 4u);
    EXPECT_TRUE(sidecar["derived"].contains("simulation"));
    EXPECT_FALSE(fs::exists(dir / "o" / "scan.svg"));
}

TEST_F(Cli, ReportsDoNotDependOnThreadsOrReruns) {
    const auto cfg = write("scan.yaml", exit_time_yaml);
    ASSERT_EQ(run({"run", cfg.string(), "--threads", "1", "--out", (dir / "a").string()}), exit_ok);
    ASSERT_EQ(run({"run", cfg.string(), "--threads", "1", "--out", (dir / "b").string()}), exit_ok);
    ASSERT_EQ(run({"run", cfg.string(), "--threads", "4", "--out", (dir / "c").string()}), exit_ok);
    const auto a = without_wall_time(slurp(dir / "a" / "scan.csv"));
    EXPECT_EQ(a, without_wall_time(slurp(dir / "b" / "scan.csv")));
    EXPECT_EQ(a, without_wall_time(slurp(dir / "c" / "scan.csv")));
}

TEST_F(Cli, SeedOverride) {
    const auto cfg = write("scan.yaml", exit_time_yaml);
    ASSERT_EQ(run({"run", cfg.string(), "--seed", "99", "--out", (dir / "a").string()}), exit_ok);
    ASSERT_EQ(run({"run", cfg.string(), "--out", (dir / "b").string()}), exit_ok);
    const auto rows = lines(slurp(dir / "a" / "scan.csv"));
    EXPECT_EQ(split(rows[1])[9], "99");
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "a" / "scan.json"))["config"]["seed"], 99);
    EXPECT_NE(split(rows[1])[3], split(lines(slurp(dir / "b" / "scan.csv"))[1])[3]);
}

TEST_F(Cli, PlotIsLogLogForScalingExperiments) {
    const auto cfg = write("scan.yaml", exit_time_yaml);
    ASSERT_EQ(run({"run", cfg.string(), "--plot", "--out", dir.string()}), exit_ok);
    const auto svg = slurp(dir / "scan.svg");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("r (log)"), std::string::npos);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "scan.json"))["outputs"]["svg"], (dir / "scan.svg").string());
}

TEST_F(Cli, EnvironmentSetsDefaultOutputDirectory) {
    const auto cfg = write("scan.yaml", exit_time_yaml);
    const fs::path target = dir / "from_env";
    ::setenv(output_dir_env, target.c_str(), 1);
    const int rc = run({"run", cfg.string()});
    ::unsetenv(output_dir_env);
    ASSERT_EQ(rc, exit_ok) << err.str();
    EXPECT_TRUE(fs::exists(target / "scan.csv"));
    EXPECT_TRUE(fs::exists(target / "scan.json"));
}

TEST_F(Cli, ConfigErrorsExitWithOne) {
    EXPECT_EQ(run({"run", (dir / "missing.yaml").string()}), exit_config_error);
    EXPECT_EQ(run({"validate", (dir / "missing.yaml").string()}), exit_config_error);
    EXPECT_EQ(run({"frobnicate"}), exit_config_error);
    const auto cfg = write("scan.yaml", exit_time_yaml);
    EXPECT_EQ(run({"run", cfg.string(), "--threads", "0"}), exit_config_error);
    EXPECT_EQ(run({"run", write("bad.yaml", "experiment: [unterminated\n").string()}), exit_config_error);
}

TEST_F(Cli, RuntimeErrorsExitWithTwo) {
    const auto cfg = write("censored.yaml", R"(experiment: exit-time
seed: 1
indices: [1.0, 1.5]
coefficients:
  preset: identity
sampling:
  n_paths: 200
  jump_threshold: 0.01
  grid_step: 0.001
  horizon: 0.00001
parameters:
  center: [0, 0]
  r_list: [0.5]
)");
    EXPECT_EQ(run({"run", cfg.string(), "--out", dir.string()}), exit_runtime_error);
    EXPECT_NE(err.str().find("censored"), std::string::npos) << err.str();

    const auto ok = write("scan.yaml", exit_time_yaml);
    const auto blocker = write("not_a_dir", "x");
    EXPECT_EQ(run({"run", ok.string(), "--out", (blocker / "sub").string()}), exit_runtime_error);
}

TEST_F(Cli, ValidateCitesTheViolatedConstraint) {
    const auto cfg = write("bad.yaml", R"(experiment: jump-exit
seed: 1
indices: [2.0, 1.5]
coefficients:
  preset: identity
sampling:
  n_paths: 10
parameters:
  center: [0, 0]
  r: 0.1
  R_list: [0.15, 0.4]
)");
    EXPECT_EQ(run({"validate", cfg.string()}), exit_config_error);
    const auto msg = err.str();
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(0,2)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("R >= 2r"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 11"), std::string::npos) << msg;
    EXPECT_NE(msg.find("2 problem(s)"), std::string::npos) << msg;
}

TEST_F(Cli, ValidateListsEveryMissingFieldAndUnknownKey) {
    EXPECT_EQ(run({"validate", write("empty.yaml", "").string()}), exit_config_error);
    for (const char* field : {"experiment", "seed", "indices", "coefficients", "sampling", "sampling.n_paths",
                              "parameters"})
        EXPECT_NE(err.str().find(std::string(field) + ": required field is missing"), std::string::npos) << field;

    std::string text = exit_time_yaml;
    text += "bogus: 3\n";
    EXPECT_EQ(run({"validate", write("extra.yaml", text).string()}), exit_config_error);
    EXPECT_NE(err.str().find("line 11: bogus: unknown key"), std::string::npos) << err.str();
}

TEST_F(Cli, PartialSamplingTripleIsRejected) {
    std::string text = exit_time_yaml;
    text.replace(text.find("  n_paths: 500\n"), 14, "  n_paths: 500\n  horizon: 2.0\n");
    const auto parsed = parse_config_text(text);
    ASSERT_FALSE(parsed.diagnostics.empty());
    EXPECT_FALSE(parsed.config.has_value());
    EXPECT_EQ(parsed.diagnostics.front().field, "sampling");
}

TEST_F(Cli, ShippedConfigsValidate) {
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(ANISOLAB_CONFIG_DIR)) {
        if (entry.path().extension() != ".yaml") continue;
        ++count;
        EXPECT_EQ(run({"validate", entry.path().string()}), exit_ok) << entry.path() << '\n' << err.str();
    }
    EXPECT_GE(count, 11u);
}

TEST_F(Cli, DriverSelftestRows) {
    const auto cfg = write("selftest.yaml", R"(experiment: driver-selftest
seed: 3
parameters:
  gammas: [0.5, 1.5]
  xis: [1.0, 2.0]
  n_samples: 20000
)");
    ASSERT_EQ(run({"run", cfg.string(), "--out", dir.string()}), exit_ok) << err.str();
    const auto rows = lines(slurp(dir / "selftest.csv"));
    ASSERT_GE(rows.size(), 5u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(split(rows[i])[0], "driver-selftest");
}
