#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homog/grid.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string config(const char* name) { return std::string(HOMOG_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("homog_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + HOMOG_CLI + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, ValidateKernelExitCodes) {
  const auto out = scratch("vk");
  EXPECT_EQ(run("validate-kernel --config " + config("baseline_a15.ini") + " --out " + out.string()), 0);
  EXPECT_TRUE(read_json(out / "kernel_report.json")["passed"].get<bool>());
  EXPECT_EQ(run("validate-kernel --config " + config("violator.ini") + " --out " + out.string()), 2);
  const auto rep = read_json(out / "kernel_report.json");
  bool named = false;
  for (const auto& v : rep["report"]["verdicts"]) {
    if (!v["passed"].get<bool>()) named = named || v["name"] == "oscillation-decay";
  }
  EXPECT_TRUE(named);
  EXPECT_EQ(run("validate-kernel --config /nonexistent.ini --out " + out.string()), 1);
}

TEST(Cli, MalformedConfigIsOperationalError) {
  const auto bad = write_temp("homog_bad.ini", "[grid]\ndim = 1\nnot a key value\n");
  EXPECT_EQ(run("validate-kernel --config " + bad.string() + " --out " + scratch("bad").string()), 1);
}

TEST(Cli, SolveEpsCommensurability) {
  const auto out = scratch("se");
  EXPECT_EQ(run("solve-eps --config " + config("baseline_a15.ini") + " --eps 1/4 --out " + out.string()), 0);
  const auto side = read_json(out / "u_eps.json");
  EXPECT_LE(side["c1_ratio"].get<double>(), 1.0);
  EXPECT_TRUE(side["converged"].get<bool>());
  EXPECT_EQ(side["N"].get<int>(), 256);
  const auto f = homog::read_field_binary((out / "u_eps.bin").string());
  EXPECT_EQ(f.eps, 0.25);
  EXPECT_EQ(run("solve-eps --config " + config("baseline_a15.ini") + " --eps 1/3 --out " + out.string()), 0);
  EXPECT_EQ(run("solve-eps --config " + config("baseline_a15.ini") + " --eps 0.3 --out " + out.string()), 1);
  EXPECT_EQ(run("solve-eps --config " + config("baseline_a15.ini") + " --out " + out.string()), 1);
}

TEST(Cli, SolveZeroRhsWritesZeroField) {
  const auto cfg = write_temp("homog_zero.ini", "[grid]\ndim = 1\n[rhs]\ntype = zero\n");
  const auto out = scratch("zero");
  EXPECT_EQ(run("solve-eps --config " + cfg.string() + " --eps 1/2 --out " + out.string()), 0);
  EXPECT_EQ(homog::read_field_binary((out / "u_eps.bin").string()).field.max_abs(), 0.0);
  EXPECT_EQ(run("solve-eff --config " + cfg.string() + " --eps 1/2 --out " + out.string()), 0);
  EXPECT_EQ(homog::read_field_binary((out / "u_eff.bin").string()).field.max_abs(), 0.0);
}

TEST(Cli, SolveEpsNonConvergenceExitsThree) {
  const auto cfg = write_temp("homog_cap.ini", "[grid]\ndim = 1\n[solver]\nmaxit = 1\ntol = 1e-12\n");
  EXPECT_EQ(run("solve-eps --config " + cfg.string() + " --eps 1/4 --out " + scratch("cap").string()), 3);
}

TEST(Cli, StudyThresholdAndOutputs) {
  const auto out = scratch("study");
  EXPECT_EQ(run("study --config " + config("baseline_a15.ini") + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_TRUE(fs::exists(out / "report.csv"));
  EXPECT_TRUE(fs::exists(out / "report.svg"));
  EXPECT_EQ(read_json(out / "report.json")["records"].size(), 4u);

  std::ifstream in(config("baseline_a15.ini"));
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  text.replace(text.find("acceptance_threshold = 0.05"), 27, "acceptance_threshold = 1e-9");
  const auto strict = write_temp("homog_strict.ini", text);
  const auto out2 = scratch("strict");
  EXPECT_EQ(run("study --config " + strict.string() + " --out " + out2.string()), 2);
  EXPECT_TRUE(fs::exists(out2 / "report.json"));
}

TEST(Cli, StudySingleEps) {
  const auto cfg = write_temp("homog_one.ini", "[grid]\ndim = 1\n[study]\neps = [\"1/2\"]\n");
  const auto out = scratch("one");
  EXPECT_EQ(run("study --config " + cfg.string() + " --out " + out.string()), 0);
  EXPECT_TRUE(read_json(out / "report.json")["fit"]["slope"].is_null());
}

TEST(Cli, FormatFlagAndEnvOverride) {
  const auto env_dir = scratch("env");
  const auto cfg = write_temp("homog_fmt.ini", "[grid]\ndim = 1\n[study]\neps = [\"1/2\", \"1/4\"]\n");
  EXPECT_EQ(run("study --format csv --config " + cfg.string(), "NLHOMOG_OUT_DIR=" + env_dir.string()), 0);
  EXPECT_TRUE(fs::exists(env_dir / "report.csv"));
  EXPECT_FALSE(fs::exists(env_dir / "report.json"));
  const auto flag_dir = scratch("flag");
  EXPECT_EQ(run("study --format json --config " + cfg.string() + " --out " + flag_dir.string(),
                "NLHOMOG_OUT_DIR=" + env_dir.string()),
            0);
  EXPECT_TRUE(fs::exists(flag_dir / "report.json"));
  EXPECT_EQ(run("study --format xml --config " + cfg.string() + " --out " + flag_dir.string()), 1);
}

TEST(Cli, ProbeWeak) {
  const auto out = scratch("probe");
  EXPECT_EQ(run("probe-weak --config " + config("weak_probe.ini") + " --out " + out.string()), 0);
  const auto rows = read_json(out / "weak_probe.json")["rows"];
  EXPECT_EQ(rows.size(), 4u);
  const auto cfg = write_temp("homog_nodelta.ini", "[grid]\ndim = 1\n[probe]\npsi_radius = 0.5\n");
  EXPECT_EQ(run("probe-weak --config " + cfg.string() + " --out " + out.string()), 1);
}

TEST(Cli, ReportsAreByteStableExceptTiming) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  ASSERT_EQ(run("study --config " + config("baseline_a05.ini") + " --out " + a.string()), 0);
  ASSERT_EQ(run("study --config " + config("baseline_a05.ini") + " --out " + b.string()), 0);
  auto ja = read_json(a / "report.json");
  auto jb = read_json(b / "report.json");
  ja.erase("timing");
  jb.erase("timing");
  ja["run"].erase("dir");
  jb["run"].erase("dir");
  EXPECT_EQ(ja.dump(), jb.dump());
  const auto read = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  EXPECT_EQ(read(a / "report.csv"), read(b / "report.csv"));
}

TEST(Cli, MissingSubcommandOrConfig) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("study"), 1);
}
