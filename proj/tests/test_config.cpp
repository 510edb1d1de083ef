#include <gtest/gtest.h>

#include "homog/config.hpp"
#include "homog/error.hpp"

using namespace homog;

namespace {

const std::string kIni = R"([grid]
dim = 1
T = 8
rho = 8

[study]
alpha = 1.5
eps = ["1/2", 0.25]
acceptance_threshold = 0.05

[kernel]
family = pareto
inner_radius = 0.5

[coefficient]
family = "separable-trig"
amplitude = 0.5

[rhs]
type = harmonics
harmonics = [[1, 0, 1.0], [3, 0, 0.5]]

[probe]
delta = 0.25
x0 = [-1.1]

[output]
dir = out/x
formats = json
seed = 42
)";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config_ini(text, "t.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return {};
}

}  // namespace

TEST(Config, ParsesIni) {
  const RunConfig rc = parse_config_ini(kIni, "t.ini");
  EXPECT_EQ(rc.study.dim, 1);
  EXPECT_EQ(rc.study.alpha, 1.5);
  EXPECT_EQ(rc.study.schedule(), (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(rc.study.kernel.params.inner_radius, 0.5);
  EXPECT_EQ(rc.study.coefficient.family, "separable-trig");
  ASSERT_EQ(rc.study.rhs.harmonics.size(), 2u);
  EXPECT_EQ(rc.study.rhs.harmonics[1].k[0], 3);
  EXPECT_EQ(rc.study.rhs.harmonics[1].amplitude, 0.5);
  EXPECT_EQ(*rc.study.acceptance_threshold, 0.05);
  EXPECT_TRUE(rc.probe_delta_given);
  EXPECT_EQ(rc.study.diagnostics.weak.x0[0], -1.1);
  EXPECT_EQ(rc.formats, std::vector<std::string>{"json"});
  EXPECT_EQ(rc.seed, 42u);
  EXPECT_EQ(rc.study.validation.oscillation.seed, 42u);
}

TEST(Config, JsonIsTheSameSchema) {
  const std::string json = R"({
    "grid": {"dim": 1, "T": 8, "rho": 8},
    "study": {"alpha": 1.5, "eps": ["1/2", 0.25], "acceptance_threshold": 0.05},
    "kernel": {"family": "pareto", "inner_radius": 0.5},
    "coefficient": {"family": "separable-trig", "amplitude": 0.5},
    "rhs": {"type": "harmonics", "harmonics": [[1, 0, 1.0], [3, 0, 0.5]]},
    "probe": {"delta": 0.25, "x0": [-1.1]},
    "output": {"dir": "out/x", "formats": ["json"], "seed": 42}
  })";
  const RunConfig a = parse_config_ini(kIni, "t.ini");
  const RunConfig b = parse_config_json(json, "t.json");
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"baseline_a05.ini", "baseline_a15.ini", "baseline_a15.json", "violator.ini", "log_plain.ini",
                           "log_sv.ini", "anisotropic_d2.ini", "weak_probe.ini"}) {
    EXPECT_NO_THROW(load_config(std::string(HOMOG_CONFIG_DIR) + "/" + name)) << name;
  }
  const auto a = load_config(std::string(HOMOG_CONFIG_DIR) + "/baseline_a15.ini");
  const auto b = load_config(std::string(HOMOG_CONFIG_DIR) + "/baseline_a15.json");
  EXPECT_EQ(to_json(a.study).dump(), to_json(b.study).dump());
}

TEST(Config, ErrorsCarryLocation) {
  EXPECT_NE(expect_config_error("[grid]\ndim = 1\n[kernel]\nfamily = nope\n").find("[kernel] family"), std::string::npos);
  EXPECT_NE(expect_config_error("[grid]\ndimm = 1\n").find("[grid] dimm: unknown key"), std::string::npos);
  EXPECT_NE(expect_config_error("[grid]\ndim = \"one\"\n").find("[grid] dim"), std::string::npos);
  EXPECT_NE(expect_config_error("[grdi]\ndim = 1\n").find("unknown section"), std::string::npos);
  EXPECT_NE(expect_config_error("[grid]\ndim = 1\nbroken line\n").find("t.ini:3"), std::string::npos);
  EXPECT_NE(expect_config_error("[study]\neps = [0.3]\n").find("T/eps"), std::string::npos);
  EXPECT_NE(expect_config_error("[study]\neps = [\"1/x\"]\n").find("[study] eps"), std::string::npos);
  EXPECT_THROW(parse_config_json("{\"grid\": ", "t.json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, DefaultsWhenSectionsMissing) {
  const RunConfig rc = parse_config_ini("[grid]\ndim = 1\n", "t.ini");
  EXPECT_EQ(rc.study.kernel.family, "pareto");
  EXPECT_FALSE(rc.probe_delta_given);
  EXPECT_EQ(rc.study.schedule().size(), 4u);
}

TEST(Config, Rationals) {
  EXPECT_EQ(parse_rational("1/4"), 0.25);
  EXPECT_DOUBLE_EQ(parse_rational("1/3"), 1.0 / 3.0);
  EXPECT_EQ(parse_rational("0.125"), 0.125);
  EXPECT_THROW(parse_rational("1/0"), InvalidArgument);
  EXPECT_THROW(parse_rational("abc"), InvalidArgument);
  EXPECT_THROW(parse_rational(""), InvalidArgument);
}
