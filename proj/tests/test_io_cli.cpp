#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kicktop/cli.hpp"

using namespace kicktop;
using namespace kicktop::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("kicktop_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kicktop");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

bool mentions(const std::vector<Diagnostic>& d, Severity s, const std::string& text) {
  for (const auto& x : d)
    if (x.severity == s && x.message.find(text) != std::string::npos) return true;
  return false;
}

HusimiGrid small_grid() {
  return husimi(spin_coherent_state(2.5, SphericalPoint(0.8, 0.3)), HusimiResolution{6, 12});
}

}  // namespace

TEST(Config, KappaSpec) {
  const auto k = KappaSpec::parse("2.05:5:60");
  EXPECT_EQ(k.count, 60);
  EXPECT_EQ(k.values().size(), 60u);
  EXPECT_EQ(k.values().back(), 5.0);
  EXPECT_EQ(KappaSpec::parse("3").str(), "3");
  EXPECT_FALSE(KappaSpec::parse("3").is_range());
  EXPECT_THROW(KappaSpec::parse("1:2"), ConfigError);
  EXPECT_THROW(KappaSpec::parse("a"), ConfigError);
}

TEST(Config, JSpec) {
  EXPECT_EQ(JSpec::parse("1:50").values().size(), 50u);
  EXPECT_EQ(JSpec::parse("0.5:2:0.5").values().size(), 4u);
  EXPECT_EQ(JSpec::parse("1:50").str(), "1:50");
  EXPECT_THROW(JSpec::parse("0.3").values(), InvalidArgument);
}

TEST(Config, RoundTripIsByteIdentical) {
  for (const auto& sub : subcommands()) {
    RunConfig c = RunConfig::defaults_for(sub);
    c.kappa = KappaSpec::parse("0.1:4.7:13");
    c.p = kHalfPi;
    c.output = "some/dir";
    const std::string text = serialize(c);
    const std::string again = serialize(parse_config(text));
    EXPECT_EQ(text, again) << sub;
  }
  RunConfig c = RunConfig::defaults_for("husimi");
  c.theta = 0.1 + 0.2;
  c.phi = -1.0 / 3.0;
  c.orbit = "POINT";
  EXPECT_EQ(serialize(parse_config(serialize(c))), serialize(c));
}

TEST(Config, ParseErrors) {
  EXPECT_THROW(parse_config("kappa=3\n"), ConfigError);
  EXPECT_THROW(parse_config("subcommand=nope\n"), ConfigError);
  EXPECT_THROW(parse_config("subcommand=catalog\nj=5\n"), ConfigError);
  EXPECT_THROW(parse_config("subcommand=catalog\nkappa\n"), ConfigError);
  EXPECT_THROW(parse_config("subcommand=survival\nL=x\n"), ConfigError);
  const auto c = parse_config("# comment\n\nsubcommand=survival\n L = 7 \np=pi/2\n");
  EXPECT_EQ(c.L, 7);
  EXPECT_EQ(c.p, kHalfPi);
}

TEST(Validate, RangeChecks) {
  RunConfig c = RunConfig::defaults_for("survival");
  c.kappa = KappaSpec::parse("-1");
  c.L = 0;
  const auto d = validate_config(c);
  EXPECT_TRUE(mentions(d, Severity::Error, "kappa must be >= 0"));
  EXPECT_TRUE(mentions(d, Severity::Error, "L must be >= 1"));
  c = RunConfig::defaults_for("survival");
  c.j = JSpec::parse("2.3");
  EXPECT_TRUE(mentions(validate_config(c), Severity::Error, "half-integer"));
  EXPECT_FALSE(has_errors(validate_config(RunConfig::defaults_for("survival"))));
}

TEST(Validate, ExistenceWarning) {
  RunConfig c = RunConfig::defaults_for("survival");
  c.orbit = "P2B";
  c.kappa = KappaSpec::parse("4.0");
  const auto d = validate_config(c);
  EXPECT_TRUE(mentions(d, Severity::Warning, "orbit does not exist below sqrt(2)*pi"));
  EXPECT_FALSE(has_errors(d));
}

TEST(Validate, HalfIntegerWithIntegerGrid) {
  RunConfig c = RunConfig::defaults_for("heatmap");
  c.j = JSpec::parse("2.5");
  c.integer_j = true;
  EXPECT_TRUE(mentions(validate_config(c), Severity::Warning, "half-integer"));
  c.integer_j = false;
  EXPECT_FALSE(mentions(validate_config(c), Severity::Warning, "half-integer"));
}

TEST(Validate, MemoryEstimate) {
  RunConfig c = RunConfig::defaults_for("survival");
  c.j = JSpec::parse("2000");
  c.kappa = KappaSpec::parse("1.5:2.5:11");
  c.L = 200;
  EXPECT_TRUE(mentions(validate_config(c), Severity::Info, "4001x4001 complex entries"));
}

TEST(Validate, ClassicalNeedsHalfPi) {
  RunConfig c = RunConfig::defaults_for("catalog");
  c.p = 1.0;
  EXPECT_TRUE(has_errors(validate_config(c)));
}

TEST(Checksum, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(HusimiBinary, RoundTrip) {
  const auto g = small_grid();
  std::stringstream s;
  io::write_husimi_binary(s, g);
  EXPECT_EQ(s.str().size(), 64u + 8 * (6 + 6 + 12 + 72));
  const auto r = io::read_husimi_binary(s);
  EXPECT_EQ(r.j, g.j);
  EXPECT_EQ(r.theta, g.theta);
  EXPECT_EQ(r.phi, g.phi);
  EXPECT_EQ(r.values, g.values);
}

TEST(HusimiBinary, ReadsOppositeByteOrder) {
  const auto g = small_grid();
  std::stringstream s;
  io::write_husimi_binary(s, g);
  std::string b = s.str();
  auto swap = [&](std::size_t off, std::size_t n) { std::reverse(b.begin() + off, b.begin() + off + n); };
  swap(8, 4);
  swap(12, 4);
  swap(16, 8);
  swap(24, 8);
  swap(32, 8);
  for (std::size_t off = 64; off < b.size(); off += 8) swap(off, 8);
  std::stringstream t(b);
  const auto r = io::read_husimi_binary(t);
  EXPECT_EQ(r.values, g.values);
  EXPECT_EQ(r.theta_weights, g.theta_weights);
}

TEST(HusimiBinary, RejectsGarbage) {
  std::stringstream s("not a grid at all");
  EXPECT_THROW(io::read_husimi_binary(s), InvalidArgument);
}

TEST(Csv, SurvivalGridHeader) {
  const auto g = survival_heatmap(OrbitLabel::FP3, integer_j_range(1, 2), {1.5, 2.5}, 3);
  std::ostringstream os;
  io::write_survival_grid_csv(os, g);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("#orbit=FP3\n#L=3\n#period=1\n", 0), 0u);
  EXPECT_NE(s.find("1,1.5,nan\n"), std::string::npos);
}

TEST(Cli, UnknownFlagAndSubcommand) {
  auto r = invoke({"survival", "--frobnicate", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(invoke({"nope"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, ConfigErrorExitCode) {
  TempDir t;
  auto r = invoke({"survival", "--L", "0", "--output", (t / "o").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(t / "o"));
}

TEST(Cli, NumericalFailureLeavesNoOutputs) {
  TempDir t;
  auto r = invoke({"criteria", "--orbit", "FP3", "--kappa", "1.5", "--output", (t / "o").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(fs::exists(t / "o"));
}

TEST(Cli, BifurcationAndManifestRerun) {
  TempDir t;
  auto r = invoke({"bifurcation", "--orbit", "FP1", "--kappa-range", "1:3:201", "--output",
                (t / "a").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(t / "a" / "bifurcation.csv");
  EXPECT_NE(csv.find("# crossing=2.0000000"), std::string::npos);
  const std::string manifest = slurp(t / "a" / "manifest.txt");
  EXPECT_NE(manifest.find("fnv1a64=" + hex64(fnv1a64(csv))), std::string::npos);

  auto again = invoke({"--config", (t / "a" / "manifest.txt").string(), "--output", (t / "b").string()});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(t / "b" / "bifurcation.csv"), csv);

  // Config portion of the manifest reproduces exactly (apart from the output key).
  auto strip = [](const std::string& m) {
    std::string out, line;
    std::istringstream is(m);
    while (std::getline(is, line))
      if (!line.empty() && line[0] != '#' && line.rfind("output=", 0) != 0) out += line + "\n";
    return out;
  };
  EXPECT_EQ(strip(manifest), strip(slurp(t / "b" / "manifest.txt")));
  EXPECT_TRUE(fs::exists(t / "b" / "manifest.json"));
}

TEST(Cli, DeterministicOutputs) {
  TempDir t;
  for (const char* d : {"x", "y"})
    ASSERT_EQ(invoke({"phase-portrait", "--kappa", "3.0", "--n-init", "40", "--kicks", "20", "--seed",
                   "3", "--output", (t / d).string()})
                  .code,
              0);
  EXPECT_EQ(slurp(t / "x" / "phase_portrait.csv"), slurp(t / "y" / "phase_portrait.csv"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  TempDir t;
  {
    std::ofstream f(t / "run.cfg");
    f << "subcommand=survival\norbit=P4\nj=6\nkappa=1.5\nL=50\n";
  }
  auto r = invoke({"--config", (t / "run.cfg").string(), "survival", "--j", "20", "--output",
                (t / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(t / "o" / "survival.csv");
  EXPECT_NE(csv.find("P4,20,1.5,50,"), std::string::npos);
}

TEST(Cli, SurvivalMissingOrbitIsNaN) {
  TempDir t;
  auto r = invoke({"survival", "--orbit", "P2B", "--kappa", "4.0", "--j", "3", "--output",
                (t / "o").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("orbit does not exist below sqrt(2)*pi"), std::string::npos);
  EXPECT_NE(slurp(t / "o" / "survival.csv").find(",nan"), std::string::npos);
}

TEST(Cli, HusimiBinaryOutput) {
  TempDir t;
  auto r = invoke({"husimi", "--j", "4", "--kicks", "0,2", "--grid", "10", "--binary", "--output",
                (t / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(t / "o" / "husimi_k0002.bin", std::ios::binary);
  const auto g = io::read_husimi_binary(in);
  EXPECT_EQ(g.theta.size(), 10u);
  EXPECT_EQ(g.phi.size(), 20u);
  EXPECT_TRUE(fs::exists(t / "o" / "husimi_k0000.csv"));
}

TEST(Cli, EverySubcommandRuns) {
  TempDir t;
  const std::vector<std::vector<std::string>> runs{
      {"catalog", "--kappa", "2.5"},
      {"heatmap", "--orbit", "P2A", "--j", "1:3", "--kappa", "2.05:5:4", "--L", "5"},
      {"criteria", "--orbit", "P4", "--kappa", "1.5", "--j", "6", "--partners", "auto"},
      {"find-orbits", "--period", "1", "--kappa", "2.5", "--seed-grid", "10"},
      {"husimi", "--j", "3", "--kicks", "4", "--average", "--grid", "8"},
  };
  int i = 0;
  for (auto args : runs) {
    args.push_back("--output");
    args.push_back((t / ("r" + std::to_string(i++))).string());
    const auto r = invoke(args);
    EXPECT_EQ(r.code, 0) << args[0] << ": " << r.err;
  }
  EXPECT_NE(slurp(t / "r2" / "criteria.csv").find("# j_min=27"), std::string::npos);
  EXPECT_NE(slurp(t / "r3" / "orbits.csv").find("# converged_seeds=100"), std::string::npos);
}
