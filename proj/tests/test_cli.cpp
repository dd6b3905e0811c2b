#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "mnm/cli.hpp"
#include "mnm/emit.hpp"
#include "mnm/error.hpp"

using namespace mnm;
using nlohmann::json;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mnm_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json fig1_d2() {
  return {{"seed", 2024},
          {"d", 2},
          {"n", 30},
          {"m", 20},
          {"rho2", 0.011785113019775792},
          {"tests", {"chisq-combined", "uncoordinated-directional", "coordinated-projection"}},
          {"alphas", {0.05, 0.1}},
          {"reps", 300},
          {"workers", 2}};
}

struct RunResult {
  int status;
  std::string out;
  std::string err;
};

RunResult run_json(const std::string& sub, const json& doc, const Overrides& ov = {}) {
  const auto path = temp_file("config.json");
  std::ofstream(path) << doc.dump();
  std::ostringstream out, err;
  const int status = run(sub, path, ov, out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST(Config, ParsesAndEchoes) {
  const ExperimentConfig c = ExperimentConfig::from_json(fig1_d2());
  EXPECT_EQ(*c.seed, 2024u);
  EXPECT_EQ(c.scenario.d, 2);
  EXPECT_NEAR(c.scenario.rho * c.scenario.rho, 0.011785113019775792, 1e-17);
  EXPECT_EQ(c.tests.size(), 3u);
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Config, SeedAcceptsFullRange) {
  json doc = fig1_d2();
  doc["seed"] = "18446744073709551615";
  EXPECT_EQ(*ExperimentConfig::from_json(doc).seed, 18446744073709551615ull);
  doc["seed"] = 18446744073709551615ull;
  EXPECT_EQ(*ExperimentConfig::from_json(doc).seed, 18446744073709551615ull);
  doc["seed"] = -1;
  EXPECT_THROW(ExperimentConfig::from_json(doc), ConfigError);
  doc["seed"] = "12x";
  EXPECT_THROW(ExperimentConfig::from_json(doc), ConfigError);
}

TEST(Config, Errors) {
  json doc = fig1_d2();
  doc["colour"] = "red";
  EXPECT_THROW(ExperimentConfig::from_json(doc), ConfigError);
  doc = fig1_d2();
  doc["rho"] = 0.1;
  EXPECT_THROW(ExperimentConfig::from_json(doc), ConfigError);
  doc = fig1_d2();
  doc["d"] = "two";
  EXPECT_THROW(ExperimentConfig::from_json(doc), ConfigError);
  doc = fig1_d2();
  doc.erase("seed");
  EXPECT_THROW(ExperimentConfig::from_json(doc).validate("roc"), ConfigError);
  doc = fig1_d2();
  doc["tests"] = {"chisq-combined", "bogus"};
  EXPECT_THROW(ExperimentConfig::from_json(doc).validate("roc"), UnknownTestError);
  doc = fig1_d2();
  doc["alphas"] = {0.0};
  EXPECT_THROW(ExperimentConfig::from_json(doc).validate("roc"), ConfigError);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST(Config, Overrides) {
  ExperimentConfig c = ExperimentConfig::from_json(fig1_d2());
  Overrides o;
  o.seed = 9;
  o.reps = 10;
  o.out = "x.csv";
  o.format = "json";
  o.tests = "pooled,single-trial";
  apply_overrides(c, o);
  EXPECT_EQ(*c.seed, 9u);
  EXPECT_EQ(c.reps, 10u);
  EXPECT_EQ(c.out, "x.csv");
  EXPECT_EQ(c.format, OutputFormat::json);
  EXPECT_EQ(c.tests, (std::vector<std::string>{"pooled", "single-trial"}));
  o = {};
  o.format = "xml";
  EXPECT_THROW(apply_overrides(c, o), ConfigError);
}

TEST(Emit, RocCsvContract) {
  RocCurve c;
  c.test = "pooled";
  c.points = {{0.05, 0.04, 0.5}, {0.1, 0.09, 0.625}};
  c.reps = 2000;
  c.seed = 3;
  const std::string csv = render(std::vector<RocCurve>{c}, OutputFormat::csv);
  EXPECT_EQ(csv,
            "alpha,fpr,tpr,test,reps,seed\n"
            "0.05,0.04,0.5,pooled,2000,3\n"
            "0.1,0.09,0.625,pooled,2000,3\n");
  EXPECT_EQ(render(std::vector<RocCurve>{}, OutputFormat::csv), "alpha,fpr,tpr,test,reps,seed\n");
  EXPECT_EQ(render(std::vector<RocCurve>{c}, OutputFormat::csv, "{\"seed\":3}"),
            "# config: {\"seed\":3}\n" + csv);
}

TEST(Emit, JsonAndSvg) {
  RocCurve c;
  c.test = "pooled";
  c.points = {{0.05, 0.04, 0.5}};
  const std::string j = render(std::vector<RocCurve>{c}, OutputFormat::json, "{\"seed\":3}");
  const json doc = json::parse(j);
  EXPECT_EQ(doc["config"]["seed"], 3);
  EXPECT_EQ(doc["results"][0]["points"][0]["tpr"], 0.5);
  const std::string svg = render(std::vector<RocCurve>{c}, OutputFormat::svg);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_THROW(render(std::vector<QuantizeRow>{}, OutputFormat::svg), ConfigError);
  EXPECT_EQ(parse_output_format("svg"), OutputFormat::svg);
  EXPECT_THROW(parse_output_format("png"), ConfigError);
}

TEST(Emit, DeterministicAndWritesFiles) {
  RiskEstimate r;
  r.test = "chisq-combined";
  r.alpha = 0.05;
  r.type1 = 0.051;
  r.type2 = 0.3;
  r.reps = 1000;
  const ResultSet rs = std::vector<RiskEstimate>{r};
  EXPECT_EQ(render(rs, OutputFormat::csv), render(rs, OutputFormat::csv));
  EXPECT_EQ(render(rs, OutputFormat::json), render(rs, OutputFormat::json));
  const auto p = temp_file("risk.csv");
  emit(rs, OutputFormat::csv, p);
  EXPECT_EQ(slurp(p), render(rs, OutputFormat::csv));
  EXPECT_THROW(emit(rs, OutputFormat::csv, "/nonexistent/dir/out.csv"), std::runtime_error);
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.3333333333333333");
}

TEST(Cli, RocRunWritesFileAndSummary) {
  const auto out = temp_file("roc.csv");
  Overrides ov;
  ov.out = out.string();
  const RunResult r = run_json("roc", fig1_d2(), ov);
  ASSERT_EQ(r.status, kExitOk) << r.err;
  EXPECT_NE(r.out.find("chisq-combined: alpha=0.05"), std::string::npos);
  EXPECT_NE(r.out.find("coordinated-projection: alpha=0.05"), std::string::npos);
  const std::string text = slurp(out);
  EXPECT_EQ(text.rfind("# config: ", 0), 0u);
  EXPECT_NE(text.find("\nalpha,fpr,tpr,test,reps,seed\n"), std::string::npos);
}

TEST(Cli, EchoReplaysByteIdentically) {
  const auto out1 = temp_file("replay1.csv");
  Overrides ov;
  ov.out = out1.string();
  ASSERT_EQ(run_json("roc", fig1_d2(), ov).status, kExitOk);
  const std::string first = slurp(out1);
  const std::string echo = first.substr(10, first.find('\n') - 10);

  json doc = json::parse(echo);
  const auto out2 = temp_file("replay2.csv");
  doc["out"] = out2.string();
  doc["workers"] = 5;  // worker count must not matter
  ASSERT_EQ(run_json("roc", doc).status, kExitOk);
  std::string second = slurp(out2);
  // Only the echoed out/workers fields differ.
  json d1 = json::parse(echo), d2 = json::parse(second.substr(10, second.find('\n') - 10));
  d1.erase("out");
  d1.erase("workers");
  d2.erase("out");
  d2.erase("workers");
  EXPECT_EQ(d1, d2);
  EXPECT_EQ(first.substr(first.find('\n')), second.substr(second.find('\n')));
}

TEST(Cli, UnknownTestExitsTwoWithRegistry) {
  Overrides ov;
  ov.tests = "chisq-combined,made-up";
  const RunResult r = run_json("roc", fig1_d2(), ov);
  EXPECT_EQ(r.status, kExitUnknownTest);
  EXPECT_NE(r.err.find("made-up"), std::string::npos);
  EXPECT_NE(r.err.find("coordinated-projection"), std::string::npos);
}

TEST(Cli, MissingSeedFails) {
  json doc = fig1_d2();
  doc.erase("seed");
  const RunResult r = run_json("roc", doc);
  EXPECT_EQ(r.status, kExitFailure);
  EXPECT_NE(r.err.find("seed"), std::string::npos);
  Overrides ov;
  ov.seed = 1;
  EXPECT_EQ(run_json("roc", doc, ov).status, kExitOk);
}

TEST(Cli, FewTrialsGiveZeroRows) {
  json doc = fig1_d2();
  doc["d"] = 5;
  doc["m"] = 3;
  doc["rho"] = 0.3;
  doc.erase("rho2");
  const RunResult r = run_json("roc", doc);
  ASSERT_EQ(r.status, kExitOk) << r.err;
  EXPECT_NE(r.out.find("0.05,0,0,uncoordinated-directional"), std::string::npos);
  EXPECT_NE(r.err.find("uncoordinated-directional: unsupported"), std::string::npos);
}

TEST(Cli, RepsOverrideWidensBands) {
  Overrides few;
  few.reps = 10;
  const RunResult a = run_json("risk", [] {
    json d = fig1_d2();
    d["reps"] = 2000;
    return d;
  }());
  ASSERT_EQ(a.status, kExitOk);
  const RunResult small = run_json("roc", fig1_d2(), few);
  ASSERT_EQ(small.status, kExitOk);
  EXPECT_NE(small.out.find(",10,2024\n"), std::string::npos);
  // risk rejects reps < 100, roc accepts it
  EXPECT_EQ(run_json("risk", fig1_d2(), few).status, kExitFailure);
  auto band_of = [](const std::string& err) {
    const auto pos = err.find("band=");
    return std::stod(err.substr(pos + 5));
  };
  const RunResult big = run_json("roc", fig1_d2());
  EXPECT_GT(band_of(small.err), band_of(big.err));
}

TEST(Cli, OtherSubcommands) {
  json risk = fig1_d2();
  risk["reps"] = 200;
  RunResult r = run_json("risk", risk);
  ASSERT_EQ(r.status, kExitOk) << r.err;
  EXPECT_NE(r.out.find("test,alpha,type1,type1_band,type2,type2_band"), std::string::npos);

  json cal = fig1_d2();
  cal["tests"] = {"edgington-directional", "chisq-combined"};
  cal["calibration_reps"] = 2000;
  r = run_json("calibrate", cal);
  ASSERT_EQ(r.status, kExitOk) << r.err;
  EXPECT_NE(r.out.find("test,d,n,m,alpha,kappa,reps,seed"), std::string::npos);
  EXPECT_NE(r.err.find("analytic="), std::string::npos);

  json rates = {{"seed", 5},
                {"tests", {"chisq-combined", "edgington-directional"}},
                {"grid", {{"d", {2}}, {"m", {8, 16}}, {"n", {30}}}},
                {"c_values", {1.0, 8.0}},
                {"reps", 100},
                {"calibration_reps", 2000}};
  r = run_json("rates", rates);
  ASSERT_EQ(r.status, kExitOk) << r.err;
  EXPECT_NE(r.out.find("d,m,n,c,rate,rho2,test,alpha,power,band,supported,reps,seed"),
            std::string::npos);

  json q = {{"seed", 1}, {"quantize", {{"x", {5.25, 1.0 / 3.0}}, {"bits", {6, 12}}, {"eps", {0.01}}}}};
  r = run_json("quantize", q);
  ASSERT_EQ(r.status, kExitOk) << r.err;
  EXPECT_NE(r.out.find("x,bits,approx,error,bound\n5.25,6,5.25,0,"), std::string::npos);
  EXPECT_NE(r.err.find("within_bound=6"), std::string::npos);

  EXPECT_EQ(run_json("plot", q).status, kExitFailure);
}

TEST(Cli, SvgOutput) {
  Overrides ov;
  ov.format = "svg";
  const RunResult r = run_json("roc", fig1_d2(), ov);
  ASSERT_EQ(r.status, kExitOk);
  EXPECT_EQ(r.out.rfind("<svg", 0), 0u);
}
