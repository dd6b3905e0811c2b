#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mnm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Meta-analysis tests in the many normal means model"};
  app.require_subcommand(1);

  std::string config_path;
  mnm::Overrides ov;
  std::uint64_t seed = 0, reps = 0;
  std::string out, format, tests;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Root seed (unsigned 64-bit)");
    sub->add_option("--reps", reps, "Monte Carlo replicates")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Output file (stdout when omitted)");
    sub->add_option("--format", format, "csv, json or svg")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
    sub->add_option("--tests", tests, "Comma-separated test names");
  };
  for (const char* name : {"roc", "risk", "rates", "calibrate", "quantize"}) {
    add_common(app.add_subcommand(name));
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--reps")) ov.reps = reps;
  if (sub->count("--out")) ov.out = out;
  if (sub->count("--format")) ov.format = format;
  if (sub->count("--tests")) ov.tests = tests;
  return mnm::run(sub->get_name(), config_path, ov, std::cout, std::cerr);
}
