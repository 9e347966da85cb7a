#include "amplex/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<std::string> out;
  bool json = false;
};

void add_flags(CLI::App* cmd, Flags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "scenario file (JSON)");
  if (needs_config) c->required();
  cmd->add_option("--seed", f.seed, "override the scenario seed");
  cmd->add_option("--out", f.out, "output directory for report files");
  cmd->add_option("--samples", f.samples, "override the sample count");
  cmd->add_flag("--json", f.json, "print report.json instead of the text summary");
}

int run_verb(const std::string& verb, const Flags& f) {
  amplex::Overrides ov;
  ov.kind = verb;
  ov.seed = f.seed;
  ov.samples = f.samples;
  ov.out_dir = f.out;
  std::string error;
  amplex::RunOutput out;
  int code;
  if (f.config.empty()) {
    // no file: a default scenario for the verb, seed from the command line
    try {
      amplex::Json j = {{"version", amplex::kScenarioVersion}};
      amplex::Scenario s = amplex::parse_scenario(j, ".", ov);
      out = amplex::run_scenario(s);
      code = amplex::write_outputs(out, s.out_dir, &error);
    } catch (const amplex::ConfigError& e) {
      error = e.what();
      code = amplex::kExitConfig;
    }
  } else {
    code = amplex::run_scenario_file(f.config, ov, &error, &out);
  }
  if (code == amplex::kExitConfig) {
    std::cerr << "amplex: " << error << "\n";
    return code;
  }
  std::cout << (f.json ? amplex::dump_report(out.report) : out.text);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amplex: ampleness, avoidance templates and jiggling for differential relations"};
  app.require_subcommand(1);

  Flags flags;
  for (const char* verb : amplex::kScenarioKinds) {
    auto* cmd = app.add_subcommand(verb, std::string("run a scenario of kind ") + verb);
    add_flags(cmd, flags, false);
    cmd->callback([verb, &flags] { throw CLI::RuntimeError(run_verb(verb, flags)); });
  }
  bool catalog_json = false;
  auto* cat = app.add_subcommand("catalog", "list relations and templates");
  cat->add_flag("--json", catalog_json, "print JSON");
  cat->callback([&catalog_json] {
    std::cout << (catalog_json ? amplex::catalog_json().dump(2) + "\n" : amplex::catalog_text());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : amplex::kExitConfig;
  }
  return 0;
}
