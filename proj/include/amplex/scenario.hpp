#pragma once

#include "amplex/json_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace amplex {

// Jet whose zero jet is `values` and whose curvature forms are the given
// skew matrices (derivs = strict upper triangle, so dF_i = forms[i]).
JetForms jet_with_forms(const std::vector<Vec>& values, const std::vector<Mat>& forms);

// Named model jets:
//   hyp_a1b1      R^6 (x1..x4, y1, y2), j0F = (dy1, dy2), dF = dx12 + dx34, dx12 - dx34
//   hyp_a13b24    same, dF = dx13 + dx24, dx13 - dx24
//   ell_fat       same, dF = dx12 + dx34, dx13 - dx24
//   step2_35      R^5, j0F = (dx4, dx5), dF = dx12, dx13
//   contact3      R^3, j0F = dz, dF = dx ^ dy
//   contact5      R^5 (x1, y1, x2, y2, z), dF = dx1 ^ dy1 + dx2 ^ dy2
//   even_contact4 R^4, j0F = dx4, dF = dx12
//   exact3        R^3, dF = dx12, dx13
std::optional<JetForms> named_jet(const std::string& name);
std::vector<std::string> named_jets();

struct JiggleSpec {
  std::string oracle = "angle";  // angle, hyp46, constant
  int dim = 2;
  int c = 2;
  double C = 1.5;
  double eps0 = 0.1;
  double A = 2.0;
  int probes_per_axis = 3;
  int verify_probes_per_axis = 3;
  int max_tries = 200;
  int margin_samples = 4;
  double delta = 0.05;
  double theta0 = 0.1;
  double kappa = 0.02;
  std::vector<Covector> frame;  // initial parent frame, default the coordinate basis
};

struct Scenario {
  std::string kind;
  std::uint64_t seed = 0;
  std::optional<RelationId> relation;
  TemplateId templ;
  std::vector<JetForms> jets;
  std::vector<Covector> covectors;
  std::vector<Covector> configuration;
  int level = 1;
  int samples = 0;
  int max_config_size = 6;
  int subconfigs = 8;
  int k = 4;
  bool parallel = true;
  AmplenessConfig mc;
  JiggleSpec jiggle;
  std::optional<Json> expect;
  std::string out_dir = ".";
  Json echo;  // the accepted configuration, overrides applied
};

inline constexpr int kScenarioVersion = 1;
inline const char* const kScenarioKinds[] = {"classify", "ampleness", "template-check", "avoid-iterate", "jiggle",
                                             "signature"};

struct Overrides {
  std::optional<std::string> kind;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<std::string> out_dir;
};

// Throws ConfigError. Relative jet files resolve against base_dir.
Scenario parse_scenario(const Json& j, const std::filesystem::path& base_dir, const Overrides& ov = {});
Scenario load_scenario(const std::filesystem::path& path, const Overrides& ov = {});

enum ExitCode { kExitPass = 0, kExitFailure = 1, kExitConfig = 2, kExitInconclusive = 3 };

struct RunOutput {
  Json report;
  std::string text;
  std::optional<std::string> probes_csv;
  int exit_code = kExitPass;
};

RunOutput run_scenario(const Scenario& s);
std::string dump_report(const Json& report);

// Load, run, write report.json / report.txt / probes.csv into the output
// directory. Configuration problems come back as exit code 2 with the
// message in `error`.
int run_scenario_file(const std::filesystem::path& config, const Overrides& ov, std::string* error = nullptr,
                      RunOutput* out = nullptr);
int write_outputs(const RunOutput& out, const std::filesystem::path& dir, std::string* error = nullptr);

Json catalog_json();
std::string catalog_text();

}  // namespace amplex
