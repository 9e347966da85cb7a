#include "amplex/scenario.hpp"

#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>

namespace amplex {

namespace fs = std::filesystem;

JetForms jet_with_forms(const std::vector<Vec>& values, const std::vector<Mat>& forms) {
  if (values.empty() || values.size() != forms.size()) throw DimensionError("need one value per form");
  JetForms F = JetForms::zero(static_cast<int>(values.front().size()), static_cast<int>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (forms[i].rows() != F.n || forms[i].cols() != F.n) throw DimensionError("form has the wrong size");
    F.values[i] = values[i];
    F.derivs[i] = forms[i].triangularView<Eigen::StrictlyUpper>();
  }
  F.validate();
  return F;
}

namespace {

Vec unit(int n, int i) { return Vec::Unit(n, i); }

// dx^a ^ dx^b + s * dx^c ^ dx^d
Mat skew2(int n, int a, int b, int c = -1, int d = -1, double s = 1.0) {
  Mat m = Mat::Zero(n, n);
  m(a, b) += 1.0;
  m(b, a) -= 1.0;
  if (c >= 0) {
    m(c, d) += s;
    m(d, c) -= s;
  }
  return m;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(6) << v;
  return os.str();
}

std::string fmt_vec(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v(i));
  return s + ")";
}

}  // namespace

std::optional<JetForms> named_jet(const std::string& name) {
  if (name == "hyp_a1b1") return jet_with_forms({unit(6, 4), unit(6, 5)}, {skew2(6, 0, 1, 2, 3), skew2(6, 0, 1, 2, 3, -1)});
  if (name == "hyp_a13b24")
    return jet_with_forms({unit(6, 4), unit(6, 5)}, {skew2(6, 0, 2, 1, 3), skew2(6, 0, 2, 1, 3, -1)});
  if (name == "ell_fat") return jet_with_forms({unit(6, 4), unit(6, 5)}, {skew2(6, 0, 1, 2, 3), skew2(6, 0, 2, 1, 3, -1)});
  if (name == "step2_35") return jet_with_forms({unit(5, 3), unit(5, 4)}, {skew2(5, 0, 1), skew2(5, 0, 2)});
  if (name == "contact3") return jet_with_forms({unit(3, 2)}, {skew2(3, 0, 1)});
  if (name == "contact5") return jet_with_forms({unit(5, 4)}, {skew2(5, 0, 1, 2, 3)});
  if (name == "even_contact4") return jet_with_forms({unit(4, 3)}, {skew2(4, 0, 1)});
  if (name == "exact3") return jet_with_forms({Vec::Zero(3), Vec::Zero(3)}, {skew2(3, 0, 1), skew2(3, 0, 2)});
  return std::nullopt;
}

std::vector<std::string> named_jets() {
  return {"hyp_a1b1", "hyp_a13b24", "ell_fat", "step2_35", "contact3", "contact5", "even_contact4", "exact3"};
}

// ---------------------------------------------------------------- parsing

namespace {

JetForms parse_jet(const Json& j, const fs::path& base) {
  if (j.is_string()) {
    auto F = named_jet(j.get<std::string>());
    if (!F) throw ConfigError("unknown jet model '" + j.get<std::string>() + "'");
    return *F;
  }
  if (j.is_object() && j.contains("file")) {
    reject_unknown(j, {"file"}, "jet");
    if (!j["file"].is_string()) throw ConfigError("jet.file must be a string");
    fs::path p = j["file"].get<std::string>();
    if (p.is_relative()) p = base / p;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read jet file " + p.string());
    Json inner = Json::parse(in, nullptr, false);
    if (inner.is_discarded()) throw ConfigError("jet file " + p.string() + " is not valid JSON");
    return jet_from_json(inner);
  }
  return jet_from_json(j);
}

std::vector<Covector> parse_covectors(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of covectors");
  std::vector<Covector> out;
  for (const auto& c : j) out.push_back(vec_from_json(c, where));
  return out;
}

TemplateId parse_template(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "Hyp46Template") return TemplateId::hyp46();
    throw ConfigError("unknown template '" + j.get<std::string>() + "'");
  }
  reject_unknown(j, {"kind", "relation", "min_config_size"}, "template");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("template needs a kind");
  std::string kind = j["kind"].get<std::string>();
  if (kind == "hyp46") return TemplateId::hyp46();
  if (!j.contains("relation")) throw ConfigError("template needs a relation");
  RelationId r = relation_from_json(j["relation"]);
  if (kind == "full") return TemplateId::full(r);
  if (kind == "synthetic") {
    int m = j.contains("min_config_size") ? json_int(j["min_config_size"], "template.min_config_size") : 2;
    return TemplateId::synthetic(r, m);
  }
  throw ConfigError("unknown template kind '" + kind + "'");
}

void parse_mc(const Json& j, AmplenessConfig& mc) {
  reject_unknown(j,
                 {"n_samples", "radii", "scale", "epsilon", "target_fraction", "segment_checks",
                  "max_cross_attempts", "refine_rounds"},
                 "monte_carlo");
  if (j.contains("n_samples")) mc.n_samples = json_int(j["n_samples"], "monte_carlo.n_samples");
  if (j.contains("radii")) {
    Vec r = vec_from_json(j["radii"], "monte_carlo.radii");
    if (r.size() == 0) throw ConfigError("monte_carlo.radii must not be empty");
    mc.radii.assign(r.data(), r.data() + r.size());
  }
  if (j.contains("scale")) mc.scale = json_number(j["scale"], "monte_carlo.scale");
  if (j.contains("epsilon")) mc.epsilon = json_number(j["epsilon"], "monte_carlo.epsilon");
  if (j.contains("target_fraction")) mc.target_fraction = json_number(j["target_fraction"], "monte_carlo.target_fraction");
  if (j.contains("segment_checks")) mc.segment_checks = json_int(j["segment_checks"], "monte_carlo.segment_checks");
  if (j.contains("max_cross_attempts"))
    mc.max_cross_attempts = json_int(j["max_cross_attempts"], "monte_carlo.max_cross_attempts");
  if (j.contains("refine_rounds")) mc.refine_rounds = json_int(j["refine_rounds"], "monte_carlo.refine_rounds");
  if (mc.n_samples < 0 || !(mc.scale > 0) || !(mc.epsilon > 0) || mc.segment_checks < 0)
    throw ConfigError("monte_carlo values out of range");
  for (double r : mc.radii)
    if (!(r > 0)) throw ConfigError("monte_carlo.radii must be positive");
}

void parse_jiggle(const Json& j, JiggleSpec& s) {
  reject_unknown(j,
                 {"oracle", "dim", "c", "C", "eps0", "A", "probes_per_axis", "verify_probes_per_axis", "max_tries",
                  "margin_samples", "delta", "theta0", "kappa", "frame"},
                 "jiggle");
  if (j.contains("oracle")) {
    if (!j["oracle"].is_string()) throw ConfigError("jiggle.oracle must be a string");
    s.oracle = j["oracle"].get<std::string>();
  }
  if (s.oracle == "hyp46") s.dim = 6;
  if (j.contains("dim")) s.dim = json_int(j["dim"], "jiggle.dim");
  if (j.contains("c")) s.c = json_int(j["c"], "jiggle.c");
  if (j.contains("C")) s.C = json_number(j["C"], "jiggle.C");
  if (j.contains("eps0")) s.eps0 = json_number(j["eps0"], "jiggle.eps0");
  if (j.contains("A")) s.A = json_number(j["A"], "jiggle.A");
  if (j.contains("probes_per_axis")) s.probes_per_axis = json_int(j["probes_per_axis"], "jiggle.probes_per_axis");
  s.verify_probes_per_axis = s.probes_per_axis;
  if (j.contains("verify_probes_per_axis"))
    s.verify_probes_per_axis = json_int(j["verify_probes_per_axis"], "jiggle.verify_probes_per_axis");
  if (j.contains("max_tries")) s.max_tries = json_int(j["max_tries"], "jiggle.max_tries");
  if (j.contains("margin_samples")) s.margin_samples = json_int(j["margin_samples"], "jiggle.margin_samples");
  if (j.contains("delta")) s.delta = json_number(j["delta"], "jiggle.delta");
  if (j.contains("theta0")) s.theta0 = json_number(j["theta0"], "jiggle.theta0");
  if (j.contains("kappa")) s.kappa = json_number(j["kappa"], "jiggle.kappa");
  if (j.contains("frame")) s.frame = parse_covectors(j["frame"], "jiggle.frame");

  if (s.oracle != "angle" && s.oracle != "hyp46" && s.oracle != "constant")
    throw ConfigError("unknown jiggle oracle '" + s.oracle + "'");
  if (s.oracle == "angle" && s.dim != 2) throw ConfigError("the angle oracle is two-dimensional");
  if (s.oracle == "hyp46" && s.dim != 6) throw ConfigError("the hyp46 oracle is six-dimensional");
  if (s.dim < 1 || s.dim > 8) throw ConfigError("jiggle.dim out of range");
  if (!(s.eps0 > 0) || !(s.A > 0)) throw ConfigError("jiggle.eps0 and jiggle.A must be positive");
  if (s.probes_per_axis < 1 || s.verify_probes_per_axis < 1 || s.max_tries < 1 || s.margin_samples < 0)
    throw ConfigError("jiggle probe and try counts out of range");
  if (!(s.delta >= 0)) throw ConfigError("jiggle.delta must be non-negative");
  for (const auto& c : s.frame)
    if (c.size() != s.dim) throw ConfigError("jiggle.frame covector has the wrong dimension");
}

bool kind_known(const std::string& k) {
  for (const char* x : kScenarioKinds)
    if (k == x) return true;
  return false;
}

}  // namespace

Scenario parse_scenario(const Json& j, const fs::path& base_dir, const Overrides& ov) {
  reject_unknown(j,
                 {"version", "description", "kind", "seed", "relation", "template", "jet", "jets", "covectors",
                  "configuration", "level", "samples", "max_config_size", "subconfigs", "k", "parallel",
                  "monte_carlo", "jiggle", "expect", "output"},
                 "scenario");
  Scenario s;
  s.echo = j;
  if (!j.contains("version")) throw ConfigError("scenario is missing 'version'");
  if (json_int(j["version"], "version") != kScenarioVersion) throw ConfigError("unsupported scenario version");

  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw ConfigError("kind must be a string");
    s.kind = j["kind"].get<std::string>();
    if (ov.kind && *ov.kind != s.kind) throw ConfigError("config kind '" + s.kind + "' does not match verb '" + *ov.kind + "'");
  } else if (ov.kind) {
    s.kind = *ov.kind;
    s.echo["kind"] = s.kind;
  } else {
    throw ConfigError("scenario is missing 'kind'");
  }
  if (!kind_known(s.kind)) throw ConfigError("unknown scenario kind '" + s.kind + "'");

  if (ov.seed) {
    s.seed = *ov.seed;
    s.echo["seed"] = s.seed;
  } else if (j.contains("seed")) {
    s.seed = json_u64(j["seed"], "seed");
  } else {
    throw ConfigError("scenario is missing 'seed'");
  }

  if (j.contains("relation")) s.relation = relation_from_json(j["relation"]);
  if (j.contains("template")) s.templ = parse_template(j["template"]);
  if (j.contains("jet") && j.contains("jets")) throw ConfigError("give either 'jet' or 'jets'");
  if (j.contains("jet")) s.jets.push_back(parse_jet(j["jet"], base_dir));
  if (j.contains("jets")) {
    if (!j["jets"].is_array()) throw ConfigError("jets must be an array");
    for (const auto& x : j["jets"]) s.jets.push_back(parse_jet(x, base_dir));
  }
  if (j.contains("covectors")) s.covectors = parse_covectors(j["covectors"], "covectors");
  if (j.contains("configuration")) s.configuration = parse_covectors(j["configuration"], "configuration");
  if (j.contains("level")) s.level = json_int(j["level"], "level");
  if (j.contains("samples")) s.samples = json_int(j["samples"], "samples");
  if (ov.samples) {
    s.samples = *ov.samples;
    s.echo["samples"] = s.samples;
  }
  if (j.contains("max_config_size")) s.max_config_size = json_int(j["max_config_size"], "max_config_size");
  if (j.contains("subconfigs")) s.subconfigs = json_int(j["subconfigs"], "subconfigs");
  if (j.contains("k")) s.k = json_int(j["k"], "k");
  if (j.contains("parallel")) {
    if (!j["parallel"].is_boolean()) throw ConfigError("parallel must be a boolean");
    s.parallel = j["parallel"].get<bool>();
  }
  if (j.contains("monte_carlo")) parse_mc(j["monte_carlo"], s.mc);
  s.mc.seed = s.seed;
  s.mc.parallel = s.parallel;
  if (j.contains("jiggle")) parse_jiggle(j["jiggle"], s.jiggle);
  if (j.contains("expect")) s.expect = j["expect"];
  if (j.contains("output")) {
    reject_unknown(j["output"], {"dir"}, "output");
    if (j["output"].contains("dir")) {
      if (!j["output"]["dir"].is_string()) throw ConfigError("output.dir must be a string");
      fs::path d = j["output"]["dir"].get<std::string>();
      s.out_dir = (d.is_relative() ? base_dir / d : d).string();
    }
  }
  if (ov.out_dir) s.out_dir = *ov.out_dir;

  if (s.samples < 0 || s.max_config_size < 1 || s.subconfigs < 0) throw ConfigError("sample counts out of range");
  if (s.level < 0 || s.level > kMaxAvoidLevel) throw ConfigError("level must lie in [0, 3]");

  // per-kind requirements
  auto need_relation = [&] {
    if (!s.relation) throw ConfigError(s.kind + " needs a relation");
  };
  auto check_jets = [&] {
    for (const auto& F : s.jets)
      if (F.n != s.relation->n || F.m != s.relation->forms())
        throw ConfigError("jet shape does not match " + s.relation->name());
  };
  auto check_covectors = [&](const std::vector<Covector>& cs, const char* what) {
    for (const auto& c : cs) {
      if (c.size() != s.relation->n) throw ConfigError(std::string(what) + " covector has the wrong dimension");
      if (c.norm() == 0.0) throw ConfigError(std::string(what) + " covector is zero");
    }
  };
  if (s.kind == "classify" || s.kind == "ampleness") {
    need_relation();
    if (s.jets.size() != 1) throw ConfigError(s.kind + " needs exactly one jet");
    if (s.covectors.empty()) throw ConfigError(s.kind + " needs covectors");
    check_jets();
    check_covectors(s.covectors, "covectors");
  } else if (s.kind == "avoid-iterate") {
    need_relation();
    if (s.configuration.empty()) throw ConfigError("avoid-iterate needs a configuration");
    if (s.jets.empty() && s.samples == 0) throw ConfigError("avoid-iterate needs jets or samples");
    check_jets();
    check_covectors(s.configuration, "configuration");
    try {
      (void)HyperplaneConfig::strict(s.configuration);
    } catch (const Error& e) {
      throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
  } else if (s.kind == "template-check") {
    if (!j.contains("samples") && !ov.samples) s.samples = 200;
    if (s.samples < 1) throw ConfigError("template-check needs samples");
  } else if (s.kind == "jiggle") {
    if (s.jiggle.oracle == "hyp46" && s.jets.empty()) s.jets.push_back(*named_jet("hyp_a1b1"));
    if (s.jiggle.oracle == "hyp46" && (s.jets.size() != 1 || s.jets[0].n != 6 || s.jets[0].m != 2))
      throw ConfigError("the hyp46 oracle needs one jet on R^6 with two forms");
  } else if (s.kind == "signature") {
    if (s.k != 4) throw ConfigError("signature is provided for k = 4 only");
  }
  return s;
}

Scenario load_scenario(const fs::path& path, const Overrides& ov) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  return parse_scenario(j, path.parent_path(), ov);
}

// ---------------------------------------------------------------- running

namespace {

struct Tally {
  int failures = 0;
  int conclusive = 0;
  int inconclusive = 0;

  int exit_code() const {
    if (failures > 0) return kExitFailure;
    if (conclusive == 0 && inconclusive > 0) return kExitInconclusive;
    return kExitPass;
  }
};

SliceClassification classify_slice(const RelationId& id, const JetForms& F, const Covector& lambda) {
  switch (id.tag) {
    case RelationTag::ExactForms3: return exact_forms_classify(F, lambda);
    case RelationTag::Step2: return step2_classify(F, id.k, id.n, lambda);
    case RelationTag::Contact:
    case RelationTag::EvenContact: return contact_classify(F, id.n, lambda);
    case RelationTag::Hyp46: return first_avoidance_classify(F, lambda, Flavor::Hyp);
    case RelationTag::Ell46: return first_avoidance_classify(F, lambda, Flavor::Ell);
    case RelationTag::NoCriticalPoints: return no_critical_points_classify(F, lambda);
  }
  throw UnsupportedError("no classifier");
}

// The first-avoidance classifiers describe Avoid(R), not R itself, so the
// Monte-Carlo engine on the relation slice is not comparable to them.
bool has_relation_classifier(const RelationId& id) {
  return id.tag != RelationTag::Hyp46 && id.tag != RelationTag::Ell46;
}

std::vector<std::string> expected_strings(const Scenario& s, std::size_t count) {
  if (!s.expect) return {};
  const Json& e = *s.expect;
  std::vector<std::string> out;
  if (e.is_string()) {
    out.assign(count, e.get<std::string>());
  } else if (e.is_array()) {
    for (const auto& x : e) {
      if (!x.is_string()) throw ConfigError("expect entries must be strings");
      out.push_back(x.get<std::string>());
    }
  } else {
    throw ConfigError("expect must be a string or an array of strings");
  }
  if (out.size() != count) throw ConfigError("expect has the wrong number of entries");
  return out;
}

// "(iii) NonAmple" is matched by itself, by "(iii)" and by "NonAmple".
bool tag_matches(const std::string& e, CaseTag tag) {
  const std::string s = to_string(tag);
  if (e == s) return true;
  auto sp = s.find(' ');
  return sp != std::string::npos && (e == s.substr(0, sp) || e == s.substr(sp + 1));
}

void run_classify(const Scenario& s, Json& results, std::ostringstream& txt, Tally& t) {
  const RelationId id = *s.relation;
  const JetForms& F = s.jets.front();
  auto expected = expected_strings(s, s.covectors.size());
  Json list = Json::array();
  txt << "relation " << id.name() << "\n";
  for (std::size_t i = 0; i < s.covectors.size(); ++i) {
    const Covector& lam = s.covectors[i];
    Json entry;
    entry["covector"] = to_json(lam);
    SliceClassification c = classify_slice(id, F, lam);
    Json cj = to_json(c);
    bool ok = consistent_with_case_table(c);
    if (!expected.empty()) {
      bool match = tag_matches(expected[i], c.tag);
      entry["expected"] = expected[i];
      entry["matches_expected"] = match;
      ok = ok && match;
    }
    entry["classification"] = cj;
    entry["pass"] = ok;
    if (!ok) ++t.failures;
    if (is_conclusive(c.verdict)) ++t.conclusive;
    else ++t.inconclusive;
    txt << "  lambda " << fmt_vec(lam) << ": " << to_string(c.tag) << ", " << to_string(c.verdict);
    if (c.complement_codim) txt << ", complement codim " << *c.complement_codim;
    txt << (ok ? "" : "  FAIL") << "\n";
    list.push_back(entry);
  }
  results["slices"] = list;
}

void run_ampleness(const Scenario& s, Json& results, std::ostringstream& txt, Tally& t) {
  const RelationId id = *s.relation;
  const JetForms& F = s.jets.front();
  auto expected = expected_strings(s, s.covectors.size());
  for (const auto& e : expected)
    if (e != "ample" && e != "nonample") throw ConfigError("ampleness expectations are 'ample' or 'nonample'");
  Json list = Json::array();
  txt << "relation " << id.name() << "\n";
  for (std::size_t i = 0; i < s.covectors.size(); ++i) {
    const Covector& lam = s.covectors[i];
    PrincipalSlice slice{F, lam};
    AmplenessConfig mc = s.mc;
    mc.seed = CounterRng::mix(s.seed, i);
    if (s.samples > 0) mc.n_samples = s.samples;
    AmplenessVerdict v = ampleness_test(slice_set(id, slice), mc);
    Json entry;
    entry["covector"] = to_json(lam);
    entry["verdict"] = to_json(v);
    bool ok = true;
    if (has_relation_classifier(id)) {
      SliceClassification c = classify_slice(id, F, lam);
      bool contradiction = is_conclusive(v.kind) && is_conclusive(c.verdict) && is_ample(v.kind) != is_ample(c.verdict);
      entry["classification"] = to_json(c);
      entry["agrees_with_classification"] = !contradiction;
      ok = !contradiction;
    }
    if (!expected.empty()) {
      bool match = !is_conclusive(v.kind) || is_ample(v.kind) == (expected[i] == "ample");
      entry["expected"] = expected[i];
      entry["matches_expected"] = match;
      ok = ok && match;
    }
    entry["pass"] = ok;
    if (!ok) ++t.failures;
    if (is_conclusive(v.kind)) ++t.conclusive;
    else ++t.inconclusive;
    txt << "  lambda " << fmt_vec(lam) << ": " << to_string(v.kind) << " (" << v.n_members << "/" << v.n_samples
        << " members, " << v.n_components << " components)" << (ok ? "" : "  FAIL") << "\n";
    list.push_back(entry);
  }
  results["slices"] = list;
}

void run_template(const Scenario& s, Json& results, std::ostringstream& txt, Tally& t) {
  TemplateCheckConfig cfg;
  cfg.n_samples = s.samples;
  cfg.seed = s.seed;
  cfg.subconfigs = s.subconfigs;
  cfg.mc = s.mc;
  cfg.parallel = s.parallel;
  TemplateReport r = template_properties_check(s.templ, relation_sampler(s.templ.relation, s.max_config_size), cfg);
  results["template_report"] = to_json(r);
  t.failures += r.prop1_fail + r.prop2_fail + r.prop3_fail;
  t.conclusive += r.prop2_ample + r.prop2_nonample;
  t.inconclusive += r.prop2_inconclusive;
  if (r.prop2_slices == 0) ++t.conclusive;
  txt << "template " << r.template_name << ", " << r.samples << " samples, seed " << r.seed << "\n";
  txt << "  property I:   " << r.prop1_pass << " pass, " << r.prop1_fail << " fail\n";
  txt << "  property II:  " << r.prop2_pass << " pass, " << r.prop2_fail << " fail; slices " << r.prop2_slices
      << " (ample " << r.prop2_ample << ", non-ample " << r.prop2_nonample << ", inconclusive "
      << r.prop2_inconclusive << "), conclusive " << fmt(r.prop2_conclusive_fraction()) << "\n";
  txt << "  property III: " << r.prop3_pass << " pass, " << r.prop3_fail << " fail\n";
  for (const auto& e : r.exemplars) txt << "  exemplar " << e.sample << " [" << e.property << "] " << e.detail << "\n";
}

void run_avoid(const Scenario& s, Json& results, std::ostringstream& txt, Tally& t) {
  const RelationId id = *s.relation;
  HyperplaneConfig xi = HyperplaneConfig::strict(s.configuration);
  std::vector<JetForms> jets = s.jets;
  if (jets.empty()) {
    CounterRng rng = make_rng(s.seed, Stream::Jets);
    for (int i = 0; i < s.samples; ++i) {
      CounterRng r = rng.split(static_cast<std::uint64_t>(i));
      jets.push_back(random_member(r, id));
    }
  }
  auto expected = expected_strings(s, jets.size());
  for (const auto& e : expected)
    if (e != "member" && e != "nonmember") throw ConfigError("avoid-iterate expectations are 'member' or 'nonmember'");
  AvoidConfig cfg;
  cfg.mc = s.mc;
  clear_avoid_memo();
  Json list = Json::array();
  int members = 0, nonmembers = 0, undecided = 0;
  for (std::size_t i = 0; i < jets.size(); ++i) {
    AvoidResult r = avoid_iterate(id, jets[i], xi, s.level, cfg);
    Json entry = to_json(r);
    bool ok = true;
    if (!expected.empty() && r.verdict != Tri::Inconclusive) {
      ok = (r.verdict == Tri::Member) == (expected[i] == "member");
      entry["expected"] = expected[i];
    }
    entry["pass"] = ok;
    if (!ok) ++t.failures;
    if (r.verdict == Tri::Inconclusive) ++t.inconclusive, ++undecided;
    else ++t.conclusive, (r.verdict == Tri::Member ? ++members : ++nonmembers);
    if (s.jets.size() == jets.size()) entry["jet"] = to_json(jets[i]);
    list.push_back(entry);
  }
  clear_avoid_memo();
  results["level"] = s.level;
  results["configuration"] = to_json(xi);
  results["members"] = members;
  results["nonmembers"] = nonmembers;
  results["inconclusive"] = undecided;
  results["jets"] = list;
  txt << "Avoid^" << s.level << "(" << id.name() << ") on " << xi.size() << " covectors: " << members
      << " member, " << nonmembers << " non-member, " << undecided << " inconclusive of " << jets.size() << "\n";
}

void run_jiggle(const Scenario& s, Json& results, std::ostringstream& txt, Tally& t,
                std::optional<std::string>& csv) {
  const JiggleSpec& js = s.jiggle;
  Oracle oracle = js.oracle == "angle"   ? angle_oracle(js.delta, js.theta0, js.kappa)
                  : js.oracle == "hyp46" ? hyp46_oracle()
                                         : constant_oracle(true);
  JetForms F = js.oracle == "hyp46" ? s.jets.front() : JetForms::zero(js.dim, 1);
  Chart parent;
  parent.box = Box{Vec::Constant(js.dim, -1.0), Vec::Constant(js.dim, 1.0)};
  parent.marked = Vec::Zero(js.dim);
  std::vector<Covector> frame = js.frame;
  if (frame.empty())
    for (int i = 0; i < js.dim; ++i) frame.push_back(unit(js.dim, i));
  try {
    parent.frame = HyperplaneConfig::strict(frame);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid jiggle frame: ") + e.what());
  }
  if (!is_principal_frame(parent)) throw ConfigError("jiggle frame does not span the cotangent space");
  CubicalCover cover;
  try {
    cover = subdivide_cover({parent}, js.c, js.C);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid cover: ") + e.what());
  }
  JiggleConfig cfg;
  cfg.eps0 = js.eps0;
  cfg.A = js.A;
  cfg.seed = s.seed;
  cfg.max_tries = js.max_tries;
  cfg.probes_per_axis = js.probes_per_axis;
  cfg.margin_samples = js.margin_samples;
  cfg.parallel = s.parallel;
  results["oracle"] = oracle.name;
  results["coloring_sound"] = coloring_sound(cover);
  txt << "jiggle " << oracle.name << " on " << cover.children.size() << " children, " << cover.n_colors
      << " colors\n";
  try {
    JiggleResult r = jiggle(cover, oracle, F, cfg);
    VerifyReport v = verify_jiggle(r, cover, oracle, F, js.verify_probes_per_axis, true);
    bool within = r.total_sup <= 2.0 * js.eps0;
    bool ok = v.failed == 0 && v.schedule_ok && within;
    results["result"] = jiggle_summary(r, cover);
    results["verify"] = to_json(v);
    results["total_within_bound"] = within;
    results["pass"] = ok;
    csv = probes_csv(v);
    if (!ok) ++t.failures;
    ++t.conclusive;
    txt << "  total perturbation " << fmt(r.total_sup) << " (bound " << fmt(2.0 * js.eps0) << "), schedule "
        << (v.schedule_ok ? "ok" : "VIOLATED") << "\n";
    txt << "  probes " << v.passed << "/" << v.probes << " pass" << (ok ? "" : "  FAIL") << "\n";
  } catch (const JiggleError& e) {
    results["error"] = {{"message", e.what()}, {"child", e.child()}, {"color", e.color()}};
    results["pass"] = false;
    ++t.failures;
    txt << "  FAIL: " << e.what() << "\n";
  }
}

void run_signature(const Scenario& s, Json& results, std::ostringstream& txt, Tally& t) {
  Signature sig = wedge_signature(s.k);
  results["k"] = s.k;
  results["signature"] = {sig.positive, sig.negative};
  results["zero"] = sig.zero;
  bool ok = true;
  if (s.expect) {
    const Json& e = *s.expect;
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw ConfigError("signature expectation is a pair of integers");
    ok = e[0].get<int>() == sig.positive && e[1].get<int>() == sig.negative;
    results["expected"] = e;
  }
  results["pass"] = ok;
  if (!ok) ++t.failures;
  ++t.conclusive;
  txt << "wedge pairing on 2-forms of R^" << s.k << ": signature (" << sig.positive << ", " << sig.negative << ")"
      << (ok ? "" : "  FAIL") << "\n";
}

}  // namespace

RunOutput run_scenario(const Scenario& s) {
  RunOutput out;
  Json results = Json::object();
  std::ostringstream txt;
  txt.imbue(std::locale::classic());
  txt << "amplex " << s.kind << " scenario, seed " << s.seed << "\n";
  Tally t;
  try {
    if (s.kind == "classify") run_classify(s, results, txt, t);
    else if (s.kind == "ampleness") run_ampleness(s, results, txt, t);
    else if (s.kind == "template-check") run_template(s, results, txt, t);
    else if (s.kind == "avoid-iterate") run_avoid(s, results, txt, t);
    else if (s.kind == "jiggle") run_jiggle(s, results, txt, t, out.probes_csv);
    else if (s.kind == "signature") run_signature(s, results, txt, t);
    else throw ConfigError("unknown scenario kind '" + s.kind + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    // library-level rejection of the given inputs
    throw ConfigError(e.what());
  }
  out.exit_code = t.exit_code();
  const char* status = out.exit_code == kExitPass ? "pass" : out.exit_code == kExitFailure ? "fail" : "inconclusive";
  txt << "status: " << status << " (exit " << out.exit_code << ")\n";

  Json report;
  report["schema"] = "amplex-report";
  report["schema_version"] = 1;
  report["kind"] = s.kind;
  report["seed"] = s.seed;
  report["config"] = s.echo;
  report["results"] = results;
  report["summary"] = {{"status", status},
                       {"exit_code", out.exit_code},
                       {"failures", t.failures},
                       {"conclusive", t.conclusive},
                       {"inconclusive", t.inconclusive}};
  out.report = std::move(report);
  out.text = txt.str();
  return out;
}

std::string dump_report(const Json& report) {
  return report.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

int write_outputs(const RunOutput& out, const fs::path& dir, std::string* error) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto put = [&](const char* name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << body;
    return static_cast<bool>(f);
  };
  bool ok = put("report.json", dump_report(out.report)) && put("report.txt", out.text);
  if (ok && out.probes_csv) ok = put("probes.csv", *out.probes_csv);
  if (!ok) {
    if (error) *error = "cannot write reports into " + dir.string();
    return kExitConfig;
  }
  return out.exit_code;
}

int run_scenario_file(const fs::path& config, const Overrides& ov, std::string* error, RunOutput* out) {
  try {
    Scenario s = load_scenario(config, ov);
    RunOutput r = run_scenario(s);
    int code = write_outputs(r, s.out_dir, error);
    if (out) *out = std::move(r);
    return code;
  } catch (const ConfigError& e) {
    if (error) *error = e.what();
    return kExitConfig;
  } catch (const Json::exception& e) {
    if (error) *error = e.what();
    return kExitConfig;
  }
}

Json catalog_json() {
  Json a = Json::array();
  for (const auto& e : list_catalog())
    a.push_back({{"id", e.id}, {"kind", e.kind}, {"n", e.n}, {"forms", e.forms}, {"anchor", e.anchor}});
  return a;
}

std::string catalog_text() {
  std::ostringstream os;
  os << std::left << std::setw(22) << "id" << std::setw(10) << "kind" << std::setw(4) << "n" << std::setw(7)
     << "forms"
     << "anchor\n";
  for (const auto& e : list_catalog())
    os << std::left << std::setw(22) << e.id << std::setw(10) << e.kind << std::setw(4) << e.n << std::setw(7)
       << e.forms << e.anchor << "\n";
  return os.str();
}

}  // namespace amplex
