#include "amplex/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace amplex {

void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
    if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + where);
  }
}

double json_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + " must be finite");
  return v;
}

int json_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  auto v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(where + " is out of range");
  return static_cast<int>(v);
}

std::uint64_t json_u64(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
  throw ConfigError(where + " must be a non-negative integer");
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vec_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = json_number(j[i], where);
  return v;
}

Json to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
  return a;
}

Mat mat_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + " must be a non-empty array of rows");
  Vec first = vec_from_json(j[0], where);
  Mat m(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    Vec row = vec_from_json(j[r], where);
    if (row.size() != first.size()) throw ConfigError(where + " rows differ in length");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Json to_json(const JetForms& F) {
  Json j;
  j["n"] = F.n;
  j["m"] = F.m;
  Json vals = Json::array(), ders = Json::array();
  for (const auto& v : F.values) vals.push_back(to_json(v));
  for (const auto& d : F.derivs) ders.push_back(to_json(d));
  j["values"] = vals;
  j["derivs"] = ders;
  return j;
}

JetForms jet_from_json(const Json& j) {
  reject_unknown(j, {"n", "m", "values", "derivs"}, "jet");
  for (const char* k : {"n", "m", "values", "derivs"})
    if (!j.contains(k)) throw ConfigError(std::string("jet is missing '") + k + "'");
  JetForms F;
  F.n = json_int(j["n"], "jet.n");
  F.m = json_int(j["m"], "jet.m");
  if (F.n < 1 || F.m < 1 || F.n > 64) throw ConfigError("jet dimensions out of range");
  if (!j["values"].is_array() || !j["derivs"].is_array()) throw ConfigError("jet values and derivs must be arrays");
  for (const auto& v : j["values"]) F.values.push_back(vec_from_json(v, "jet.values"));
  for (const auto& d : j["derivs"]) F.derivs.push_back(mat_from_json(d, "jet.derivs"));
  try {
    F.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid jet: ") + e.what());
  }
  return F;
}

Json to_json(const HyperplaneConfig& h) {
  Json a = Json::array();
  for (const auto& c : h.covectors()) a.push_back(to_json(c));
  return a;
}

HyperplaneConfig config_from_json(const Json& j, bool lifted) {
  if (!j.is_array()) throw ConfigError("configuration must be an array of covectors");
  std::vector<Covector> cs;
  for (const auto& c : j) cs.push_back(vec_from_json(c, "configuration"));
  try {
    return lifted ? HyperplaneConfig::lifted(cs) : HyperplaneConfig::strict(cs);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

namespace {

RelationId make_relation(const std::string& name, const std::vector<int>& args) {
  auto need = [&](std::size_t k) {
    if (args.size() != k) throw ConfigError("relation " + name + " takes " + std::to_string(k) + " parameter(s)");
  };
  try {
    if (name == "ExactForms3") return need(0), RelationId::exact_forms3();
    if (name == "Hyp46") return need(0), RelationId::hyp46();
    if (name == "Ell46") return need(0), RelationId::ell46();
    if (name == "Step2") return need(2), RelationId::step2(args[0], args[1]);
    if (name == "Contact") return need(1), RelationId::contact(args[0]);
    if (name == "EvenContact") return need(1), RelationId::even_contact(args[0]);
    if (name == "NoCriticalPoints") return need(1), RelationId::no_critical_points(args[0]);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown relation '" + name + "'");
}

}  // namespace

RelationId relation_from_json(const Json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    auto open = s.find('(');
    if (open == std::string::npos) return make_relation(s, {});
    if (s.back() != ')') throw ConfigError("malformed relation '" + s + "'");
    std::vector<int> args;
    std::stringstream ss(s.substr(open + 1, s.size() - open - 2));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size()) throw ConfigError("malformed relation parameter '" + tok + "'");
        args.push_back(v);
      } catch (const std::logic_error&) {
        throw ConfigError("malformed relation parameter '" + tok + "'");
      }
    }
    return make_relation(s.substr(0, open), args);
  }
  reject_unknown(j, {"name", "k", "n"}, "relation");
  if (!j.contains("name") || !j["name"].is_string()) throw ConfigError("relation needs a name");
  std::string name = j["name"].get<std::string>();
  std::vector<int> args;
  if (j.contains("k")) args.push_back(json_int(j["k"], "relation.k"));
  if (j.contains("n")) args.push_back(json_int(j["n"], "relation.n"));
  return make_relation(name, args);
}

Json to_json(const SliceClassification& c) {
  Json j;
  j["tag"] = to_string(c.tag);
  j["verdict"] = to_string(c.verdict);
  j["complement_codim"] = c.complement_codim ? Json(*c.complement_codim) : Json(nullptr);
  Json aux = Json::object();
  for (const auto& [k, v] : c.aux) aux[k] = v;
  j["aux"] = aux;
  if (c.aux_vector.size() > 0) j["aux_vector"] = to_json(c.aux_vector);
  j["consistent_with_case_table"] = consistent_with_case_table(c);
  return j;
}

Json to_json(const AmplenessVerdict& v, bool with_certificates) {
  Json j;
  j["kind"] = to_string(v.kind);
  j["samples"] = v.n_samples;
  j["members"] = v.n_members;
  j["components"] = v.n_components;
  j["certificates"] = v.certificates.size();
  if (v.codim_evidence) j["codim_evidence"] = *v.codim_evidence;
  if (v.separation) {
    Json s;
    s["gradient"] = to_json(v.separation->gradient);
    s["offset"] = v.separation->offset;
    s["margin"] = v.separation->margin;
    s["target"] = to_json(v.separation->target);
    j["separation"] = s;
  }
  if (with_certificates) {
    Json certs = Json::array();
    for (const auto& c : v.certificates) {
      Json cj;
      cj["target"] = to_json(c.target);
      cj["weights"] = c.weights;
      Json pts = Json::array();
      for (const auto& p : c.points) pts.push_back(to_json(p));
      cj["points"] = pts;
      cj["replay_error"] = c.replay_error();
      certs.push_back(cj);
    }
    j["certificate_list"] = certs;
  }
  return j;
}

Json to_json(const TemplateReport& r) {
  Json j;
  j["template"] = r.template_name;
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["subconfigs"] = r.subconfigs;
  j["property_I"] = {{"pass", r.prop1_pass}, {"fail", r.prop1_fail}};
  j["property_II"] = {{"pass", r.prop2_pass},
                      {"fail", r.prop2_fail},
                      {"slices", r.prop2_slices},
                      {"ample", r.prop2_ample},
                      {"nonample", r.prop2_nonample},
                      {"inconclusive", r.prop2_inconclusive},
                      {"conclusive_fraction", r.prop2_conclusive_fraction()}};
  j["property_III"] = {{"pass", r.prop3_pass}, {"fail", r.prop3_fail}};
  Json ex = Json::array();
  for (const auto& e : r.exemplars) {
    Json ej;
    ej["sample"] = e.sample;
    ej["property"] = e.property;
    ej["detail"] = e.detail;
    ej["jet"] = to_json(e.F);
    ej["configuration"] = to_json(e.config);
    ex.push_back(ej);
  }
  j["exemplars"] = ex;
  return j;
}

Json to_json(const StepReport& r) {
  Json j;
  j["sigma1_codim"] = r.sigma1_codim ? Json(*r.sigma1_codim) : Json("empty");
  j["sigma2_codim"] = r.sigma2_codim ? Json(*r.sigma2_codim) : Json("empty");
  j["gl2_reduction"] = r.gl2_reduction;
  return j;
}

Json to_json(const AvoidResult& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["removed_at_level"] = r.removed_at_level;
  j["removed_by"] = r.removed_by;
  return j;
}

Json to_json(const VerifyReport& r) {
  Json j;
  j["probes"] = r.probes;
  j["passed"] = r.passed;
  j["failed"] = r.failed;
  j["pass_fraction"] = r.pass_fraction();
  j["schedule_ok"] = r.schedule_ok;
  j["failing_children"] = r.failing_children;
  return j;
}

Json jiggle_summary(const JiggleResult& r, const CubicalCover& cover) {
  Json j;
  j["children"] = cover.children.size();
  j["colors"] = cover.n_colors;
  j["c"] = cover.c;
  j["C"] = cover.C;
  j["A"] = r.schedule.A;
  Json le = Json::array();
  for (double l : r.schedule.log_eps) le.push_back(l);
  j["log_epsilon"] = le;
  j["schedule_total"] = r.schedule.total();
  j["color_sup"] = r.color_sup;
  j["total_sup"] = r.total_sup;
  j["perturbed_steps"] = r.perturbed_steps;
  j["tries"] = r.tries;
  Json frames = Json::array();
  for (const auto& f : r.frames) frames.push_back(to_json(f));
  j["frames"] = frames;
  return j;
}

}  // namespace amplex
