#pragma once

#include "amplex/avoidance.hpp"
#include "amplex/convexity.hpp"
#include "amplex/jetspace.hpp"
#include "amplex/jiggling.hpp"
#include "amplex/relations.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace amplex {

using Json = nlohmann::ordered_json;

// Configuration problems surface as this, mapped to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Throws ConfigError when obj has a key outside `allowed`.
void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where);

double json_number(const Json& j, const std::string& where);
int json_int(const Json& j, const std::string& where);
std::uint64_t json_u64(const Json& j, const std::string& where);

Json to_json(const Vec& v);
Vec vec_from_json(const Json& j, const std::string& where);
Json to_json(const Mat& m);
Mat mat_from_json(const Json& j, const std::string& where);

// {"n":..,"m":..,"values":[[..]],"derivs":[[[..]]]}
Json to_json(const JetForms& F);
JetForms jet_from_json(const Json& j);

Json to_json(const HyperplaneConfig& h);
HyperplaneConfig config_from_json(const Json& j, bool lifted = false);

// "Hyp46", "Step2(3,5)", {"name":"Step2","k":3,"n":5}, ...
RelationId relation_from_json(const Json& j);

Json to_json(const SliceClassification& c);
Json to_json(const AmplenessVerdict& v, bool with_certificates = false);
Json to_json(const TemplateReport& r);
Json to_json(const StepReport& r);
Json to_json(const AvoidResult& r);
Json to_json(const VerifyReport& r);
Json jiggle_summary(const JiggleResult& r, const CubicalCover& cover);

}  // namespace amplex
