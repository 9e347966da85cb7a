#pragma once

#include "amplex/convexity.hpp"
#include "amplex/jetspace.hpp"
#include "amplex/relations.hpp"
#include "amplex/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace amplex {

// Ordered hyperplane configuration, covectors stored projectively: unit
// norm, first nonzero component positive.
class HyperplaneConfig {
 public:
  HyperplaneConfig() = default;
  // Rejects zero covectors and proportional pairs (DependentCovectorsError).
  static HyperplaneConfig strict(const std::vector<Covector>& covectors);
  // Repetitions allowed.
  static HyperplaneConfig lifted(const std::vector<Covector>& covectors);

  static Covector normalize(const Covector& c);

  const std::vector<Covector>& covectors() const { return cs_; }
  const Covector& operator[](std::size_t i) const { return cs_[i]; }
  std::size_t size() const { return cs_.size(); }
  bool empty() const { return cs_.empty(); }
  bool is_lifted() const { return lifted_; }
  int dim() const { return cs_.empty() ? 0 : static_cast<int>(cs_.front().size()); }

  HyperplaneConfig subset(const std::vector<std::size_t>& idx) const;
  // Concatenation is always lifted.
  HyperplaneConfig concat(const HyperplaneConfig& other) const;
  bool is_subconfiguration_of(const HyperplaneConfig& other, double tol = 1e-12) const;

 private:
  std::vector<Covector> cs_;
  bool lifted_ = false;
};

struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  Vec center() const { return 0.5 * (lo + hi); }
  bool contains(const Vec& p, double slack = 1e-12) const;
  bool intersects(const Box& o, double slack = 1e-12) const;
};

// Data of a fixed jet with independent zero jet, for fast evaluation of the
// singularity conditions: xi basis Q and the curvature forms on xi as
// 6-vectors in the order (01,02,03,12,13,23).
class CompiledJet {
 public:
  explicit CompiledJet(const JetForms& F);

  const Mat& xi() const { return Q_; }
  const JetForms& jet() const { return F_; }
  const std::array<Vec, 2>& omega() const { return omega_; }

  Vec restrict(const Covector& c) const { return Q_.transpose() * c; }

  GramPair gram() const;
  // Condition on covectors already restricted to xi; norms are those of the
  // unrestricted covectors.
  bool sigma1(const Vec& u, double norm) const;
  bool sigma2(const Vec& u1, double n1, const Vec& u2, double n2) const;

 private:
  JetForms F_;
  Mat Q_;
  std::array<Vec, 2> omega_;
};

// 2-form helpers on R^4 in the 6-vector layout above.
double wedge6(const Vec& w, const Vec& e);
Vec wedge_uu(const Vec& u, const Vec& v);
// u ^ w as a 3-form on R^4, coefficients (012, 013, 023, 123).
Vec wedge_u3(const Vec& u, const Vec& w);
// sigma_min / sigma_max of the two rows a, b.
double two_row_ratio(const Vec& a, const Vec& b);

struct SigmaRoutes {
  bool wedge_route = false;
  bool restriction_route = false;
};

// F must lie in Hyp46 or Ell46.
SigmaRoutes sigma1_routes(const JetForms& F, const Covector& lambda);
bool sigma1_member(const JetForms& F, const Covector& lambda);
SigmaRoutes sigma2_routes(const JetForms& F, const Covector& lambda1, const Covector& lambda2);
bool sigma2_member(const JetForms& F, const Covector& lambda1, const Covector& lambda2);

enum class Flavor { Hyp, Ell };

SliceClassification first_avoidance_classify(const JetForms& F, const Covector& lambda, Flavor flavor);

struct TemplateVerdict {
  bool member = false;
  std::string reason;  // first failing condition, empty for members
};

TemplateVerdict template_A_member(const JetForms& F, const HyperplaneConfig& config);

struct TemplateId {
  enum class Kind { Hyp46Template, FullTemplate, Synthetic };
  Kind kind = Kind::Hyp46Template;
  RelationId relation = RelationId::hyp46();
  // Synthetic: members are relation members with at least this many
  // covectors, which breaks monotonicity on purpose.
  int min_config_size = 0;

  static TemplateId hyp46() { return {}; }
  static TemplateId full(const RelationId& r) { return {Kind::FullTemplate, r, 0}; }
  static TemplateId synthetic(const RelationId& r, int min_size) { return {Kind::Synthetic, r, min_size}; }
  std::string name() const;
};

TemplateVerdict template_member(const TemplateId& t, const JetForms& F, const HyperplaneConfig& config);

// Membership of the template along Pr_{lambda,F} in the flat shift
// parameters, together with the loci of the removed set.
SampledSet template_slice(const TemplateId& t, const JetForms& F, const HyperplaneConfig& config,
                          const Covector& lambda);

struct StepReport {
  // nullopt: the intersection with the slice is empty
  std::optional<int> sigma1_codim;
  std::optional<int> sigma2_codim;
  bool gl2_reduction = false;
};

StepReport second_third_step_classify(const JetForms& F, const Covector& lambda, const Covector& nu1,
                                      const Covector& nu2);
// Sigma1(nu) and Sigma2(nu1,nu2) inside Pr_{lambda,F}, for crossing probes.
Complement sigma1_slice_complement(const JetForms& F, const Covector& lambda, const Covector& nu);
Complement sigma2_slice_complement(const JetForms& F, const Covector& lambda, const Covector& nu1,
                                   const Covector& nu2);

enum class Tri { Member, NonMember, Inconclusive };
const char* to_string(Tri t);

struct AvoidResult {
  Tri verdict = Tri::Inconclusive;
  int removed_at_level = -1;  // first level where F dropped out
  int removed_by = -1;        // index of the offending covector
};

struct AvoidConfig {
  AmplenessConfig mc;
  // Exact removal-locus propagation for relations whose principal slices
  // are one-dimensional.
  bool locus_engine = true;
};

inline constexpr int kMaxAvoidLevel = 3;

AvoidResult avoid_iterate(const RelationId& relation, const JetForms& F, const HyperplaneConfig& config, int level,
                          const AvoidConfig& cfg);
void clear_avoid_memo();
std::size_t avoid_memo_size();

struct CoverFrame {
  Box support;
  HyperplaneConfig frame;
};

bool avoidance_relation_member(const TemplateId& t, const std::vector<CoverFrame>& cover, const JetForms& F,
                               const Vec& p);

// Random jets.
JetForms random_jet(CounterRng& rng, int n, int m);
JetForms random_member(CounterRng& rng, const RelationId& id);
// Random configuration of `size` strict covectors.
HyperplaneConfig random_config(CounterRng& rng, int n, int size);

using JetConfigSampler = std::function<std::pair<JetForms, HyperplaneConfig>(CounterRng&)>;
// Relation members with configurations of size 1..max_size.
JetConfigSampler relation_sampler(const RelationId& id, int max_size);

struct TemplateCheckConfig {
  int n_samples = 200;
  std::uint64_t seed = 0;
  int subconfigs = 8;
  bool property_two = true;
  AmplenessConfig mc;
  bool parallel = true;
};

struct TemplateExemplar {
  int sample = 0;
  std::string property;
  std::string detail;
  JetForms F;
  HyperplaneConfig config;
};

struct TemplateReport {
  std::string template_name;
  std::uint64_t seed = 0;
  int samples = 0;
  int subconfigs = 0;
  int prop1_pass = 0;
  int prop1_fail = 0;
  int prop2_pass = 0;  // samples with no NonAmpleWitnessed slice
  int prop2_fail = 0;
  int prop2_slices = 0;
  int prop2_ample = 0;
  int prop2_nonample = 0;
  int prop2_inconclusive = 0;
  int prop3_pass = 0;
  int prop3_fail = 0;
  std::vector<TemplateExemplar> exemplars;

  double prop2_conclusive_fraction() const;
};

struct SampleOutcome {
  bool in_template = false;
  bool prop1 = true;
  std::string prop1_detail;
  std::vector<VerdictKind> prop2;
};

SampleOutcome template_sample_outcome(const TemplateId& t, const JetConfigSampler& sampler,
                                      const TemplateCheckConfig& cfg, int index);
TemplateReport template_properties_check(const TemplateId& t, const JetConfigSampler& sampler,
                                         const TemplateCheckConfig& cfg);

}  // namespace amplex
