#pragma once

#include "amplex/convexity.hpp"
#include "amplex/exterior.hpp"
#include "amplex/jetspace.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace amplex {

enum class RelationTag { ExactForms3, Step2, Contact, EvenContact, Hyp46, Ell46, NoCriticalPoints };

struct RelationId {
  RelationTag tag = RelationTag::ExactForms3;
  int k = 0;  // Step2 only: rank of the distribution
  int n = 0;  // chart dimension

  static RelationId exact_forms3();
  static RelationId step2(int k, int n);
  static RelationId contact(int n);
  static RelationId even_contact(int n);
  static RelationId hyp46();
  static RelationId ell46();
  static RelationId no_critical_points(int n);

  int dim() const { return n; }
  int forms() const;
  std::string name() const;
  bool operator==(const RelationId&) const = default;
};

// No-critical-points jets are stored with m = 1 and values[0] = df; the
// principal direction lambda moves df along lambda, so its slice has a
// single parameter c: df + c * lambda.

struct MemberResult {
  bool member = false;
  bool boundary = false;
};

MemberResult relation_member(const RelationId& id, const JetForms& F);

enum class CaseTag {
  GL2Case,
  TransverseThin,
  MixedThin,
  Annihilator,
  MatrixCase,
  Case1,
  Case2,
  Case3a,
  Case3b,
  HypNontrivial,  // (i)
  HypTrivial,     // (ii)
  HypNonAmple,    // (iii)
  EllTrivial,
  EllNonAmple,
  PointComplement,
  NoComplement,
  Degenerate,
};

const char* to_string(CaseTag t);

struct SliceClassification {
  CaseTag tag = CaseTag::Degenerate;
  VerdictKind verdict = VerdictKind::Inconclusive;
  std::optional<int> complement_codim;
  std::map<std::string, double> aux;
  Vec aux_vector;
};

// Transcribed case table: which (verdict, codim) pairs each tag admits.
bool consistent_with_case_table(const SliceClassification& c);

struct GramPair {
  double g11 = 0.0;
  double g22 = 0.0;
  double g12 = 0.0;
  double det() const { return g11 * g22 - g12 * g12; }
};

// Slice parameterization per relation.
int slice_dim(const RelationId& id);
JetForms slice_point(const RelationId& id, const JetForms& F, const Covector& lambda, const Vec& params);

std::vector<PolynomialLocus> complement_polynomials(const RelationId& id, const PrincipalSlice& slice);
// Members of the slice (Boundary points count as outside) plus the loci.
SampledSet slice_set(const RelationId& id, const PrincipalSlice& slice);
Complement slice_complement(const RelationId& id, const PrincipalSlice& slice);

SliceClassification exact_forms_classify(const JetForms& F, const Covector& lambda);
SliceClassification step2_classify(const JetForms& F, int k, int n, const Covector& lambda);
double contact_pfaffian(const JetForms& F, int n);
Form contact_form(const JetForms& F);  // j0F ^ (dF)^floor((n-1)/2)
SliceClassification contact_classify(const JetForms& F, int n, const Covector& lambda);
SliceClassification no_critical_points_classify(const JetForms& F, const Covector& lambda);

// Orthonormal basis of xi = common kernel of the values, columns.
Mat distribution_basis(const JetForms& F);

// Coefficient of omega ^ eta against dx^1 ^ ... ^ dx^4 for 4x4 skew matrices.
double wedge4(const Mat& omega, const Mat& eta);

GramPair hyp46_gram(const JetForms& F);
GramPair psi_map(const JetForms& F, const Covector& lambda, const Covector& beta1, const Covector& beta2);

struct Signature {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};
Signature wedge_signature(int k);
// Gram matrix of (omega, eta) -> omega ^ eta / vol on Lambda^2 of R^4.
Mat wedge_gram4();

struct CatalogEntry {
  std::string id;
  std::string kind;  // relation or template
  int n = 0;
  int forms = 0;
  std::string anchor;
};
std::vector<CatalogEntry> list_catalog();

}  // namespace amplex
