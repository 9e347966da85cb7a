#pragma once

#include "amplex/linalg.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace amplex {

using Predicate = std::function<bool(const Vec&)>;
using ScalarFn = std::function<double(const Vec&)>;

// Common zero set of a few polynomials of bounded degree. Used to detect
// segments that pass through a measure-zero piece of a complement.
struct PolynomialLocus {
  std::vector<ScalarFn> polys;
  int degree = 2;
  std::string label;
};

// A membership predicate on an affine space together with the polynomial
// loci its complement contains. The predicate alone decides membership of
// points; the loci let segment tests see walls of measure zero.
struct SampledSet {
  int dim = 0;
  Predicate member;
  std::vector<PolynomialLocus> loci;
};

struct SampleCloud {
  int dim = 0;
  std::vector<Vec> points;
  std::vector<int> labels;
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  int components() const;
};

// Components of the graph joining points closer than epsilon.
SampleCloud connected_components(const std::vector<Vec>& points, double epsilon);

struct HullCertificate {
  Vec target;
  std::vector<Vec> points;
  std::vector<double> weights;

  double replay_error() const;
};

std::optional<HullCertificate> hull_contains(const std::vector<Vec>& points, const Vec& target);

enum class VerdictKind { TriviallyAmpleFull, TriviallyAmpleEmpty, AmpleWitnessed, NonAmpleWitnessed, Inconclusive };

const char* to_string(VerdictKind k);
bool is_ample(VerdictKind k);
bool is_conclusive(VerdictKind k);

struct SeparatingFunctional {
  Vec gradient;
  double offset = 0.0;
  double margin = 0.0;
  Vec target;

  double operator()(const Vec& x) const { return gradient.dot(x) + offset; }
};

struct AmplenessVerdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::vector<HullCertificate> certificates;
  std::optional<SeparatingFunctional> separation;
  std::string exact_tag;
  std::optional<int> codim_evidence;
  bool sampled = true;
  int n_samples = 0;
  int n_members = 0;
  int n_components = 0;
  std::vector<Vec> component_points;  // the base component, for replay
};

struct AmplenessConfig {
  int n_samples = 0;  // 0: chosen from the dimension
  std::vector<double> radii = {1.0, 4.0, 16.0};
  double scale = 1.0;
  double epsilon = std::numeric_limits<double>::infinity();
  double target_fraction = 0.5;  // targets at +-fraction * largest radius * scale
  int segment_checks = 8;
  int max_cross_attempts = 200;
  int refine_rounds = 4;
  std::uint64_t seed = 0;
  std::optional<Vec> center;  // base point, default the origin
  bool parallel = true;

  int resolved_samples(int dim) const;
};

AmplenessVerdict ampleness_test(const SampledSet& set, const AmplenessConfig& cfg);
AmplenessVerdict ampleness_test(const Predicate& member, int dim, const AmplenessConfig& cfg);

// Segment [a,b] stays inside the set: predicate at interior checkpoints and
// no locus crossed.
bool segment_clear(const SampledSet& set, const Vec& a, const Vec& b, int checks);
// Does [a,b] meet the common zero set of one locus.
bool segment_hits_locus(const PolynomialLocus& locus, const Vec& a, const Vec& b);

// Complement of a set, for crossing probes: a region predicate (may be
// empty) plus loci of measure zero.
struct Complement {
  int dim = 0;
  Predicate region;
  std::vector<PolynomialLocus> loci;
};

struct CrossingConfig {
  int trials = 200;
  int steps = 1024;
  double scale = 4.0;
  std::uint64_t seed = 0;
  std::optional<Vec> center;
  bool parallel = true;
};

// 1 when some random segment between points outside the complement enters
// it, 2 otherwise.
int line_crossing_probe(const Complement& complement, const CrossingConfig& cfg);

// Convex decomposition of M into matrices with det of the demanded sign
// (target_sign < 0: negative). Weights sum to one.
std::vector<std::pair<double, Mat>> gl_ample_witness(const Mat& M, int target_sign);

struct ChextResult {
  bool inside = false;
  std::optional<HullCertificate> certificate;
};

ChextResult chext_member(const SampledSet& set, const Vec& F_point, const std::vector<Vec>& directions, const Vec& z,
                         const AmplenessConfig& cfg);
ChextResult chext_member(const Predicate& member, const Vec& F_point, const std::vector<Vec>& directions, const Vec& z,
                         const AmplenessConfig& cfg);

struct Loop {
  std::vector<Vec> samples;
  Vec mean() const;
};

Loop loop_with_average(const SampledSet& set, const Vec& component_seed, const Vec& target, int steps,
                       const AmplenessConfig& cfg);
Loop loop_with_average(const Predicate& member, const Vec& component_seed, const Vec& target, int steps,
                       const AmplenessConfig& cfg);

}  // namespace amplex
