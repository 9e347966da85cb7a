#include "amplex/avoidance.hpp"
#include "amplex/kernels.hpp"
#include "amplex/rng.hpp"

#include <benchmark/benchmark.h>

using namespace amplex;

namespace {

std::vector<Vec> cloud(int n) {
  CounterRng r(1, 0);
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) pts.push_back(r.normal_vec(3, 3.0));
  return pts;
}

Complement quadric() {
  return Complement{4, nullptr, {PolynomialLocus{{[](const Vec& x) { return x(0) * x(1) - x(2) * x(3); }}, 2, "quad"}}};
}

// template membership is the expensive predicate in practice
Predicate template_predicate() {
  CounterRng r(2, 0);
  JetForms F = random_member(r, RelationId::hyp46());
  return [F](const Vec& p) {
    Vec c1 = p.head(6), c2 = p.tail(6);
    return template_A_member(F, HyperplaneConfig::lifted({c1, c2})).member;
  };
}

void BM_MembersSerial(benchmark::State& st) {
  auto pts = cloud(static_cast<int>(st.range(0)));
  Predicate cone = [](const Vec& p) { return p(0) * p(1) - p(2) * p(2) < 0; };
  for (auto _ : st) benchmark::DoNotOptimize(kernels::evaluate_members_serial(cone, pts));
}

void BM_MembersParallel(benchmark::State& st) {
  auto pts = cloud(static_cast<int>(st.range(0)));
  Predicate cone = [](const Vec& p) { return p(0) * p(1) - p(2) * p(2) < 0; };
  for (auto _ : st) benchmark::DoNotOptimize(kernels::evaluate_members_parallel(cone, pts));
}

void BM_TemplateSerial(benchmark::State& st) {
  CounterRng r(3, 0);
  std::vector<Vec> pts;
  for (int i = 0; i < st.range(0); ++i) pts.push_back(r.normal_vec(12));
  Predicate p = template_predicate();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::evaluate_members_serial(p, pts));
}

void BM_TemplateParallel(benchmark::State& st) {
  CounterRng r(3, 0);
  std::vector<Vec> pts;
  for (int i = 0; i < st.range(0); ++i) pts.push_back(r.normal_vec(12));
  Predicate p = template_predicate();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::evaluate_members_parallel(p, pts));
}

void BM_CrossingSerial(benchmark::State& st) {
  CrossingConfig cfg;
  cfg.trials = static_cast<int>(st.range(0));
  cfg.seed = 9;
  Complement c = quadric();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::crossing_trials_serial(c, cfg));
}

void BM_CrossingParallel(benchmark::State& st) {
  CrossingConfig cfg;
  cfg.trials = static_cast<int>(st.range(0));
  cfg.seed = 9;
  Complement c = quadric();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::crossing_trials_parallel(c, cfg));
}

}  // namespace

BENCHMARK(BM_MembersSerial)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_MembersParallel)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_TemplateSerial)->Arg(1 << 10);
BENCHMARK(BM_TemplateParallel)->Arg(1 << 10);
BENCHMARK(BM_CrossingSerial)->Arg(200)->Arg(2000);
BENCHMARK(BM_CrossingParallel)->Arg(200)->Arg(2000);

BENCHMARK_MAIN();
