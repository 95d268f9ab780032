#include <benchmark/benchmark.h>

#include "dioph/cantor.hpp"
#include "dioph/contfrac.hpp"
#include "dioph/massdist.hpp"
#include "dioph/systems.hpp"
#include "dioph/ubiquity.hpp"

using namespace dioph;

namespace {

Exec mode(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_Separation(benchmark::State& state) {
  const auto sys = ApproxSystem::rationals(1, make_rational(1, 2));
  const auto layer = enumerate_layer(sys, ScaleSequence(make_rational(1, 4)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(verify_separation(sys, layer, mode(state)));
  label(state);
}
BENCHMARK(BM_Separation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ClassifyBatch(benchmark::State& state) {
  std::vector<Target> xs;
  for (long i = 1; i <= 16; ++i) xs.push_back(Target::rational(make_rational(i, 17 + 2 * i)));
  xs.push_back(Target::parse("surd:-1,1,5,2"));
  const auto psi = ApproxFunction::power(make_rational(1), make_rational(-2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_batch(xs, psi, 400, {make_rational(1, 2)}, mode(state)));
  }
  label(state);
}
BENCHMARK(BM_ClassifyBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Ubiquity(benchmark::State& state) {
  const auto sys = ApproxSystem::base_power(2);
  UbiquityOptions opt;
  opt.exec = mode(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_local_ubiquity(sys, sys.default_rho(), sys.default_scale(),
                                                   Ball(make_rational(1, 2), make_rational(1, 4)),
                                                   2, 12, make_rational(1), opt));
  }
  label(state);
}
BENCHMARK(BM_Ubiquity)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

const CantorTree& depth2_tree() {
  static const CantorTree tree = [] {
    const auto sys = ApproxSystem::base_power(2);
    auto prep = prepare_context(sys, sys.default_scale(),
                                ApproxFunction::power(make_rational(1), make_rational(3)),
                                sys.default_rho(), RegularSpaceParams::lebesgue(1),
                                make_rational(1), make_rational(1, 2), make_rational(1),
                                Regime::finite_g, Ball(make_rational(1, 2), make_rational(1, 8)));
    return build_tree(prep.ctx, 2);
  }();
  return tree;
}

void BM_BuildTree(benchmark::State& state) {
  const auto sys = ApproxSystem::base_power(2);
  auto prep = prepare_context(sys, sys.default_scale(),
                              ApproxFunction::power(make_rational(1), make_rational(3)),
                              sys.default_rho(), RegularSpaceParams::lebesgue(1), make_rational(1),
                              make_rational(1, 2), make_rational(1), Regime::finite_g,
                              Ball(make_rational(1, 2), make_rational(1, 8)));
  prep.ctx.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(build_tree(prep.ctx, 2));
  label(state);
}
BENCHMARK(BM_BuildTree)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Holder(benchmark::State& state) {
  const auto& tree = depth2_tree();
  const auto mass = assign_mass(tree, make_rational(1, 2), make_rational(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_holder_general(mass, tree, 1000, 1, mode(state)));
  }
  label(state);
}
BENCHMARK(BM_Holder)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
