// Batched OpenMP kernels against the per-point serial reference, plus one
// full forward / assemble / backward step of the training loop.

#include <benchmark/benchmark.h>

#include <random>

#include "nsg/galerkin.hpp"
#include "nsg/losses.hpp"
#include "nsg/training.hpp"

using namespace nsg;

namespace {

ArchitectureSpec arch(Family f, int p, std::vector<int> h) {
    ArchitectureSpec a;
    a.family = f;
    a.output_dim = p;
    a.hidden_widths = std::move(h);
    return a;
}

Points points(int n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    Points p(n);
    for (auto& x : p) x = {u(rng), u(rng)};
    return p;
}

void BM_eval_batched(benchmark::State& s) {
    const auto a = arch(Family::fnn2d, 20, {50, 50, 50});
    const auto th = init_params(a, 1);
    const auto pts = points(static_cast<int>(s.range(0)));
    for (auto _ : s) benchmark::DoNotOptimize(eval_basis(a, th, pts));
    s.SetItemsProcessed(s.iterations() * s.range(0));
}

void BM_eval_reference(benchmark::State& s) {
    const auto a = arch(Family::fnn2d, 20, {50, 50, 50});
    const auto th = init_params(a, 1);
    const auto pts = points(static_cast<int>(s.range(0)));
    for (auto _ : s) benchmark::DoNotOptimize(eval_basis_reference(a, th, pts));
    s.SetItemsProcessed(s.iterations() * s.range(0));
}

void BM_param_gradient(benchmark::State& s) {
    const auto a = arch(Family::fnn2d, 20, {50, 50, 50});
    const auto th = init_params(a, 1);
    const auto pts = points(static_cast<int>(s.range(0)));
    const auto J = eval_basis(a, th, pts);
    for (auto _ : s) benchmark::DoNotOptimize(loss_param_gradient(a, th, pts, J));
    s.SetItemsProcessed(s.iterations() * s.range(0));
}

// One forward / solve / backward step on Test 1.1 with the desk TNN.
void BM_training_step(benchmark::State& s) {
    auto spec = std::make_shared<const ProblemSpec>(catalog("two_material", "1.1"));
    QuadConfig q;
    q.subintervals = static_cast<int>(s.range(0));
    const auto dp = discretize(spec, q);
    const std::vector<ArchitectureSpec> archs(spec->terms.size(), arch(Family::tnn, 20, {20, 20, 20}));
    SubspaceModel m(dp, archs);
    const auto th = m.init(1);
    for (auto _ : s) {
        m.forward(th);
        auto sys = assemble(m);
        solve(sys);
        const auto ev = evaluate_loss(LossKind::ritz, dp, m.fields(sys.c), true);
        benchmark::DoNotOptimize(m.backward(th, sys.c, ev.adjoint));
    }
}

}  // namespace

BENCHMARK(BM_eval_batched)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eval_reference)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_param_gradient)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_training_step)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
