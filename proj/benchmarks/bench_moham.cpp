#include <random>

#include <benchmark/benchmark.h>

#include "moham/costmodel.hpp"
#include "moham/layermapper.hpp"
#include "moham/nsga2.hpp"
#include "moham/pipeline.hpp"
#include "moham/scheduler.hpp"
#include "moham/sysmodel.hpp"

namespace
{
    const moham::TemplateLibrary& Lib()
    {
        static const moham::TemplateLibrary lib = moham::BundledTemplates();
        return lib;
    }

    const moham::LayerShape kConv{32, 64, 14, 14, 3, 3, moham::LayerKind::Conv};

    void BM_MappingCost(benchmark::State& state)
    {
        const auto& t = Lib()[static_cast<std::size_t>(state.range(0))];
        const auto mappings = moham::EnumerateMapspace(kConv, t, 256).mappings;
        const moham::CostCoefficients coeffs;
        std::size_t i = 0;
        for (auto _ : state)
        {
            benchmark::DoNotOptimize(moham::EvaluateMappingCost(kConv, t, mappings[i], coeffs));
            i = (i + 1) % mappings.size();
        }
        state.SetLabel(t.Id());
    }
    BENCHMARK(BM_MappingCost)->DenseRange(0, 2);

    void BM_EnumerateMapspace(benchmark::State& state)
    {
        const auto& t = Lib()[0];
        const auto budget = static_cast<std::size_t>(state.range(0));
        for (auto _ : state) benchmark::DoNotOptimize(moham::EnumerateMapspace(kConv, t, budget));
        state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
    }
    BENCHMARK(BM_EnumerateMapspace)->Arg(500)->Arg(4000);

    void BM_NonDominatedSort(benchmark::State& state)
    {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<moham::Objectives> pts(static_cast<std::size_t>(state.range(0)));
        for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
        for (auto _ : state) benchmark::DoNotOptimize(moham::FastNonDominatedSort(pts));
    }
    BENCHMARK(BM_NonDominatedSort)->Arg(100)->Arg(500);

    void BM_Survival(benchmark::State& state)
    {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<moham::Objectives> pts(500);
        for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
        for (auto _ : state) benchmark::DoNotOptimize(moham::Survival(pts, 250));
    }
    BENCHMARK(BM_Survival);

    // Decode, place, simulate and score one sampled chromosome.
    void BM_EvaluateChromosome(benchmark::State& state)
    {
        nlohmann::json layers = nlohmann::json::array();
        nlohmann::json deps = nlohmann::json::array();
        for (int i = 0; i < 8; i++)
        {
            layers.push_back({{"id", "l" + std::to_string(i)}, {"kind", "CONV"}, {"c", 16}, {"k", 16},
                              {"y", 8}, {"x", 8}, {"r", 3}, {"s", 3}});
            if (i > 0) deps.push_back(nlohmann::json::array({"l" + std::to_string(i - 1), "l" + std::to_string(i)}));
        }
        const auto am = moham::ParseApplicationModel(
            nlohmann::json::array({{{"id", "m"}, {"layers", layers}, {"deps", deps}}}));
        const moham::CostCoefficients coeffs;
        moham::CatalogOptions opt;
        opt.budget = 500;
        const auto catalog = moham::BuildCatalog(am, Lib(), coeffs, opt);
        moham::SchedulerContext sctx;
        sctx.am = &am;
        sctx.catalog = &catalog;
        sctx.max_instances = 8;
        const auto mesh = moham::BuildMesh(moham::NopConfig{}, sctx.max_instances);
        moham::EvaluationContext ectx;
        ectx.scheduler = &sctx;
        ectx.templates = &Lib();
        ectx.coeffs = &coeffs;
        ectx.mesh = &mesh;

        std::mt19937_64 rng(3);
        std::vector<moham::Chromosome> pool;
        for (int i = 0; i < 64; i++) pool.push_back(moham::SampleIndividual(sctx, rng));
        std::size_t i = 0;
        for (auto _ : state)
        {
            benchmark::DoNotOptimize(moham::Evaluate(pool[i], ectx));
            i = (i + 1) % pool.size();
        }
    }
    BENCHMARK(BM_EvaluateChromosome);
}

BENCHMARK_MAIN();
