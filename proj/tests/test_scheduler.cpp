#include <algorithm>
#include <memory>

#include <gtest/gtest.h>

#include "moham/errors.hpp"
#include "moham/random.hpp"
#include "moham/scheduler.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace moham;

namespace
{
    struct Env
    {
        ApplicationModel am;
        TemplateLibrary lib;
        MappingCatalog catalog;
        SchedulerContext ctx;

        Env(ApplicationModel a, TemplateLibrary l, std::size_t max_instances, std::size_t max_per_pair = 4) :
            am(std::move(a)), lib(std::move(l))
        {
            CatalogOptions opt;
            opt.budget = 300;
            opt.max_per_pair = max_per_pair;
            catalog = BuildCatalog(am, lib, CostCoefficients{}, opt);
            ctx.am = &am;
            ctx.catalog = &catalog;
            ctx.max_instances = max_instances;
        }
    };

    std::unique_ptr<Env> TinyEnv(std::size_t max_instances = 4)
    {
        return std::make_unique<Env>(moham::testing::TinyApplication(), BundledTemplates(), max_instances);
    }

    nlohmann::json Layers(std::size_t n)
    {
        nlohmann::json out = nlohmann::json::array();
        for (std::size_t i = 0; i < n; i++)
            out.push_back(moham::testing::LayerJson("l" + std::to_string(i), "CONV", 2, 2, 2, 2, 1, 1));
        return out;
    }

    ApplicationModel Chain(std::size_t n)
    {
        nlohmann::json deps = nlohmann::json::array();
        for (std::size_t i = 0; i + 1 < n; i++)
            deps.push_back(nlohmann::json::array({"l" + std::to_string(i), "l" + std::to_string(i + 1)}));
        return ParseApplicationModel(nlohmann::json::array({{{"id", "m"}, {"layers", Layers(n)}, {"deps", deps}}}));
    }

    ApplicationModel Independent(std::size_t n)
    {
        return ParseApplicationModel(
            nlohmann::json::array({{{"id", "m"}, {"layers", Layers(n)}, {"deps", nlohmann::json::array()}}}));
    }

    std::vector<LayerShape> ShapePool()
    {
        return {LayerShape{2, 2, 2, 2, 1, 1, LayerKind::Conv}, LayerShape{4, 2, 2, 2, 3, 3, LayerKind::Conv},
                LayerShape{8, 4, 1, 1, 1, 1, LayerKind::FullyConnected}, LayerShape{2, 1, 4, 4, 3, 3, LayerKind::Depthwise}};
    }

    std::vector<LayerId> Order(const Chromosome& c)
    {
        std::vector<LayerId> out;
        for (const auto& g : c.software) out.push_back(g.layer);
        return out;
    }

    void ExpectValid(const Chromosome& c, const SchedulerContext& ctx)
    {
        const auto errors = CheckChromosome(c, ctx);
        ASSERT_TRUE(errors.empty()) << errors.front() << "\n" << ToJson(c).dump();
    }
}

TEST(Chromosome, CheckerFlagsBrokenInvariants)
{
    auto env = TinyEnv();
    std::mt19937_64 rng(1);
    auto c = SampleIndividual(env->ctx, rng);
    ExpectValid(c, env->ctx);

    auto dup = c;
    dup.hardware.push_back(dup.hardware[0]);
    EXPECT_FALSE(CheckChromosome(dup, env->ctx).empty());
    auto missing = c;
    missing.software[0].instance = 999;
    EXPECT_FALSE(CheckChromosome(missing, env->ctx).empty());
    auto range = c;
    range.software[0].mapping = 999;
    EXPECT_FALSE(CheckChromosome(range, env->ctx).empty());
    auto order = c;
    std::reverse(order.software.begin(), order.software.end());
    EXPECT_FALSE(CheckChromosome(order, env->ctx).empty());
    auto empty = c;
    empty.hardware.clear();
    EXPECT_FALSE(CheckChromosome(empty, env->ctx).empty());
    EXPECT_THROW(c.TemplateOf(999), ValidationError);
}

TEST(Sampling, MinimalShapeAndDeterminism)
{
    auto one = ParseApplicationModel(nlohmann::json::array(
        {{{"id", "m"}, {"layers", Layers(1)}, {"deps", nlohmann::json::array()}}}));
    Env env(one, BundledTemplates().Subset({"simba"}), 1);
    std::mt19937_64 rng(3);
    auto c = SampleIndividual(env.ctx, rng);
    ASSERT_EQ(c.hardware.size(), 1u);
    EXPECT_EQ(c.hardware[0], (HardwareGene{0, 0}));
    ASSERT_EQ(c.software.size(), 1u);
    EXPECT_EQ(c.software[0].layer, 0u);
    EXPECT_EQ(c.software[0].instance, 0u);
    EXPECT_LT(c.software[0].mapping, env.ctx.CatalogSize(0, 0));

    auto tiny = TinyEnv();
    std::mt19937_64 a(9), b(9);
    EXPECT_EQ(SampleIndividual(tiny->ctx, a), SampleIndividual(tiny->ctx, b));
}

TEST(Sampling, DiamondFuzz)
{
    Env env(moham::testing::DiamondApplication(), moham::testing::TinyTemplates(), 5);
    std::mt19937_64 rng(5);
    std::vector<std::size_t> sizes(6, 0);
    for (int i = 0; i < 10000; i++)
    {
        auto c = SampleIndividual(env.ctx, rng);
        ExpectValid(c, env.ctx);
        sizes[c.hardware.size()]++;
    }
    for (std::size_t n = 1; n <= 5; n++) EXPECT_GT(sizes[n], 1500u);
}

TEST(Sampling, FixedHardwareUsedVerbatim)
{
    auto env = TinyEnv();
    std::vector<HardwareGene> fixed{{0, 1}, {1, 2}, {2, 0}};
    env->ctx.fixed_hardware = &fixed;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; i++)
    {
        auto c = SampleIndividual(env->ctx, rng);
        EXPECT_EQ(c.hardware, fixed);
        EXPECT_EQ(c.next_instance, 3u);
        ExpectValid(c, env->ctx);
    }
}

TEST(SchedulingCrossover, IdenticalParentsAndForcedChain)
{
    auto env = TinyEnv();
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; i++)
    {
        auto a = SampleIndividual(env->ctx, rng);
        auto [c1, c2] = SchedulingCrossover(a, a, env->ctx, rng);
        EXPECT_EQ(c1, a);
        EXPECT_EQ(c2, a);
    }

    Env chain(Chain(5), moham::testing::TinyTemplates(), 3);
    for (int i = 0; i < 200; i++)
    {
        auto a = SampleIndividual(chain.ctx, rng);
        auto b = SampleIndividual(chain.ctx, rng);
        auto [c1, c2] = SchedulingCrossover(a, b, chain.ctx, rng);
        EXPECT_EQ(Order(c1), (std::vector<LayerId>{0, 1, 2, 3, 4}));
        EXPECT_EQ(Order(c2), (std::vector<LayerId>{0, 1, 2, 3, 4}));
    }
}

TEST(SchedulingCrossover, PrefixThenOtherParentOrder)
{
    Env env(moham::testing::DiamondApplication(), moham::testing::TinyTemplates(), 4);
    std::mt19937_64 rng(13);
    for (int i = 0; i < 2000; i++)
    {
        auto a = SampleIndividual(env.ctx, rng);
        auto b = SampleIndividual(env.ctx, rng);
        auto [c1, c2] = SchedulingCrossover(a, b, env.ctx, rng);
        ExpectValid(c1, env.ctx);
        ExpectValid(c2, env.ctx);
        EXPECT_EQ(c1.hardware, a.hardware);
        EXPECT_EQ(c2.hardware, b.hardware);
        // Some cut explains c1: a's prefix, then the rest in b's order.
        bool explained = false;
        const auto order_a = Order(a);
        for (std::size_t cut = 0; cut <= a.software.size() && !explained; cut++)
        {
            std::vector<LayerId> want(order_a.begin(), order_a.begin() + static_cast<std::ptrdiff_t>(cut));
            for (auto l : Order(b))
                if (std::find(want.begin(), want.end(), l) == want.end()) want.push_back(l);
            bool prefix_same = std::equal(a.software.begin(), a.software.begin() + static_cast<std::ptrdiff_t>(cut),
                                          c1.software.begin());
            explained = prefix_same && want == Order(c1);
        }
        EXPECT_TRUE(explained);
    }
}

TEST(SchedulingMutation, ChainUnchangedAndIndependentSwap)
{
    Env chain(Chain(6), moham::testing::TinyTemplates(), 3);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 500; i++)
    {
        auto c = SampleIndividual(chain.ctx, rng);
        EXPECT_EQ(SchedulingMutation(c, chain.ctx, rng), c);
    }

    Env pair(Independent(2), moham::testing::TinyTemplates(), 3);
    for (int i = 0; i < 50; i++)
    {
        auto c = SampleIndividual(pair.ctx, rng);
        auto m = SchedulingMutation(c, pair.ctx, rng);
        EXPECT_EQ(m.software[0], c.software[1]);
        EXPECT_EQ(m.software[1], c.software[0]);
        EXPECT_EQ(m.hardware, c.hardware);
    }
}

TEST(MappingOperators, SingletonListsAndIdenticalParents)
{
    Env pinned(moham::testing::TinyApplication(), moham::testing::TinyTemplates(), 4);
    pinned.catalog.PinMinLatency();
    std::mt19937_64 rng(19);
    for (int i = 0; i < 200; i++)
    {
        auto c = SampleIndividual(pinned.ctx, rng);
        EXPECT_EQ(MappingMutation(c, pinned.ctx, rng), c);
    }

    auto env = TinyEnv();
    for (int i = 0; i < 200; i++)
    {
        auto a = SampleIndividual(env->ctx, rng);
        auto [c1, c2] = MappingCrossover(a, a, env->ctx, rng);
        EXPECT_EQ(c1, a);
        EXPECT_EQ(c2, a);
    }
}

TEST(SaCrossover, SameTemplateSwapAndCapRule)
{
    auto env = TinyEnv(4);
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; i++)
    {
        auto a = SampleIndividual(env->ctx, rng);
        auto b = a;
        b.software = SampleIndividual(env->ctx, rng).software;
        for (auto& g : b.software)
        {
            g.instance = a.hardware[g.instance % a.hardware.size()].instance;
            g.mapping = 0;
        }
        ExpectValid(b, env->ctx);
        // Same instance ids with the same templates: the swap changes nothing.
        auto kids = SaCrossover(a, b, env->ctx, rng);
        ASSERT_EQ(kids.size(), 2u);
        EXPECT_EQ(kids[0], a);
        EXPECT_EQ(kids[1], b);
    }

    Env capped(moham::testing::TinyApplication(), BundledTemplates(), 1);
    Chromosome a;
    a.hardware = {{0, 0}, {1, 1}};
    a.next_instance = 2;
    for (LayerId l = 0; l < 4; l++) a.software.push_back({l, 0, l % 2});
    Chromosome b;
    b.hardware = {{0, 2}};
    b.next_instance = 1;
    for (LayerId l = 0; l < 4; l++) b.software.push_back({l, 0, 0});
    ExpectValid(b, capped.ctx);
    bool one_sided = false;
    for (int i = 0; i < 100; i++)
    {
        auto kids = SaCrossover(a, b, capped.ctx, rng);
        if (kids.size() == 1)
        {
            one_sided = true;
            EXPECT_EQ(kids[0], b);
        }
    }
    EXPECT_TRUE(one_sided);
}

TEST(SaCrossover, OneSidedImportMovesDonorLayers)
{
    auto env = TinyEnv(4);
    Chromosome a;
    a.hardware = {{0, 0}, {1, 1}};
    a.next_instance = 2;
    for (LayerId l = 0; l < 4; l++) a.software.push_back({l, 0, l % 2});
    Chromosome b;
    b.hardware = {{0, 2}};
    b.next_instance = 1;
    for (LayerId l = 0; l < 4; l++) b.software.push_back({l, 0, 0});
    std::mt19937_64 rng(29);
    bool seen = false;
    for (int i = 0; i < 100; i++)
    {
        auto kids = SaCrossover(a, b, env->ctx, rng);
        if (kids.size() != 1) continue;
        seen = true;
        const auto& k = kids[0];
        ExpectValid(k, env->ctx);
        ASSERT_EQ(k.hardware.size(), 2u);
        EXPECT_EQ(k.hardware[1], (HardwareGene{1, 1}));
        for (const auto& g : k.software) EXPECT_EQ(g.instance, g.layer % 2 == 1 ? 1u : 0u);
    }
    EXPECT_TRUE(seen);
}

TEST(SaMutations, SplitMergePositionTemplateExamples)
{
    auto env = TinyEnv(4);
    Chromosome c;
    c.hardware = {{0, 0}, {1, 1}};
    c.next_instance = 2;
    for (LayerId l = 0; l < 4; l++) c.software.push_back({l, 0, l < 2 ? 0u : 1u});
    std::mt19937_64 rng(31);
    auto s = SaSplittingMutation(c, env->ctx, rng);
    ExpectValid(s, env->ctx);
    ASSERT_EQ(s.hardware.size(), 3u);
    EXPECT_EQ(s.GenesOn(2).size(), 1u);
    EXPECT_EQ(s.GenesOn(0).size() + s.GenesOn(1).size(), 3u);
    EXPECT_EQ(s.hardware[2].template_index, s.TemplateOf(s.hardware[2].instance));

    Chromosome single;
    single.hardware = {{0, 1}};
    single.next_instance = 1;
    for (LayerId l = 0; l < 4; l++) single.software.push_back({l, 0, 0});
    EXPECT_EQ(SaMergingMutation(single, env->ctx, rng), single);
    EXPECT_EQ(SaPositionMutation(single, env->ctx, rng), single);
    EXPECT_EQ(LayerAssignmentMutation(single, env->ctx, rng), single);

    Env one_template(moham::testing::TinyApplication(), BundledTemplates().Subset({"simba"}), 4);
    Chromosome t;
    t.hardware = {{0, 0}, {1, 0}};
    t.next_instance = 2;
    for (LayerId l = 0; l < 4; l++) t.software.push_back({l, 0, l % 2});
    EXPECT_EQ(SaTemplateMutation(t, one_template.ctx, rng), t);

    auto p = SaPositionMutation(c, env->ctx, rng);
    EXPECT_EQ(p.software, c.software);
    EXPECT_EQ(p.hardware[0], c.hardware[1]);
    EXPECT_EQ(p.hardware[1], c.hardware[0]);
}

TEST(Operators, NamesAndClassification)
{
    for (Operator op : kOperatorOrder) EXPECT_EQ(OperatorFromName(OperatorName(op)), op);
    EXPECT_THROW(OperatorFromName("nope"), ValidationError);
    EXPECT_TRUE(IsCrossover(Operator::SchedulingCrossover));
    EXPECT_TRUE(IsCrossover(Operator::SaCrossover));
    EXPECT_TRUE(IsCrossover(Operator::MappingCrossover));
    EXPECT_FALSE(IsCrossover(Operator::MappingMutation));
    EXPECT_TRUE(ChangesHardware(Operator::MergingMutation));
    EXPECT_FALSE(ChangesHardware(Operator::MappingMutation));
    OperatorProbabilities probs;
    double sum = 0;
    for (double p : probs.p) sum += p;
    EXPECT_NEAR(sum, 0.469, 1e-12);
}

TEST(Operators, ClosureFuzz)
{
    // Random DAG workloads; every operator applied at least 10^4 times to an
    // evolving pool, and every result checked.
    std::mt19937_64 rng(37);
    const auto pool = ShapePool();
    const auto lib3 = BundledTemplates();
    std::array<std::size_t, kNumOperators> applied{};
    for (int app = 0; app < 10; app++)
    {
        const auto lib = app % 3 == 0 ? lib3.Subset({"simba"}) : lib3;
        Env env(moham::testing::RandomApplication(rng, 1 + app % 3, 6, 0.35, pool), lib, 1 + static_cast<std::size_t>(app % 5));
        std::vector<Chromosome> population;
        for (int i = 0; i < 16; i++) population.push_back(SampleIndividual(env.ctx, rng));
        for (int round = 0; round < 1000; round++)
        {
            for (Operator op : kOperatorOrder)
            {
                const auto ia = UniformIndex(rng, population.size());
                const auto ib = UniformIndex(rng, population.size());
                const auto& a = population[ia];
                const auto& b = population[ib];
                auto kids = ApplyOperator(op, a, b, env.ctx, rng);
                ASSERT_EQ(kids.size(), IsCrossover(op) ? 2u : 1u);
                for (const auto& k : kids) ExpectValid(k, env.ctx);
                if (op == Operator::SplittingMutation)
                {
                    EXPECT_GE(kids[0].hardware.size(), a.hardware.size());
                }
                if (op == Operator::MergingMutation)
                {
                    EXPECT_EQ(kids[0].hardware.size(), a.hardware.size() - (a.hardware.size() >= 2 ? 1 : 0));
                }
                if (op == Operator::SchedulingMutation || op == Operator::PositionMutation)
                {
                    auto x = Order(kids[0]);
                    auto y = Order(a);
                    std::sort(x.begin(), x.end());
                    std::sort(y.begin(), y.end());
                    EXPECT_EQ(x, y);
                }
                applied[static_cast<std::size_t>(op)]++;
                population[ia] = kids[0];
                if (kids.size() == 2) population[ib] = kids[1];
            }
        }
    }
    for (auto n : applied) EXPECT_GE(n, 10000u);
}

TEST(Operators, SeededDeterminism)
{
    auto env = TinyEnv(4);
    std::mt19937_64 rng(41);
    auto a = SampleIndividual(env->ctx, rng);
    auto b = SampleIndividual(env->ctx, rng);
    for (Operator op : kOperatorOrder)
    {
        std::mt19937_64 r1(77), r2(77);
        EXPECT_EQ(ApplyOperator(op, a, b, env->ctx, r1), ApplyOperator(op, a, b, env->ctx, r2)) << OperatorName(op);
    }
}

TEST(Decode, MaxRuleAgainstFoldOracle)
{
    auto env = TinyEnv(4);
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 2000; trial++)
    {
        auto c = SampleIndividual(env->ctx, rng);
        auto sys = Decode(c, env->ctx, env->lib);
        EXPECT_TRUE(sys.feasible);
        ASSERT_EQ(sys.instances.size(), c.hardware.size());
        for (std::size_t p = 0; p < c.hardware.size(); p++)
        {
            const auto& inst = sys.instances[p];
            const auto& t = env->lib[c.hardware[p].template_index];
            EXPECT_EQ(inst.instance_id, c.hardware[p].instance);
            ParamValues want(t.FreeParams().size(), 1);
            for (const auto& g : c.software)
            {
                if (g.instance != inst.instance_id) continue;
                const auto& e = env->catalog.ForLayer(g.layer, inst.template_index)[g.mapping];
                const auto req = RequiredParams(t, e.mapping);
                for (std::size_t i = 0; i < want.size(); i++) want[i] = std::max(want[i], req[i]);
            }
            EXPECT_EQ(inst.params, want);
            for (const auto& g : c.software)
            {
                if (g.instance != inst.instance_id) continue;
                const auto& e = env->catalog.ForLayer(g.layer, inst.template_index)[g.mapping];
                for (std::size_t i = 0; i < want.size(); i++) EXPECT_LE(e.cost.required[i], inst.params[i]);
            }
        }
    }
}

TEST(Decode, SingleAndPairExamples)
{
    auto env = TinyEnv(4);
    Chromosome c;
    c.hardware = {{0, 1}};
    c.next_instance = 1;
    for (LayerId l = 0; l < 4; l++) c.software.push_back({l, 0, 0});
    auto sys = Decode(c, env->ctx, env->lib);
    ParamValues want(env->lib[1].FreeParams().size(), 1);
    for (LayerId l = 0; l < 4; l++)
    {
        const auto& req = env->catalog.ForLayer(l, 1)[0].cost.required;
        for (std::size_t i = 0; i < want.size(); i++) want[i] = std::max(want[i], req[i]);
    }
    EXPECT_EQ(sys.instances[0].params, want);

    // Fixed sizes: minimum parameters cannot host the layers.
    std::vector<ParamValues> tiny{env->lib[1].MinParams()};
    auto fixed = Decode(c, env->ctx, env->lib, &tiny);
    EXPECT_FALSE(fixed.feasible);
    EXPECT_FALSE(fixed.infeasible_reason.empty());
    std::vector<ParamValues> roomy{env->lib[1].MaxParams()};
    EXPECT_TRUE(Decode(c, env->ctx, env->lib, &roomy).feasible);
    std::vector<ParamValues> wrong;
    EXPECT_THROW(Decode(c, env->ctx, env->lib, &wrong), ValidationError);
}
