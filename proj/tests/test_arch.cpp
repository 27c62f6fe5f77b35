#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "moham/arch.hpp"
#include "moham/errors.hpp"
#include "moham/layermapper.hpp"
#include "support/generators.hpp"

using namespace moham;
using moham::testing::Pick;
using moham::testing::RandomMapping;
using moham::testing::RandomShape;

namespace
{
    const TemplateLibrary& Lib()
    {
        static const TemplateLibrary lib = BundledTemplates();
        return lib;
    }

    const SubAcceleratorTemplate& Preset(const std::string& id)
    {
        return Lib()[Lib().IndexOf(id)];
    }

    Mapping Unit(const LayerShape& shape, const SubAcceleratorTemplate& t)
    {
        Mapping m;
        m.shape = shape;
        m.template_id = t.Id();
        return m;
    }

    bool HasViolation(const MappingVerdict& v, const std::string& text)
    {
        return std::any_of(v.violations.begin(), v.violations.end(),
                           [&](const std::string& s) { return s.find(text) != std::string::npos; });
    }

    // Same template with every bound doubled.
    SubAcceleratorTemplate Enlarged(const SubAcceleratorTemplate& t)
    {
        auto params = t.FreeParams();
        for (auto& p : params) p.max_value *= 2;
        return SubAcceleratorTemplate(t.Id(), t.GetDataflow(), params, t.Levels());
    }
}

TEST(Templates, BundledPresets)
{
    const auto& eyeriss = Preset("eyeriss");
    EXPECT_EQ(eyeriss.GetDataflow(), Dataflow::RowStationary);
    EXPECT_EQ(eyeriss.MaxPes(), 168);
    EXPECT_EQ(eyeriss.FreeParams()[*eyeriss.FindParam("shared_buffer")].max_value, 131 * 1024);
    EXPECT_EQ(eyeriss.FreeParams()[*eyeriss.FindParam("pe_scratchpad")].max_value, 512);

    const auto& simba = Preset("simba");
    EXPECT_EQ(simba.GetDataflow(), Dataflow::WeightStationary);
    EXPECT_EQ(simba.MaxPes(), 128);
    EXPECT_EQ(simba.MaxMacsPerPe(), 32);
    EXPECT_EQ(simba.FreeParams()[*simba.FindParam("global_buffer")].max_value, 64 * 1024);
    EXPECT_EQ(simba.FreeParams()[*simba.FindParam("weight_buffer")].max_value, 32 * 1024);
    EXPECT_EQ(simba.FreeParams()[*simba.FindParam("input_buffer")].max_value, 8 * 1024);
    EXPECT_EQ(simba.FreeParams()[*simba.FindParam("accumulation_buffer")].max_value, 3 * 1024);

    const auto& sdn = Preset("shidiannao");
    EXPECT_EQ(sdn.GetDataflow(), Dataflow::OutputStationary);
    EXPECT_EQ(sdn.MaxPes(), 256);
    EXPECT_EQ(sdn.FreeParams()[*sdn.FindParam("neuron_buffer")].max_value, 131 * 1024);
    EXPECT_EQ(sdn.FreeParams()[*sdn.FindParam("synapse_buffer")].max_value, 131 * 1024);

    for (const auto& t : Lib().All())
        EXPECT_EQ(t.Levels().back().scope, BufferScope::Local) << t.Id();
}

TEST(Templates, LibraryJsonRoundTrip)
{
    auto lib = BundledTemplates();
    auto again = ParseTemplateLibrary(ToJson(lib));
    EXPECT_EQ(ToJson(again), ToJson(lib));
    auto wrapped = ParseTemplateLibrary(nlohmann::json{{"templates", ToJson(lib)}});
    EXPECT_EQ(wrapped.Size(), 3u);
}

TEST(Templates, InconsistentDescriptionsRejected)
{
    const std::vector<BufferLevel> levels{{"gb", BufferScope::Global, {Tensor::Weight, Tensor::Input, Tensor::Output}, {}, {}},
                                          {"lb", BufferScope::Local, {Tensor::Weight, Tensor::Input, Tensor::Output}, {}, {}}};
    EXPECT_NO_THROW(SubAcceleratorTemplate("ok", Dataflow::WeightStationary, {{"pes", 4}, {"gb", 64}, {"lb", 8}}, levels));
    EXPECT_THROW(SubAcceleratorTemplate("nopes", Dataflow::WeightStationary, {{"gb", 64}, {"lb", 8}}, levels),
                 ValidationError);
    EXPECT_THROW(SubAcceleratorTemplate("nolevelparam", Dataflow::WeightStationary, {{"pes", 4}, {"gb", 64}}, levels),
                 ValidationError);
    EXPECT_THROW(SubAcceleratorTemplate("zero", Dataflow::WeightStationary, {{"pes", 0}, {"gb", 64}, {"lb", 8}}, levels),
                 ValidationError);
    std::vector<BufferLevel> flipped{levels[1], levels[0]};
    EXPECT_THROW(SubAcceleratorTemplate("flipped", Dataflow::WeightStationary, {{"pes", 4}, {"gb", 64}, {"lb", 8}}, flipped),
                 ValidationError);
    std::vector<BufferLevel> homeless{levels[0], {"lb", BufferScope::Local, {Tensor::Weight}, {}, {}}};
    EXPECT_THROW(SubAcceleratorTemplate("homeless", Dataflow::WeightStationary, {{"pes", 4}, {"gb", 64}, {"lb", 8}}, homeless),
                 ValidationError);
    EXPECT_THROW(ParseTemplateLibrary(nlohmann::json::array({{{"id", "x"}}})), SchemaError);
}

TEST(ValidateMapping, UnitMappingFitsEveryTemplate)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; trial++)
    {
        auto shape = RandomShape(rng, 64);
        for (const auto& t : Lib().All())
        {
            auto m = Unit(shape, t);
            const auto orders = CanonicalLoopOrders(t.GetDataflow(), m);
            ASSERT_FALSE(orders.empty());
            for (const auto& order : orders)
            {
                m.loop_order = order;
                EXPECT_TRUE(ValidateMapping(m, shape, t).valid) << shape.Key() << " " << t.Id();
            }
        }
    }
}

TEST(ValidateMapping, PeOverflowAtBoundaryPlusOne)
{
    const auto& t = Preset("eyeriss");
    const std::int64_t limit = t.MaxPes() * t.MaxMacsPerPe();  // 168
    LayerShape at{limit, 1, 1, 1, 1, 1, LayerKind::Conv};
    auto m = Unit(at, t);
    m.spatial[0] = limit;
    EXPECT_TRUE(ValidateMapping(m, at, t).valid);

    LayerShape over{169, 1, 1, 1, 1, 1, LayerKind::Conv};
    auto n = Unit(over, t);
    n.spatial[0] = 169;
    auto v = ValidateMapping(n, over, t);
    EXPECT_FALSE(v.valid);
    EXPECT_TRUE(HasViolation(v, "PE overflow"));
}

TEST(ValidateMapping, WeightTileOverflowsSimbaWeightBuffer)
{
    const auto& t = Preset("simba");
    LayerShape shape{64, 64, 1, 1, 3, 3, LayerKind::Conv};
    auto m = Unit(shape, t);
    m.tiles = shape.Dims();
    const std::int64_t weight_tile = m.tiles[0] * m.tiles[1] * m.tiles[4] * m.tiles[5];
    const std::int64_t weight_max = t.FreeParams()[*t.FindParam("weight_buffer")].max_value;
    ASSERT_GT(weight_tile, weight_max);
    auto v = ValidateMapping(m, shape, t);
    EXPECT_FALSE(v.valid);
    EXPECT_TRUE(HasViolation(v, "buffer overflow at level weight"));

    // Halving the K tile brings the weight tile under the bound.
    m.tiles[1] = 32;
    ASSERT_LE(m.tiles[0] * m.tiles[1] * m.tiles[4] * m.tiles[5], weight_max);
    EXPECT_FALSE(HasViolation(ValidateMapping(m, shape, t), "level weight"));
}

TEST(ValidateMapping, NonDividingFactorsAndForeignTemplate)
{
    const auto& t = Preset("simba");
    LayerShape shape{6, 4, 1, 1, 1, 1, LayerKind::Conv};
    auto m = Unit(shape, t);
    m.tiles[0] = 4;
    EXPECT_FALSE(ValidateMapping(m, shape, t).valid);
    m.tiles[0] = 7;
    EXPECT_FALSE(ValidateMapping(m, shape, t).valid);
    EXPECT_THROW(ValidateMapping(Unit(shape, Preset("eyeriss")), shape, t), ValidationError);
}

TEST(ValidateMapping, MonotoneInTemplateBounds)
{
    std::mt19937_64 rng(5);
    for (const auto& t : Lib().All())
    {
        const auto big = Enlarged(t);
        for (int trial = 0; trial < 300; trial++)
        {
            auto shape = RandomShape(rng, 16);
            auto m = Unit(shape, t);
            for (Dim d : kAllDims)
            {
                const auto divs = moham::testing::Divisors(shape.Extent(d));
                const auto i = static_cast<std::size_t>(d);
                m.spatial[i] = divs[static_cast<std::size_t>(Pick(rng, 0, static_cast<std::int64_t>(divs.size()) - 1))];
                const auto rest = moham::testing::Divisors(shape.Extent(d) / m.spatial[i]);
                m.tiles[i] = rest[static_cast<std::size_t>(Pick(rng, 0, static_cast<std::int64_t>(rest.size()) - 1))];
            }
            std::shuffle(m.loop_order.begin(), m.loop_order.end(), rng);
            if (ValidateMapping(m, shape, t).valid) { EXPECT_TRUE(ValidateMapping(m, shape, big).valid); }
        }
    }
}

TEST(MappingDistance, IdentityAndReversal)
{
    LayerShape shape{4, 4, 4, 4, 3, 3, LayerKind::Conv};
    Mapping a;
    a.shape = shape;
    a.tiles = {2, 4, 1, 2, 3, 1};
    a.spatial = {2, 1, 2, 1, 1, 3};
    EXPECT_EQ(MappingDistance(a, a), 0.0);

    Mapping b = a;
    std::reverse(b.loop_order.begin(), b.loop_order.end());
    EXPECT_DOUBLE_EQ(MappingDistance(a, b), 1.0);

    Mapping c = a;
    c.shape.c = 8;
    EXPECT_THROW(MappingDistance(a, c), ValidationError);
}

TEST(MappingDistance, ComponentsAgainstHandComputation)
{
    LayerShape shape{8, 8, 1, 1, 1, 1, LayerKind::Conv};
    Mapping a, b;
    a.shape = b.shape = shape;
    b.tiles[0] = 8;    // |log2 8 - log2 1| = 3
    b.spatial[1] = 2;  // 1
    std::swap(b.loop_order[0], b.loop_order[1]);  // one discordant pair
    const double scale = 6.0 * 3.0;
    EXPECT_DOUBLE_EQ(MappingDistance(a, b), 1.0 / 15.0 + 3.0 / scale + 1.0 / scale);
}

TEST(MappingDistance, PseudometricOverRandomTriples)
{
    std::mt19937_64 rng(9);
    const auto& t = Preset("simba");
    for (int trial = 0; trial < 1000; trial++)
    {
        auto shape = RandomShape(rng, 12);
        std::array<Mapping, 3> m;
        for (auto& x : m)
        {
            x = RandomMapping(rng, shape, t);
            std::shuffle(x.loop_order.begin(), x.loop_order.end(), rng);
        }
        const double ab = MappingDistance(m[0], m[1]), ba = MappingDistance(m[1], m[0]);
        const double bc = MappingDistance(m[1], m[2]), ac = MappingDistance(m[0], m[2]);
        EXPECT_GE(ab, 0.0);
        EXPECT_EQ(ab, ba);
        EXPECT_EQ(MappingDistance(m[0], m[0]), 0.0);
        EXPECT_LE(ac, ab + bc + 1e-12);
        if (m[0] == m[1]) { EXPECT_EQ(ab, 0.0); }
        if (ab == 0.0)
        {
            EXPECT_EQ(m[0].tiles, m[1].tiles);
            EXPECT_EQ(m[0].spatial, m[1].spatial);
            EXPECT_EQ(m[0].loop_order, m[1].loop_order);
        }
    }
}

TEST(MappingTransform, ForcedChoicesAndBruteForce)
{
    std::mt19937_64 rng(13);
    const auto& simba = Preset("simba");
    const auto& eyeriss = Preset("eyeriss");
    for (int trial = 0; trial < 200; trial++)
    {
        auto shape = RandomShape(rng, 8);
        auto m = RandomMapping(rng, shape, simba);

        std::vector<Mapping> one{RandomMapping(rng, shape, eyeriss)};
        EXPECT_EQ(MappingTransform(m, one), 0u);

        std::vector<Mapping> five;
        for (int i = 0; i < 5; i++) five.push_back(RandomMapping(rng, shape, eyeriss));
        if (trial % 3 == 0) five[3] = five[1];  // force a tie
        std::size_t want = 0;
        for (std::size_t i = 1; i < five.size(); i++)
            if (MappingDistance(m, five[i]) < MappingDistance(m, five[want])) want = i;
        EXPECT_EQ(MappingTransform(m, five), want);

        five[2] = m;
        EXPECT_EQ(MappingDistance(m, five[MappingTransform(m, five)]), 0.0);
    }
    EXPECT_THROW(MappingTransform(Unit(LayerShape{}, simba), std::span<const Mapping>{}), SearchError);
}

TEST(MappingTransform, ResultValidOnTargetTemplate)
{
    std::mt19937_64 rng(17);
    const auto lib = BundledTemplates();
    for (int trial = 0; trial < 100; trial++)
    {
        auto shape = RandomShape(rng, 8);
        const auto& from = lib[static_cast<std::size_t>(trial) % 3];
        const auto& to = lib[static_cast<std::size_t>(trial + 1) % 3];
        auto m = RandomMapping(rng, shape, from);
        auto candidates = EnumerateMapspace(shape, to, 200).mappings;
        ASSERT_FALSE(candidates.empty());
        const auto& picked = candidates[MappingTransform(m, candidates)];
        EXPECT_TRUE(ValidateMapping(picked, shape, to).valid);
    }
}

TEST(Mapping, JsonRoundTripAndRequiredParams)
{
    std::mt19937_64 rng(19);
    for (const auto& t : Lib().All())
        for (int trial = 0; trial < 50; trial++)
        {
            auto shape = RandomShape(rng, 8);
            auto m = RandomMapping(rng, shape, t);
            EXPECT_EQ(MappingFromJson(ToJson(m), shape, t.Id()), m);

            auto req = RequiredParams(t, m);
            const auto lanes = m.Lanes();
            const auto macs = std::min(lanes, t.MaxMacsPerPe());
            EXPECT_EQ(req[t.PesParam()], (lanes + macs - 1) / macs);
            EXPECT_GE(req[t.PesParam()] * macs, lanes);
            for (std::size_t i = 0; i < req.size(); i++)
            {
                EXPECT_GE(req[i], 1);
                EXPECT_LE(req[i], t.FreeParams()[i].max_value);
            }
        }
}
