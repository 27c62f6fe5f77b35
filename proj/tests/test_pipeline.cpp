#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "moham/errors.hpp"
#include "moham/pipeline.hpp"
#include "moham/reports.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace moham;

namespace
{
    std::string DataPath(const std::string& name)
    {
        return std::string(MOHAM_DATA_DIR) + "/" + name;
    }

    RunInputs TinyInputs()
    {
        RunInputs in{LoadApplicationModel(DataPath("workloads/tiny.json")), LoadTemplateLibrary(DataPath("templates.json")),
                     LoadCostCoefficients(DataPath("coeffs.json")), LoadNopConfig(DataPath("nop.json")), std::nullopt,
                     std::nullopt};
        return in;
    }

    RunConfig SmallConfig(std::uint64_t seed = 3)
    {
        RunConfig cfg;
        cfg.seed = seed;
        cfg.population = 16;
        cfg.generations = 8;
        cfg.max_instances = 4;
        cfg.catalog.budget = 400;
        cfg.catalog.max_per_pair = 4;
        return cfg;
    }

    std::filesystem::path ScratchDir(const std::string& name)
    {
        auto dir = std::filesystem::temp_directory_path() / ("moham_test_" + name);
        std::filesystem::remove_all(dir);
        return dir;
    }

    std::string Slurp(const std::filesystem::path& p)
    {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::vector<Objectives> FrontObjectives(const RunArtifacts& art)
    {
        std::vector<Objectives> out;
        for (const auto& m : art.front) out.push_back(m.evaluation.objectives);
        return out;
    }
}

TEST(RunMoham, SmokeOneGeneration)
{
    auto in = TinyInputs();
    auto cfg = SmallConfig();
    cfg.population = 4;
    cfg.generations = 1;
    auto art = RunMoham(in, cfg);
    ASSERT_GE(art.front.size(), 1u);
    EXPECT_EQ(art.generations_run, 1u);
    EXPECT_EQ(art.log.size(), 1u);
    for (const auto& m : art.front)
    {
        EXPECT_TRUE(m.evaluation.feasible);
        SchedulerContext ctx;
        ctx.am = &in.am;
        ctx.catalog = &art.catalog;
        ctx.max_instances = cfg.max_instances;
        EXPECT_TRUE(CheckChromosome(m.chromosome, ctx).empty());
    }
}

TEST(RunMoham, FrontInternallyNonDominatedAndUnique)
{
    auto art = RunMoham(TinyInputs(), SmallConfig(5));
    const auto pts = FrontObjectives(art);
    EXPECT_EQ(moham::testing::ParetoOracle(pts).size(), pts.size());
    EXPECT_EQ(std::set<Objectives>(pts.begin(), pts.end()).size(), pts.size());
    EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
}

TEST(RunMoham, SameSeedSameCsv)
{
    auto in = TinyInputs();
    const auto a = ParetoCsv(RunMoham(in, SmallConfig(11)));
    const auto b = ParetoCsv(RunMoham(in, SmallConfig(11)));
    EXPECT_EQ(a, b);
}

TEST(RunMoham, DuplicateEliminationToggle)
{
    auto in = TinyInputs();
    auto cfg = SmallConfig(21);
    const auto with = RunMoham(in, cfg);
    cfg.eliminate_duplicates = false;
    const auto without = RunMoham(in, cfg);
    EXPECT_EQ(ParetoCsv(without), ParetoCsv(RunMoham(in, cfg)));
    EXPECT_FALSE(with.front.empty());
    EXPECT_FALSE(without.front.empty());
    EXPECT_EQ(moham::testing::ParetoOracle(FrontObjectives(without)).size(), without.front.size());
}

TEST(RunMoham, MappingOnlyKeepsFixedHardware)
{
    auto in = TinyInputs();
    auto cfg = SmallConfig(7);
    cfg.mode = RunMode::MappingOnly;
    cfg.fixed_hardware = LoadFixedHardware(DataPath("fixed_hardware.json"), in.templates);
    auto art = RunMoham(in, cfg);
    ASSERT_FALSE(art.front.empty());
    std::set<double> areas;
    for (const auto& m : art.front)
    {
        ASSERT_EQ(m.chromosome.hardware.size(), cfg.fixed_hardware.templates.size());
        for (std::size_t i = 0; i < m.chromosome.hardware.size(); i++)
        {
            EXPECT_EQ(m.chromosome.hardware[i].instance, i);
            EXPECT_EQ(art.templates[m.chromosome.hardware[i].template_index].Id(), cfg.fixed_hardware.templates[i]);
            const auto& t = art.templates[m.evaluation.system.instances[i].template_index];
            const auto& want = cfg.fixed_hardware.params[i] ? *cfg.fixed_hardware.params[i] : t.MaxParams();
            EXPECT_EQ(m.evaluation.system.instances[i].params, want);
        }
        areas.insert(m.evaluation.objectives[2]);
    }
    EXPECT_EQ(areas.size(), 1u);
}

TEST(RunMoham, HardwareOnlyUsesOneFamilyAndPinnedMappings)
{
    auto in = TinyInputs();
    auto cfg = SmallConfig(9);
    cfg.mode = RunMode::HardwareOnly;
    cfg.template_family = "eyeriss";
    auto art = RunMoham(in, cfg);
    ASSERT_EQ(art.templates.Size(), 1u);
    for (std::size_t l = 0; l < in.am.NumLayers(); l++) EXPECT_EQ(art.catalog.ForLayer(l, 0).size(), 1u);
    for (const auto& m : art.front)
        for (const auto& inst : m.evaluation.system.instances) EXPECT_EQ(art.templates[inst.template_index].Id(), "eyeriss");
}

TEST(RunMoham, MonoModesOptimiseTheirAxis)
{
    auto in = TinyInputs();
    for (RunMode mode : {RunMode::MonoLatency, RunMode::MonoEnergy})
    {
        auto cfg = SmallConfig(13);
        cfg.mode = mode;
        auto art = RunMoham(in, cfg);
        ASSERT_FALSE(art.front.empty());
        const std::size_t axis = mode == RunMode::MonoLatency ? 0 : 1;
        // Every front member shares the best value on the optimised axis.
        for (const auto& m : art.front) EXPECT_EQ(m.evaluation.objectives[axis], art.front[0].evaluation.objectives[axis]);
        EXPECT_EQ(art.front[0].evaluation.objectives[axis], art.log.back().best[axis]);
    }
}

TEST(RunMoham, AblationZeroesOneOperator)
{
    auto in = TinyInputs();
    auto cfg = SmallConfig(15);
    cfg.mode = RunMode::Ablation;
    EXPECT_THROW(RunMoham(in, cfg), ValidationError);
    cfg.ablated = Operator::SplittingMutation;
    auto art = RunMoham(in, cfg);
    EXPECT_EQ(art.config.probabilities[Operator::SplittingMutation], 0.0);
    EXPECT_FALSE(art.front.empty());
}

TEST(RunMoham, InfeasibleFixedHardwareRaisesSearchError)
{
    auto in = TinyInputs();
    auto cfg = SmallConfig();
    cfg.mode = RunMode::MappingOnly;
    cfg.sampling_attempts = 3;
    const auto& t = in.templates[in.templates.IndexOf("simba")];
    cfg.fixed_hardware.templates = {"simba"};
    cfg.fixed_hardware.params = {t.MinParams()};
    EXPECT_THROW(RunMoham(in, cfg), SearchError);
}

TEST(RunConfig, ValidationErrors)
{
    RunConfig ok;
    EXPECT_NO_THROW(ok.Validate());
    auto bad = ok;
    bad.population = 3;
    EXPECT_THROW(bad.Validate(), ValidationError);
    bad = ok;
    bad.generations = 0;
    EXPECT_THROW(bad.Validate(), ValidationError);
    bad = ok;
    bad.probabilities[Operator::MappingMutation] = 1.5;
    EXPECT_THROW(bad.Validate(), ValidationError);
    bad = ok;
    bad.probabilities[Operator::MappingMutation] = std::nan("");
    EXPECT_THROW(bad.Validate(), ValidationError);
    bad = ok;
    bad.mode = RunMode::MappingOnly;
    EXPECT_THROW(bad.Validate(), ValidationError);
    bad = ok;
    bad.catalog.budget = 0;
    EXPECT_THROW(bad.Validate(), ValidationError);
}

TEST(RunConfig, ModeNamesRoundTrip)
{
    for (RunMode m : {RunMode::CoOpt, RunMode::HardwareOnly, RunMode::MappingOnly, RunMode::MonoLatency,
                      RunMode::MonoEnergy, RunMode::Ablation})
        EXPECT_EQ(RunModeFromString(ToString(m)), m);
    EXPECT_THROW(RunModeFromString("fastest"), ValidationError);
}

TEST(FixedHardware, ParseForms)
{
    const auto lib = BundledTemplates();
    auto plain = ParseFixedHardware(nlohmann::json::array({"simba", "eyeriss"}), lib);
    EXPECT_EQ(plain.templates, (std::vector<std::string>{"simba", "eyeriss"}));
    EXPECT_FALSE(plain.params[0].has_value());

    auto sized = ParseFixedHardware({{"instances", {{{"template", "simba"}, {"params", {{"pes", 2}}}}}}}, lib);
    const auto& simba = lib[lib.IndexOf("simba")];
    auto want = simba.MaxParams();
    want[*simba.FindParam("pes")] = 2;
    EXPECT_EQ(*sized.params[0], want);

    EXPECT_THROW(ParseFixedHardware(nlohmann::json::array(), lib), SchemaError);
    EXPECT_THROW(ParseFixedHardware(nlohmann::json::array({"tpu"}), lib), ValidationError);
    EXPECT_THROW(ParseFixedHardware({{"instances", {{{"template", "simba"}, {"params", {{"pes", 0}}}}}}}, lib),
                 ValidationError);
    EXPECT_THROW(ParseFixedHardware({{"instances", {{{"template", "simba"}, {"params", {{"rows", 2}}}}}}}, lib),
                 ValidationError);
}

TEST(CompareFronts, Examples)
{
    std::vector<Objectives> a{{1, 2, 3}, {3, 2, 1}};
    EXPECT_EQ(CompareFronts(a, a), 0.0);
    std::vector<Objectives> worse{{2, 3, 4}, {4, 3, 2}};
    EXPECT_EQ(CompareFronts(a, worse), 1.0);
    EXPECT_EQ(CompareFronts(worse, a), 0.0);
    std::vector<Objectives> mixed{{2, 3, 4}, {0, 0, 9}};
    EXPECT_EQ(CompareFronts(a, mixed), 0.5);
    EXPECT_EQ(CompareFronts({}, a), 0.0);
    EXPECT_THROW(CompareFronts(a, {}), ValidationError);
}

TEST(CompareFronts, MatchesQuadraticOracle)
{
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 300; trial++)
    {
        auto a = moham::testing::RandomObjectives(rng, static_cast<std::size_t>(trial % 40), 8);
        auto b = moham::testing::RandomObjectives(rng, static_cast<std::size_t>(1 + trial % 37), 8);
        EXPECT_EQ(CompareFronts(a, b), moham::testing::CompareFrontsOracle(a, b));
    }
}

TEST(Reports, EmitWritesEveryFile)
{
    auto in = TinyInputs();
    auto art = RunMoham(in, SmallConfig(17));
    const auto dir = ScratchDir("emit");
    EmitReports(art, in.am, dir.string());

    const auto csv = Slurp(dir / "pareto.csv");
    EXPECT_EQ(csv, ParetoCsv(art));
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), art.front.size() + 1);

    for (std::size_t i = 0; i < art.front.size(); i++)
    {
        const auto id = std::to_string(i);
        ASSERT_TRUE(std::filesystem::exists(dir / ("area-" + id + ".json")));
        auto gantt = nlohmann::json::parse(Slurp(dir / ("gantt-" + id + ".json")));
        ASSERT_EQ(gantt.size(), in.am.NumLayers());
        std::map<std::string, double> finish;
        for (std::size_t k = 0; k < gantt.size(); k++)
        {
            if (k > 0)
            {
                EXPECT_LE(gantt[k - 1].at("start").get<double>(), gantt[k].at("start").get<double>());
            }
            finish[gantt[k].at("layer").get<std::string>()] = gantt[k].at("end").get<double>();
        }
        for (const auto& e : gantt)
        {
            const auto self = in.am.FindLayer(e.at("layer").get<std::string>());
            ASSERT_TRUE(self.has_value());
            for (LayerId p : in.am.Predecessors(*self))
                EXPECT_LE(finish.at(in.am.GetLayer(p).name), e.at("start").get<double>() + 1e-9);
        }
    }

    auto space = nlohmann::json::parse(Slurp(dir / "space_report.json"));
    EXPECT_EQ(space, ToJson(WorkloadSearchSpace(in.am, in.templates, art.config.max_instances)));

    const auto log = Slurp(dir / "run_log.jsonl");
    EXPECT_EQ(static_cast<std::size_t>(std::count(log.begin(), log.end(), '\n')), art.log.size());

    auto from_csv = LoadFront((dir / "pareto.csv").string());
    auto from_json = LoadFront((dir / "pareto.json").string());
    EXPECT_EQ(from_csv, FrontObjectives(art));
    EXPECT_EQ(from_json, FrontObjectives(art));
    std::filesystem::remove_all(dir);
}

TEST(Reports, UnwritableDirectory)
{
    auto in = TinyInputs();
    auto cfg = SmallConfig();
    cfg.population = 4;
    cfg.generations = 1;
    auto art = RunMoham(in, cfg);
    const auto dir = ScratchDir("blocked");
    WriteTextFile(dir.string(), "not a directory");
    EXPECT_THROW(EmitReports(art, in.am, (dir / "sub").string()), IoError);
    std::filesystem::remove_all(dir);
}

TEST(Reports, LoadFrontErrors)
{
    const auto dir = ScratchDir("load");
    std::filesystem::create_directories(dir);
    EXPECT_THROW(LoadFront((dir / "missing.csv").string()), SchemaError);
    WriteTextFile((dir / "bad.csv").string(), "a,b\n1,2\n");
    EXPECT_THROW(LoadFront((dir / "bad.csv").string()), SchemaError);
    WriteTextFile((dir / "nan.csv").string(), "latency_cycles,energy_pj,area_mm2\nx,1,2\n");
    EXPECT_THROW(LoadFront((dir / "nan.csv").string()), SchemaError);
    WriteTextFile((dir / "bad.json").string(), "{\"front\": [{\"latency_cycles\": 1}]}");
    EXPECT_THROW(LoadFront((dir / "bad.json").string()), SchemaError);
    WriteTextFile((dir / "ok.csv").string(), "latency_cycles,energy_pj,area_mm2\n1,2.5,3\n");
    EXPECT_EQ(LoadFront((dir / "ok.csv").string()), (std::vector<Objectives>{{1, 2.5, 3}}));
    std::filesystem::remove_all(dir);
}

TEST(Reports, FormatNumberRoundTrips)
{
    EXPECT_EQ(FormatNumber(1.0), "1");
    EXPECT_EQ(FormatNumber(0.1), "0.1");
    EXPECT_EQ(FormatNumber(std::numeric_limits<double>::infinity()), "inf");
    std::mt19937_64 rng(89);
    std::uniform_real_distribution<double> dist(-1e12, 1e12);
    for (int i = 0; i < 1000; i++)
    {
        const double v = dist(rng);
        EXPECT_EQ(std::stod(FormatNumber(v)), v);
    }
}
