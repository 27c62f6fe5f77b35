#include "moham/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "moham/errors.hpp"
#include "moham/random.hpp"

namespace moham
{

    std::string ToString(RunMode mode)
    {
        switch (mode)
        {
        case RunMode::CoOpt: return "co_opt";
        case RunMode::HardwareOnly: return "hardware_only";
        case RunMode::MappingOnly: return "mapping_only";
        case RunMode::MonoLatency: return "mono_latency";
        case RunMode::MonoEnergy: return "mono_energy";
        case RunMode::Ablation: return "ablation";
        }
        return "co_opt";
    }

    RunMode RunModeFromString(const std::string& text)
    {
        for (RunMode m : {RunMode::CoOpt, RunMode::HardwareOnly, RunMode::MappingOnly, RunMode::MonoLatency,
                          RunMode::MonoEnergy, RunMode::Ablation})
            if (ToString(m) == text) return m;
        throw ValidationError("unknown mode '" + text + "'");
    }

    FixedHardware ParseFixedHardware(const nlohmann::json& document, const TemplateLibrary& templates)
    {
        const nlohmann::json* list = &document;
        if (document.is_object() && document.contains("instances")) list = &document.at("instances");
        if (!list->is_array() || list->empty())
            throw SchemaError("fixed hardware must be a nonempty list of instances");

        FixedHardware fixed;
        for (const auto& e : *list)
        {
            std::string id;
            if (e.is_string())
                id = e.get<std::string>();
            else if (e.is_object() && e.contains("template") && e.at("template").is_string())
                id = e.at("template").get<std::string>();
            else
                throw SchemaError("fixed hardware instance needs a 'template' id");
            const auto& t = templates[templates.IndexOf(id)];
            fixed.templates.push_back(id);

            if (e.is_object() && e.contains("params"))
            {
                const auto& jp = e.at("params");
                if (!jp.is_object())
                    throw SchemaError("fixed hardware params must be an object");
                ParamValues values = t.MaxParams();
                for (auto it = jp.begin(); it != jp.end(); ++it)
                {
                    auto p = t.FindParam(it.key());
                    if (!p)
                        throw ValidationError("template '" + id + "' has no parameter '" + it.key() + "'");
                    if (!it.value().is_number_integer())
                        throw SchemaError("fixed hardware parameter '" + it.key() + "' must be an integer");
                    const auto v = it.value().get<std::int64_t>();
                    if (v < 1 || v > t.FreeParams()[*p].max_value)
                        throw ValidationError("fixed hardware parameter '" + it.key() + "' outside template bounds");
                    values[*p] = v;
                }
                fixed.params.emplace_back(std::move(values));
            }
            else
                fixed.params.emplace_back(std::nullopt);
        }
        return fixed;
    }

    FixedHardware LoadFixedHardware(const std::string& path, const TemplateLibrary& templates)
    {
        std::ifstream in(path);
        if (!in)
            throw SchemaError("cannot open fixed hardware file '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("fixed hardware file '" + path + "': " + e.what());
        }
        return ParseFixedHardware(doc, templates);
    }

    void RunConfig::Validate() const
    {
        for (double p : probabilities.p)
            if (!(p >= 0.0 && p <= 1.0))
                throw ValidationError("operator probabilities must lie in [0, 1]");
        if (population < 4)
            throw ValidationError("population must be >= 4");
        if (generations < 1)
            throw ValidationError("generations must be >= 1");
        if (max_instances < 1)
            throw ValidationError("max instances must be >= 1");
        if (catalog.budget < 1)
            throw ValidationError("enumeration budget must be >= 1");
        if (convergence.density_threshold < 0.0 || convergence.density_threshold > 1.0)
            throw ValidationError("density threshold must lie in [0, 1]");
        if (mode == RunMode::Ablation && !ablated)
            throw ValidationError("ablation mode needs an operator to ablate");
        if (mode == RunMode::MappingOnly && fixed_hardware.templates.empty())
            throw ValidationError("mapping_only mode needs a fixed hardware configuration");
        if (sampling_attempts < 1)
            throw ValidationError("sampling attempts must be >= 1");
    }

    SearchSpaceReport WorkloadSearchSpace(const ApplicationModel& am, const TemplateLibrary& templates,
                                          std::size_t max_instances)
    {
        SearchSpaceParams p;
        for (const auto& t : templates.All())
        {
            p.free_params = std::max<std::uint64_t>(p.free_params, t.FreeParams().size());
            for (const auto& f : t.FreeParams())
                p.values_per_param = std::max<std::uint64_t>(p.values_per_param, static_cast<std::uint64_t>(f.max_value));
        }
        p.num_instances = max_instances;
        p.num_layers = am.NumLayers();
        p.num_models = am.Models().size();
        for (const auto& m : am.Models())
            p.layers_per_model = std::max<std::uint64_t>(p.layers_per_model, m.layers.size());
        for (const auto& l : am.Layers())
            if (l.shape.TotalMacs() > p.shape.TotalMacs()) p.shape = l.shape;
        return ComputeSearchSpace(p);
    }

    double CompareFronts(std::span<const Objectives> a, std::span<const Objectives> b)
    {
        if (b.empty())
            throw ValidationError("cannot compare against an empty front");
        std::size_t dominated = 0;
        for (const auto& x : b)
            if (std::any_of(a.begin(), a.end(), [&](const Objectives& y) { return Dominates(y, x); })) dominated++;
        return static_cast<double>(dominated) / static_cast<double>(b.size());
    }

    namespace
    {
        struct Individual
        {
            Chromosome chromosome;
            EvaluationResult evaluation;
        };

        Objectives Project(RunMode mode, const Objectives& o)
        {
            if (mode == RunMode::MonoLatency) return {o[0], 0.0, 0.0};
            if (mode == RunMode::MonoEnergy) return {o[1], 0.0, 0.0};
            return o;
        }

        std::vector<Objectives> Projected(RunMode mode, const std::vector<Individual>& pop)
        {
            std::vector<Objectives> out;
            out.reserve(pop.size());
            for (const auto& ind : pop) out.push_back(Project(mode, ind.evaluation.objectives));
            return out;
        }

        constexpr std::size_t kRedrawsPerSlot = 20;

        std::vector<std::size_t> GenomeKey(const Chromosome& c)
        {
            std::vector<std::size_t> key{c.software.size(), c.hardware.size()};
            for (const auto& g : c.software) key.insert(key.end(), {g.layer, g.mapping, g.instance});
            for (const auto& h : c.hardware) key.insert(key.end(), {h.instance, h.template_index});
            return key;
        }

        // Survival over the first copy of each objective triple. Repeats only
        // fill slots the distinct members leave free, so copies of one design
        // cannot crowd the front out of the population.
        std::vector<std::size_t> SurviveDistinct(RunMode mode, const std::vector<Individual>& merged, std::size_t target)
        {
            std::vector<std::size_t> distinct, repeats;
            std::set<Objectives> seen;
            for (std::size_t i = 0; i < merged.size(); i++)
                (seen.insert(merged[i].evaluation.objectives).second ? distinct : repeats).push_back(i);

            std::vector<Objectives> points;
            for (auto i : distinct) points.push_back(Project(mode, merged[i].evaluation.objectives));
            std::vector<std::size_t> keep;
            for (auto k : Survival(points, std::min(target, distinct.size()))) keep.push_back(distinct[k]);
            for (std::size_t r = 0; keep.size() < target && r < repeats.size(); r++) keep.push_back(repeats[r]);
            return keep;
        }

        GenerationStats Stats(std::size_t generation, RunMode mode, const std::vector<Individual>& pop)
        {
            GenerationStats s;
            s.generation = generation;
            const auto ranking = RankPopulation(Projected(mode, pop));
            s.front0_size = ranking.fronts.empty() ? 0 : ranking.fronts[0].size();
            s.front0_fraction = static_cast<double>(s.front0_size) / static_cast<double>(pop.size());

            s.best = {kInfeasible, kInfeasible, kInfeasible};
            Objectives worst{0.0, 0.0, 0.0};
            for (const auto& ind : pop)
            {
                if (!ind.evaluation.feasible) continue;
                s.feasible++;
                for (std::size_t m = 0; m < 3; m++)
                {
                    s.best[m] = std::min(s.best[m], ind.evaluation.objectives[m]);
                    worst[m] = std::max(worst[m], ind.evaluation.objectives[m]);
                }
            }
            if (!ranking.fronts.empty())
                for (auto i : ranking.fronts[0])
                {
                    const auto& ev = pop[i].evaluation;
                    if (!ev.feasible) continue;
                    double box = 1.0;
                    for (std::size_t m = 0; m < 3; m++)
                        box *= worst[m] > 0.0 ? 1.0 - ev.objectives[m] / worst[m] : 0.0;
                    s.hypervolume_proxy += box;
                }
            return s;
        }
    }

    RunArtifacts RunMoham(const RunInputs& inputs, const RunConfig& cfg_in)
    {
        RunConfig cfg = cfg_in;
        cfg.Validate();
        cfg.convergence.max_generations = cfg.generations;

        RunArtifacts art;
        const auto& am = inputs.am;

        art.templates = cfg.mode == RunMode::HardwareOnly ? inputs.templates.Subset({cfg.template_family})
                                                          : inputs.templates;

        auto restrict_entries = [&](nlohmann::json doc) {
            if (cfg.mode != RunMode::HardwareOnly || !doc.contains("entries")) return doc;
            nlohmann::json kept = nlohmann::json::array();
            for (const auto& e : doc.at("entries"))
                if (e.contains("template") && e.at("template") == cfg.template_family) kept.push_back(e);
            doc["entries"] = kept;
            return doc;
        };

        if (inputs.catalog)
            art.catalog = ImportCatalog(restrict_entries(*inputs.catalog), am, art.templates, inputs.coeffs);
        else
            art.catalog = BuildCatalog(am, art.templates, inputs.coeffs, cfg.catalog);
        if (inputs.cost_table)
        {
            CostTable table;
            for (const auto& [key, e] : *inputs.cost_table)
                if (cfg.mode != RunMode::HardwareOnly || e.template_id == cfg.template_family) table.emplace(key, e);
            art.catalog.ApplyCostTable(table);
        }
        if (cfg.mode == RunMode::HardwareOnly) art.catalog.PinMinLatency();

        std::vector<HardwareGene> fixed_genes;
        std::vector<ParamValues> fixed_params;
        if (cfg.mode == RunMode::MappingOnly)
        {
            const auto& fh = cfg.fixed_hardware;
            for (std::size_t i = 0; i < fh.templates.size(); i++)
            {
                const auto t = art.templates.IndexOf(fh.templates[i]);
                fixed_genes.push_back({i, t});
                fixed_params.push_back(fh.params.at(i) ? *fh.params[i] : art.templates[t].MaxParams());
            }
            cfg.max_instances = fixed_genes.size();
            for (Operator op : kOperatorOrder)
                if (ChangesHardware(op)) cfg.probabilities[op] = 0.0;
        }
        if (cfg.ablated) cfg.probabilities[*cfg.ablated] = 0.0;

        art.mesh = BuildMesh(inputs.nop, cfg.max_instances);
        art.space = WorkloadSearchSpace(am, art.templates, cfg.max_instances);

        SchedulerContext sctx;
        sctx.am = &am;
        sctx.catalog = &art.catalog;
        sctx.max_instances = cfg.max_instances;
        if (cfg.mode == RunMode::MappingOnly) sctx.fixed_hardware = &fixed_genes;

        EvaluationContext ectx;
        ectx.scheduler = &sctx;
        ectx.templates = &art.templates;
        ectx.coeffs = &inputs.coeffs;
        ectx.mesh = &art.mesh;
        if (cfg.mode == RunMode::MappingOnly) ectx.fixed_params = &fixed_params;

        auto sampling = Substream(cfg.seed, "sampling");
        auto selection = Substream(cfg.seed, "selection");
        auto coin = Substream(cfg.seed, "apply");
        std::vector<std::mt19937_64> op_rng;
        for (Operator op : kOperatorOrder)
            op_rng.push_back(Substream(cfg.seed, "operator:" + OperatorName(op)));

        auto evaluate = [&](Chromosome c) {
            Individual ind{std::move(c), {}};
            ind.evaluation = Evaluate(ind.chromosome, ectx);
            return ind;
        };

        std::vector<Individual> pop;
        std::set<std::vector<std::size_t>> sampled;
        std::size_t redraws = 0;
        const std::size_t max_redraws = cfg.eliminate_duplicates ? kRedrawsPerSlot * cfg.population : 0;
        std::size_t feasible = 0;
        for (std::size_t i = 0; i < cfg.population; i++)
        {
            Individual ind;
            for (std::size_t attempt = 0; attempt < cfg.sampling_attempts; attempt++)
            {
                auto c = SampleIndividual(sctx, sampling);
                while (!sampled.insert(GenomeKey(c)).second && redraws < max_redraws)
                {
                    redraws++;
                    c = SampleIndividual(sctx, sampling);
                }
                ind = evaluate(std::move(c));
                if (ind.evaluation.feasible) break;
            }
            if (ind.evaluation.feasible) feasible++;
            pop.push_back(std::move(ind));
        }
        if (feasible == 0)
            throw SearchError("no feasible individual found while sampling the initial population: " +
                              pop.front().evaluation.infeasible_reason);

        std::vector<double> history;
        for (std::size_t gen = 1; gen <= cfg.generations; gen++)
        {
            const auto ranking = RankPopulation(Projected(cfg.mode, pop));

            std::set<std::vector<std::size_t>> known;
            for (const auto& ind : pop) known.insert(GenomeKey(ind.chromosome));
            std::size_t redraws = 0;
            const std::size_t max_redraws = cfg.eliminate_duplicates ? kRedrawsPerSlot * cfg.population : 0;
            std::vector<Chromosome> children;
            while (children.size() < cfg.population)
            {
                Chromosome c1 = pop[TournamentSelect(ranking, selection)].chromosome;
                Chromosome c2 = pop[TournamentSelect(ranking, selection)].chromosome;
                for (std::size_t k = 0; k < kNumOperators; k++)
                {
                    const Operator op = kOperatorOrder[k];
                    const double p = cfg.probabilities[op];
                    if (p <= 0.0) continue;
                    auto& rng = op_rng[static_cast<std::size_t>(op)];
                    if (IsCrossover(op))
                    {
                        if (UniformUnit(coin) >= p) continue;
                        auto out = ApplyOperator(op, c1, c2, sctx, rng);
                        c1 = std::move(out[0]);
                        c2 = std::move(out[1]);
                    }
                    else
                    {
                        for (Chromosome* c : {&c1, &c2})
                        {
                            if (UniformUnit(coin) >= p) continue;
                            *c = std::move(ApplyOperator(op, *c, *c, sctx, rng)[0]);
                        }
                    }
                }
                for (Chromosome* c : {&c1, &c2})
                {
                    if (children.size() == cfg.population) break;
                    // Clones of known designs are redrawn while the retry budget lasts.
                    if (!known.insert(GenomeKey(*c)).second && redraws < max_redraws)
                    {
                        redraws++;
                        continue;
                    }
                    children.push_back(std::move(*c));
                }
            }

            std::vector<Individual> merged = std::move(pop);
            for (auto& c : children) merged.push_back(evaluate(std::move(c)));
            pop.clear();
            for (auto i : SurviveDistinct(cfg.mode, merged, cfg.population)) pop.push_back(std::move(merged[i]));

            auto stats = Stats(gen, cfg.mode, pop);
            history.push_back(stats.front0_fraction);
            art.log.push_back(stats);
            art.generations_run = gen;
            if (Converged(history, cfg.convergence))
            {
                art.converged_by_density = gen < cfg.generations;
                break;
            }
        }

        // Final front: rank-0 feasible members, filtered to full three-objective
        // non-dominance, one member per objective triple.
        const auto ranking = RankPopulation(Projected(cfg.mode, pop));
        std::vector<std::size_t> candidates;
        for (auto i : ranking.fronts.front())
            if (pop[i].evaluation.feasible) candidates.push_back(i);
        std::vector<Objectives> points;
        for (auto i : candidates) points.push_back(pop[i].evaluation.objectives);
        std::set<Objectives> seen;
        for (auto k : ParetoFilter(points))
        {
            auto& ind = pop[candidates[k]];
            if (!seen.insert(ind.evaluation.objectives).second) continue;
            art.front.push_back({ind.chromosome, ind.evaluation});
        }
        std::stable_sort(art.front.begin(), art.front.end(), [](const FrontMember& a, const FrontMember& b) {
            return a.evaluation.objectives < b.evaluation.objectives;
        });
        art.config = cfg;
        return art;
    }

} // namespace moham
