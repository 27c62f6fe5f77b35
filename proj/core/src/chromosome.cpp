#include <algorithm>
#include <set>

#include "moham/errors.hpp"
#include "moham/random.hpp"
#include "moham/scheduler.hpp"

namespace moham
{

    std::optional<std::size_t> Chromosome::PositionOf(std::size_t instance) const
    {
        for (std::size_t p = 0; p < hardware.size(); p++)
            if (hardware[p].instance == instance) return p;
        return std::nullopt;
    }

    std::size_t Chromosome::TemplateOf(std::size_t instance) const
    {
        auto p = PositionOf(instance);
        if (!p)
            throw ValidationError("chromosome has no instance " + std::to_string(instance));
        return hardware[*p].template_index;
    }

    std::vector<std::size_t> Chromosome::GenesOn(std::size_t instance) const
    {
        std::vector<std::size_t> genes;
        for (std::size_t g = 0; g < software.size(); g++)
            if (software[g].instance == instance) genes.push_back(g);
        return genes;
    }

    nlohmann::json ToJson(const Chromosome& c)
    {
        nlohmann::json sw = nlohmann::json::array();
        for (const auto& g : c.software) sw.push_back({g.layer, g.mapping, g.instance});
        nlohmann::json hw = nlohmann::json::array();
        for (const auto& g : c.hardware) hw.push_back({g.instance, g.template_index});
        return {{"software", sw}, {"hardware", hw}, {"next_instance", c.next_instance}};
    }

    std::vector<std::string> CheckChromosome(const Chromosome& c, const SchedulerContext& ctx)
    {
        std::vector<std::string> errors;
        const auto& am = *ctx.am;

        if (c.hardware.empty() || c.hardware.size() > ctx.max_instances)
            errors.push_back("hardware genome has " + std::to_string(c.hardware.size()) + " instances, allowed 1.." +
                             std::to_string(ctx.max_instances));
        std::set<std::size_t> ids;
        for (const auto& h : c.hardware)
        {
            if (!ids.insert(h.instance).second)
                errors.push_back("duplicate instance id " + std::to_string(h.instance));
            if (h.instance >= c.next_instance)
                errors.push_back("instance id " + std::to_string(h.instance) + " not below the id counter");
            if (h.template_index >= ctx.NumTemplates())
                errors.push_back("instance " + std::to_string(h.instance) + " has unknown template index");
        }

        if (c.software.size() != am.NumLayers())
            errors.push_back("software genome has " + std::to_string(c.software.size()) + " genes for " +
                             std::to_string(am.NumLayers()) + " layers");
        std::vector<LayerId> order;
        std::vector<bool> seen(am.NumLayers(), false);
        for (const auto& g : c.software)
        {
            if (g.layer >= am.NumLayers() || seen[g.layer])
            {
                errors.push_back("layer " + std::to_string(g.layer) + " missing from the model or repeated");
                continue;
            }
            seen[g.layer] = true;
            order.push_back(g.layer);
            auto p = c.PositionOf(g.instance);
            if (!p)
            {
                errors.push_back("layer " + std::to_string(g.layer) + " assigned to missing instance " +
                                 std::to_string(g.instance));
                continue;
            }
            const auto tmpl = c.hardware[*p].template_index;
            if (tmpl < ctx.NumTemplates() && g.mapping >= ctx.CatalogSize(g.layer, tmpl))
                errors.push_back("layer " + std::to_string(g.layer) + " mapping index " + std::to_string(g.mapping) +
                                 " out of range");
        }
        if (errors.empty() && !IsTopologicalOrder(am, order))
            errors.push_back("software genome is not a topological order");
        return errors;
    }

    Chromosome SampleIndividual(const SchedulerContext& ctx, std::mt19937_64& rng)
    {
        Chromosome c;
        if (ctx.fixed_hardware)
        {
            c.hardware = *ctx.fixed_hardware;
            for (const auto& h : c.hardware) c.next_instance = std::max(c.next_instance, h.instance + 1);
        }
        else
        {
            const std::size_t n = 1 + UniformIndex(rng, ctx.max_instances);
            for (std::size_t i = 0; i < n; i++) c.hardware.push_back({i, UniformIndex(rng, ctx.NumTemplates())});
            c.next_instance = n;
        }

        for (LayerId layer : KahnToposort(*ctx.am, TieBreak::SeededRandom, &rng))
        {
            const auto& h = c.hardware[UniformIndex(rng, c.hardware.size())];
            c.software.push_back({layer, UniformIndex(rng, ctx.CatalogSize(layer, h.template_index)), h.instance});
        }
        return c;
    }

    DecodedSystem Decode(const Chromosome& c, const SchedulerContext& ctx, const TemplateLibrary& templates,
                         const std::vector<ParamValues>* fixed_params)
    {
        if (templates.Size() != ctx.NumTemplates())
            throw ValidationError("template library does not match the mapping catalog");
        if (fixed_params && fixed_params->size() != c.hardware.size())
            throw ValidationError("fixed hardware sizes do not match the hardware genome");

        DecodedSystem sys;
        for (std::size_t p = 0; p < c.hardware.size(); p++)
        {
            const auto& h = c.hardware[p];
            const auto& t = templates[h.template_index];
            SubAcceleratorInstance inst{h.instance, h.template_index, fixed_params ? (*fixed_params)[p] : t.MinParams()};
            sys.instances.push_back(std::move(inst));
        }
        for (const auto& g : c.software)
        {
            const auto p = c.PositionOf(g.instance).value();
            auto& inst = sys.instances[p];
            const auto& list = ctx.catalog->ForLayer(g.layer, inst.template_index);
            const auto& required = list.at(g.mapping).cost.required;
            for (std::size_t i = 0; i < required.size(); i++)
            {
                if (!fixed_params)
                {
                    inst.params[i] = std::max(inst.params[i], required[i]);
                }
                else if (required[i] > inst.params[i] && sys.feasible)
                {
                    sys.feasible = false;
                    sys.infeasible_reason = "layer " + std::to_string(g.layer) + " needs " +
                                            templates[inst.template_index].FreeParams()[i].name + " = " +
                                            std::to_string(required[i]) + " on instance " +
                                            std::to_string(inst.instance_id) + ", which provides " +
                                            std::to_string(inst.params[i]);
                }
            }
        }
        for (const auto& inst : sys.instances)
        {
            const auto& free = templates[inst.template_index].FreeParams();
            for (std::size_t i = 0; i < free.size(); i++)
                if (inst.params[i] > free[i].max_value && sys.feasible)
                {
                    sys.feasible = false;
                    sys.infeasible_reason = "instance " + std::to_string(inst.instance_id) + " exceeds " + free[i].name;
                }
        }
        return sys;
    }

} // namespace moham
