#include <algorithm>
#include <numeric>
#include <set>

#include "moham/errors.hpp"
#include "moham/random.hpp"
#include "moham/scheduler.hpp"

namespace moham
{

    std::string OperatorName(Operator op)
    {
        switch (op)
        {
        case Operator::SchedulingCrossover: return "sched_cross";
        case Operator::SchedulingMutation: return "sched_mut";
        case Operator::SaCrossover: return "sa_cross";
        case Operator::TemplateMutation: return "template_mut";
        case Operator::MergingMutation: return "merging";
        case Operator::SplittingMutation: return "splitting";
        case Operator::MappingMutation: return "mapping_mut";
        case Operator::MappingCrossover: return "mapping_cross";
        case Operator::LayerAssignmentMutation: return "layer_assign";
        case Operator::PositionMutation: return "position";
        }
        return "sched_cross";
    }

    Operator OperatorFromName(const std::string& name)
    {
        for (Operator op : kOperatorOrder)
            if (OperatorName(op) == name) return op;
        throw ValidationError("unknown operator '" + name + "'");
    }

    bool IsCrossover(Operator op)
    {
        return op == Operator::SchedulingCrossover || op == Operator::SaCrossover || op == Operator::MappingCrossover;
    }

    bool ChangesHardware(Operator op)
    {
        return op == Operator::SaCrossover || op == Operator::TemplateMutation || op == Operator::MergingMutation ||
               op == Operator::SplittingMutation || op == Operator::PositionMutation;
    }

    namespace
    {
        std::size_t Remap(const SchedulerContext& ctx, LayerId layer, std::size_t from, std::size_t mi, std::size_t to)
        {
            return from == to ? mi : ctx.catalog->Transform(layer, from, mi, to);
        }

        // Moves a gene to `instance`, carrying its mapping across templates.
        void Reassign(const SchedulerContext& ctx, Chromosome& c, SoftwareGene& g, std::size_t from_template,
                      std::size_t instance)
        {
            const auto to = c.TemplateOf(instance);
            g.mapping = Remap(ctx, g.layer, from_template, g.mapping, to);
            g.instance = instance;
        }

        std::vector<std::size_t> GenePositions(const Chromosome& c, std::size_t num_layers)
        {
            std::vector<std::size_t> pos(num_layers, 0);
            for (std::size_t i = 0; i < c.software.size(); i++) pos[c.software[i].layer] = i;
            return pos;
        }

        Chromosome SchedulingChild(const Chromosome& prefix, const Chromosome& other, std::size_t cut,
                                   const SchedulerContext& ctx, std::mt19937_64& rng)
        {
            Chromosome child;
            child.hardware = prefix.hardware;
            child.next_instance = prefix.next_instance;
            std::vector<bool> taken(ctx.am->NumLayers(), false);
            for (std::size_t i = 0; i < cut; i++)
            {
                child.software.push_back(prefix.software[i]);
                taken[prefix.software[i].layer] = true;
            }
            for (const auto& g : other.software)
            {
                if (taken[g.layer]) continue;
                SoftwareGene gene = g;
                const auto from = other.TemplateOf(g.instance);
                std::size_t instance = g.instance;
                if (!child.PositionOf(instance))
                    instance = child.hardware[UniformIndex(rng, child.hardware.size())].instance;
                Reassign(ctx, child, gene, from, instance);
                child.software.push_back(gene);
            }
            return child;
        }
    }

    Offspring SchedulingCrossover(const Chromosome& a, const Chromosome& b, const SchedulerContext& ctx,
                                  std::mt19937_64& rng)
    {
        const std::size_t cut = UniformIndex(rng, a.software.size() + 1);
        Chromosome c1 = SchedulingChild(a, b, cut, ctx, rng);
        Chromosome c2 = SchedulingChild(b, a, cut, ctx, rng);
        return {std::move(c1), std::move(c2)};
    }

    Chromosome SchedulingMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng)
    {
        const std::size_t n = c.software.size();
        if (n < 2) return c;
        const auto& am = *ctx.am;
        const std::size_t i = UniformIndex(rng, n - 1);
        const LayerId li = c.software[i].layer;

        std::size_t j = n;
        const auto& succ = am.Successors(li);
        for (std::size_t p = i + 1; p < n; p++)
            if (std::find(succ.begin(), succ.end(), c.software[p].layer) != succ.end())
            {
                j = p;
                break;
            }
        if (j <= i + 1) return c;

        const std::size_t k = i + 1 + UniformIndex(rng, j - i - 1);
        const auto pos = GenePositions(c, am.NumLayers());
        for (LayerId pred : am.Predecessors(c.software[k].layer))
            if (pos[pred] >= i) return c;

        Chromosome out = c;
        std::swap(out.software[i], out.software[k]);
        return out;
    }

    Chromosome MappingMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng)
    {
        Chromosome out = c;
        auto& g = out.software[UniformIndex(rng, out.software.size())];
        g.mapping = UniformIndex(rng, ctx.CatalogSize(g.layer, out.TemplateOf(g.instance)));
        return out;
    }

    Offspring MappingCrossover(const Chromosome& a, const Chromosome& b, const SchedulerContext& ctx,
                               std::mt19937_64& rng)
    {
        const std::size_t cut = UniformIndex(rng, a.software.size() + 1);
        auto blend = [&](const Chromosome& base, const Chromosome& donor) {
            Chromosome child = base;
            const auto donor_pos = GenePositions(donor, ctx.am->NumLayers());
            for (std::size_t i = cut; i < child.software.size(); i++)
            {
                auto& g = child.software[i];
                const auto& d = donor.software[donor_pos[g.layer]];
                g.mapping = Remap(ctx, g.layer, donor.TemplateOf(d.instance), d.mapping, child.TemplateOf(g.instance));
            }
            return child;
        };
        return {blend(a, b), blend(b, a)};
    }

    namespace
    {
        struct SaCrossoverResult
        {
            std::vector<Chromosome> children;
            std::size_t recipient = 0;  // parent slot replaced by a one-sided import
        };

        SaCrossoverResult SaCrossoverImpl(const Chromosome& a, const Chromosome& b, const SchedulerContext& ctx,
                                          std::mt19937_64& rng)
        {
            std::set<std::size_t> ids;
            for (const auto& h : a.hardware) ids.insert(h.instance);
            for (const auto& h : b.hardware) ids.insert(h.instance);
            const std::size_t si = *std::next(ids.begin(), static_cast<std::ptrdiff_t>(UniformIndex(rng, ids.size())));

            const auto pa = a.PositionOf(si);
            const auto pb = b.PositionOf(si);
            if (pa && pb)
            {
                auto swap_template = [&](const Chromosome& c, std::size_t pos, std::size_t tmpl) {
                    Chromosome child = c;
                    const auto old = child.hardware[pos].template_index;
                    child.hardware[pos].template_index = tmpl;
                    for (auto& g : child.software)
                        if (g.instance == si) g.mapping = Remap(ctx, g.layer, old, g.mapping, tmpl);
                    return child;
                };
                return {{swap_template(a, *pa, b.hardware[*pb].template_index),
                         swap_template(b, *pb, a.hardware[*pa].template_index)},
                        0};
            }

            const Chromosome& donor = pa ? a : b;
            const Chromosome& recipient = pa ? b : a;
            const std::size_t slot = pa ? 1 : 0;
            if (recipient.hardware.size() >= ctx.max_instances) return {{recipient}, slot};

            Chromosome child = recipient;
            const std::size_t fresh = child.next_instance++;
            child.hardware.push_back({fresh, donor.TemplateOf(si)});
            const auto child_pos = GenePositions(child, ctx.am->NumLayers());
            for (const auto& g : donor.software)
            {
                if (g.instance != si) continue;
                auto& target = child.software[child_pos[g.layer]];
                target.instance = fresh;
                target.mapping = g.mapping;
            }
            return {{child}, slot};
        }
    }

    std::vector<Chromosome> SaCrossover(const Chromosome& a, const Chromosome& b, const SchedulerContext& ctx,
                                        std::mt19937_64& rng)
    {
        return SaCrossoverImpl(a, b, ctx, rng).children;
    }

    Chromosome SaSplittingMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng)
    {
        if (c.hardware.size() >= ctx.max_instances) return c;
        std::vector<std::size_t> candidates;
        for (const auto& h : c.hardware)
            if (c.GenesOn(h.instance).size() >= 2) candidates.push_back(h.instance);
        if (candidates.empty()) return c;

        Chromosome out = c;
        const std::size_t source = candidates[UniformIndex(rng, candidates.size())];
        const std::size_t fresh = out.next_instance++;
        out.hardware.push_back({fresh, out.TemplateOf(source)});

        auto genes = out.GenesOn(source);
        std::shuffle(genes.begin(), genes.end(), rng);
        for (std::size_t i = 0; i < genes.size() / 2; i++) out.software[genes[i]].instance = fresh;
        return out;
    }

    Chromosome SaMergingMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng)
    {
        const std::size_t n = c.hardware.size();
        if (n < 2) return c;
        const std::size_t pj = UniformIndex(rng, n);
        std::size_t pi = UniformIndex(rng, n - 1);
        if (pi >= pj) pi++;

        Chromosome out = c;
        const auto sj = out.hardware[pj];
        const auto si = out.hardware[pi].instance;
        for (auto& g : out.software)
            if (g.instance == sj.instance) Reassign(ctx, out, g, sj.template_index, si);
        out.hardware.erase(out.hardware.begin() + static_cast<std::ptrdiff_t>(pj));
        return out;
    }

    Chromosome SaPositionMutation(const Chromosome& c, const SchedulerContext&, std::mt19937_64& rng)
    {
        const std::size_t n = c.hardware.size();
        if (n < 2) return c;
        const std::size_t p = UniformIndex(rng, n);
        std::size_t q = UniformIndex(rng, n - 1);
        if (q >= p) q++;
        Chromosome out = c;
        std::swap(out.hardware[p], out.hardware[q]);
        return out;
    }

    Chromosome SaTemplateMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng)
    {
        const std::size_t nt = ctx.NumTemplates();
        if (nt < 2) return c;
        Chromosome out = c;
        auto& h = out.hardware[UniformIndex(rng, out.hardware.size())];
        const std::size_t old = h.template_index;
        std::size_t next = UniformIndex(rng, nt - 1);
        if (next >= old) next++;
        h.template_index = next;
        for (auto& g : out.software)
            if (g.instance == h.instance) g.mapping = Remap(ctx, g.layer, old, g.mapping, next);
        return out;
    }

    Chromosome LayerAssignmentMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng)
    {
        const std::size_t n = c.hardware.size();
        if (n < 2) return c;
        Chromosome out = c;
        auto& g = out.software[UniformIndex(rng, out.software.size())];
        const auto current = out.PositionOf(g.instance).value();
        std::size_t target = UniformIndex(rng, n - 1);
        if (target >= current) target++;
        Reassign(ctx, out, g, out.hardware[current].template_index, out.hardware[target].instance);
        return out;
    }

    std::vector<Chromosome> ApplyOperator(Operator op, const Chromosome& a, const Chromosome& b,
                                          const SchedulerContext& ctx, std::mt19937_64& rng)
    {
        switch (op)
        {
        case Operator::SchedulingCrossover: {
            auto [c1, c2] = SchedulingCrossover(a, b, ctx, rng);
            return {std::move(c1), std::move(c2)};
        }
        case Operator::SchedulingMutation: return {SchedulingMutation(a, ctx, rng)};
        case Operator::SaCrossover: {
            auto r = SaCrossoverImpl(a, b, ctx, rng);
            if (r.children.size() == 2) return r.children;
            if (r.recipient == 0) return {std::move(r.children[0]), b};
            return {a, std::move(r.children[0])};
        }
        case Operator::TemplateMutation: return {SaTemplateMutation(a, ctx, rng)};
        case Operator::MergingMutation: return {SaMergingMutation(a, ctx, rng)};
        case Operator::SplittingMutation: return {SaSplittingMutation(a, ctx, rng)};
        case Operator::MappingMutation: return {MappingMutation(a, ctx, rng)};
        case Operator::MappingCrossover: {
            auto [c1, c2] = MappingCrossover(a, b, ctx, rng);
            return {std::move(c1), std::move(c2)};
        }
        case Operator::LayerAssignmentMutation: return {LayerAssignmentMutation(a, ctx, rng)};
        case Operator::PositionMutation: return {SaPositionMutation(a, ctx, rng)};
        }
        return {a};
    }

} // namespace moham
