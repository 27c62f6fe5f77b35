#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moham/arch.hpp"
#include "moham/costmodel.hpp"
#include "moham/workload.hpp"

namespace moham
{

    using Objectives = std::array<double, 3>;

    // a is no worse than b everywhere and strictly better somewhere.
    bool Dominates(const Objectives& a, const Objectives& b);

    // Indices of the non-dominated points, ascending.
    std::vector<std::size_t> ParetoFilter(std::span<const Objectives> points);

    // Loop orders over the outer loops of `m`'s tiling that honour the dataflow,
    // one per distinct effective order. Loops with a trip count of 1 follow in
    // CKYXRS order.
    std::vector<std::array<Dim, kNumDims>> CanonicalLoopOrders(Dataflow df, const Mapping& tiling);

    struct EnumerationResult
    {
        std::vector<Mapping> mappings;
        bool truncated = false;
    };

    // Valid mappings of `shape` on `t`. Tilings are visited in a fixed strided
    // order of their lexicographic index; each pass over the tilings takes the
    // next loop order of every tiling, so a budget cut keeps a spread of both.
    // `visit` returns false to stop early. Returns true if the budget cut the stream.
    bool EnumerateMapspace(const LayerShape& shape, const SubAcceleratorTemplate& t, std::size_t budget,
                           const std::function<bool(const Mapping&)>& visit);
    EnumerationResult EnumerateMapspace(const LayerShape& shape, const SubAcceleratorTemplate& t, std::size_t budget);

    struct CatalogEntry
    {
        Mapping mapping;
        MappingCost cost;             // analytical, at the mapping's own required capacities
        double area_mm2 = 0.0;        // area of an instance sized exactly for this mapping

        // Effective figures; equal to the analytical ones unless an external table overrides them.
        std::int64_t latency_cycles = 0;
        std::int64_t dram_bytes = 0;
        double energy_pj = 0.0;
        double energy_offset_pj = 0.0;  // energy_pj minus cost.energy_pj
    };

    struct CatalogOptions
    {
        std::size_t budget = 4000;        // mappings enumerated per (layer class, template)
        std::size_t max_per_pair = 0;     // cap on each Pareto set, 0 = unlimited
    };

    class MappingCatalog
    {
    public:
        MappingCatalog() = default;
        MappingCatalog(std::vector<UniqueLayerClass> classes, std::size_t num_layers, std::vector<std::string> template_ids,
                       std::vector<std::vector<std::vector<CatalogEntry>>> entries,
                       std::vector<std::vector<bool>> truncated);

        std::size_t NumClasses() const { return classes_.size(); }
        std::size_t NumTemplates() const { return template_ids_.size(); }
        const std::vector<UniqueLayerClass>& Classes() const { return classes_; }
        const std::vector<std::string>& TemplateIds() const { return template_ids_; }
        std::size_t ClassOf(LayerId layer) const { return class_of_.at(layer); }

        const std::vector<CatalogEntry>& Entries(std::size_t cls, std::size_t tmpl) const { return entries_.at(cls).at(tmpl); }
        const std::vector<CatalogEntry>& ForLayer(LayerId layer, std::size_t tmpl) const
        {
            return Entries(ClassOf(layer), tmpl);
        }
        bool Truncated(std::size_t cls, std::size_t tmpl) const { return truncated_.at(cls).at(tmpl); }

        // Index in the (layer, to_template) list closest to mapping `mi` of the
        // (layer, from_template) list.
        std::size_t Transform(LayerId layer, std::size_t from_template, std::size_t mi, std::size_t to_template) const;

        // Overrides latency, DRAM traffic and energy from an external table.
        // Throws ValidationError on unknown layer classes, templates or mapping indices.
        void ApplyCostTable(const CostTable& table);

        // Keeps only the minimum-latency mapping of every list.
        void PinMinLatency();

        std::size_t TotalEntries() const;

    private:
        void BuildTransforms();

        std::vector<UniqueLayerClass> classes_;
        std::vector<std::size_t> class_of_;
        std::vector<std::string> template_ids_;
        std::vector<std::vector<std::vector<CatalogEntry>>> entries_;
        std::vector<std::vector<bool>> truncated_;
        // [class][from][mi][to]
        std::vector<std::vector<std::vector<std::vector<std::size_t>>>> transforms_;
    };

    // Pareto set of (latency, energy, area) over the enumerated mapspace of every
    // (unique layer class, template) pair, sorted by latency, energy, then
    // enumeration index. Throws SearchError if some pair has no valid mapping.
    MappingCatalog BuildCatalog(const ApplicationModel& am, const TemplateLibrary& templates,
                                const CostCoefficients& coeffs, const CatalogOptions& options);

    // Reduces a sorted Pareto list to at most `cap` entries, always keeping the
    // minimum-latency and minimum-energy ones. Returns kept positions, ascending.
    std::vector<std::size_t> CapParetoList(std::span<const Objectives> sorted, std::size_t cap);

    // Cost-table schema plus mapping descriptors and required resources.
    nlohmann::json ExportCatalog(const MappingCatalog& catalog, const TemplateLibrary& templates);

    // Rebuilds a catalog for `am`; mappings are re-validated and re-costed,
    // stored latency/energy/DRAM figures take precedence.
    MappingCatalog ImportCatalog(const nlohmann::json& document, const ApplicationModel& am,
                                 const TemplateLibrary& templates, const CostCoefficients& coeffs);

    // Table reproducing the catalog's current costs.
    CostTable CatalogCostTable(const MappingCatalog& catalog);

} // namespace moham
