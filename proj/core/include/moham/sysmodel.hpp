#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moham/costmodel.hpp"
#include "moham/scheduler.hpp"

namespace moham
{

    struct NopConfig
    {
        std::size_t rows = 0;  // 0: derived from the instance count
        std::size_t cols = 0;  // 0: rows + 1 (one west column for memory interfaces)
        std::size_t num_mi = 2;
        double mi_bandwidth = 4.0;             // bytes/cycle per memory interface
        double link_energy_pj_per_bit = 0.82;
        double chiplet_peak_bandwidth = 16.0;  // bytes/cycle per instance

        void Validate() const;
    };

    NopConfig ParseNopConfig(const nlohmann::json& document);
    NopConfig LoadNopConfig(const std::string& path);
    nlohmann::json ToJson(const NopConfig& cfg);

    struct Tile
    {
        std::size_t row = 0;
        std::size_t col = 0;

        friend bool operator==(const Tile&, const Tile&) = default;
    };

    std::size_t Manhattan(const Tile& a, const Tile& b);

    struct MeshNoP
    {
        std::size_t rows = 1;
        std::size_t cols = 1;
        std::vector<Tile> mi_tiles;
        double mi_bandwidth = 4.0;
        double link_energy_pj_per_bit = 0.82;
        double chiplet_peak_bandwidth = 16.0;

        // Non-memory-interface tiles in row-major order.
        std::vector<Tile> InstanceTiles() const;
    };

    // Smallest square mesh holding `max_instances` plus a west column whose
    // rows carry the evenly spaced memory interfaces. Explicit rows/cols in
    // `cfg` override the derived size. Throws ValidationError if it cannot fit.
    MeshNoP BuildMesh(const NopConfig& cfg, std::size_t max_instances);

    struct Placement
    {
        Tile tile;
        std::size_t mi = 0;
        std::size_t hops = 0;
    };

    // Instance p takes the p-th instance tile and the nearest memory
    // interface (lowest index on ties). Throws ValidationError if the mesh is too small.
    std::vector<Placement> PlaceAndAssignMi(std::size_t num_instances, const MeshNoP& mesh);

    struct LayerTask
    {
        LayerId layer = 0;
        std::size_t position = 0;  // hardware genome position of the hosting instance
        std::size_t mi = 0;
        std::int64_t latency_cycles = 1;
        std::int64_t dram_bytes = 0;
    };

    struct ScheduledSegment
    {
        LayerId layer = 0;
        std::size_t position = 0;
        std::size_t mi = 0;
        double start = 0.0;
        double end = 0.0;
        double demand = 0.0;  // bytes/cycle actually drawn from the memory interface
        bool dilated = false;
    };

    struct LayerTiming
    {
        LayerId layer = 0;
        std::size_t position = 0;
        double start = 0.0;
        double end = 0.0;
        double nominal_cycles = 0.0;  // duration without contention
        double demand = 0.0;          // bytes/cycle without contention
        bool dilated = false;
    };

    struct ScheduleResult
    {
        double latency = 0.0;
        std::vector<LayerTiming> layers;  // task order
        std::vector<ScheduledSegment> segments;  // sorted by start, then task order
    };

    // Dependency- and instance-ordered execution of `tasks` (given in a
    // topological order). Each layer needs max(latency, dram / chiplet peak)
    // cycles of work at a uniform DRAM demand; when layers sharing a memory
    // interface ask for more than its bandwidth, all of them slow down by the
    // same ratio for as long as the overload lasts.
    ScheduleResult SimulateSchedule(const ApplicationModel& am, std::span<const LayerTask> tasks, const MeshNoP& mesh);

    struct EvaluationResult
    {
        bool feasible = true;
        std::string infeasible_reason;
        Objectives objectives{};  // latency cycles, energy pJ, area mm2
        double compute_energy_pj = 0.0;
        double nop_energy_pj = 0.0;
        std::vector<double> area_breakdown;  // per hardware position
        DecodedSystem system;
        std::vector<Placement> placements;
        ScheduleResult schedule;
    };

    inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

    struct EvaluationContext
    {
        const SchedulerContext* scheduler = nullptr;
        const TemplateLibrary* templates = nullptr;
        const CostCoefficients* coeffs = nullptr;
        const MeshNoP* mesh = nullptr;
        const std::vector<ParamValues>* fixed_params = nullptr;
    };

    // Decodes and evaluates one chromosome. Infeasible systems get +inf objectives.
    EvaluationResult Evaluate(const Chromosome& c, const EvaluationContext& ctx);

    // Energy of each software gene on its decoded instance, without NoP transfers.
    std::vector<double> GeneEnergies(const Chromosome& c, const DecodedSystem& sys, const EvaluationContext& ctx);

    nlohmann::json GanttJson(const EvaluationResult& r, const Chromosome& c, const ApplicationModel& am,
                             const TemplateLibrary& templates);
    nlohmann::json AreaJson(const EvaluationResult& r, const TemplateLibrary& templates);

} // namespace moham
