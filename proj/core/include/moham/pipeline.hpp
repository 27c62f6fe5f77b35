#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moham/costmodel.hpp"
#include "moham/layermapper.hpp"
#include "moham/nsga2.hpp"
#include "moham/scheduler.hpp"
#include "moham/search_space.hpp"
#include "moham/sysmodel.hpp"
#include "moham/workload.hpp"

namespace moham
{

    enum class RunMode { CoOpt, HardwareOnly, MappingOnly, MonoLatency, MonoEnergy, Ablation };

    std::string ToString(RunMode mode);
    RunMode RunModeFromString(const std::string& text);

    // Instance set of the mapping-only baseline, in mesh order. Instances
    // without explicit sizes are configured at their template maxima.
    struct FixedHardware
    {
        std::vector<std::string> templates;
        std::vector<std::optional<ParamValues>> params;
    };

    // Accepts [{"template": id, "params": {name: value}}, ...] or {"instances": [...]}.
    FixedHardware ParseFixedHardware(const nlohmann::json& document, const TemplateLibrary& templates);
    FixedHardware LoadFixedHardware(const std::string& path, const TemplateLibrary& templates);

    struct RunConfig
    {
        RunMode mode = RunMode::CoOpt;
        std::uint64_t seed = 1;
        std::size_t generations = 300;
        std::size_t population = 250;
        OperatorProbabilities probabilities;
        std::size_t max_instances = 16;
        CatalogOptions catalog;
        ConvergenceConfig convergence;  // max_generations follows `generations`
        std::optional<Operator> ablated;
        std::string template_family = "simba";  // hardware-only mode
        FixedHardware fixed_hardware;           // mapping-only mode
        std::size_t sampling_attempts = 50;     // per population slot
        bool eliminate_duplicates = true;       // redraw offspring identical to a known genome

        // Throws ValidationError on out-of-range settings.
        void Validate() const;
    };

    struct RunInputs
    {
        ApplicationModel am;
        TemplateLibrary templates;
        CostCoefficients coeffs;
        NopConfig nop;
        std::optional<CostTable> cost_table;
        std::optional<nlohmann::json> catalog;  // previously exported catalog
    };

    struct FrontMember
    {
        Chromosome chromosome;
        EvaluationResult evaluation;
    };

    struct GenerationStats
    {
        std::size_t generation = 0;
        std::size_t front0_size = 0;
        double front0_fraction = 0.0;
        Objectives best{};  // per-objective minimum over feasible members
        double hypervolume_proxy = 0.0;
        std::size_t feasible = 0;
    };

    struct RunArtifacts
    {
        RunConfig config;
        TemplateLibrary templates;  // library actually searched
        MappingCatalog catalog;
        MeshNoP mesh;
        SearchSpaceReport space;
        std::vector<FrontMember> front;  // sorted by objectives, duplicates removed
        std::vector<GenerationStats> log;
        std::size_t generations_run = 0;
        bool converged_by_density = false;
    };

    // Search-space sizes of the workload and library at a given instance cap.
    SearchSpaceReport WorkloadSearchSpace(const ApplicationModel& am, const TemplateLibrary& templates,
                                          std::size_t max_instances);

    // Builds the mapping catalog and runs the genetic search.
    // Throws SearchError if no feasible individual can be sampled.
    RunArtifacts RunMoham(const RunInputs& inputs, const RunConfig& cfg);

    // Fraction of `b` strictly dominated by some member of `a`.
    // Throws ValidationError when `b` is empty.
    double CompareFronts(std::span<const Objectives> a, std::span<const Objectives> b);

} // namespace moham
