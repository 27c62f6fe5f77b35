#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "moham/arch.hpp"
#include "moham/layermapper.hpp"
#include "moham/workload.hpp"

namespace moham
{

    struct SoftwareGene
    {
        LayerId layer = 0;
        std::size_t mapping = 0;   // index into the catalog list for (layer class, instance template)
        std::size_t instance = 0;  // instance id

        friend bool operator==(const SoftwareGene&, const SoftwareGene&) = default;
    };

    struct HardwareGene
    {
        std::size_t instance = 0;
        std::size_t template_index = 0;

        friend bool operator==(const HardwareGene&, const HardwareGene&) = default;
    };

    // Software genes in execution (topological) order; hardware genes in mesh
    // tile order. Instance ids come from a per-chromosome counter.
    struct Chromosome
    {
        std::vector<SoftwareGene> software;
        std::vector<HardwareGene> hardware;
        std::size_t next_instance = 0;

        std::optional<std::size_t> PositionOf(std::size_t instance) const;
        std::size_t TemplateOf(std::size_t instance) const;  // throws ValidationError for unknown ids
        std::vector<std::size_t> GenesOn(std::size_t instance) const;  // software positions

        friend bool operator==(const Chromosome&, const Chromosome&) = default;
    };

    nlohmann::json ToJson(const Chromosome& c);

    struct SchedulerContext
    {
        const ApplicationModel* am = nullptr;
        const MappingCatalog* catalog = nullptr;
        std::size_t max_instances = 16;
        // When set, sampling uses this hardware genome verbatim.
        const std::vector<HardwareGene>* fixed_hardware = nullptr;

        std::size_t NumTemplates() const { return catalog->NumTemplates(); }
        std::size_t CatalogSize(LayerId layer, std::size_t tmpl) const { return catalog->ForLayer(layer, tmpl).size(); }
    };

    // Every broken invariant, empty for a valid chromosome.
    std::vector<std::string> CheckChromosome(const Chromosome& c, const SchedulerContext& ctx);

    Chromosome SampleIndividual(const SchedulerContext& ctx, std::mt19937_64& rng);

    enum class Operator : std::size_t
    {
        SchedulingCrossover = 0,
        SchedulingMutation,
        SaCrossover,
        TemplateMutation,
        MergingMutation,
        SplittingMutation,
        MappingMutation,
        MappingCrossover,
        LayerAssignmentMutation,
        PositionMutation,
    };
    inline constexpr std::size_t kNumOperators = 10;

    // Pipeline order of application.
    inline constexpr std::array<Operator, kNumOperators> kOperatorOrder = {
        Operator::SchedulingCrossover, Operator::SchedulingMutation, Operator::SaCrossover,
        Operator::TemplateMutation,    Operator::MergingMutation,    Operator::SplittingMutation,
        Operator::MappingMutation,     Operator::MappingCrossover,   Operator::LayerAssignmentMutation,
        Operator::PositionMutation,
    };

    std::string OperatorName(Operator op);
    Operator OperatorFromName(const std::string& name);  // throws ValidationError
    bool IsCrossover(Operator op);
    // Operators that alter the hardware genome (instance set, templates or placement).
    bool ChangesHardware(Operator op);

    struct OperatorProbabilities
    {
        std::array<double, kNumOperators> p = {0.103, 0.052, 0.045, 0.041, 0.042, 0.039, 0.048, 0.047, 0.025, 0.027};

        double& operator[](Operator op) { return p[static_cast<std::size_t>(op)]; }
        double operator[](Operator op) const { return p[static_cast<std::size_t>(op)]; }
    };

    using Offspring = std::pair<Chromosome, Chromosome>;

    Offspring SchedulingCrossover(const Chromosome& a, const Chromosome& b, const SchedulerContext& ctx,
                                  std::mt19937_64& rng);
    Chromosome SchedulingMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng);
    Chromosome MappingMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng);
    Offspring MappingCrossover(const Chromosome& a, const Chromosome& b, const SchedulerContext& ctx,
                               std::mt19937_64& rng);
    // Two offspring when both parents hold the drawn instance, otherwise one.
    std::vector<Chromosome> SaCrossover(const Chromosome& a, const Chromosome& b, const SchedulerContext& ctx,
                                        std::mt19937_64& rng);
    Chromosome SaSplittingMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng);
    Chromosome SaMergingMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng);
    Chromosome SaPositionMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng);
    Chromosome SaTemplateMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng);
    Chromosome LayerAssignmentMutation(const Chromosome& c, const SchedulerContext& ctx, std::mt19937_64& rng);

    // Applies one operator. Crossovers return two children (a parent passes
    // through unchanged when the operator yields a single offspring);
    // mutations act on `a` only and return one.
    std::vector<Chromosome> ApplyOperator(Operator op, const Chromosome& a, const Chromosome& b,
                                          const SchedulerContext& ctx, std::mt19937_64& rng);

    struct DecodedSystem
    {
        std::vector<SubAcceleratorInstance> instances;  // hardware genome order
        bool feasible = true;
        std::string infeasible_reason;
    };

    // Instances sized to the element-wise maximum requirement of their
    // mappings (all ones when idle). With `fixed_params` (one per hardware
    // position) sizes are taken as given and a mapping that does not fit
    // makes the system infeasible.
    DecodedSystem Decode(const Chromosome& c, const SchedulerContext& ctx, const TemplateLibrary& templates,
                         const std::vector<ParamValues>* fixed_params = nullptr);

} // namespace moham
