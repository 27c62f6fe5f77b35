#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moham/workload.hpp"

namespace moham
{

    enum class Dataflow { RowStationary, WeightStationary, OutputStationary };

    std::string ToString(Dataflow df);
    Dataflow DataflowFromString(const std::string& text);

    enum class Tensor : std::size_t { Weight = 0, Input, Output };
    inline constexpr std::size_t kNumTensors = 3;
    inline constexpr std::array<Tensor, kNumTensors> kAllTensors = {Tensor::Weight, Tensor::Input, Tensor::Output};

    std::string ToString(Tensor t);
    Tensor TensorFromString(const std::string& text);

    // Whether loop dimension `d` indexes tensor `t` for a layer of the given kind.
    // Depthwise layers carry C in their outputs (one group per input channel).
    bool Indexes(LayerKind kind, Tensor t, Dim d);

    // The tensor kept resident by a dataflow archetype.
    Tensor StationaryTensor(Dataflow df);

    // Bytes of the sub-tensor touched by a box of `extent` iterations per dimension
    // (stride 1, 8-bit words).
    std::int64_t FootprintBytes(LayerKind kind, Tensor t, const PerDim<std::int64_t>& extent);

    enum class BufferScope { Global, Local };

    struct FreeParam
    {
        std::string name;
        std::int64_t max_value = 1;
    };

    struct BufferLevel
    {
        std::string name;  // also the name of the free parameter holding its capacity in bytes
        BufferScope scope = BufferScope::Global;
        std::vector<Tensor> holds;
        std::optional<double> base_energy_pj_per_byte;
        std::optional<double> ref_capacity_bytes;
    };

    // Assignment of a value to every free parameter, in template order.
    using ParamValues = std::vector<std::int64_t>;

    inline constexpr const char* kPesParam = "pes";
    inline constexpr const char* kMacsPerPeParam = "macs_per_pe";

    class SubAcceleratorTemplate
    {
    public:
        // Throws ValidationError if the description is inconsistent: missing "pes"
        // parameter, a level without a matching parameter, innermost level not
        // local, or a tensor without exactly one global and one local home.
        SubAcceleratorTemplate(std::string id, Dataflow dataflow, std::vector<FreeParam> free_params,
                               std::vector<BufferLevel> levels, std::optional<double> pe_area_mm2 = std::nullopt,
                               std::optional<double> buffer_area_mm2_per_byte = std::nullopt);

        const std::string& Id() const { return id_; }
        Dataflow GetDataflow() const { return dataflow_; }
        const std::vector<FreeParam>& FreeParams() const { return free_params_; }
        const std::vector<BufferLevel>& Levels() const { return levels_; }
        std::optional<double> PeAreaOverride() const { return pe_area_mm2_; }
        std::optional<double> BufferAreaOverride() const { return buffer_area_mm2_per_byte_; }

        std::size_t PesParam() const { return pes_param_; }
        std::optional<std::size_t> MacsPerPeParam() const { return macs_param_; }
        std::size_t LevelParam(std::size_t level) const { return level_param_.at(level); }
        std::size_t GlobalHome(Tensor t) const { return global_home_[static_cast<std::size_t>(t)]; }
        std::size_t LocalHome(Tensor t) const { return local_home_[static_cast<std::size_t>(t)]; }

        std::int64_t MaxPes() const { return free_params_[pes_param_].max_value; }
        std::int64_t MaxMacsPerPe() const { return macs_param_ ? free_params_[*macs_param_].max_value : 1; }

        ParamValues MaxParams() const;
        ParamValues MinParams() const { return ParamValues(free_params_.size(), 1); }

        std::optional<std::size_t> FindParam(const std::string& name) const;

    private:
        std::string id_;
        Dataflow dataflow_;
        std::vector<FreeParam> free_params_;
        std::vector<BufferLevel> levels_;
        std::optional<double> pe_area_mm2_;
        std::optional<double> buffer_area_mm2_per_byte_;

        std::size_t pes_param_ = 0;
        std::optional<std::size_t> macs_param_;
        std::vector<std::size_t> level_param_;
        std::array<std::size_t, kNumTensors> global_home_{};
        std::array<std::size_t, kNumTensors> local_home_{};
    };

    class TemplateLibrary
    {
    public:
        TemplateLibrary() = default;
        explicit TemplateLibrary(std::vector<SubAcceleratorTemplate> templates);

        std::size_t Size() const { return templates_.size(); }
        const SubAcceleratorTemplate& operator[](std::size_t i) const { return templates_.at(i); }
        const std::vector<SubAcceleratorTemplate>& All() const { return templates_; }
        std::optional<std::size_t> Find(const std::string& id) const;
        std::size_t IndexOf(const std::string& id) const;  // throws ValidationError

        // Library with only the listed template ids, in the given order.
        TemplateLibrary Subset(const std::vector<std::string>& ids) const;

    private:
        std::vector<SubAcceleratorTemplate> templates_;
    };

    TemplateLibrary ParseTemplateLibrary(const nlohmann::json& document);
    TemplateLibrary LoadTemplateLibrary(const std::string& path);
    nlohmann::json ToJson(const TemplateLibrary& library);

    // Eyeriss-like (row stationary), Simba-like (weight stationary) and
    // ShiDianNao-like (output stationary) templates.
    TemplateLibrary BundledTemplates();

    struct SubAcceleratorInstance
    {
        std::size_t instance_id = 0;
        std::size_t template_index = 0;
        ParamValues params;
    };

    // One layer's loop nest on one template: an outer (global buffer) loop
    // nest in `loop_order` (outermost first), a spatial fan-out over lanes, and
    // a per-lane inner tile. For every dim, tile * spatial divides the extent.
    struct Mapping
    {
        LayerShape shape;
        std::string template_id;
        std::array<Dim, kNumDims> loop_order = kAllDims;
        PerDim<std::int64_t> spatial = {1, 1, 1, 1, 1, 1};
        PerDim<std::int64_t> tiles = {1, 1, 1, 1, 1, 1};

        // Trip count of the outer loop over `d`.
        std::int64_t OuterCount(Dim d) const;
        std::int64_t Lanes() const;

        // Outer loops with trip count > 1, outermost first.
        std::vector<Dim> EffectiveOrder() const;

        std::string LoopOrderString() const;

        friend bool operator==(const Mapping&, const Mapping&) = default;
    };

    nlohmann::json ToJson(const Mapping& m);
    Mapping MappingFromJson(const nlohmann::json& j, const LayerShape& shape, const std::string& template_id);

    // Resources a mapping needs on its template, as a full parameter assignment.
    // PEs are lanes grouped by the MACs per PE the template allows.
    ParamValues RequiredParams(const SubAcceleratorTemplate& t, const Mapping& m);

    // Bytes a mapping needs at each buffer level (per PE for local levels).
    std::vector<std::int64_t> RequiredLevelBytes(const SubAcceleratorTemplate& t, const Mapping& m);

    // Whether the outer loop order honours the dataflow archetype:
    // the stationary tensor's indexing loops sit outside its non-indexing loops
    // (weight and output stationary), or R and Y are adjacent (row stationary).
    bool LoopOrderHonoursDataflow(Dataflow df, const Mapping& m);

    struct MappingVerdict
    {
        bool valid = true;
        std::vector<std::string> violations;
    };

    // Throws ValidationError if the mapping targets a different template or a different shape.
    MappingVerdict ValidateMapping(const Mapping& m, const LayerShape& shape, const SubAcceleratorTemplate& t);

    // Normalized Kendall-tau distance of loop orders plus log-scale L1 distance of
    // tiles and spatial factors. Throws ValidationError if the mappings belong to
    // different layer classes.
    double MappingDistance(const Mapping& a, const Mapping& b);

    // Index of the candidate closest to `m`; ties go to the lowest index.
    // Throws SearchError on an empty candidate list.
    std::size_t MappingTransform(const Mapping& m, std::span<const Mapping> candidates);

} // namespace moham
