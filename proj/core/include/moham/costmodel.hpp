#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "moham/arch.hpp"

namespace moham
{

    struct LevelEnergy
    {
        double base_pj_per_byte = 1.0;
        double ref_capacity_bytes = 1024.0;
    };

    struct CostCoefficients
    {
        double mac_energy_pj = 0.2;
        LevelEnergy global_level{2.0, 65536.0};
        LevelEnergy local_level{1.0, 1024.0};
        double dram_energy_pj_per_byte = 100.0;
        double pe_area_mm2 = 0.01;
        double buffer_area_mm2_per_byte = 1e-6;
        double sram_bandwidth_bytes_per_cycle = 16.0;
        std::int64_t word_bytes = 1;

        // Throws ValidationError on non-positive values or a word size other than 1 byte.
        void Validate() const;
    };

    // Missing fields keep their defaults.
    CostCoefficients ParseCostCoefficients(const nlohmann::json& document);
    CostCoefficients LoadCostCoefficients(const std::string& path);
    nlohmann::json ToJson(const CostCoefficients& coeffs);

    // Per-tensor traffic of one mapping, in bytes.
    struct TensorTraffic
    {
        std::int64_t gb_fetches = 0;   // times the spatial tile changes in the global buffer
        std::int64_t gb_bytes = 0;     // global buffer -> lanes
        std::int64_t local_fill = 0;   // bytes written into local storage
        std::int64_t mac_operand = 0;  // local storage <-> MAC datapath
        std::int64_t dram_bytes = 0;   // package memory <-> global buffer
    };

    struct MappingCost
    {
        std::int64_t latency_cycles = 0;
        double energy_pj = 0.0;
        std::int64_t dram_bytes = 0;

        std::int64_t total_macs = 0;
        std::int64_t compute_cycles = 0;
        std::int64_t gb_traffic_bytes = 0;
        std::array<TensorTraffic, kNumTensors> tensors{};
        std::vector<std::int64_t> level_accesses;  // bytes, one per template level
        ParamValues required;
    };

    // Level energy per byte for a buffer of `capacity_bytes`, scaled by sqrt(capacity / ref).
    double LevelEnergyPerByte(const SubAcceleratorTemplate& t, std::size_t level, double capacity_bytes,
                              const CostCoefficients& coeffs);

    // Closed-form latency/energy/traffic of one mapping. Buffer energies are
    // evaluated at the mapping's own required capacities unless `capacities`
    // gives a full parameter assignment of the hosting instance.
    // Throws ValidationError if the mapping is invalid on the template.
    MappingCost EvaluateMappingCost(const LayerShape& shape, const SubAcceleratorTemplate& t, const Mapping& m,
                                    const CostCoefficients& coeffs, const ParamValues* capacities = nullptr);

    // Energy only, reusing traffic already computed for the same mapping.
    double EnergyAtCapacity(const SubAcceleratorTemplate& t, const MappingCost& cost, const ParamValues& capacities,
                            const CostCoefficients& coeffs);

    struct AreaBreakdown
    {
        double pe_mm2 = 0.0;
        double buffer_mm2 = 0.0;
        double Total() const { return pe_mm2 + buffer_mm2; }
    };

    // Throws ValidationError if a value lies outside [1, max].
    AreaBreakdown InstanceAreaBreakdown(const SubAcceleratorTemplate& t, const ParamValues& params,
                                        const CostCoefficients& coeffs);
    double InstanceArea(const SubAcceleratorTemplate& t, const ParamValues& params, const CostCoefficients& coeffs);

    struct CostTableEntry
    {
        std::string layer_class;  // LayerShape::Key()
        std::string template_id;
        std::size_t mapping_index = 0;
        std::int64_t latency_cycles = 0;
        double energy_pj = 0.0;
        std::int64_t dram_bytes = 0;
    };

    using CostTableKey = std::tuple<std::string, std::string, std::size_t>;
    using CostTable = std::map<CostTableKey, CostTableEntry>;

    // Accepts {"entries": [...]} or a bare list. Throws SchemaError on malformed
    // or duplicate entries.
    CostTable ParseCostTable(const nlohmann::json& document);
    CostTable LoadCostTable(const std::string& path);
    nlohmann::json ToJson(const CostTable& table);

} // namespace moham
