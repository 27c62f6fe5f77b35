#include "moham/costmodel.hpp"

#include <cmath>
#include <fstream>

#include "moham/errors.hpp"

namespace moham
{

    void CostCoefficients::Validate() const
    {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ValidationError(std::string("cost coefficient '") + name + "' must be positive and finite");
        };
        positive(mac_energy_pj, "mac_energy_pj");
        positive(global_level.base_pj_per_byte, "global.base_pj_per_byte");
        positive(global_level.ref_capacity_bytes, "global.ref_capacity_bytes");
        positive(local_level.base_pj_per_byte, "local.base_pj_per_byte");
        positive(local_level.ref_capacity_bytes, "local.ref_capacity_bytes");
        positive(dram_energy_pj_per_byte, "dram_energy_pj_per_byte");
        positive(pe_area_mm2, "pe_area_mm2");
        positive(buffer_area_mm2_per_byte, "buffer_area_mm2_per_byte");
        positive(sram_bandwidth_bytes_per_cycle, "sram_bandwidth_bytes_per_cycle");
        if (word_bytes != 1)
            throw ValidationError("word_bytes must be 1 (8-bit words)");
    }

    namespace
    {
        void ReadNumber(const nlohmann::json& j, const char* field, double& out)
        {
            if (!j.contains(field)) return;
            if (!j.at(field).is_number())
                throw SchemaError(std::string("cost coefficient '") + field + "' must be a number");
            out = j.at(field).get<double>();
        }

        void ReadLevel(const nlohmann::json& j, const char* field, LevelEnergy& out)
        {
            if (!j.contains(field)) return;
            const auto& jl = j.at(field);
            if (!jl.is_object())
                throw SchemaError(std::string("cost coefficient '") + field + "' must be an object");
            ReadNumber(jl, "base_pj_per_byte", out.base_pj_per_byte);
            ReadNumber(jl, "ref_capacity_bytes", out.ref_capacity_bytes);
        }

        std::int64_t CeilDiv(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }
    }

    CostCoefficients ParseCostCoefficients(const nlohmann::json& document)
    {
        if (!document.is_object())
            throw SchemaError("cost coefficients must be an object");
        CostCoefficients c;
        ReadNumber(document, "mac_energy_pj", c.mac_energy_pj);
        ReadLevel(document, "global", c.global_level);
        ReadLevel(document, "local", c.local_level);
        ReadNumber(document, "dram_energy_pj_per_byte", c.dram_energy_pj_per_byte);
        ReadNumber(document, "pe_area_mm2", c.pe_area_mm2);
        ReadNumber(document, "buffer_area_mm2_per_byte", c.buffer_area_mm2_per_byte);
        ReadNumber(document, "sram_bandwidth_bytes_per_cycle", c.sram_bandwidth_bytes_per_cycle);
        if (document.contains("word_bytes"))
        {
            if (!document.at("word_bytes").is_number_integer())
                throw SchemaError("cost coefficient 'word_bytes' must be an integer");
            c.word_bytes = document.at("word_bytes").get<std::int64_t>();
        }
        c.Validate();
        return c;
    }

    CostCoefficients LoadCostCoefficients(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw SchemaError("cannot open coefficients file '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("coefficients file '" + path + "': " + e.what());
        }
        return ParseCostCoefficients(doc);
    }

    nlohmann::json ToJson(const CostCoefficients& c)
    {
        return {
            {"mac_energy_pj", c.mac_energy_pj},
            {"global",
             {{"base_pj_per_byte", c.global_level.base_pj_per_byte},
              {"ref_capacity_bytes", c.global_level.ref_capacity_bytes}}},
            {"local",
             {{"base_pj_per_byte", c.local_level.base_pj_per_byte},
              {"ref_capacity_bytes", c.local_level.ref_capacity_bytes}}},
            {"dram_energy_pj_per_byte", c.dram_energy_pj_per_byte},
            {"pe_area_mm2", c.pe_area_mm2},
            {"buffer_area_mm2_per_byte", c.buffer_area_mm2_per_byte},
            {"sram_bandwidth_bytes_per_cycle", c.sram_bandwidth_bytes_per_cycle},
            {"word_bytes", c.word_bytes},
        };
    }

    double LevelEnergyPerByte(const SubAcceleratorTemplate& t, std::size_t level, double capacity_bytes,
                              const CostCoefficients& coeffs)
    {
        const auto& l = t.Levels()[level];
        const LevelEnergy& def = l.scope == BufferScope::Global ? coeffs.global_level : coeffs.local_level;
        const double base = l.base_energy_pj_per_byte.value_or(def.base_pj_per_byte);
        const double ref = l.ref_capacity_bytes.value_or(def.ref_capacity_bytes);
        return base * std::sqrt(capacity_bytes / ref);
    }

    MappingCost EvaluateMappingCost(const LayerShape& shape, const SubAcceleratorTemplate& t, const Mapping& m,
                                    const CostCoefficients& coeffs, const ParamValues* capacities)
    {
        auto verdict = ValidateMapping(m, shape, t);
        if (!verdict.valid)
            throw ValidationError("cannot cost invalid mapping for " + shape.Key() + " on '" + t.Id() +
                                  "': " + verdict.violations.front());

        MappingCost cost;
        cost.total_macs = shape.TotalMacs();
        const std::int64_t lanes = m.Lanes();
        cost.compute_cycles = CeilDiv(cost.total_macs, lanes);

        PerDim<std::int64_t> spatial_tile;
        for (std::size_t i = 0; i < kNumDims; i++) spatial_tile[i] = m.tiles[i] * m.spatial[i];

        const auto order = m.EffectiveOrder();
        const Tensor stationary = StationaryTensor(t.GetDataflow());

        for (Tensor tensor : kAllTensors)
        {
            auto& tr = cost.tensors[static_cast<std::size_t>(tensor)];

            std::optional<std::size_t> innermost, outermost;
            for (std::size_t i = 0; i < order.size(); i++)
            {
                if (!Indexes(shape.kind, tensor, order[i])) continue;
                if (!outermost) outermost = i;
                innermost = i;
            }

            tr.gb_fetches = 1;
            if (innermost)
                for (std::size_t i = 0; i <= *innermost; i++) tr.gb_fetches *= m.OuterCount(order[i]);

            tr.gb_bytes = tr.gb_fetches * FootprintBytes(shape.kind, tensor, spatial_tile);
            tr.local_fill = tr.gb_fetches * lanes * FootprintBytes(shape.kind, tensor, m.tiles);
            tr.mac_operand = cost.total_macs;

            std::int64_t refetch = 1;
            if (outermost && tensor != stationary)
                for (std::size_t i = 0; i < *outermost; i++) refetch *= m.OuterCount(order[i]);
            tr.dram_bytes = refetch * FootprintBytes(shape.kind, tensor, shape.Dims());

            cost.gb_traffic_bytes += tr.gb_bytes;
            cost.dram_bytes += tr.dram_bytes;
        }

        cost.level_accesses.assign(t.Levels().size(), 0);
        for (std::size_t l = 0; l < t.Levels().size(); l++)
        {
            const auto& level = t.Levels()[l];
            for (Tensor tensor : level.holds)
            {
                const auto& tr = cost.tensors[static_cast<std::size_t>(tensor)];
                if (level.scope == BufferScope::Local)
                    cost.level_accesses[l] += tr.mac_operand + tr.local_fill;
                else
                    cost.level_accesses[l] += tr.gb_bytes + tr.dram_bytes;
            }
        }

        const auto stall = static_cast<std::int64_t>(
            std::ceil(static_cast<double>(cost.gb_traffic_bytes) / coeffs.sram_bandwidth_bytes_per_cycle));
        cost.latency_cycles = std::max(cost.compute_cycles, stall);

        cost.required = RequiredParams(t, m);
        cost.energy_pj = EnergyAtCapacity(t, cost, capacities ? *capacities : cost.required, coeffs);
        return cost;
    }

    double EnergyAtCapacity(const SubAcceleratorTemplate& t, const MappingCost& cost, const ParamValues& capacities,
                            const CostCoefficients& coeffs)
    {
        if (capacities.size() != t.FreeParams().size())
            throw ValidationError("parameter assignment for '" + t.Id() + "' has " + std::to_string(capacities.size()) +
                                  " values, expected " + std::to_string(t.FreeParams().size()));
        double energy = static_cast<double>(cost.total_macs) * coeffs.mac_energy_pj;
        for (std::size_t l = 0; l < t.Levels().size(); l++)
        {
            const double capacity = static_cast<double>(capacities[t.LevelParam(l)]);
            energy += static_cast<double>(cost.level_accesses[l]) * LevelEnergyPerByte(t, l, capacity, coeffs);
        }
        energy += static_cast<double>(cost.dram_bytes) * coeffs.dram_energy_pj_per_byte;
        return energy;
    }

    AreaBreakdown InstanceAreaBreakdown(const SubAcceleratorTemplate& t, const ParamValues& params,
                                        const CostCoefficients& coeffs)
    {
        const auto& free = t.FreeParams();
        if (params.size() != free.size())
            throw ValidationError("parameter assignment for '" + t.Id() + "' has " + std::to_string(params.size()) +
                                  " values, expected " + std::to_string(free.size()));
        for (std::size_t i = 0; i < free.size(); i++)
            if (params[i] < 1 || params[i] > free[i].max_value)
                throw ValidationError("parameter '" + free[i].name + "' of '" + t.Id() + "' = " +
                                      std::to_string(params[i]) + " outside [1, " + std::to_string(free[i].max_value) +
                                      "]");

        const double pe_area = t.PeAreaOverride().value_or(coeffs.pe_area_mm2);
        const double byte_area = t.BufferAreaOverride().value_or(coeffs.buffer_area_mm2_per_byte);
        const std::int64_t pes = params[t.PesParam()];
        const std::int64_t macs = t.MacsPerPeParam() ? params[*t.MacsPerPeParam()] : 1;

        AreaBreakdown a;
        a.pe_mm2 = static_cast<double>(pes * macs) * pe_area;
        for (std::size_t l = 0; l < t.Levels().size(); l++)
        {
            std::int64_t bytes = params[t.LevelParam(l)];
            if (t.Levels()[l].scope == BufferScope::Local) bytes *= pes;
            a.buffer_mm2 += static_cast<double>(bytes) * byte_area;
        }
        return a;
    }

    double InstanceArea(const SubAcceleratorTemplate& t, const ParamValues& params, const CostCoefficients& coeffs)
    {
        return InstanceAreaBreakdown(t, params, coeffs).Total();
    }

    CostTable ParseCostTable(const nlohmann::json& document)
    {
        const nlohmann::json* list = &document;
        if (document.is_object())
        {
            if (!document.contains("entries"))
                throw SchemaError("cost table: missing field 'entries'");
            list = &document.at("entries");
        }
        if (!list->is_array())
            throw SchemaError("cost table entries must be a list");

        CostTable table;
        for (const auto& e : *list)
        {
            if (!e.is_object())
                throw SchemaError("cost table entry must be an object");
            for (const char* field : {"layer_class", "template", "mapping_index", "latency_cycles", "energy_pj", "dram_bytes"})
                if (!e.contains(field))
                    throw SchemaError(std::string("cost table entry: missing field '") + field + "'");
            if (!e.at("layer_class").is_string() || !e.at("template").is_string())
                throw SchemaError("cost table entry: layer_class and template must be strings");
            if (!e.at("mapping_index").is_number_unsigned() && !e.at("mapping_index").is_number_integer())
                throw SchemaError("cost table entry: mapping_index must be an integer");
            if (!e.at("latency_cycles").is_number_integer() || !e.at("dram_bytes").is_number_integer() ||
                !e.at("energy_pj").is_number())
                throw SchemaError("cost table entry: latency_cycles and dram_bytes must be integers, energy_pj a number");

            CostTableEntry entry;
            entry.layer_class = e.at("layer_class").get<std::string>();
            entry.template_id = e.at("template").get<std::string>();
            const auto index = e.at("mapping_index").get<std::int64_t>();
            entry.latency_cycles = e.at("latency_cycles").get<std::int64_t>();
            entry.energy_pj = e.at("energy_pj").get<double>();
            entry.dram_bytes = e.at("dram_bytes").get<std::int64_t>();
            if (index < 0 || entry.latency_cycles < 1 || entry.dram_bytes < 0 || !(entry.energy_pj >= 0.0))
                throw SchemaError("cost table entry for " + entry.layer_class + " on '" + entry.template_id +
                                  "': negative index or cost");
            entry.mapping_index = static_cast<std::size_t>(index);

            CostTableKey key{entry.layer_class, entry.template_id, entry.mapping_index};
            if (!table.emplace(key, entry).second)
                throw SchemaError("cost table: duplicate entry for " + entry.layer_class + " on '" + entry.template_id +
                                  "' mapping " + std::to_string(entry.mapping_index));
        }
        return table;
    }

    CostTable LoadCostTable(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw SchemaError("cannot open cost table '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("cost table '" + path + "': " + e.what());
        }
        return ParseCostTable(doc);
    }

    nlohmann::json ToJson(const CostTable& table)
    {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [key, e] : table)
            entries.push_back({{"layer_class", e.layer_class},
                               {"template", e.template_id},
                               {"mapping_index", e.mapping_index},
                               {"latency_cycles", e.latency_cycles},
                               {"energy_pj", e.energy_pj},
                               {"dram_bytes", e.dram_bytes}});
        return {{"entries", entries}};
    }

} // namespace moham
