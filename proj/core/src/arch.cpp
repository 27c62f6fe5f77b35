#include "moham/arch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "moham/errors.hpp"

namespace moham
{

    std::string ToString(Dataflow df)
    {
        switch (df)
        {
        case Dataflow::RowStationary: return "ROW_STATIONARY";
        case Dataflow::WeightStationary: return "WEIGHT_STATIONARY";
        case Dataflow::OutputStationary: return "OUTPUT_STATIONARY";
        }
        return "ROW_STATIONARY";
    }

    Dataflow DataflowFromString(const std::string& text)
    {
        if (text == "ROW_STATIONARY") return Dataflow::RowStationary;
        if (text == "WEIGHT_STATIONARY") return Dataflow::WeightStationary;
        if (text == "OUTPUT_STATIONARY") return Dataflow::OutputStationary;
        throw SchemaError("unknown dataflow '" + text + "'");
    }

    std::string ToString(Tensor t)
    {
        switch (t)
        {
        case Tensor::Weight: return "weight";
        case Tensor::Input: return "input";
        case Tensor::Output: return "output";
        }
        return "weight";
    }

    Tensor TensorFromString(const std::string& text)
    {
        if (text == "weight") return Tensor::Weight;
        if (text == "input") return Tensor::Input;
        if (text == "output") return Tensor::Output;
        throw SchemaError("unknown tensor '" + text + "' (expected weight, input or output)");
    }

    bool Indexes(LayerKind kind, Tensor t, Dim d)
    {
        switch (t)
        {
        case Tensor::Weight:
            return d == Dim::C || d == Dim::K || d == Dim::R || d == Dim::S;
        case Tensor::Input:
            return d == Dim::C || d == Dim::Y || d == Dim::X || d == Dim::R || d == Dim::S;
        case Tensor::Output:
            return d == Dim::K || d == Dim::Y || d == Dim::X || (kind == LayerKind::Depthwise && d == Dim::C);
        }
        return false;
    }

    Tensor StationaryTensor(Dataflow df)
    {
        return df == Dataflow::OutputStationary ? Tensor::Output : Tensor::Weight;
    }

    std::int64_t FootprintBytes(LayerKind kind, Tensor t, const PerDim<std::int64_t>& e)
    {
        const auto c = e[0], k = e[1], y = e[2], x = e[3], r = e[4], s = e[5];
        switch (t)
        {
        case Tensor::Weight: return c * k * r * s;
        case Tensor::Input: return c * (y + r - 1) * (x + s - 1);
        case Tensor::Output: return (kind == LayerKind::Depthwise ? c : 1) * k * y * x;
        }
        return 0;
    }

    SubAcceleratorTemplate::SubAcceleratorTemplate(std::string id, Dataflow dataflow, std::vector<FreeParam> free_params,
                                                   std::vector<BufferLevel> levels, std::optional<double> pe_area_mm2,
                                                   std::optional<double> buffer_area_mm2_per_byte) :
        id_(std::move(id)),
        dataflow_(dataflow),
        free_params_(std::move(free_params)),
        levels_(std::move(levels)),
        pe_area_mm2_(pe_area_mm2),
        buffer_area_mm2_per_byte_(buffer_area_mm2_per_byte)
    {
        const std::string where = "template '" + id_ + "'";
        if (id_.empty())
            throw ValidationError("template id must not be empty");

        std::set<std::string> names;
        for (const auto& p : free_params_)
        {
            if (p.max_value < 1)
                throw ValidationError(where + ": free parameter '" + p.name + "' needs max_value >= 1");
            if (!names.insert(p.name).second)
                throw ValidationError(where + ": duplicate free parameter '" + p.name + "'");
        }

        auto pes = FindParam(kPesParam);
        if (!pes)
            throw ValidationError(where + ": missing free parameter '" + std::string(kPesParam) + "'");
        pes_param_ = *pes;
        macs_param_ = FindParam(kMacsPerPeParam);

        if (levels_.empty())
            throw ValidationError(where + ": buffer_levels must not be empty");
        if (levels_.back().scope != BufferScope::Local)
            throw ValidationError(where + ": innermost buffer level must be per-PE local storage");

        constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
        global_home_.fill(kUnset);
        local_home_.fill(kUnset);
        for (std::size_t l = 0; l < levels_.size(); l++)
        {
            const auto& level = levels_[l];
            auto param = FindParam(level.name);
            if (!param)
                throw ValidationError(where + ": buffer level '" + level.name + "' has no free parameter of the same name");
            if (*param == pes_param_ || (macs_param_ && *param == *macs_param_))
                throw ValidationError(where + ": buffer level '" + level.name + "' collides with a compute parameter");
            level_param_.push_back(*param);
            if (level.holds.empty())
                throw ValidationError(where + ": buffer level '" + level.name + "' holds no tensor");
            for (Tensor t : level.holds)
            {
                auto& home = level.scope == BufferScope::Global ? global_home_ : local_home_;
                auto& slot = home[static_cast<std::size_t>(t)];
                if (slot != kUnset)
                    throw ValidationError(where + ": tensor '" + ToString(t) + "' has more than one " +
                                          (level.scope == BufferScope::Global ? "global" : "local") + " home");
                slot = l;
            }
            if (level.base_energy_pj_per_byte && *level.base_energy_pj_per_byte <= 0.0)
                throw ValidationError(where + ": level '" + level.name + "' base energy must be positive");
            if (level.ref_capacity_bytes && *level.ref_capacity_bytes <= 0.0)
                throw ValidationError(where + ": level '" + level.name + "' reference capacity must be positive");
        }
        for (Tensor t : kAllTensors)
        {
            if (global_home_[static_cast<std::size_t>(t)] == kUnset)
                throw ValidationError(where + ": tensor '" + ToString(t) + "' has no global buffer level");
            if (local_home_[static_cast<std::size_t>(t)] == kUnset)
                throw ValidationError(where + ": tensor '" + ToString(t) + "' has no local buffer level");
        }
        if (pe_area_mm2_ && *pe_area_mm2_ <= 0.0)
            throw ValidationError(where + ": pe_area_mm2 must be positive");
        if (buffer_area_mm2_per_byte_ && *buffer_area_mm2_per_byte_ <= 0.0)
            throw ValidationError(where + ": buffer_area_mm2_per_byte must be positive");
    }

    ParamValues SubAcceleratorTemplate::MaxParams() const
    {
        ParamValues v;
        v.reserve(free_params_.size());
        for (const auto& p : free_params_) v.push_back(p.max_value);
        return v;
    }

    std::optional<std::size_t> SubAcceleratorTemplate::FindParam(const std::string& name) const
    {
        for (std::size_t i = 0; i < free_params_.size(); i++)
            if (free_params_[i].name == name) return i;
        return std::nullopt;
    }

    TemplateLibrary::TemplateLibrary(std::vector<SubAcceleratorTemplate> templates) :
        templates_(std::move(templates))
    {
        std::set<std::string> ids;
        for (const auto& t : templates_)
            if (!ids.insert(t.Id()).second)
                throw ValidationError("duplicate template id '" + t.Id() + "'");
    }

    std::optional<std::size_t> TemplateLibrary::Find(const std::string& id) const
    {
        for (std::size_t i = 0; i < templates_.size(); i++)
            if (templates_[i].Id() == id) return i;
        return std::nullopt;
    }

    std::size_t TemplateLibrary::IndexOf(const std::string& id) const
    {
        auto i = Find(id);
        if (!i)
            throw ValidationError("unknown template '" + id + "'");
        return *i;
    }

    TemplateLibrary TemplateLibrary::Subset(const std::vector<std::string>& ids) const
    {
        std::vector<SubAcceleratorTemplate> picked;
        for (const auto& id : ids)
            picked.push_back(templates_[IndexOf(id)]);
        return TemplateLibrary(std::move(picked));
    }

    namespace
    {
        const nlohmann::json& Require(const nlohmann::json& j, const char* field, const std::string& where)
        {
            if (!j.is_object() || !j.contains(field))
                throw SchemaError(where + ": missing field '" + field + "'");
            return j.at(field);
        }

        double RequireNumber(const nlohmann::json& j, const char* field, const std::string& where)
        {
            const auto& v = Require(j, field, where);
            if (!v.is_number())
                throw SchemaError(where + ": field '" + field + "' must be a number");
            return v.get<double>();
        }

        SubAcceleratorTemplate ParseTemplate(const nlohmann::json& jt)
        {
            const auto& jid = Require(jt, "id", "template");
            if (!jid.is_string())
                throw SchemaError("template id must be a string");
            const std::string id = jid.get<std::string>();
            const std::string where = "template '" + id + "'";

            const auto& jdf = Require(jt, "dataflow", where);
            if (!jdf.is_string())
                throw SchemaError(where + ": dataflow must be a string");
            Dataflow df = DataflowFromString(jdf.get<std::string>());

            std::vector<FreeParam> params;
            const auto& jp = Require(jt, "free_params", where);
            if (jp.is_object())
            {
                for (auto it = jp.begin(); it != jp.end(); ++it)
                {
                    if (!it.value().is_number_integer())
                        throw SchemaError(where + ": free parameter '" + it.key() + "' must be an integer");
                    params.push_back({it.key(), it.value().get<std::int64_t>()});
                }
            }
            else if (jp.is_array())
            {
                for (const auto& e : jp)
                {
                    const auto& name = Require(e, "name", where);
                    const auto& max = Require(e, "max_value", where);
                    if (!name.is_string() || !max.is_number_integer())
                        throw SchemaError(where + ": free parameters need a string name and integer max_value");
                    params.push_back({name.get<std::string>(), max.get<std::int64_t>()});
                }
            }
            else
                throw SchemaError(where + ": free_params must be an object or a list");

            std::vector<BufferLevel> levels;
            const auto& jl = Require(jt, "buffer_levels", where);
            if (!jl.is_array())
                throw SchemaError(where + ": buffer_levels must be a list");
            for (const auto& e : jl)
            {
                BufferLevel level;
                const auto& name = Require(e, "name", where);
                if (!name.is_string())
                    throw SchemaError(where + ": buffer level name must be a string");
                level.name = name.get<std::string>();
                const auto& scope = Require(e, "scope", where);
                if (scope == "global") level.scope = BufferScope::Global;
                else if (scope == "local") level.scope = BufferScope::Local;
                else throw SchemaError(where + ": buffer level scope must be 'global' or 'local'");
                const auto& holds = Require(e, "holds", where);
                if (!holds.is_array())
                    throw SchemaError(where + ": buffer level 'holds' must be a list");
                for (const auto& h : holds)
                {
                    if (!h.is_string())
                        throw SchemaError(where + ": tensor names must be strings");
                    level.holds.push_back(TensorFromString(h.get<std::string>()));
                }
                levels.push_back(std::move(level));
            }

            if (jt.contains("energy_coeffs"))
            {
                const auto& je = jt.at("energy_coeffs");
                if (!je.is_object())
                    throw SchemaError(where + ": energy_coeffs must be an object keyed by level name");
                for (auto it = je.begin(); it != je.end(); ++it)
                {
                    auto level = std::find_if(levels.begin(), levels.end(),
                                              [&](const BufferLevel& l) { return l.name == it.key(); });
                    if (level == levels.end())
                        throw SchemaError(where + ": energy_coeffs refers to unknown level '" + it.key() + "'");
                    if (it.value().contains("base_pj_per_byte"))
                        level->base_energy_pj_per_byte = RequireNumber(it.value(), "base_pj_per_byte", where);
                    if (it.value().contains("ref_capacity_bytes"))
                        level->ref_capacity_bytes = RequireNumber(it.value(), "ref_capacity_bytes", where);
                }
            }

            std::optional<double> pe_area, buffer_area;
            if (jt.contains("area_coeffs"))
            {
                const auto& ja = jt.at("area_coeffs");
                if (ja.contains("pe_area_mm2")) pe_area = RequireNumber(ja, "pe_area_mm2", where);
                if (ja.contains("buffer_area_mm2_per_byte"))
                    buffer_area = RequireNumber(ja, "buffer_area_mm2_per_byte", where);
            }

            return SubAcceleratorTemplate(id, df, std::move(params), std::move(levels), pe_area, buffer_area);
        }
    }

    TemplateLibrary ParseTemplateLibrary(const nlohmann::json& document)
    {
        const nlohmann::json* list = &document;
        if (document.is_object() && document.contains("templates"))
            list = &document.at("templates");
        if (!list->is_array())
            throw SchemaError("template library must be a list of templates");
        std::vector<SubAcceleratorTemplate> templates;
        for (const auto& jt : *list)
            templates.push_back(ParseTemplate(jt));
        if (templates.empty())
            throw ValidationError("template library is empty");
        return TemplateLibrary(std::move(templates));
    }

    TemplateLibrary LoadTemplateLibrary(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw SchemaError("cannot open template file '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("template file '" + path + "': " + e.what());
        }
        return ParseTemplateLibrary(doc);
    }

    nlohmann::json ToJson(const TemplateLibrary& library)
    {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& t : library.All())
        {
            nlohmann::json jt;
            jt["id"] = t.Id();
            jt["dataflow"] = ToString(t.GetDataflow());
            jt["free_params"] = nlohmann::json::array();
            for (const auto& p : t.FreeParams())
                jt["free_params"].push_back({{"name", p.name}, {"max_value", p.max_value}});
            jt["buffer_levels"] = nlohmann::json::array();
            nlohmann::json energy = nlohmann::json::object();
            for (const auto& l : t.Levels())
            {
                nlohmann::json holds = nlohmann::json::array();
                for (Tensor tensor : l.holds) holds.push_back(ToString(tensor));
                jt["buffer_levels"].push_back(
                    {{"name", l.name}, {"scope", l.scope == BufferScope::Global ? "global" : "local"}, {"holds", holds}});
                if (l.base_energy_pj_per_byte) energy[l.name]["base_pj_per_byte"] = *l.base_energy_pj_per_byte;
                if (l.ref_capacity_bytes) energy[l.name]["ref_capacity_bytes"] = *l.ref_capacity_bytes;
            }
            if (!energy.empty()) jt["energy_coeffs"] = energy;
            if (t.PeAreaOverride()) jt["area_coeffs"]["pe_area_mm2"] = *t.PeAreaOverride();
            if (t.BufferAreaOverride()) jt["area_coeffs"]["buffer_area_mm2_per_byte"] = *t.BufferAreaOverride();
            doc.push_back(std::move(jt));
        }
        return doc;
    }

    TemplateLibrary BundledTemplates()
    {
        using enum Tensor;
        constexpr std::int64_t kKiB = 1024;

        SubAcceleratorTemplate eyeriss(
            "eyeriss", Dataflow::RowStationary,
            {{kPesParam, 168}, {"shared_buffer", 131 * kKiB}, {"pe_scratchpad", kKiB / 2}},
            {{"shared_buffer", BufferScope::Global, {Weight, Input, Output}, {}, {}},
             {"pe_scratchpad", BufferScope::Local, {Weight, Input, Output}, {}, {}}});

        SubAcceleratorTemplate simba(
            "simba", Dataflow::WeightStationary,
            {{kPesParam, 128}, {kMacsPerPeParam, 32}, {"global_buffer", 64 * kKiB}, {"weight_buffer", 32 * kKiB},
             {"input_buffer", 8 * kKiB}, {"accumulation_buffer", 3 * kKiB}},
            {{"global_buffer", BufferScope::Global, {Weight, Input, Output}, {}, {}},
             {"weight_buffer", BufferScope::Local, {Weight}, {}, {}},
             {"input_buffer", BufferScope::Local, {Input}, {}, {}},
             {"accumulation_buffer", BufferScope::Local, {Output}, {}, {}}});

        // The per-PE register file size is not part of the reference design; 256 B is assumed.
        SubAcceleratorTemplate shidiannao(
            "shidiannao", Dataflow::OutputStationary,
            {{kPesParam, 256}, {"neuron_buffer", 131 * kKiB}, {"synapse_buffer", 131 * kKiB}, {"pe_registers", 256}},
            {{"neuron_buffer", BufferScope::Global, {Input, Output}, {}, {}},
             {"synapse_buffer", BufferScope::Global, {Weight}, {}, {}},
             {"pe_registers", BufferScope::Local, {Weight, Input, Output}, {}, {}}});

        return TemplateLibrary({std::move(eyeriss), std::move(simba), std::move(shidiannao)});
    }

    std::int64_t Mapping::OuterCount(Dim d) const
    {
        const auto i = static_cast<std::size_t>(d);
        return shape.Extent(d) / (tiles[i] * spatial[i]);
    }

    std::int64_t Mapping::Lanes() const
    {
        std::int64_t lanes = 1;
        for (auto s : spatial) lanes *= s;
        return lanes;
    }

    std::vector<Dim> Mapping::EffectiveOrder() const
    {
        std::vector<Dim> order;
        for (Dim d : loop_order)
            if (OuterCount(d) > 1) order.push_back(d);
        return order;
    }

    std::string Mapping::LoopOrderString() const
    {
        std::string s;
        for (Dim d : loop_order) s += DimLetter(d);
        return s;
    }

    nlohmann::json ToJson(const Mapping& m)
    {
        return {{"loop_order", m.LoopOrderString()}, {"spatial", m.spatial}, {"tiles", m.tiles}};
    }

    Mapping MappingFromJson(const nlohmann::json& j, const LayerShape& shape, const std::string& template_id)
    {
        Mapping m;
        m.shape = shape;
        m.template_id = template_id;
        const auto& order = Require(j, "loop_order", "mapping");
        if (!order.is_string() || order.get<std::string>().size() != kNumDims)
            throw SchemaError("mapping loop_order must be a 6-letter string over CKYXRS");
        const std::string letters = order.get<std::string>();
        std::set<char> seen;
        for (std::size_t i = 0; i < kNumDims; i++)
        {
            m.loop_order[i] = DimFromLetter(letters[i]);
            if (!seen.insert(letters[i]).second)
                throw SchemaError("mapping loop_order repeats dimension '" + std::string(1, letters[i]) + "'");
        }
        const auto& spatial = Require(j, "spatial", "mapping");
        const auto& tiles = Require(j, "tiles", "mapping");
        if (!spatial.is_array() || spatial.size() != kNumDims || !tiles.is_array() || tiles.size() != kNumDims)
            throw SchemaError("mapping spatial and tiles must be lists of 6 integers");
        for (std::size_t i = 0; i < kNumDims; i++)
        {
            if (!spatial[i].is_number_integer() || !tiles[i].is_number_integer())
                throw SchemaError("mapping spatial and tiles must be lists of 6 integers");
            m.spatial[i] = spatial[i].get<std::int64_t>();
            m.tiles[i] = tiles[i].get<std::int64_t>();
        }
        return m;
    }

    std::vector<std::int64_t> RequiredLevelBytes(const SubAcceleratorTemplate& t, const Mapping& m)
    {
        PerDim<std::int64_t> spatial_tile;
        for (std::size_t i = 0; i < kNumDims; i++)
            spatial_tile[i] = m.tiles[i] * m.spatial[i];

        const std::int64_t lanes = m.Lanes();
        const std::int64_t macs_per_pe = std::min(lanes, t.MaxMacsPerPe());

        std::vector<std::int64_t> bytes(t.Levels().size(), 0);
        for (std::size_t l = 0; l < t.Levels().size(); l++)
        {
            const auto& level = t.Levels()[l];
            for (Tensor tensor : level.holds)
            {
                if (level.scope == BufferScope::Global)
                    bytes[l] += FootprintBytes(m.shape.kind, tensor, spatial_tile);
                else
                    bytes[l] += macs_per_pe * FootprintBytes(m.shape.kind, tensor, m.tiles);
            }
        }
        return bytes;
    }

    ParamValues RequiredParams(const SubAcceleratorTemplate& t, const Mapping& m)
    {
        ParamValues p = t.MinParams();
        const std::int64_t lanes = m.Lanes();
        const std::int64_t macs_per_pe = std::min(lanes, t.MaxMacsPerPe());
        p[t.PesParam()] = (lanes + macs_per_pe - 1) / macs_per_pe;
        if (auto macs = t.MacsPerPeParam()) p[*macs] = macs_per_pe;
        auto bytes = RequiredLevelBytes(t, m);
        for (std::size_t l = 0; l < bytes.size(); l++)
            p[t.LevelParam(l)] = std::max(p[t.LevelParam(l)], bytes[l]);
        return p;
    }

    bool LoopOrderHonoursDataflow(Dataflow df, const Mapping& m)
    {
        const auto order = m.EffectiveOrder();
        if (df == Dataflow::RowStationary)
        {
            auto y = std::find(order.begin(), order.end(), Dim::Y);
            auto r = std::find(order.begin(), order.end(), Dim::R);
            if (y == order.end() || r == order.end()) return true;
            return std::abs(y - r) == 1;
        }
        const Tensor stationary = StationaryTensor(df);
        bool seen_non_indexing = false;
        for (Dim d : order)
        {
            bool idx = Indexes(m.shape.kind, stationary, d);
            if (idx && seen_non_indexing) return false;
            if (!idx) seen_non_indexing = true;
        }
        return true;
    }

    MappingVerdict ValidateMapping(const Mapping& m, const LayerShape& shape, const SubAcceleratorTemplate& t)
    {
        if (m.template_id != t.Id())
            throw ValidationError("mapping targets template '" + m.template_id + "', not '" + t.Id() + "'");
        if (!(m.shape == shape))
            throw ValidationError("mapping was built for layer class " + m.shape.Key() + ", not " + shape.Key());

        MappingVerdict v;
        auto fail = [&](std::string why) {
            v.valid = false;
            v.violations.push_back(std::move(why));
        };

        std::set<Dim> dims(m.loop_order.begin(), m.loop_order.end());
        if (dims.size() != kNumDims)
            fail("loop order is not a permutation of the six loop dimensions");

        bool factors_ok = true;
        for (Dim d : kAllDims)
        {
            const auto i = static_cast<std::size_t>(d);
            const auto extent = shape.Extent(d);
            const std::string dim(1, DimLetter(d));
            if (m.spatial[i] < 1 || m.spatial[i] > extent)
            {
                fail("spatial factor out of range on dim " + dim);
                factors_ok = false;
            }
            if (m.tiles[i] < 1 || m.tiles[i] > extent)
            {
                fail("tile size out of range on dim " + dim);
                factors_ok = false;
            }
            if (factors_ok && extent % (m.tiles[i] * m.spatial[i]) != 0)
            {
                fail("tile x spatial does not divide extent on dim " + dim);
                factors_ok = false;
            }
        }
        if (!factors_ok) return v;

        const std::int64_t lanes = m.Lanes();
        if (lanes > t.MaxPes() * t.MaxMacsPerPe())
            fail("PE overflow: mapping needs " + std::to_string(lanes) + " lanes, template provides " +
                 std::to_string(t.MaxPes() * t.MaxMacsPerPe()));

        auto bytes = RequiredLevelBytes(t, m);
        for (std::size_t l = 0; l < bytes.size(); l++)
        {
            const auto max = t.FreeParams()[t.LevelParam(l)].max_value;
            if (bytes[l] > max)
                fail("buffer overflow at level " + t.Levels()[l].name + ": needs " + std::to_string(bytes[l]) +
                     " bytes, max " + std::to_string(max));
        }

        if (!LoopOrderHonoursDataflow(t.GetDataflow(), m))
            fail("loop order " + m.LoopOrderString() + " violates the " + ToString(t.GetDataflow()) + " dataflow");
        return v;
    }

    double MappingDistance(const Mapping& a, const Mapping& b)
    {
        if (!(a.shape == b.shape))
            throw ValidationError("mapping distance across layer classes " + a.shape.Key() + " and " + b.shape.Key());

        PerDim<std::size_t> pos_a{}, pos_b{};
        for (std::size_t i = 0; i < kNumDims; i++)
        {
            pos_a[static_cast<std::size_t>(a.loop_order[i])] = i;
            pos_b[static_cast<std::size_t>(b.loop_order[i])] = i;
        }
        int discordant = 0;
        for (std::size_t i = 0; i < kNumDims; i++)
            for (std::size_t j = i + 1; j < kNumDims; j++)
                if ((pos_a[i] < pos_a[j]) != (pos_b[i] < pos_b[j])) discordant++;
        const double kendall = discordant / 15.0;

        std::int64_t max_dim = 1;
        for (auto e : a.shape.Dims()) max_dim = std::max(max_dim, e);
        if (max_dim == 1) return kendall;  // every factor is 1

        const double scale = 6.0 * std::log2(static_cast<double>(max_dim));
        double tiles = 0.0, spatial = 0.0;
        for (std::size_t i = 0; i < kNumDims; i++)
        {
            tiles += std::abs(std::log2(static_cast<double>(a.tiles[i])) - std::log2(static_cast<double>(b.tiles[i])));
            spatial +=
                std::abs(std::log2(static_cast<double>(a.spatial[i])) - std::log2(static_cast<double>(b.spatial[i])));
        }
        return kendall + tiles / scale + spatial / scale;
    }

    std::size_t MappingTransform(const Mapping& m, std::span<const Mapping> candidates)
    {
        if (candidates.empty())
            throw SearchError("mapping transform: no candidate mappings for layer class " + m.shape.Key());
        std::size_t best = 0;
        double best_distance = MappingDistance(m, candidates[0]);
        for (std::size_t i = 1; i < candidates.size(); i++)
        {
            double d = MappingDistance(m, candidates[i]);
            if (d < best_distance)
            {
                best = i;
                best_distance = d;
            }
        }
        return best;
    }

} // namespace moham
