#include "moham/workload.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "moham/errors.hpp"

namespace moham
{

    std::string ToString(LayerKind kind)
    {
        switch (kind)
        {
        case LayerKind::Conv: return "CONV";
        case LayerKind::Depthwise: return "DEPTHWISE";
        case LayerKind::FullyConnected: return "FC";
        }
        return "CONV";
    }

    LayerKind LayerKindFromString(const std::string& text)
    {
        if (text == "CONV") return LayerKind::Conv;
        if (text == "DEPTHWISE") return LayerKind::Depthwise;
        if (text == "FC") return LayerKind::FullyConnected;
        throw SchemaError("unknown layer kind '" + text + "' (expected CONV, DEPTHWISE or FC)");
    }

    char DimLetter(Dim d)
    {
        static constexpr char letters[] = {'C', 'K', 'Y', 'X', 'R', 'S'};
        return letters[static_cast<std::size_t>(d)];
    }

    Dim DimFromLetter(char letter)
    {
        for (Dim d : kAllDims)
            if (DimLetter(d) == letter) return d;
        throw SchemaError(std::string("unknown loop dimension '") + letter + "'");
    }

    std::string LayerShape::Key() const
    {
        std::ostringstream os;
        os << ToString(kind) << ":c" << c << "k" << k << "y" << y << "x" << x << "r" << r << "s" << s;
        return os.str();
    }

    void LayerShape::Validate() const
    {
        for (Dim d : kAllDims)
            if (Extent(d) < 1)
                throw ValidationError(std::string("layer dimension ") + DimLetter(d) + " must be >= 1");
        if (kind == LayerKind::FullyConnected && (r != 1 || s != 1))
            throw ValidationError("FC layers require r = s = 1");
    }

    ApplicationModel::ApplicationModel(std::vector<DnnModel> models, std::vector<Layer> layers) :
        models_(std::move(models)),
        layers_(std::move(layers)),
        preds_(layers_.size()),
        succs_(layers_.size())
    {
        std::set<std::string> model_ids;
        for (const auto& m : models_)
            if (!model_ids.insert(m.id).second)
                throw ValidationError("duplicate model id '" + m.id + "'");

        std::set<std::string> layer_names;
        for (std::size_t i = 0; i < layers_.size(); i++)
        {
            const Layer& l = layers_[i];
            if (l.id != i)
                throw ValidationError("layer table is not densely indexed at '" + l.name + "'");
            if (l.model >= models_.size())
                throw ValidationError("layer '" + l.name + "' refers to a missing model");
            if (!layer_names.insert(l.name).second)
                throw ValidationError("duplicate layer id '" + l.name + "'");
            try {
                l.shape.Validate();
            } catch (const ValidationError& e) {
                throw ValidationError("layer '" + l.name + "' of model '" + models_[l.model].id + "': " + e.what());
            }
        }

        for (std::size_t m = 0; m < models_.size(); m++)
        {
            for (auto [from, to] : models_[m].deps)
            {
                if (from >= layers_.size() || to >= layers_.size())
                    throw ValidationError("model '" + models_[m].id + "' has a dependency on an unknown layer");
                if (layers_[from].model != m || layers_[to].model != m)
                    throw ValidationError("dependency (" + layers_[from].name + ", " + layers_[to].name +
                                          ") crosses models; only intra-model dependencies are allowed");
                if (from == to)
                    throw ValidationError("self dependency on layer '" + layers_[from].name + "' in model '" +
                                          models_[m].id + "'");
                if (std::find(succs_[from].begin(), succs_[from].end(), to) != succs_[from].end())
                    continue;
                succs_[from].push_back(to);
                preds_[to].push_back(from);
            }
        }
        for (auto& p : preds_) std::sort(p.begin(), p.end());
        for (auto& s : succs_) std::sort(s.begin(), s.end());

        // Cycle check: whatever Kahn's algorithm cannot drain lies on or behind a cycle.
        std::vector<std::size_t> in_degree(layers_.size());
        std::vector<LayerId> ready;
        for (LayerId l = 0; l < layers_.size(); l++)
        {
            in_degree[l] = preds_[l].size();
            if (in_degree[l] == 0) ready.push_back(l);
        }
        std::size_t drained = 0;
        while (!ready.empty())
        {
            LayerId l = ready.back();
            ready.pop_back();
            drained++;
            for (LayerId s : succs_[l])
                if (--in_degree[s] == 0) ready.push_back(s);
        }
        if (drained != layers_.size())
        {
            std::string stuck;
            std::string model;
            for (LayerId l = 0; l < layers_.size(); l++)
                if (in_degree[l] > 0)
                {
                    stuck += (stuck.empty() ? "" : ", ") + layers_[l].name;
                    model = models_[layers_[l].model].id;
                }
            throw ValidationError("cyclic dependency in model '" + model + "' involving layers [" + stuck + "]");
        }
    }

    std::size_t ApplicationModel::NumDeps() const
    {
        std::size_t n = 0;
        for (const auto& s : succs_) n += s.size();
        return n;
    }

    std::optional<LayerId> ApplicationModel::FindLayer(const std::string& name) const
    {
        for (const auto& l : layers_)
            if (l.name == name) return l.id;
        return std::nullopt;
    }

    namespace
    {
        std::string IdToString(const nlohmann::json& v, const std::string& what)
        {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
            throw SchemaError(what + " must be a string or an integer");
        }

        std::int64_t RequireDim(const nlohmann::json& layer, const char* field, const std::string& where)
        {
            if (!layer.contains(field))
                throw SchemaError(where + ": missing field '" + field + "'");
            const auto& v = layer.at(field);
            if (!v.is_number_integer())
                throw SchemaError(where + ": field '" + field + "' must be an integer");
            return v.get<std::int64_t>();
        }
    }

    ApplicationModel ParseApplicationModel(const nlohmann::json& document)
    {
        const nlohmann::json* list = &document;
        if (document.is_object() && document.contains("models"))
            list = &document.at("models");
        if (!list->is_array())
            throw SchemaError("workload document must be a list of models");

        std::vector<DnnModel> models;
        std::vector<Layer> layers;
        std::unordered_map<std::string, LayerId> by_name;

        for (const auto& jm : *list)
        {
            if (!jm.is_object() || !jm.contains("id") || !jm.contains("layers"))
                throw SchemaError("each model needs 'id' and 'layers'");
            DnnModel model;
            model.id = IdToString(jm.at("id"), "model id");
            const std::size_t model_index = models.size();

            if (!jm.at("layers").is_array())
                throw SchemaError("model '" + model.id + "': 'layers' must be a list");
            for (const auto& jl : jm.at("layers"))
            {
                if (!jl.is_object() || !jl.contains("id"))
                    throw SchemaError("model '" + model.id + "': every layer needs an 'id'");
                Layer layer;
                layer.id = layers.size();
                layer.model = model_index;
                layer.name = IdToString(jl.at("id"), "layer id");
                const std::string where = "model '" + model.id + "', layer '" + layer.name + "'";
                if (!jl.contains("kind") || !jl.at("kind").is_string())
                    throw SchemaError(where + ": missing string field 'kind'");
                layer.shape.kind = LayerKindFromString(jl.at("kind").get<std::string>());
                layer.shape.c = RequireDim(jl, "c", where);
                layer.shape.k = RequireDim(jl, "k", where);
                layer.shape.y = RequireDim(jl, "y", where);
                layer.shape.x = RequireDim(jl, "x", where);
                layer.shape.r = RequireDim(jl, "r", where);
                layer.shape.s = RequireDim(jl, "s", where);
                if (by_name.count(layer.name))
                    throw ValidationError(where + ": duplicate layer id");
                by_name.emplace(layer.name, layer.id);
                model.layers.push_back(layer.id);
                layers.push_back(std::move(layer));
            }

            if (jm.contains("deps"))
            {
                if (!jm.at("deps").is_array())
                    throw SchemaError("model '" + model.id + "': 'deps' must be a list of [from, to] pairs");
                for (const auto& jd : jm.at("deps"))
                {
                    if (!jd.is_array() || jd.size() != 2)
                        throw SchemaError("model '" + model.id + "': each dependency must be a [from, to] pair");
                    std::string from = IdToString(jd[0], "dependency endpoint");
                    std::string to = IdToString(jd[1], "dependency endpoint");
                    // Endpoints must already be declared in this model.
                    auto fi = by_name.find(from);
                    auto ti = by_name.find(to);
                    if (fi == by_name.end() || layers[fi->second].model != model_index)
                        throw ValidationError("model '" + model.id + "': dependency endpoint '" + from +
                                              "' is not a layer of this model");
                    if (ti == by_name.end() || layers[ti->second].model != model_index)
                        throw ValidationError("model '" + model.id + "': dependency endpoint '" + to +
                                              "' is not a layer of this model");
                    model.deps.emplace_back(fi->second, ti->second);
                }
            }
            models.push_back(std::move(model));
        }

        return ApplicationModel(std::move(models), std::move(layers));
    }

    ApplicationModel LoadApplicationModel(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw SchemaError("cannot open workload file '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("workload file '" + path + "': " + e.what());
        }
        return ParseApplicationModel(doc);
    }

    nlohmann::json ToJson(const ApplicationModel& am)
    {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& m : am.Models())
        {
            nlohmann::json jm = {{"id", m.id}, {"layers", nlohmann::json::array()}, {"deps", nlohmann::json::array()}};
            for (LayerId l : m.layers)
            {
                const auto& layer = am.GetLayer(l);
                const auto& s = layer.shape;
                jm["layers"].push_back({{"id", layer.name}, {"kind", ToString(s.kind)}, {"c", s.c}, {"k", s.k},
                                        {"y", s.y}, {"x", s.x}, {"r", s.r}, {"s", s.s}});
            }
            for (auto [from, to] : m.deps)
                jm["deps"].push_back({am.GetLayer(from).name, am.GetLayer(to).name});
            doc.push_back(std::move(jm));
        }
        return doc;
    }

    std::vector<LayerId> KahnToposort(const ApplicationModel& am, TieBreak tie_break, std::mt19937_64* rng)
    {
        if (tie_break == TieBreak::SeededRandom && rng == nullptr)
            throw std::invalid_argument("seeded-random toposort needs an rng");

        const std::size_t n = am.NumLayers();
        std::vector<std::size_t> in_degree(n);
        std::vector<LayerId> ready;
        for (LayerId l = 0; l < n; l++)
        {
            in_degree[l] = am.Predecessors(l).size();
            if (in_degree[l] == 0) ready.push_back(l);
        }

        std::vector<LayerId> order;
        order.reserve(n);
        while (!ready.empty())
        {
            std::size_t pick = 0;
            if (tie_break == TieBreak::Deterministic)
                pick = static_cast<std::size_t>(std::min_element(ready.begin(), ready.end()) - ready.begin());
            else
                pick = std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(*rng);

            LayerId l = ready[pick];
            ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
            order.push_back(l);
            for (LayerId s : am.Successors(l))
                if (--in_degree[s] == 0) ready.push_back(s);
        }

        if (order.size() != n)
            throw ValidationError("cycle detected during topological sort");
        return order;
    }

    bool IsTopologicalOrder(const ApplicationModel& am, const std::vector<LayerId>& order)
    {
        const std::size_t n = am.NumLayers();
        if (order.size() != n) return false;
        std::vector<std::size_t> position(n, n);
        for (std::size_t i = 0; i < n; i++)
        {
            if (order[i] >= n || position[order[i]] != n) return false;
            position[order[i]] = i;
        }
        for (LayerId l = 0; l < n; l++)
            for (LayerId s : am.Successors(l))
                if (position[l] >= position[s]) return false;
        return true;
    }

    std::vector<UniqueLayerClass> UniqueLayers(const ApplicationModel& am)
    {
        std::vector<UniqueLayerClass> classes;
        std::map<LayerShape, std::size_t> index;
        for (const auto& layer : am.Layers())
        {
            auto [it, inserted] = index.emplace(layer.shape, classes.size());
            if (inserted)
                classes.push_back({layer.shape, {}});
            classes[it->second].members.push_back(layer.id);
        }
        return classes;
    }

} // namespace moham
