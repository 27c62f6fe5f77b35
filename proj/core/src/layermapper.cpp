#include "moham/layermapper.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "moham/errors.hpp"

namespace moham
{

    bool Dominates(const Objectives& a, const Objectives& b)
    {
        bool strictly = false;
        for (std::size_t i = 0; i < a.size(); i++)
        {
            if (a[i] > b[i]) return false;
            if (a[i] < b[i]) strictly = true;
        }
        return strictly;
    }

    std::vector<std::size_t> ParetoFilter(std::span<const Objectives> points)
    {
        // After a lexicographic sort no point can dominate an earlier one, and a
        // rejected point's dominator is itself dominated by an accepted point.
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

        std::vector<std::size_t> front;
        for (std::size_t i : order)
        {
            bool dominated = false;
            for (std::size_t f : front)
            {
                if (Dominates(points[f], points[i]))
                {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) front.push_back(i);
        }
        std::sort(front.begin(), front.end());
        return front;
    }

    namespace
    {
        bool OrderHonours(Dataflow df, LayerKind kind, const std::vector<Dim>& order)
        {
            if (df == Dataflow::RowStationary)
            {
                auto y = std::find(order.begin(), order.end(), Dim::Y);
                auto r = std::find(order.begin(), order.end(), Dim::R);
                return y == order.end() || r == order.end() || std::abs(y - r) == 1;
            }
            const Tensor stationary = StationaryTensor(df);
            bool seen_non_indexing = false;
            for (Dim d : order)
            {
                const bool idx = Indexes(kind, stationary, d);
                if (idx && seen_non_indexing) return false;
                if (!idx) seen_non_indexing = true;
            }
            return true;
        }

        std::vector<std::int64_t> Divisors(std::int64_t n)
        {
            std::vector<std::int64_t> d;
            for (std::int64_t i = 1; i <= n; i++)
                if (n % i == 0) d.push_back(i);
            return d;
        }

        using Factor = std::pair<std::int64_t, std::int64_t>;  // tile, spatial

        std::vector<Factor> FactorPairs(std::int64_t extent)
        {
            std::vector<Factor> pairs;
            for (auto t : Divisors(extent))
                for (auto s : Divisors(extent / t)) pairs.emplace_back(t, s);
            return pairs;
        }

        std::uint64_t CoprimeStride(std::uint64_t n)
        {
            if (n <= 2) return 1;
            auto s = static_cast<std::uint64_t>(static_cast<long double>(n) * 0.6180339887498948482L);
            s = std::max<std::uint64_t>(s, 1);
            while (std::gcd(s, n) != 1) s++;
            return s;
        }
    }

    std::vector<std::array<Dim, kNumDims>> CanonicalLoopOrders(Dataflow df, const Mapping& tiling)
    {
        std::vector<Dim> effective, idle;
        for (Dim d : kAllDims)
            (tiling.OuterCount(d) > 1 ? effective : idle).push_back(d);

        std::vector<std::array<Dim, kNumDims>> orders;
        std::vector<Dim> perm = effective;
        do
        {
            if (!OrderHonours(df, tiling.shape.kind, perm)) continue;
            std::array<Dim, kNumDims> full{};
            std::copy(perm.begin(), perm.end(), full.begin());
            std::copy(idle.begin(), idle.end(), full.begin() + static_cast<std::ptrdiff_t>(perm.size()));
            orders.push_back(full);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return orders;
    }

    bool EnumerateMapspace(const LayerShape& shape, const SubAcceleratorTemplate& t, std::size_t budget,
                           const std::function<bool(const Mapping&)>& visit)
    {
        if (budget == 0)
            throw ValidationError("mapspace budget must be >= 1");
        shape.Validate();

        PerDim<std::vector<Factor>> pairs;
        std::uint64_t total = 1;
        for (Dim d : kAllDims)
        {
            auto& p = pairs[static_cast<std::size_t>(d)];
            p = FactorPairs(shape.Extent(d));
            total *= p.size();
        }
        const std::uint64_t stride = CoprimeStride(total);
        const std::int64_t max_lanes = t.MaxPes() * t.MaxMacsPerPe();

        Mapping m;
        m.shape = shape;
        m.template_id = t.Id();

        auto decode = [&](std::uint64_t index) {
            for (std::size_t i = kNumDims; i-- > 0;)
            {
                const auto& p = pairs[i];
                const auto& f = p[index % p.size()];
                index /= p.size();
                m.tiles[i] = f.first;
                m.spatial[i] = f.second;
            }
        };
        auto fits = [&]() {
            if (m.Lanes() > max_lanes) return false;
            auto bytes = RequiredLevelBytes(t, m);
            for (std::size_t l = 0; l < bytes.size(); l++)
                if (bytes[l] > t.FreeParams()[t.LevelParam(l)].max_value) return false;
            return true;
        };

        std::size_t emitted = 0;
        bool stop = false, truncated = false;
        auto emit = [&](const std::array<Dim, kNumDims>& order) {
            if (emitted == budget)
            {
                truncated = true;
                stop = true;
                return;
            }
            m.loop_order = order;
            emitted++;
            if (!visit(m)) stop = true;
        };

        struct Visited
        {
            std::uint64_t position;
            std::uint64_t index;
            std::size_t orders;
        };
        std::vector<Visited> valid;
        std::size_t max_orders = 0;

        std::uint64_t index = 0;
        for (std::uint64_t j = 0; j < total && !stop; j++, index = index >= total - stride ? index - (total - stride) : index + stride)
        {
            decode(index);
            if (!fits()) continue;
            auto orders = CanonicalLoopOrders(t.GetDataflow(), m);
            if (orders.empty()) continue;
            valid.push_back({j, index, orders.size()});
            max_orders = std::max(max_orders, orders.size());
            emit(orders[j % orders.size()]);
        }

        for (std::size_t round = 1; round < max_orders && !stop; round++)
        {
            for (const auto& v : valid)
            {
                if (stop) break;
                if (v.orders <= round) continue;
                decode(v.index);
                auto orders = CanonicalLoopOrders(t.GetDataflow(), m);
                emit(orders[(round + v.position) % orders.size()]);
            }
        }
        return truncated;
    }

    EnumerationResult EnumerateMapspace(const LayerShape& shape, const SubAcceleratorTemplate& t, std::size_t budget)
    {
        EnumerationResult r;
        r.truncated = EnumerateMapspace(shape, t, budget, [&](const Mapping& m) {
            r.mappings.push_back(m);
            return true;
        });
        return r;
    }

    std::vector<std::size_t> CapParetoList(std::span<const Objectives> sorted, std::size_t cap)
    {
        const std::size_t n = sorted.size();
        std::vector<std::size_t> keep;
        if (cap == 0 || n <= cap)
        {
            keep.resize(n);
            std::iota(keep.begin(), keep.end(), 0);
            return keep;
        }
        std::vector<bool> chosen(n, false);
        auto take = [&](std::size_t i) {
            if (keep.size() < cap && !chosen[i])
            {
                chosen[i] = true;
                keep.push_back(i);
            }
        };
        take(0);
        std::size_t min_energy = 0;
        for (std::size_t i = 1; i < n; i++)
            if (sorted[i][1] < sorted[min_energy][1]) min_energy = i;
        take(min_energy);
        if (cap > 1)
            for (std::size_t i = 0; i < cap; i++) take(i * (n - 1) / (cap - 1));
        for (std::size_t i = 0; i < n; i++) take(i);
        std::sort(keep.begin(), keep.end());
        return keep;
    }

    MappingCatalog::MappingCatalog(std::vector<UniqueLayerClass> classes, std::size_t num_layers,
                                   std::vector<std::string> template_ids,
                                   std::vector<std::vector<std::vector<CatalogEntry>>> entries,
                                   std::vector<std::vector<bool>> truncated) :
        classes_(std::move(classes)),
        template_ids_(std::move(template_ids)),
        entries_(std::move(entries)),
        truncated_(std::move(truncated))
    {
        class_of_.assign(num_layers, 0);
        for (std::size_t c = 0; c < classes_.size(); c++)
            for (LayerId id : classes_[c].members) class_of_.at(id) = c;
        if (entries_.size() != classes_.size())
            throw ValidationError("catalog has lists for " + std::to_string(entries_.size()) + " layer classes, expected " +
                                  std::to_string(classes_.size()));
        for (std::size_t c = 0; c < classes_.size(); c++)
        {
            if (entries_[c].size() != template_ids_.size())
                throw ValidationError("catalog for layer class " + classes_[c].shape.Key() + " misses templates");
            for (std::size_t t = 0; t < template_ids_.size(); t++)
                if (entries_[c][t].empty())
                    throw SearchError("no valid mapping of layer class " + classes_[c].shape.Key() + " on template '" +
                                      template_ids_[t] + "'");
        }
        if (truncated_.empty())
            truncated_.assign(classes_.size(), std::vector<bool>(template_ids_.size(), false));
        BuildTransforms();
    }

    void MappingCatalog::BuildTransforms()
    {
        const std::size_t nt = template_ids_.size();
        transforms_.assign(classes_.size(), {});
        for (std::size_t c = 0; c < classes_.size(); c++)
        {
            transforms_[c].assign(nt, {});
            for (std::size_t from = 0; from < nt; from++)
            {
                const auto& src = entries_[c][from];
                transforms_[c][from].assign(src.size(), std::vector<std::size_t>(nt, 0));
                for (std::size_t to = 0; to < nt; to++)
                {
                    std::vector<Mapping> candidates;
                    for (const auto& e : entries_[c][to]) candidates.push_back(e.mapping);
                    for (std::size_t mi = 0; mi < src.size(); mi++)
                        transforms_[c][from][mi][to] = MappingTransform(src[mi].mapping, candidates);
                }
            }
        }
    }

    std::size_t MappingCatalog::Transform(LayerId layer, std::size_t from_template, std::size_t mi,
                                          std::size_t to_template) const
    {
        return transforms_.at(ClassOf(layer)).at(from_template).at(mi).at(to_template);
    }

    void MappingCatalog::ApplyCostTable(const CostTable& table)
    {
        std::map<std::string, std::size_t> class_index;
        for (std::size_t c = 0; c < classes_.size(); c++) class_index[classes_[c].shape.Key()] = c;

        for (const auto& [key, e] : table)
        {
            auto c = class_index.find(e.layer_class);
            if (c == class_index.end())
                throw ValidationError("cost table: unknown layer class '" + e.layer_class + "'");
            auto t = std::find(template_ids_.begin(), template_ids_.end(), e.template_id);
            if (t == template_ids_.end())
                throw ValidationError("cost table: unknown template '" + e.template_id + "'");
            auto& list = entries_[c->second][static_cast<std::size_t>(t - template_ids_.begin())];
            if (e.mapping_index >= list.size())
                throw ValidationError("cost table: mapping index " + std::to_string(e.mapping_index) + " out of range for " +
                                      e.layer_class + " on '" + e.template_id + "'");
            auto& entry = list[e.mapping_index];
            entry.energy_offset_pj = e.energy_pj - entry.cost.energy_pj;
            entry.energy_pj = e.energy_pj;
            entry.latency_cycles = e.latency_cycles;
            entry.dram_bytes = e.dram_bytes;
        }
    }

    void MappingCatalog::PinMinLatency()
    {
        for (auto& per_class : entries_)
            for (auto& list : per_class)
            {
                auto best = std::min_element(list.begin(), list.end(), [](const CatalogEntry& a, const CatalogEntry& b) {
                    return a.latency_cycles < b.latency_cycles;
                });
                CatalogEntry keep = *best;
                list.assign(1, keep);
            }
        BuildTransforms();
    }

    std::size_t MappingCatalog::TotalEntries() const
    {
        std::size_t n = 0;
        for (const auto& per_class : entries_)
            for (const auto& list : per_class) n += list.size();
        return n;
    }

    namespace
    {
        CatalogEntry MakeEntry(const LayerShape& shape, const SubAcceleratorTemplate& t, const Mapping& m,
                               const CostCoefficients& coeffs)
        {
            CatalogEntry e;
            e.mapping = m;
            e.cost = EvaluateMappingCost(shape, t, m, coeffs);
            e.area_mm2 = InstanceArea(t, e.cost.required, coeffs);
            e.latency_cycles = e.cost.latency_cycles;
            e.dram_bytes = e.cost.dram_bytes;
            e.energy_pj = e.cost.energy_pj;
            return e;
        }

        std::vector<CatalogEntry> ParetoMappings(const LayerShape& shape, const SubAcceleratorTemplate& t,
                                                 const CostCoefficients& coeffs, const CatalogOptions& options,
                                                 bool& truncated)
        {
            std::vector<CatalogEntry> all;
            std::vector<Objectives> points;
            truncated = EnumerateMapspace(shape, t, options.budget, [&](const Mapping& m) {
                all.push_back(MakeEntry(shape, t, m, coeffs));
                const auto& e = all.back();
                points.push_back({static_cast<double>(e.latency_cycles), e.energy_pj, e.area_mm2});
                return true;
            });

            auto front = ParetoFilter(points);
            std::stable_sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
                if (points[a][0] != points[b][0]) return points[a][0] < points[b][0];
                if (points[a][1] != points[b][1]) return points[a][1] < points[b][1];
                return a < b;
            });

            std::vector<Objectives> sorted;
            for (auto i : front) sorted.push_back(points[i]);
            std::vector<CatalogEntry> mf;
            for (auto k : CapParetoList(sorted, options.max_per_pair)) mf.push_back(std::move(all[front[k]]));
            return mf;
        }
    }

    MappingCatalog BuildCatalog(const ApplicationModel& am, const TemplateLibrary& templates,
                                const CostCoefficients& coeffs, const CatalogOptions& options)
    {
        auto classes = UniqueLayers(am);
        std::vector<std::string> ids;
        for (const auto& t : templates.All()) ids.push_back(t.Id());

        std::vector<std::vector<std::vector<CatalogEntry>>> entries(classes.size());
        std::vector<std::vector<bool>> truncated(classes.size(), std::vector<bool>(templates.Size(), false));
        for (std::size_t c = 0; c < classes.size(); c++)
        {
            entries[c].resize(templates.Size());
            for (std::size_t t = 0; t < templates.Size(); t++)
            {
                bool cut = false;
                entries[c][t] = ParetoMappings(classes[c].shape, templates[t], coeffs, options, cut);
                truncated[c][t] = cut;
            }
        }
        return MappingCatalog(std::move(classes), am.NumLayers(), std::move(ids), std::move(entries),
                              std::move(truncated));
    }

    nlohmann::json ExportCatalog(const MappingCatalog& catalog, const TemplateLibrary& templates)
    {
        nlohmann::json entries = nlohmann::json::array();
        for (std::size_t c = 0; c < catalog.NumClasses(); c++)
        {
            const auto key = catalog.Classes()[c].shape.Key();
            for (std::size_t t = 0; t < catalog.NumTemplates(); t++)
            {
                const auto& tmpl = templates[templates.IndexOf(catalog.TemplateIds()[t])];
                const auto& list = catalog.Entries(c, t);
                for (std::size_t i = 0; i < list.size(); i++)
                {
                    const auto& e = list[i];
                    nlohmann::json required = nlohmann::json::object();
                    for (std::size_t p = 0; p < tmpl.FreeParams().size(); p++)
                        required[tmpl.FreeParams()[p].name] = e.cost.required[p];
                    entries.push_back({{"layer_class", key},
                                       {"template", catalog.TemplateIds()[t]},
                                       {"mapping_index", i},
                                       {"latency_cycles", e.latency_cycles},
                                       {"energy_pj", e.energy_pj},
                                       {"dram_bytes", e.dram_bytes},
                                       {"mapping", ToJson(e.mapping)},
                                       {"required", required},
                                       {"truncated", catalog.Truncated(c, t)}});
                }
            }
        }
        return {{"entries", entries}};
    }

    MappingCatalog ImportCatalog(const nlohmann::json& document, const ApplicationModel& am,
                                 const TemplateLibrary& templates, const CostCoefficients& coeffs)
    {
        auto classes = UniqueLayers(am);
        std::map<std::string, std::size_t> class_index;
        for (std::size_t c = 0; c < classes.size(); c++) class_index[classes[c].shape.Key()] = c;

        if (!document.is_object() || !document.contains("entries") || !document.at("entries").is_array())
            throw SchemaError("catalog: expected an object with an 'entries' list");

        const CostTable table = ParseCostTable(document);
        std::vector<std::vector<std::map<std::size_t, CatalogEntry>>> grouped(
            classes.size(), std::vector<std::map<std::size_t, CatalogEntry>>(templates.Size()));
        std::vector<std::vector<bool>> truncated(classes.size(), std::vector<bool>(templates.Size(), false));

        for (const auto& je : document.at("entries"))
        {
            const auto cls_key = je.at("layer_class").get<std::string>();
            const auto tmpl_id = je.at("template").get<std::string>();
            auto c = class_index.find(cls_key);
            if (c == class_index.end())
                throw ValidationError("catalog: unknown layer class '" + cls_key + "'");
            auto t = templates.Find(tmpl_id);
            if (!t)
                throw ValidationError("catalog: unknown template '" + tmpl_id + "'");
            if (!je.contains("mapping"))
                throw SchemaError("catalog entry for " + cls_key + " on '" + tmpl_id + "' lacks a mapping descriptor");
            const auto index = je.at("mapping_index").get<std::size_t>();
            Mapping m = MappingFromJson(je.at("mapping"), classes[c->second].shape, tmpl_id);
            grouped[c->second][*t][index] = MakeEntry(classes[c->second].shape, templates[*t], m, coeffs);
            if (je.contains("truncated") && je.at("truncated").is_boolean() && je.at("truncated").get<bool>())
                truncated[c->second][*t] = true;
        }

        std::vector<std::string> ids;
        for (const auto& t : templates.All()) ids.push_back(t.Id());
        std::vector<std::vector<std::vector<CatalogEntry>>> entries(classes.size());
        for (std::size_t c = 0; c < classes.size(); c++)
        {
            entries[c].resize(templates.Size());
            for (std::size_t t = 0; t < templates.Size(); t++)
            {
                std::size_t expect = 0;
                for (auto& [index, e] : grouped[c][t])
                {
                    if (index != expect++)
                        throw ValidationError("catalog: mapping indices of " + classes[c].shape.Key() + " on '" + ids[t] +
                                              "' are not contiguous from 0");
                    entries[c][t].push_back(std::move(e));
                }
            }
        }
        MappingCatalog catalog(std::move(classes), am.NumLayers(), std::move(ids), std::move(entries),
                               std::move(truncated));
        catalog.ApplyCostTable(table);
        return catalog;
    }

    CostTable CatalogCostTable(const MappingCatalog& catalog)
    {
        CostTable table;
        for (std::size_t c = 0; c < catalog.NumClasses(); c++)
            for (std::size_t t = 0; t < catalog.NumTemplates(); t++)
            {
                const auto& list = catalog.Entries(c, t);
                for (std::size_t i = 0; i < list.size(); i++)
                {
                    CostTableEntry e;
                    e.layer_class = catalog.Classes()[c].shape.Key();
                    e.template_id = catalog.TemplateIds()[t];
                    e.mapping_index = i;
                    e.latency_cycles = list[i].latency_cycles;
                    e.energy_pj = list[i].energy_pj;
                    e.dram_bytes = list[i].dram_bytes;
                    table.emplace(CostTableKey{e.layer_class, e.template_id, i}, e);
                }
            }
        return table;
    }

} // namespace moham
