#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "moham/arch.hpp"
#include "moham/costmodel.hpp"
#include "moham/layermapper.hpp"
#include "moham/workload.hpp"

namespace moham::testing
{

    inline nlohmann::json LayerJson(const std::string& id, const std::string& kind, int c, int k, int y, int x, int r,
                                    int s)
    {
        return {{"id", id}, {"kind", kind}, {"c", c}, {"k", k}, {"y", y}, {"x", x}, {"r", r}, {"s", s}};
    }

    // [[from, to], ...]; a braced list of string pairs would read as an object.
    inline nlohmann::json Deps(std::initializer_list<std::pair<const char*, const char*>> edges)
    {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [from, to] : edges) out.push_back(nlohmann::json::array({from, to}));
        return out;
    }

    // Three chained layers plus one independent layer in a second model.
    inline ApplicationModel TinyApplication()
    {
        nlohmann::json doc = nlohmann::json::array();
        doc.push_back({{"id", "chain"},
                       {"layers",
                        {LayerJson("a", "CONV", 2, 4, 4, 4, 3, 3), LayerJson("b", "CONV", 4, 4, 2, 2, 1, 1),
                         LayerJson("c", "FC", 16, 8, 1, 1, 1, 1)}},
                       {"deps", Deps({{"a", "b"}, {"b", "c"}})}});
        doc.push_back({{"id", "side"}, {"layers", {LayerJson("d", "DEPTHWISE", 4, 1, 4, 4, 3, 3)}}, {"deps", nlohmann::json::array()}});
        return ParseApplicationModel(doc);
    }

    inline TemplateLibrary TinyTemplates()
    {
        return BundledTemplates().Subset({"eyeriss", "simba"});
    }

    inline MappingCatalog TinyCatalog(const ApplicationModel& am, const TemplateLibrary& templates,
                                      const CostCoefficients& coeffs = {})
    {
        CatalogOptions opt;
        opt.max_per_pair = 4;
        return BuildCatalog(am, templates, coeffs, opt);
    }

    // Two models: a diamond and a chain, some shapes repeated.
    inline ApplicationModel DiamondApplication()
    {
        nlohmann::json doc = nlohmann::json::array();
        doc.push_back({{"id", "diamond"},
                       {"layers",
                        {LayerJson("p", "CONV", 2, 2, 4, 4, 3, 3), LayerJson("q", "CONV", 2, 4, 4, 4, 1, 1),
                         LayerJson("r", "CONV", 2, 4, 4, 4, 1, 1), LayerJson("s", "FC", 64, 4, 1, 1, 1, 1)}},
                       {"deps", Deps({{"p", "q"}, {"p", "r"}, {"q", "s"}, {"r", "s"}})}});
        doc.push_back({{"id", "line"},
                       {"layers", {LayerJson("u", "DEPTHWISE", 4, 1, 4, 4, 3, 3), LayerJson("v", "FC", 64, 4, 1, 1, 1, 1)}},
                       {"deps", Deps({{"u", "v"}})}});
        return ParseApplicationModel(doc);
    }

} // namespace moham::testing
