#include "moham/reports.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "moham/errors.hpp"

namespace moham
{

    std::string FormatNumber(double v)
    {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        if (std::isnan(v)) return "nan";
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

    namespace
    {
        std::string TemplatesUsed(const FrontMember& m, const TemplateLibrary& templates)
        {
            std::set<std::string> ids;
            for (const auto& inst : m.evaluation.system.instances) ids.insert(templates[inst.template_index].Id());
            std::string out;
            for (const auto& id : ids)
            {
                if (!out.empty()) out += ';';
                out += id;
            }
            return out;
        }
    }

    std::string ParetoCsv(const RunArtifacts& art)
    {
        std::ostringstream out;
        out << "individual_id,latency_cycles,energy_pj,area_mm2,n_instances,templates_used\n";
        for (std::size_t i = 0; i < art.front.size(); i++)
        {
            const auto& m = art.front[i];
            const auto& o = m.evaluation.objectives;
            out << i << ',' << FormatNumber(o[0]) << ',' << FormatNumber(o[1]) << ',' << FormatNumber(o[2]) << ','
                << m.chromosome.hardware.size() << ',' << TemplatesUsed(m, art.templates) << '\n';
        }
        return out.str();
    }

    nlohmann::json ParetoJson(const RunArtifacts& art, const ApplicationModel& am)
    {
        nlohmann::json front = nlohmann::json::array();
        for (std::size_t i = 0; i < art.front.size(); i++)
        {
            const auto& m = art.front[i];
            const auto& ev = m.evaluation;
            nlohmann::json instances = nlohmann::json::array();
            for (std::size_t p = 0; p < ev.system.instances.size(); p++)
            {
                const auto& inst = ev.system.instances[p];
                const auto& t = art.templates[inst.template_index];
                nlohmann::json params = nlohmann::json::object();
                for (std::size_t k = 0; k < t.FreeParams().size(); k++) params[t.FreeParams()[k].name] = inst.params[k];
                instances.push_back({{"instance", inst.instance_id},
                                     {"template", t.Id()},
                                     {"position", p},
                                     {"tile", {{"row", ev.placements[p].tile.row}, {"col", ev.placements[p].tile.col}}},
                                     {"mi", ev.placements[p].mi},
                                     {"hops", ev.placements[p].hops},
                                     {"params", params},
                                     {"area_mm2", ev.area_breakdown[p]}});
            }
            nlohmann::json layers = nlohmann::json::array();
            for (const auto& g : m.chromosome.software)
            {
                const auto& entry =
                    art.catalog.ForLayer(g.layer, m.chromosome.TemplateOf(g.instance)).at(g.mapping);
                layers.push_back({{"layer", am.GetLayer(g.layer).name},
                                  {"model", am.Models()[am.GetLayer(g.layer).model].id},
                                  {"instance", g.instance},
                                  {"mapping_index", g.mapping},
                                  {"mapping", ToJson(entry.mapping)},
                                  {"latency_cycles", entry.latency_cycles},
                                  {"dram_bytes", entry.dram_bytes}});
            }
            front.push_back({{"individual_id", i},
                             {"latency_cycles", ev.objectives[0]},
                             {"energy_pj", ev.objectives[1]},
                             {"area_mm2", ev.objectives[2]},
                             {"compute_energy_pj", ev.compute_energy_pj},
                             {"nop_energy_pj", ev.nop_energy_pj},
                             {"instances", instances},
                             {"layers", layers},
                             {"schedule", GanttJson(ev, m.chromosome, am, art.templates)},
                             {"chromosome", ToJson(m.chromosome)}});
        }
        nlohmann::json mesh = {{"rows", art.mesh.rows},
                               {"cols", art.mesh.cols},
                               {"mi_bandwidth", art.mesh.mi_bandwidth},
                               {"mi_tiles", nlohmann::json::array()}};
        for (const auto& t : art.mesh.mi_tiles) mesh["mi_tiles"].push_back({{"row", t.row}, {"col", t.col}});
        return {{"mode", ToString(art.config.mode)},
                {"seed", art.config.seed},
                {"generations_run", art.generations_run},
                {"converged_by_density", art.converged_by_density},
                {"mesh", mesh},
                {"front", front}};
    }

    nlohmann::json ToJson(const GenerationStats& s)
    {
        auto num = [](double v) -> nlohmann::json {
            if (!std::isfinite(v)) return nullptr;
            return v;
        };
        return {{"generation", s.generation},
                {"front0_size", s.front0_size},
                {"front0_fraction", s.front0_fraction},
                {"feasible", s.feasible},
                {"best_latency_cycles", num(s.best[0])},
                {"best_energy_pj", num(s.best[1])},
                {"best_area_mm2", num(s.best[2])},
                {"hypervolume_proxy", s.hypervolume_proxy}};
    }

    void WriteTextFile(const std::string& path, const std::string& text)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("cannot write '" + path + "'");
        out << text;
        if (!out)
            throw IoError("failed writing '" + path + "'");
    }

    void EmitReports(const RunArtifacts& art, const ApplicationModel& am, const std::string& out_dir)
    {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec || !fs::is_directory(out_dir))
            throw IoError("cannot create output directory '" + out_dir + "'");
        const fs::path dir(out_dir);

        WriteTextFile((dir / "pareto.csv").string(), ParetoCsv(art));
        WriteTextFile((dir / "pareto.json").string(), ParetoJson(art, am).dump(2) + "\n");
        for (std::size_t i = 0; i < art.front.size(); i++)
        {
            const auto& m = art.front[i];
            const auto id = std::to_string(i);
            WriteTextFile((dir / ("gantt-" + id + ".json")).string(),
                          GanttJson(m.evaluation, m.chromosome, am, art.templates).dump(2) + "\n");
            WriteTextFile((dir / ("area-" + id + ".json")).string(), AreaJson(m.evaluation, art.templates).dump(2) + "\n");
        }
        WriteTextFile((dir / "space_report.json").string(), ToJson(art.space).dump(2) + "\n");
        std::string log;
        for (const auto& s : art.log) log += ToJson(s).dump() + "\n";
        WriteTextFile((dir / "run_log.jsonl").string(), log);
    }

    std::vector<Objectives> LoadFront(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw SchemaError("cannot open front file '" + path + "'");
        std::vector<Objectives> front;

        if (std::filesystem::path(path).extension() == ".json")
        {
            nlohmann::json doc;
            try {
                in >> doc;
            } catch (const nlohmann::json::parse_error& e) {
                throw SchemaError("front file '" + path + "': " + e.what());
            }
            const nlohmann::json* list = &doc;
            if (doc.is_object() && doc.contains("front")) list = &doc.at("front");
            if (!list->is_array())
                throw SchemaError("front file '" + path + "' has no front list");
            for (const auto& e : *list)
            {
                for (const char* f : {"latency_cycles", "energy_pj", "area_mm2"})
                    if (!e.contains(f) || !e.at(f).is_number())
                        throw SchemaError("front file '" + path + "': member lacks numeric '" + f + "'");
                front.push_back({e.at("latency_cycles").get<double>(), e.at("energy_pj").get<double>(),
                                 e.at("area_mm2").get<double>()});
            }
            return front;
        }

        std::string line;
        if (!std::getline(in, line))
            throw SchemaError("front file '" + path + "' is empty");
        std::vector<std::string> header;
        {
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) header.push_back(cell);
        }
        auto column = [&](const std::string& name) {
            for (std::size_t i = 0; i < header.size(); i++)
                if (header[i] == name) return i;
            throw SchemaError("front file '" + path + "' lacks column '" + name + "'");
        };
        const std::size_t cl = column("latency_cycles"), ce = column("energy_pj"), ca = column("area_mm2");
        while (std::getline(in, line))
        {
            if (line.empty()) continue;
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (cells.size() < header.size())
                throw SchemaError("front file '" + path + "': short row");
            try {
                front.push_back({std::stod(cells[cl]), std::stod(cells[ce]), std::stod(cells[ca])});
            } catch (const std::exception&) {
                throw SchemaError("front file '" + path + "': non-numeric objective");
            }
        }
        return front;
    }

} // namespace moham
