#include "moham/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "moham/errors.hpp"

namespace moham
{

    void NopConfig::Validate() const
    {
        if (num_mi == 0)
            throw ValidationError("NoP needs at least one memory interface");
        if (!(mi_bandwidth > 0.0))
            throw ValidationError("memory interface bandwidth must be positive");
        if (!(link_energy_pj_per_bit >= 0.0) || !std::isfinite(link_energy_pj_per_bit))
            throw ValidationError("link energy must be finite and non-negative");
        if (!(chiplet_peak_bandwidth > 0.0))
            throw ValidationError("chiplet peak bandwidth must be positive");
    }

    NopConfig ParseNopConfig(const nlohmann::json& j)
    {
        if (!j.is_object())
            throw SchemaError("NoP config must be an object");
        NopConfig cfg;
        auto count = [&](const char* field, std::size_t& out) {
            if (!j.contains(field)) return;
            const auto& v = j.at(field);
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
                throw SchemaError(std::string("NoP field '") + field + "' must be a non-negative integer");
            out = v.get<std::size_t>();
        };
        auto number = [&](const char* field, double& out) {
            if (!j.contains(field)) return;
            const auto& v = j.at(field);
            if (v.is_string() && v.get<std::string>() == "inf")
                out = std::numeric_limits<double>::infinity();
            else if (v.is_number())
                out = v.get<double>();
            else
                throw SchemaError(std::string("NoP field '") + field + "' must be a number");
        };
        count("rows", cfg.rows);
        count("cols", cfg.cols);
        count("num_mi", cfg.num_mi);
        number("mi_bandwidth", cfg.mi_bandwidth);
        number("link_energy_pj_per_bit", cfg.link_energy_pj_per_bit);
        number("chiplet_peak_bandwidth", cfg.chiplet_peak_bandwidth);
        cfg.Validate();
        return cfg;
    }

    NopConfig LoadNopConfig(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw SchemaError("cannot open NoP config '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("NoP config '" + path + "': " + e.what());
        }
        return ParseNopConfig(doc);
    }

    nlohmann::json ToJson(const NopConfig& cfg)
    {
        auto number = [](double v) -> nlohmann::json {
            if (std::isinf(v)) return "inf";
            return v;
        };
        return {{"rows", cfg.rows},
                {"cols", cfg.cols},
                {"num_mi", cfg.num_mi},
                {"mi_bandwidth", number(cfg.mi_bandwidth)},
                {"link_energy_pj_per_bit", cfg.link_energy_pj_per_bit},
                {"chiplet_peak_bandwidth", number(cfg.chiplet_peak_bandwidth)}};
    }

    std::size_t Manhattan(const Tile& a, const Tile& b)
    {
        auto diff = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
        return diff(a.row, b.row) + diff(a.col, b.col);
    }

    std::vector<Tile> MeshNoP::InstanceTiles() const
    {
        std::vector<Tile> tiles;
        for (std::size_t r = 0; r < rows; r++)
            for (std::size_t c = 0; c < cols; c++)
            {
                Tile t{r, c};
                if (std::find(mi_tiles.begin(), mi_tiles.end(), t) == mi_tiles.end()) tiles.push_back(t);
            }
        return tiles;
    }

    MeshNoP BuildMesh(const NopConfig& cfg, std::size_t max_instances)
    {
        cfg.Validate();
        if (max_instances == 0)
            throw ValidationError("mesh must host at least one instance");
        std::size_t side = 1;
        while (side * side < max_instances) side++;

        MeshNoP mesh;
        mesh.rows = cfg.rows ? cfg.rows : std::max(side, cfg.num_mi);
        mesh.cols = cfg.cols ? cfg.cols : side + 1;
        if (cfg.num_mi > mesh.rows)
            throw ValidationError("mesh has " + std::to_string(mesh.rows) + " rows for " + std::to_string(cfg.num_mi) +
                                  " memory interfaces");
        for (std::size_t i = 0; i < cfg.num_mi; i++)
            mesh.mi_tiles.push_back({(2 * i + 1) * mesh.rows / (2 * cfg.num_mi), 0});
        if (mesh.rows * mesh.cols - cfg.num_mi < max_instances)
            throw ValidationError("a " + std::to_string(mesh.rows) + "x" + std::to_string(mesh.cols) +
                                  " mesh cannot host " + std::to_string(max_instances) + " instances");
        mesh.mi_bandwidth = cfg.mi_bandwidth;
        mesh.link_energy_pj_per_bit = cfg.link_energy_pj_per_bit;
        mesh.chiplet_peak_bandwidth = cfg.chiplet_peak_bandwidth;
        return mesh;
    }

    std::vector<Placement> PlaceAndAssignMi(std::size_t num_instances, const MeshNoP& mesh)
    {
        if (mesh.mi_tiles.empty())
            throw ValidationError("mesh has no memory interface");
        const auto tiles = mesh.InstanceTiles();
        if (num_instances > tiles.size())
            throw ValidationError("mesh has " + std::to_string(tiles.size()) + " instance tiles for " +
                                  std::to_string(num_instances) + " instances");
        std::vector<Placement> out;
        for (std::size_t p = 0; p < num_instances; p++)
        {
            Placement pl;
            pl.tile = tiles[p];
            pl.hops = Manhattan(pl.tile, mesh.mi_tiles[0]);
            for (std::size_t m = 1; m < mesh.mi_tiles.size(); m++)
            {
                const auto h = Manhattan(pl.tile, mesh.mi_tiles[m]);
                if (h < pl.hops)
                {
                    pl.hops = h;
                    pl.mi = m;
                }
            }
            out.push_back(pl);
        }
        return out;
    }

    ScheduleResult SimulateSchedule(const ApplicationModel& am, std::span<const LayerTask> tasks, const MeshNoP& mesh)
    {
        const std::size_t n = tasks.size();
        ScheduleResult result;
        result.layers.resize(n);

        // Constraint predecessors: model dependencies plus the previous task on the same instance.
        std::vector<std::size_t> task_of(am.NumLayers(), n);
        for (std::size_t i = 0; i < n; i++) task_of.at(tasks[i].layer) = i;
        std::vector<std::vector<std::size_t>> waiters(n);
        std::vector<std::size_t> pending(n, 0);
        std::vector<std::size_t> last_on(n + 1, n);
        std::size_t max_position = 0;
        for (const auto& t : tasks) max_position = std::max(max_position, t.position);
        last_on.assign(max_position + 1, n);
        for (std::size_t i = 0; i < n; i++)
        {
            std::vector<std::size_t> preds;
            for (LayerId p : am.Predecessors(tasks[i].layer))
            {
                const auto pi = task_of.at(p);
                if (pi >= i)
                    throw ValidationError("task order is not topological at layer " + std::to_string(tasks[i].layer));
                preds.push_back(pi);
            }
            if (last_on[tasks[i].position] != n) preds.push_back(last_on[tasks[i].position]);
            last_on[tasks[i].position] = i;
            std::sort(preds.begin(), preds.end());
            preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
            pending[i] = preds.size();
            for (auto p : preds) waiters[p].push_back(i);
        }

        std::vector<double> work(n), demand(n);
        for (std::size_t i = 0; i < n; i++)
        {
            const auto& t = tasks[i];
            double nominal = static_cast<double>(std::max<std::int64_t>(t.latency_cycles, 1));
            if (std::isfinite(mesh.chiplet_peak_bandwidth))
                nominal = std::max(nominal, std::ceil(static_cast<double>(t.dram_bytes) / mesh.chiplet_peak_bandwidth));
            work[i] = nominal;
            demand[i] = static_cast<double>(t.dram_bytes) / nominal;
            auto& lt = result.layers[i];
            lt.layer = t.layer;
            lt.position = t.position;
            lt.nominal_cycles = nominal;
            lt.demand = demand[i];
        }

        const std::size_t num_mi = std::max<std::size_t>(mesh.mi_tiles.size(), 1);
        std::vector<std::size_t> active;
        std::vector<double> rate(n, 1.0);
        std::vector<std::vector<ScheduledSegment>> pieces(n);
        std::size_t finished = 0;
        double now = 0.0;

        auto start = [&](std::size_t i) {
            result.layers[i].start = now;
            active.push_back(i);
        };
        for (std::size_t i = 0; i < n; i++)
            if (pending[i] == 0) start(i);

        while (finished < n)
        {
            if (active.empty())
                throw ValidationError("schedule deadlock: no runnable layer");

            std::vector<double> load(num_mi, 0.0);
            for (auto i : active)
                if (demand[i] > 0.0) load[tasks[i].mi] += demand[i];
            for (auto i : active)
            {
                const double l = load[tasks[i].mi];
                rate[i] = (demand[i] > 0.0 && l > mesh.mi_bandwidth) ? mesh.mi_bandwidth / l : 1.0;
            }

            double step = std::numeric_limits<double>::infinity();
            for (auto i : active) step = std::min(step, work[i] / rate[i]);
            const double next = now + step;

            std::vector<std::size_t> done, still;
            for (auto i : active)
            {
                const double need = work[i] / rate[i];
                auto& segs = pieces[i];
                const double drawn = demand[i] * rate[i];
                const bool dilated = rate[i] < 1.0;
                if (!segs.empty() && segs.back().end == now && segs.back().dilated == dilated &&
                    segs.back().demand == drawn)
                    segs.back().end = next;
                else
                    segs.push_back({tasks[i].layer, tasks[i].position, tasks[i].mi, now, next, drawn, dilated});

                if (need <= step * (1.0 + 1e-12))
                {
                    work[i] = 0.0;
                    done.push_back(i);
                }
                else
                {
                    work[i] -= rate[i] * step;
                    still.push_back(i);
                }
            }
            now = next;
            active = std::move(still);
            std::sort(done.begin(), done.end());
            for (auto i : done)
            {
                result.layers[i].end = now;
                finished++;
            }
            std::vector<std::size_t> ready;
            for (auto i : done)
                for (auto w : waiters[i])
                    if (--pending[w] == 0) ready.push_back(w);
            std::sort(ready.begin(), ready.end());
            for (auto w : ready) start(w);
        }

        for (std::size_t i = 0; i < n; i++)
        {
            auto& lt = result.layers[i];
            for (const auto& s : pieces[i])
            {
                lt.dilated = lt.dilated || s.dilated;
                result.segments.push_back(s);
            }
            result.latency = std::max(result.latency, lt.end);
        }
        std::stable_sort(result.segments.begin(), result.segments.end(),
                         [](const ScheduledSegment& a, const ScheduledSegment& b) { return a.start < b.start; });
        return result;
    }

    std::vector<double> GeneEnergies(const Chromosome& c, const DecodedSystem& sys, const EvaluationContext& ctx)
    {
        const auto& catalog = *ctx.scheduler->catalog;
        std::vector<double> energies;
        for (const auto& g : c.software)
        {
            const auto p = c.PositionOf(g.instance).value();
            const auto& inst = sys.instances[p];
            const auto& t = (*ctx.templates)[inst.template_index];
            const auto& entry = catalog.ForLayer(g.layer, inst.template_index).at(g.mapping);
            energies.push_back(EnergyAtCapacity(t, entry.cost, inst.params, *ctx.coeffs) + entry.energy_offset_pj);
        }
        return energies;
    }

    EvaluationResult Evaluate(const Chromosome& c, const EvaluationContext& ctx)
    {
        EvaluationResult r;
        r.system = Decode(c, *ctx.scheduler, *ctx.templates, ctx.fixed_params);
        if (!r.system.feasible)
        {
            r.feasible = false;
            r.infeasible_reason = r.system.infeasible_reason;
            r.objectives = {kInfeasible, kInfeasible, kInfeasible};
            return r;
        }

        const auto& mesh = *ctx.mesh;
        r.placements = PlaceAndAssignMi(c.hardware.size(), mesh);

        const auto& catalog = *ctx.scheduler->catalog;
        std::vector<LayerTask> tasks;
        tasks.reserve(c.software.size());
        for (const auto& g : c.software)
        {
            const auto p = c.PositionOf(g.instance).value();
            const auto& entry = catalog.ForLayer(g.layer, c.hardware[p].template_index).at(g.mapping);
            tasks.push_back({g.layer, p, r.placements[p].mi, entry.latency_cycles, entry.dram_bytes});
        }
        r.schedule = SimulateSchedule(*ctx.scheduler->am, tasks, mesh);

        // Summed in layer order so equal designs in different genome orders
        // give bit-identical energies.
        const auto energies = GeneEnergies(c, r.system, ctx);
        std::vector<double> compute(tasks.size()), nop(tasks.size());
        for (std::size_t i = 0; i < tasks.size(); i++)
        {
            compute[tasks[i].layer] = energies[i];
            nop[tasks[i].layer] = static_cast<double>(tasks[i].dram_bytes) * 8.0 * mesh.link_energy_pj_per_bit *
                                  static_cast<double>(r.placements[tasks[i].position].hops);
        }
        for (std::size_t l = 0; l < tasks.size(); l++)
        {
            r.compute_energy_pj += compute[l];
            r.nop_energy_pj += nop[l];
        }

        double area = 0.0;
        for (const auto& inst : r.system.instances)
        {
            const double a = InstanceArea((*ctx.templates)[inst.template_index], inst.params, *ctx.coeffs);
            r.area_breakdown.push_back(a);
            area += a;
        }
        r.objectives = {r.schedule.latency, r.compute_energy_pj + r.nop_energy_pj, area};
        return r;
    }

    nlohmann::json GanttJson(const EvaluationResult& r, const Chromosome& c, const ApplicationModel& am,
                             const TemplateLibrary& templates)
    {
        std::vector<std::size_t> order(r.schedule.layers.size());
        for (std::size_t i = 0; i < order.size(); i++) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return r.schedule.layers[a].start < r.schedule.layers[b].start;
        });

        nlohmann::json out = nlohmann::json::array();
        for (auto i : order)
        {
            const auto& lt = r.schedule.layers[i];
            const auto& layer = am.GetLayer(lt.layer);
            const auto& hw = c.hardware[lt.position];
            nlohmann::json segments = nlohmann::json::array();
            for (const auto& s : r.schedule.segments)
                if (s.layer == lt.layer)
                    segments.push_back({{"start", s.start}, {"end", s.end}, {"demand", s.demand}, {"dilated", s.dilated}});
            out.push_back({{"layer", layer.name},
                           {"model", am.Models()[layer.model].id},
                           {"instance", hw.instance},
                           {"template", templates[hw.template_index].Id()},
                           {"mi", r.placements[lt.position].mi},
                           {"start", lt.start},
                           {"end", lt.end},
                           {"dilated", lt.dilated},
                           {"segments", segments}});
        }
        return out;
    }

    nlohmann::json AreaJson(const EvaluationResult& r, const TemplateLibrary& templates)
    {
        nlohmann::json out = nlohmann::json::array();
        for (std::size_t p = 0; p < r.system.instances.size(); p++)
        {
            const auto& inst = r.system.instances[p];
            out.push_back({{"instance", inst.instance_id},
                           {"template", templates[inst.template_index].Id()},
                           {"area_mm2", r.area_breakdown.at(p)}});
        }
        return out;
    }

} // namespace moham
