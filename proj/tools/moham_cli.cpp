#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "moham/errors.hpp"
#include "moham/pipeline.hpp"
#include "moham/reports.hpp"

namespace fs = std::filesystem;

namespace
{
    struct Inputs
    {
        std::string workload;
        std::string templates;
        std::string coeffs;
        std::string nop;
        std::string cost_table;
        std::string catalog;
        std::string fixed_hardware;
    };

    nlohmann::json ReadJson(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw moham::SchemaError("cannot open '" + path + "'");
        try {
            return nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw moham::SchemaError("'" + path + "': " + e.what());
        }
    }

    moham::TemplateLibrary LoadTemplates(const std::string& path)
    {
        return path.empty() ? moham::BundledTemplates() : moham::LoadTemplateLibrary(path);
    }

    moham::RunInputs LoadInputs(const Inputs& in)
    {
        moham::RunInputs r{moham::LoadApplicationModel(in.workload), LoadTemplates(in.templates),
                           in.coeffs.empty() ? moham::CostCoefficients{} : moham::LoadCostCoefficients(in.coeffs),
                           in.nop.empty() ? moham::NopConfig{} : moham::LoadNopConfig(in.nop),
                           std::nullopt, std::nullopt};
        if (!in.cost_table.empty()) r.cost_table = moham::LoadCostTable(in.cost_table);
        if (!in.catalog.empty()) r.catalog = ReadJson(in.catalog);
        return r;
    }

    void AddInputFlags(CLI::App* cmd, Inputs& in, bool workload_required)
    {
        auto* w = cmd->add_option("--workload", in.workload, "Workload file (JSON)")->check(CLI::ExistingFile);
        if (workload_required) w->required();
        cmd->add_option("--templates", in.templates, "Template library (default: bundled presets)")
            ->check(CLI::ExistingFile);
        cmd->add_option("--coeffs", in.coeffs, "Cost coefficients (default: built-in)")->check(CLI::ExistingFile);
    }

    int ErrorExit(const std::string& kind, const std::string& message, int code)
    {
        nlohmann::json e = {{"error", {{"type", kind}, {"message", message}}}};
        std::cerr << e.dump() << std::endl;
        return code;
    }

    void WriteJson(const fs::path& path, const nlohmann::json& doc)
    {
        moham::WriteTextFile(path.string(), doc.dump(2) + "\n");
    }
}

int main(int argc, char** argv)
{
    CLI::App app{"Multi-accelerator hardware, mapping and schedule co-optimisation"};
    app.require_subcommand(1);

    Inputs in;
    moham::RunConfig cfg;
    std::string mode = "co_opt";
    std::string ablate;
    std::string out_dir = "moham-out";
    bool fixed_generations = false;
    bool keep_clones = false;

    auto* run = app.add_subcommand("run", "Search for Pareto-optimal multi-accelerator systems");
    AddInputFlags(run, in, true);
    run->add_option("--nop", in.nop, "Network-on-package config (default: built-in)")->check(CLI::ExistingFile);
    run->add_option("--mode", mode, "co_opt | hardware_only | mapping_only | mono_latency | mono_energy | ablation")
        ->capture_default_str();
    run->add_option("--seed", cfg.seed)->capture_default_str();
    run->add_option("--generations", cfg.generations)->capture_default_str();
    run->add_option("--population", cfg.population)->capture_default_str();
    run->add_option("--max-instances", cfg.max_instances)->capture_default_str();
    run->add_option("--budget", cfg.catalog.budget, "Mappings enumerated per layer/template pair")
        ->capture_default_str();
    run->add_option("--max-mappings", cfg.catalog.max_per_pair, "Cap on each Pareto mapping set (0 = none)")
        ->capture_default_str();
    run->add_option("--ablate", ablate, "Operator whose probability is forced to 0");
    run->add_option("--template-family", cfg.template_family, "Template used by hardware_only")
        ->capture_default_str();
    run->add_option("--fixed-hardware", in.fixed_hardware, "Instance set used by mapping_only")
        ->check(CLI::ExistingFile);
    run->add_option("--cost-table", in.cost_table, "External per-mapping cost table")->check(CLI::ExistingFile);
    run->add_option("--catalog", in.catalog, "Previously exported mapping catalog")->check(CLI::ExistingFile);
    run->add_option("--density-threshold", cfg.convergence.density_threshold)->capture_default_str();
    run->add_option("--density-window", cfg.convergence.window)->capture_default_str();
    run->add_flag("--fixed-generations", fixed_generations, "Always run the full generation count");
    run->add_flag("--keep-clones", keep_clones, "Evaluate offspring identical to known genomes instead of redrawing");
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    for (moham::Operator op : moham::kOperatorOrder)
    {
        std::string flag = "--p-" + moham::OperatorName(op);
        std::replace(flag.begin(), flag.end(), '_', '-');
        run->add_option(flag, cfg.probabilities[op], "Probability of " + moham::OperatorName(op))
            ->capture_default_str();
    }

    std::string front_a, front_b;
    auto* compare = app.add_subcommand("compare", "Fraction of front B dominated by front A");
    compare->add_option("front_a", front_a)->required()->check(CLI::ExistingFile);
    compare->add_option("front_b", front_b)->required()->check(CLI::ExistingFile);

    auto* space = app.add_subcommand("space", "Search-space size report");
    AddInputFlags(space, in, true);
    space->add_option("--max-instances", cfg.max_instances)->capture_default_str();

    std::string catalog_out = "catalog.json";
    auto* catalog = app.add_subcommand("catalog", "Build and export the Pareto mapping catalog");
    AddInputFlags(catalog, in, true);
    catalog->add_option("--budget", cfg.catalog.budget)->capture_default_str();
    catalog->add_option("--max-mappings", cfg.catalog.max_per_pair)->capture_default_str();
    catalog->add_option("--out", catalog_out)->capture_default_str();

    auto* presets = app.add_subcommand("presets", "Write the bundled templates and default configs");
    presets->add_option("--out", out_dir)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return ErrorExit("usage", e.what(), 2);
    }

    try {
        if (*run)
        {
            cfg.mode = moham::RunModeFromString(mode);
            if (!ablate.empty()) cfg.ablated = moham::OperatorFromName(ablate);
            if (fixed_generations) cfg.convergence.use_density = false;
            if (keep_clones) cfg.eliminate_duplicates = false;
            auto inputs = LoadInputs(in);
            if (!in.fixed_hardware.empty())
                cfg.fixed_hardware = moham::LoadFixedHardware(in.fixed_hardware, inputs.templates);

            const auto art = moham::RunMoham(inputs, cfg);
            moham::EmitReports(art, inputs.am, out_dir);
            nlohmann::json summary = {{"front_size", art.front.size()},
                                      {"generations_run", art.generations_run},
                                      {"out", out_dir}};

            if (cfg.mode == moham::RunMode::Ablation)
            {
                auto base_cfg = cfg;
                base_cfg.mode = moham::RunMode::CoOpt;
                base_cfg.ablated.reset();
                const auto base = moham::RunMoham(inputs, base_cfg);
                const auto base_dir = (fs::path(out_dir) / "baseline").string();
                moham::EmitReports(base, inputs.am, base_dir);
                std::vector<moham::Objectives> a, b;
                for (const auto& m : base.front) a.push_back(m.evaluation.objectives);
                for (const auto& m : art.front) b.push_back(m.evaluation.objectives);
                nlohmann::json ablation = {{"ablated_operator", ablate},
                                           {"seed", cfg.seed},
                                           {"baseline_front_size", a.size()},
                                           {"ablated_front_size", b.size()},
                                           {"dominated_fraction", moham::CompareFronts(a, b)}};
                WriteJson(fs::path(out_dir) / "ablation.json", ablation);
                summary["ablation"] = ablation;
            }
            std::cout << summary.dump() << std::endl;
        }
        else if (*compare)
        {
            const auto a = moham::LoadFront(front_a);
            const auto b = moham::LoadFront(front_b);
            nlohmann::json result = {{"front_a", front_a},
                                     {"front_b", front_b},
                                     {"dominated_fraction", moham::CompareFronts(a, b)}};
            std::cout << result.dump() << std::endl;
        }
        else if (*space)
        {
            const auto am = moham::LoadApplicationModel(in.workload);
            const auto report = moham::WorkloadSearchSpace(am, LoadTemplates(in.templates), cfg.max_instances);
            std::cout << moham::ToJson(report).dump(2) << std::endl;
        }
        else if (*catalog)
        {
            const auto am = moham::LoadApplicationModel(in.workload);
            const auto templates = LoadTemplates(in.templates);
            const auto coeffs = in.coeffs.empty() ? moham::CostCoefficients{} : moham::LoadCostCoefficients(in.coeffs);
            const auto cat = moham::BuildCatalog(am, templates, coeffs, cfg.catalog);
            WriteJson(catalog_out, moham::ExportCatalog(cat, templates));
            std::cout << nlohmann::json{{"entries", cat.TotalEntries()}, {"out", catalog_out}}.dump() << std::endl;
        }
        else if (*presets)
        {
            std::error_code ec;
            fs::create_directories(out_dir, ec);
            if (ec)
                throw moham::IoError("cannot create output directory '" + out_dir + "'");
            WriteJson(fs::path(out_dir) / "templates.json", moham::ToJson(moham::BundledTemplates()));
            WriteJson(fs::path(out_dir) / "coeffs.json", moham::ToJson(moham::CostCoefficients{}));
            WriteJson(fs::path(out_dir) / "nop.json", moham::ToJson(moham::NopConfig{}));
        }
    } catch (const moham::SchemaError& e) {
        return ErrorExit("schema", e.what(), 3);
    } catch (const moham::ValidationError& e) {
        return ErrorExit("validation", e.what(), 3);
    } catch (const moham::SearchError& e) {
        return ErrorExit("search", e.what(), 4);
    } catch (const moham::IoError& e) {
        return ErrorExit("io", e.what(), 5);
    } catch (const std::exception& e) {
        return ErrorExit("internal", e.what(), 1);
    }
    return 0;
}
