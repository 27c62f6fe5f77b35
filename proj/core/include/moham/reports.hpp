#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moham/pipeline.hpp"

namespace moham
{

    // Shortest text that reads back to the same double; "inf" for infinity.
    std::string FormatNumber(double v);

    // Columns: individual_id, latency_cycles, energy_pj, area_mm2, n_instances, templates_used.
    std::string ParetoCsv(const RunArtifacts& art);

    nlohmann::json ParetoJson(const RunArtifacts& art, const ApplicationModel& am);
    nlohmann::json ToJson(const GenerationStats& s);

    // Writes pareto.csv, pareto.json, gantt-<id>.json, area-<id>.json,
    // space_report.json and run_log.jsonl into `out_dir` (created if needed).
    // Throws IoError if a file cannot be written.
    void EmitReports(const RunArtifacts& art, const ApplicationModel& am, const std::string& out_dir);

    // Objective triples of a front saved as pareto.csv or pareto.json.
    // Throws SchemaError on unreadable or malformed files.
    std::vector<Objectives> LoadFront(const std::string& path);

    void WriteTextFile(const std::string& path, const std::string& text);

} // namespace moham
