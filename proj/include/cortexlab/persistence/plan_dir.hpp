#pragma once

#include <algorithm>
#include <filesystem>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "cortexlab/experiments/runner.hpp"
#include "cortexlab/experiments/summary.hpp"
#include "cortexlab/persistence/checkpoint.hpp"
#include "cortexlab/persistence/files.hpp"
#include "cortexlab/persistence/run_config.hpp"

namespace cortexlab::persistence {

// <dir>/plan.json, records/<cell>.json, checkpoints/<cell>.json,
// summary.csv, comparisons.csv, summary.txt
struct PlanDir {
    fs::path root;

    fs::path plan_file() const { return root / "plan.json"; }
    fs::path records() const { return root / "records"; }
    fs::path checkpoints() const { return root / "checkpoints"; }
    fs::path record_file(const experiments::PlanCell& c) const { return records() / (c.id() + ".json"); }
    fs::path checkpoint_file(const experiments::PlanCell& c) const { return checkpoints() / (c.id() + ".json"); }

    /// True when the directory already holds anything.
    bool occupied() const { return fs::exists(root) && !fs::is_empty(root); }
};

/// Checkpoint that belongs to a record file inside a plan directory.
inline fs::path checkpoint_for_record(const fs::path& record) {
    return record.parent_path().parent_path() / "checkpoints" / record.filename();
}

inline json plan_file_json(const experiments::ExperimentPlan& plan) {
    json j = plan.canonical();
    j["schema_version"] = experiments::kSchemaVersion;
    j["code_version"] = experiments::kCodeVersion;
    j["config_hash"] = plan.hash();
    return j;
}

inline experiments::ExperimentPlan plan_from_file(const json& j) {
    json body = j;
    for (const char* k : {"code_version", "config_hash"}) body.erase(k);
    auto plan = RunConfig::from_json(body).plan;
    if (j.contains("config_hash") && j.at("config_hash").get<std::string>() != plan.hash())
        throw ConfigError("plan.json: stored config hash does not match its content");
    return plan;
}

/// Runs the plan, writing each record and checkpoint as its cell finishes.
inline std::vector<experiments::RunRecord> run_into(const PlanDir& dir, const experiments::ExperimentPlan& plan,
                                                    unsigned workers, std::ostream* progress = nullptr) {
    plan.validate();
    write_json(dir.plan_file(), plan_file_json(plan));
    const std::size_t total = plan.cells().size();
    std::mutex mu;
    std::size_t done = 0;
    return experiments::run_plan(plan, workers, [&](const experiments::PlanCell& cell, const training::Trainer& tr,
                                                    const experiments::RunRecord& r) {
        write_json(dir.record_file(cell), experiments::record_to_json(r));
        write_json(dir.checkpoint_file(cell), checkpoint_to_json(tr.agent(), r.config_hash, cell.seed));
        if (progress) {
            std::lock_guard lock(mu);
            *progress << "[" << ++done << "/" << total << "] " << cell.id() << "  food/death " << r.metric << "  ("
                      << r.wall_seconds << " s)\n";
        }
    });
}

/// Records that do not belong together (other code version or config hash).
class StampError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct LoadedPlan {
    experiments::ExperimentPlan plan;
    std::vector<experiments::RunRecord> records;
    std::vector<experiments::PlanCell> missing;
};

/// Reads plan.json and whatever records exist. Refuses records stamped with
/// another code version or another config hash.
inline LoadedPlan load_plan_dir(const PlanDir& dir) {
    LoadedPlan out;
    out.plan = plan_from_file(read_json(dir.plan_file()));
    const std::string hash = out.plan.hash();
    std::set<std::string> versions;
    for (const auto& cell : out.plan.cells()) {
        const auto path = dir.record_file(cell);
        if (!fs::exists(path)) {
            out.missing.push_back(cell);
            continue;
        }
        auto r = experiments::record_from_json(read_json(path));
        if (r.config_hash != hash) throw StampError(path.string() + ": config hash " + r.config_hash + " != " + hash);
        versions.insert(r.code_version);
        out.records.push_back(std::move(r));
    }
    if (versions.size() > 1) {
        std::string list;
        for (const auto& v : versions) list += " " + v;
        throw StampError("records carry mixed code versions:" + list);
    }
    return out;
}

/// Writes summary.csv, comparisons.csv and summary.txt; returns the text table.
inline std::string write_summaries(const PlanDir& dir, const experiments::ExperimentPlan& plan,
                                   const std::vector<experiments::RunRecord>& records,
                                   const std::vector<experiments::PlanCell>& missing = {}) {
    auto s = experiments::summarize_records(records);
    experiments::add_gaps(s, plan);
    for (const auto& c : missing) s.warnings.push_back("missing record " + c.id());
    write_text(dir.root / "summary.csv", experiments::summary_csv(s));
    write_text(dir.root / "comparisons.csv", experiments::comparisons_csv(s));
    const auto text = "plan " + plan.hash() + " (" + experiments::kCodeVersion + ")\n" + experiments::summary_text(s);
    write_text(dir.root / "summary.txt", text);
    return text;
}

}  // namespace cortexlab::persistence
