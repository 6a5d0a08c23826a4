#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "cortexlab/diagnostics/report.hpp"
#include "cortexlab/persistence/plan_dir.hpp"

using namespace cortexlab;
namespace fs = std::filesystem;
using persistence::PlanDir;

namespace {

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kBadInput = 2,
    kOutputExists = 3,
    kNoTelemetry = 4,
    kMixedStamps = 5,
};

struct TrainFlags {
    std::string config;
    std::string conditions;
    std::string envs = "std1d";
    long steps = 10000;
    std::string seeds = "0-19";
    std::string out;
    unsigned workers = 1;
    bool force = false;
};

struct DiagnoseFlags {
    std::string record;
    std::string checkpoint;
    std::string out;
    bool sensitivity = false;
    bool synthetic = false;
    long probe_steps = 1000;
    long probe_every = 100;
};

persistence::RunConfig config_from_flags(const TrainFlags& f, const CLI::App& cmd) {
    persistence::RunConfig rc;
    if (!f.config.empty()) {
        rc = persistence::RunConfig::from_json(persistence::read_json(f.config));
        if (cmd.count("--workers")) rc.workers = f.workers;
        if (cmd.count("--out")) rc.out = f.out;
        return rc;
    }
    if (f.conditions.empty()) throw ConfigError("either --config or --condition is required");
    for (const auto& n : persistence::split(f.conditions, ','))
        rc.plan.conditions.push_back(persistence::condition_from_name(n));
    rc.plan.variants.clear();
    for (const auto& n : persistence::split(f.envs, ',')) rc.plan.variants.push_back(persistence::variant_from_name(n));
    rc.plan.steps = f.steps;
    rc.plan.seeds = persistence::parse_seed_list(f.seeds);
    if (!f.out.empty()) rc.out = f.out;
    rc.workers = f.workers;
    rc.plan.validate();
    return rc;
}

int train(const TrainFlags& f, const CLI::App& cmd) {
    const auto rc = config_from_flags(f, cmd);
    const PlanDir dir{persistence::resolve_out_dir(rc.out)};
    if (dir.occupied()) {
        if (!f.force) {
            std::cerr << "error: output directory " << dir.root << " is not empty (use --force to overwrite)\n";
            return kOutputExists;
        }
        for (const auto& p : {dir.records(), dir.checkpoints()}) fs::remove_all(p);
    }
    std::cerr << "plan " << rc.plan.hash() << ": " << rc.plan.cells().size() << " cells -> " << dir.root << "\n";
    const auto records = persistence::run_into(dir, rc.plan, rc.workers, &std::cerr);
    std::cout << persistence::write_summaries(dir, rc.plan, records);
    return kOk;
}

int diagnose(const DiagnoseFlags& f) {
    const fs::path record_path = f.record;
    const auto j = persistence::read_json(record_path);
    try {
        (void)experiments::telemetry_from_json(j.at("telemetry"));
    } catch (const std::exception& e) {
        std::cerr << "error: " << record_path << " has no usable telemetry: " << e.what() << "\n";
        return kNoTelemetry;
    }
    const auto record = experiments::record_from_json(j);

    std::optional<std::map<std::string, diagnostics::SignalSensitivity>> sens;
    if (f.sensitivity) {
        const fs::path ck = f.checkpoint.empty() ? persistence::checkpoint_for_record(record_path) : fs::path(f.checkpoint);
        const auto env_cfg = env::make_config(record.cell.variant);
        agent::Agent a(agent::make_agent_config(record.cell.condition, env_cfg), record.cell.seed);
        persistence::load_checkpoint(persistence::read_json(ck), a);
        diagnostics::SensitivityOptions opt;
        opt.steps = f.probe_steps;
        opt.every = f.probe_every;
        opt.synthetic = f.synthetic;
        sens = diagnostics::policy_sensitivity(a, env_cfg, record.cell.seed, opt);
    }

    const fs::path out = f.out.empty() ? record_path.parent_path().parent_path() / "diagnostics" : fs::path(f.out);
    const std::string stem = record_path.stem().string();
    const auto report = diagnostics::diagnostic_report(record, sens);
    persistence::write_json(out / (stem + ".report.json"), report);
    persistence::write_text(out / (stem + ".collapse.csv"), diagnostics::collapse_csv(record));
    std::cout << report.dump(2) << "\n";
    std::cerr << "wrote " << (out / (stem + ".report.json")) << " and " << (out / (stem + ".collapse.csv")) << "\n";
    return kOk;
}

int report(const std::string& plan_dir) {
    const PlanDir dir{plan_dir};
    const auto loaded = persistence::load_plan_dir(dir);
    if (!loaded.missing.empty())
        std::cerr << "warning: " << loaded.missing.size() << " of " << loaded.plan.cells().size()
                  << " records missing; table has gaps\n";
    std::cout << persistence::write_summaries(dir, loaded.plan, loaded.records, loaded.missing);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cortexlab: train, diagnose and tabulate self-monitoring agents"};
    app.require_subcommand(1);

    TrainFlags tf;
    auto* train_cmd = app.add_subcommand("train", "run an experiment plan");
    train_cmd->add_option("--config", tf.config, "run config JSON");
    train_cmd->add_option("--condition", tf.conditions, "condition name(s), comma separated");
    train_cmd->add_option("--env", tf.envs, "std1d, nonstat1d, std2d, nonstat2d (comma separated)");
    train_cmd->add_option("--steps", tf.steps, "steps per run");
    train_cmd->add_option("--seeds", tf.seeds, "e.g. 0,1,2 or 0-19");
    train_cmd->add_option("--out", tf.out, "output directory (default $CORTEXLAB_OUT)");
    train_cmd->add_option("--workers", tf.workers, "parallel runs")->check(CLI::PositiveNumber);
    train_cmd->add_flag("--force", tf.force, "overwrite a non-empty output directory");

    DiagnoseFlags df;
    auto* diag_cmd = app.add_subcommand("diagnose", "collapse statistics and policy sensitivity for one run");
    diag_cmd->add_option("--record", df.record, "run record JSON")->required();
    diag_cmd->add_flag("--sensitivity", df.sensitivity, "probe the policy with perturbed signals (needs the checkpoint)");
    diag_cmd->add_flag("--synthetic", df.synthetic, "also inject into signals the condition does not consume");
    diag_cmd->add_option("--checkpoint", df.checkpoint, "checkpoint JSON (default: alongside the record)");
    diag_cmd->add_option("--probe-steps", df.probe_steps, "frozen re-run length");
    diag_cmd->add_option("--probe-every", df.probe_every, "probe interval");
    diag_cmd->add_option("--out", df.out, "output directory (default <plan>/diagnostics)");

    std::string plan_dir;
    auto* report_cmd = app.add_subcommand("report", "tabulate a plan directory");
    report_cmd->add_option("--plan-dir", plan_dir, "directory written by train")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadInput;
    }

    try {
        if (*train_cmd) return train(tf, *train_cmd);
        if (*diag_cmd) return diagnose(df);
        if (*report_cmd) return report(plan_dir);
    } catch (const persistence::NameError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const persistence::StampError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMixedStamps;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
