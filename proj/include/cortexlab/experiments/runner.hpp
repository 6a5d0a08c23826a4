#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "cortexlab/experiments/record.hpp"

namespace cortexlab::experiments {

using CellCallback = std::function<void(const PlanCell&, const training::Trainer&, const RunRecord&)>;

inline RunRecord run_cell(const PlanCell& cell, const Overrides& overrides, const std::string& config_hash,
                          const CellCallback& on_done = {}) {
    const auto start = std::chrono::steady_clock::now();
    training::Trainer tr(cell.agent_config(overrides), env::make_config(cell.variant), cell.seed);
    tr.run(cell.steps);
    tr.update();  // flush a trailing partial window
    RunRecord r;
    r.cell = cell;
    r.config_hash = config_hash;
    r.counts = tr.counts();
    r.metric = stats::food_death_ratio(r.counts.food, r.counts.deaths);
    r.parameter_count = tr.agent().count_parameters();
    r.telemetry = tr.telemetry();
    r.windows = tr.windows();
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_done) on_done(cell, tr, r);
    return r;
}

/// Runs every cell on a bounded pool; records come back in cell order.
/// `on_done` runs on the worker thread that finished the cell.
inline std::vector<RunRecord> run_plan(const ExperimentPlan& plan, unsigned workers = 1,
                                       const CellCallback& on_done = {}) {
    plan.validate();
    const auto cells = plan.cells();
    const std::string hash = plan.hash();
    std::vector<RunRecord> records(cells.size());
    std::vector<std::exception_ptr> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                records[i] = run_cell(cells[i], plan.overrides, hash, on_done);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(cells.size()));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return records;
}

}  // namespace cortexlab::experiments
