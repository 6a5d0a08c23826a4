#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "cortexlab/env/world.hpp"

namespace cortexlab::env {

/// One JSON-lines record {t, dt, action, reward, events, obs}.
inline nlohmann::json trajectory_record(double t, int action, const StepOutcome& out) {
    return {
        {"t", t},
        {"dt", out.dt},
        {"action", action},
        {"reward", out.reward},
        {"events",
         {{"ate_food", out.events.ate_food},
          {"ate_poison", out.events.ate_poison},
          {"died", out.events.died},
          {"in_danger", out.events.in_danger}}},
        {"obs", out.observation},
    };
}

inline void write_trajectory_line(std::ostream& os, double t, int action, const StepOutcome& out) {
    os << trajectory_record(t, action, out).dump() << '\n';
}

}  // namespace cortexlab::env
