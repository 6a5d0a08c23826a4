#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cortexlab/numeric/errors.hpp"
#include "cortexlab/numeric/random.hpp"

namespace cortexlab::env {

struct NonstationaryFlags {
    bool predator_phases = false;
    double phase_period = 500.0;
    double passive_factor = 0.2;
    bool poison = false;
    double poison_fraction = 0.30;
    bool obs_noise = false;
    double noise_sigma = 0.15;
    double dropout = 0.15;

    bool any() const { return predator_phases || poison || obs_noise; }
    static NonstationaryFlags all() { return {true, 500.0, 0.2, true, 0.30, true, 0.15, 0.15}; }
};

struct EnvConfig {
    double world_size = 100.0;
    int n_food = 5;
    int n_predators = 2;
    double predator_speed = 0.6;
    double agent_speed = 1.0;
    double food_radius = 2.0;
    double catch_radius = 1.5;
    double food_reward = 1.0;
    double poison_reward = -2.0;
    double catch_reward = -5.0;
    double food_energy = 0.2;
    double energy_decay = 0.001;
    double initial_energy = 1.0;
    double danger_period = 200.0;
    double danger_duty = 0.30;
    double danger_width = 15.0;
    double danger_penalty_rate = -2.0;
    double predator_noise = 0.1;
    int dims = 1;
    NonstationaryFlags nonstationary;

    int action_count() const { return dims == 1 ? 3 : 5; }
    std::size_t observation_size() const { return dims == 1 ? 30 : 39; }

    void validate() const {
        const double half = world_size / 2.0;
        if (dims != 1 && dims != 2) throw ConfigError("env: dims must be 1 or 2");
        if (!(world_size > 0)) throw ConfigError("env: world_size must be positive");
        if (!(food_radius < half && catch_radius < half && danger_width / 2.0 < half)) {
            throw ConfigError("env: radii must be below half the world size");
        }
        if (!(danger_duty > 0.0 && danger_duty < 1.0)) throw ConfigError("env: danger_duty must be in (0,1)");
        if (n_food + n_predators > 7) throw ConfigError("env: at most 7 entities fit the 8 observation slots");
    }
};

enum class Variant { Std1D, Nonstat1D, Std2D, Nonstat2D };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Std1D: return "std1d";
        case Variant::Nonstat1D: return "nonstat1d";
        case Variant::Std2D: return "std2d";
        case Variant::Nonstat2D: return "nonstat2d";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(const std::string& s) {
    for (auto v : {Variant::Std1D, Variant::Nonstat1D, Variant::Std2D, Variant::Nonstat2D}) {
        if (s == variant_name(v)) return v;
    }
    return std::nullopt;
}

inline EnvConfig make_config(Variant v) {
    EnvConfig c;
    c.dims = (v == Variant::Std2D || v == Variant::Nonstat2D) ? 2 : 1;
    if (v == Variant::Nonstat1D || v == Variant::Nonstat2D) c.nonstationary = NonstationaryFlags::all();
    return c;
}

using Pos = std::array<double, 2>;

struct Food {
    Pos pos{};
    bool poison = false;
};

struct WorldState {
    Pos agent{};
    std::array<int, 2> velocity{0, 0};
    double energy = 1.0;
    std::vector<Food> food;
    std::vector<Pos> predators;
    double t = 0.0;
};

struct Events {
    int ate_food = 0;    // every item eaten, poison included
    int ate_poison = 0;  // subset of ate_food
    bool died = false;
    bool in_danger = false;
};

struct RewardParts {
    double food = 0.0;
    double caught = 0.0;
    double danger = 0.0;
};

struct StepOutcome {
    std::vector<double> observation;
    double reward = 0.0;
    double dt = 1.0;
    Events events;
    RewardParts parts;
};

// Log-normal with unclamped mean 1.0 and std 0.3: sigma^2 = ln(1 + 0.3^2), mu = -sigma^2/2.
inline const double kDtSigma = std::sqrt(std::log(1.09));
inline const double kDtMu = -std::log(1.09) / 2.0;
inline constexpr double kDtMin = 0.5;
inline constexpr double kDtMax = 2.0;

inline double dt_unclamped(double z) { return std::exp(kDtMu + kDtSigma * z); }
inline double dt_from_normal(double z) { return std::clamp(dt_unclamped(z), kDtMin, kDtMax); }
inline double sample_dt(Rng& rng) { return dt_from_normal(rng.normal()); }

/// Signed shortest displacement from a to b on a ring of circumference w, in (-w/2, w/2].
inline double toroidal_delta(double a, double b, double w) {
    double d = std::fmod(b - a, w);
    if (d > w / 2.0) d -= w;
    if (d <= -w / 2.0) d += w;
    return d;
}

inline double wrap(double x, double w) {
    double r = std::fmod(x, w);
    if (r < 0.0) r += w;
    if (r >= w) r = 0.0;  // fmod rounding can land exactly on w
    return r;
}

inline bool danger_active(double t, const EnvConfig& c) {
    return std::fmod(t, c.danger_period) / c.danger_period < c.danger_duty;
}

inline double danger_phase(double t, const EnvConfig& c) { return std::fmod(t, c.danger_period) / c.danger_period; }

/// Center of the danger band, sweeping one world length per period.
inline double danger_center(double t, const EnvConfig& c) {
    return wrap(t * c.world_size / c.danger_period, c.world_size);
}

inline bool predators_aggressive(double t, const EnvConfig& c) {
    if (!c.nonstationary.predator_phases) return true;
    return std::fmod(t, c.nonstationary.phase_period) < c.nonstationary.phase_period / 2.0;
}

inline Pos displacement(const Pos& a, const Pos& b, const EnvConfig& c) {
    Pos d{toroidal_delta(a[0], b[0], c.world_size), 0.0};
    if (c.dims == 2) d[1] = toroidal_delta(a[1], b[1], c.world_size);
    return d;
}

inline double distance(const Pos& a, const Pos& b, const EnvConfig& c) {
    const Pos d = displacement(a, b, c);
    return std::hypot(d[0], d[1]);
}

/// Noise-free observation. 1D: 8 slots x [delta, is_food, is_predator], agent
/// [pos, velocity, energy], danger [phase, active, delta to center].
/// 2D: 8 slots x [dx, dy, is_food, is_predator], agent [x, y, vx, vy, energy],
/// danger [phase, active]. Slots are sorted by toroidal distance; unused slots stay zero.
inline std::vector<double> build_observation(const WorldState& s, const EnvConfig& c) {
    const double half = c.world_size / 2.0;
    struct Entity {
        Pos delta;
        double dist;
        bool food;
    };
    std::vector<Entity> ents;
    ents.reserve(s.food.size() + s.predators.size());
    for (const auto& f : s.food) {
        const Pos d = displacement(s.agent, f.pos, c);
        ents.push_back({d, std::hypot(d[0], d[1]), true});
    }
    for (const auto& p : s.predators) {
        const Pos d = displacement(s.agent, p, c);
        ents.push_back({d, std::hypot(d[0], d[1]), false});
    }
    std::stable_sort(ents.begin(), ents.end(), [](const Entity& a, const Entity& b) { return a.dist < b.dist; });

    std::vector<double> obs(c.observation_size(), 0.0);
    const std::size_t per_slot = c.dims == 1 ? 3 : 4;
    for (std::size_t i = 0; i < std::min<std::size_t>(ents.size(), 8); ++i) {
        double* slot = obs.data() + i * per_slot;
        std::size_t k = 0;
        slot[k++] = ents[i].delta[0] / half;
        if (c.dims == 2) slot[k++] = ents[i].delta[1] / half;
        slot[k++] = ents[i].food ? 1.0 : 0.0;
        slot[k++] = ents[i].food ? 0.0 : 1.0;
    }
    std::size_t k = 8 * per_slot;
    obs[k++] = s.agent[0] * 2.0 / c.world_size - 1.0;
    if (c.dims == 2) obs[k++] = s.agent[1] * 2.0 / c.world_size - 1.0;
    obs[k++] = s.velocity[0];
    if (c.dims == 2) obs[k++] = s.velocity[1];
    obs[k++] = s.energy;
    obs[k++] = danger_phase(s.t, c);
    obs[k++] = danger_active(s.t, c) ? 1.0 : 0.0;
    if (c.dims == 1) obs[k++] = toroidal_delta(s.agent[0], danger_center(s.t, c), c.world_size) / half;
    return obs;
}

/// Additive Gaussian noise, then independent per-component dropout.
inline void apply_observation_noise(std::vector<double>& obs, double sigma, double dropout, Rng& rng) {
    for (auto& x : obs) {
        if (sigma > 0.0) x += sigma * rng.normal();
        if (dropout > 0.0 && rng.bernoulli(dropout)) x = 0.0;
    }
}

class World {
public:
    World(EnvConfig config, std::uint64_t seed) : config_(std::move(config)), rng_(seed, Stream::Environment) {
        config_.validate();
    }

    const EnvConfig& config() const { return config_; }
    const WorldState& state() const { return state_; }
    /// Direct state access for scenario construction in tests.
    WorldState& mutable_state() { return state_; }

    StepOutcome reset() {
        state_ = WorldState{};
        state_.energy = config_.initial_energy;
        state_.agent = random_pos();
        for (int i = 0; i < config_.n_food; ++i) state_.food.push_back(fresh_food());
        for (int i = 0; i < config_.n_predators; ++i) state_.predators.push_back(random_pos());
        StepOutcome out;
        out.dt = 1.0;
        out.events.in_danger = agent_in_danger();
        out.observation = observe();
        return out;
    }

    StepOutcome step(int action) { return step_with_dt(action, sample_dt(rng_)); }

    /// One transition with a caller-chosen dt (dt itself is still clamped).
    StepOutcome step_with_dt(int action, double dt) {
        if (action < 0 || action >= config_.action_count()) {
            throw UsageError("env: invalid action " + std::to_string(action));
        }
        dt = std::clamp(dt, kDtMin, kDtMax);
        StepOutcome out;
        out.dt = dt;
        const double w = config_.world_size;
        state_.t += dt;

        // Agent move.
        const auto dir = action_direction(action);
        state_.velocity = dir;
        for (int a = 0; a < config_.dims; ++a) {
            state_.agent[a] = wrap(state_.agent[a] + config_.agent_speed * dt * dir[a], w);
        }

        // Predators chase along the shortest toroidal direction.
        const double speed = config_.predator_speed *
                             (predators_aggressive(state_.t, config_) ? 1.0 : config_.nonstationary.passive_factor);
        const double noise_scale = config_.predator_noise * std::sqrt(dt);
        for (auto& p : state_.predators) {
            const Pos d = displacement(p, state_.agent, config_);
            const double dist = std::hypot(d[0], d[1]);
            const double stride = std::min(speed * dt, dist);
            for (int a = 0; a < config_.dims; ++a) {
                const double unit = dist > 0.0 ? d[a] / dist : 0.0;
                p[a] = wrap(p[a] + stride * unit + noise_scale * rng_.normal(), w);
            }
        }

        // Eating.
        for (auto& f : state_.food) {
            if (distance(state_.agent, f.pos, config_) <= config_.food_radius) {
                out.parts.food += f.poison ? config_.poison_reward : config_.food_reward;
                ++out.events.ate_food;
                if (f.poison) ++out.events.ate_poison;
                state_.energy = std::min(2.0, state_.energy + config_.food_energy);
                f = fresh_food();
            }
        }

        // Catch.
        for (const auto& p : state_.predators) {
            if (distance(state_.agent, p, config_) <= config_.catch_radius) {
                out.parts.caught = config_.catch_reward;
                out.events.died = true;
                state_.agent = random_pos();
                break;
            }
        }

        state_.energy = std::clamp(state_.energy - config_.energy_decay * dt, 0.0, 2.0);

        if (agent_in_danger()) {
            out.parts.danger = config_.danger_penalty_rate * dt;
            out.events.in_danger = true;
        }
        out.reward = out.parts.food + out.parts.caught + out.parts.danger;
        out.observation = observe();
        return out;
    }

    /// Observation of the current state, with noise/dropout when enabled.
    std::vector<double> observe() {
        auto obs = build_observation(state_, config_);
        if (config_.nonstationary.obs_noise) {
            apply_observation_noise(obs, config_.nonstationary.noise_sigma, config_.nonstationary.dropout, rng_);
        }
        return obs;
    }

    bool agent_in_danger() const {
        if (!danger_active(state_.t, config_)) return false;
        const double d = toroidal_delta(state_.agent[0], danger_center(state_.t, config_), config_.world_size);
        return std::abs(d) <= config_.danger_width / 2.0;
    }

    std::array<int, 2> action_direction(int action) const {
        if (config_.dims == 1) return {action - 1, 0};  // left, stay, right
        switch (action) {
            case 1: return {0, 1};   // up
            case 2: return {0, -1};  // down
            case 3: return {-1, 0};  // left
            case 4: return {1, 0};   // right
            default: return {0, 0};  // stay
        }
    }

private:
    Pos random_pos() {
        Pos p{rng_.uniform(0.0, config_.world_size), 0.0};
        if (config_.dims == 2) p[1] = rng_.uniform(0.0, config_.world_size);
        return p;
    }

    Food fresh_food() {
        Food f;
        f.pos = random_pos();
        f.poison = config_.nonstationary.poison && rng_.bernoulli(config_.nonstationary.poison_fraction);
        return f;
    }

    EnvConfig config_;
    Rng rng_;
    WorldState state_;
};

}  // namespace cortexlab::env
