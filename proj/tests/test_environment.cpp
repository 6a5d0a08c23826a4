#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cortexlab/env/trajectory.hpp"
#include "cortexlab/env/world.hpp"

using namespace cortexlab;
using namespace cortexlab::env;

namespace {

// Places everything far from the agent and outside the danger window.
World quiet_world(int dims = 1) {
    EnvConfig c;
    c.dims = dims;
    World w(c, 1);
    w.reset();
    auto& s = w.mutable_state();
    s.agent = {50.0, 50.0};
    s.t = 100.0;  // phase 0.5: danger inactive
    for (std::size_t i = 0; i < s.food.size(); ++i) s.food[i].pos = {10.0 + i, 10.0};
    s.predators = {{90.0, 90.0}, {85.0, 85.0}};
    return w;
}

}  // namespace

TEST(SampleDt, AlwaysWithinClamp) {
    Rng rng(5);
    for (int i = 0; i < 100000; ++i) {
        const double dt = sample_dt(rng);
        ASSERT_GE(dt, 0.5);
        ASSERT_LE(dt, 2.0);
    }
}

TEST(SampleDt, ZeroDrawGivesExpMu) {
    EXPECT_NEAR(kDtMu, -0.0430890, 1e-6);
    EXPECT_NEAR(kDtSigma, 0.2935604, 1e-6);
    EXPECT_NEAR(dt_from_normal(0.0), std::exp(kDtMu), 1e-15);
    EXPECT_NEAR(dt_from_normal(0.0), 0.9578, 1e-4);
}

TEST(SampleDt, UnclampedMomentsMatchTargets) {
    // Monte-Carlo oracle for E[exp(N(mu, s^2))] = 1 and Std = 0.3.
    Rng rng(99);
    const int n = 1000000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = dt_unclamped(rng.normal());
        s1 += x;
        s2 += x * x;
    }
    const double m = s1 / n;
    const double sd = std::sqrt(s2 / n - m * m);
    EXPECT_NEAR(m, 1.0, 0.01);
    EXPECT_NEAR(sd, 0.3, 0.01);
}

TEST(ToroidalDelta, WrapCase) { EXPECT_DOUBLE_EQ(toroidal_delta(1.0, 99.0, 100.0), -2.0); }

TEST(ToroidalDelta, Identity) {
    for (double x : {0.0, 13.5, 99.999}) EXPECT_EQ(toroidal_delta(x, x, 100.0), 0.0);
}

TEST(ToroidalDelta, MatchesBruteForceShortestPath) {
    Rng rng(17);
    for (int i = 0; i < 100000; ++i) {
        const double a = rng.uniform(0.0, 100.0), b = rng.uniform(0.0, 100.0);
        const double forward = b >= a ? b - a : b + 100.0 - a;  // walk in +x direction
        const double backward = 100.0 - forward;                 // walk in -x direction
        const double shortest = std::min(forward, backward);
        const double d = toroidal_delta(a, b, 100.0);
        ASSERT_LE(std::abs(d), 50.0);
        ASSERT_NEAR(std::abs(d), shortest, 1e-9);
        ASSERT_NEAR(wrap(a + d, 100.0), b, 1e-9);
    }
}

TEST(Config, ValidationRejectsBadValues) {
    EnvConfig c;
    c.dims = 3;
    EXPECT_THROW(c.validate(), ConfigError);
    c = EnvConfig{};
    c.danger_duty = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = EnvConfig{};
    c.food_radius = 60.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Step, FoodAdjacentIsEaten) {
    World w = quiet_world();
    auto& s = w.mutable_state();
    s.food[0].pos = {51.0, 0.0};
    s.energy = 1.0;
    const auto out = w.step_with_dt(1, 1.0);  // stay
    EXPECT_EQ(out.events.ate_food, 1);
    EXPECT_DOUBLE_EQ(out.parts.food, 1.0);
    EXPECT_NEAR(w.state().energy, 1.0 + 0.2 - 0.001, 1e-12);
    EXPECT_NE(w.state().food[0].pos[0], 51.0);
}

TEST(Step, PoisonCostsTwo) {
    World w = quiet_world();
    auto& s = w.mutable_state();
    s.food[0].pos = {50.5, 0.0};
    s.food[0].poison = true;
    const auto out = w.step_with_dt(1, 1.0);
    EXPECT_EQ(out.events.ate_poison, 1);
    EXPECT_DOUBLE_EQ(out.reward, -2.0);
}

TEST(Step, PredatorCatchTeleports) {
    World w = quiet_world();
    w.mutable_state().predators[0] = {51.0, 0.0};
    const auto out = w.step_with_dt(1, 1.0);
    EXPECT_TRUE(out.events.died);
    EXPECT_DOUBLE_EQ(out.parts.caught, -5.0);
    EXPECT_DOUBLE_EQ(out.reward, -5.0);
    EXPECT_NE(w.state().agent[0], 50.0);
}

TEST(Step, QuietStepOnlyDecaysEnergy) {
    World w = quiet_world();
    w.mutable_state().energy = 1.0;
    const auto out = w.step_with_dt(1, 1.0);
    EXPECT_EQ(out.reward, 0.0);
    EXPECT_NEAR(w.state().energy, 1.0 - 0.001, 1e-15);
    EXPECT_FALSE(out.events.died);
}

TEST(Step, DangerPenaltyScalesWithDt) {
    World w = quiet_world();
    auto& s = w.mutable_state();
    s.t = 18.5;  // after a 1.5 step: t = 20, center = 10, active
    s.agent = {10.0, 0.0};
    s.food[0].pos = {30.0, 0.0};
    const auto out = w.step_with_dt(1, 1.5);
    EXPECT_TRUE(out.events.in_danger);
    EXPECT_DOUBLE_EQ(out.parts.danger, -3.0);
}

TEST(Step, InvalidActionIsUsageError) {
    World w = quiet_world();
    EXPECT_THROW(w.step(3), UsageError);
    EXPECT_THROW(w.step(-1), UsageError);
    World w2 = quiet_world(2);
    EXPECT_NO_THROW(w2.step(4));
}

TEST(Step, MovesAgentBySpeedTimesDt) {
    World w = quiet_world();
    w.step_with_dt(2, 1.25);
    EXPECT_DOUBLE_EQ(w.state().agent[0], 51.25);
    EXPECT_EQ(w.state().velocity[0], 1);
    w.step_with_dt(0, 2.0);
    EXPECT_DOUBLE_EQ(w.state().agent[0], 49.25);
    EXPECT_EQ(w.state().velocity[0], -1);
}

TEST(Step, WrapsAtBoundary) {
    World w = quiet_world();
    w.mutable_state().agent = {99.5, 0.0};
    w.step_with_dt(2, 1.0);
    EXPECT_NEAR(w.state().agent[0], 0.5, 1e-12);
}

TEST(Step, PassivePhaseSlowsPredators) {
    EnvConfig c = make_config(Variant::Nonstat1D);
    c.predator_noise = 0.0;
    World w(c, 3);
    w.reset();
    auto& s = w.mutable_state();
    s.agent = {50.0, 0.0};
    s.predators = {{20.0, 0.0}, {80.0, 0.0}};
    for (auto& f : s.food) f.pos = {5.0, 0.0};
    s.t = 299.0;  // t = 300 after the step: passive half of the 500 cycle
    w.step_with_dt(1, 1.0);
    EXPECT_NEAR(w.state().predators[0][0], 20.0 + 0.12, 1e-12);
    EXPECT_FALSE(predators_aggressive(300.0, c));
    EXPECT_TRUE(predators_aggressive(100.0, c));
}

TEST(Observation, LengthsPerDims) {
    World w1(make_config(Variant::Std1D), 1);
    World w2(make_config(Variant::Std2D), 1);
    EXPECT_EQ(w1.reset().observation.size(), 30u);
    EXPECT_EQ(w2.reset().observation.size(), 39u);
}

TEST(Observation, AgentOnFoodSlot) {
    World w = quiet_world();
    w.mutable_state().food[0].pos = {50.0, 0.0};
    const auto obs = build_observation(w.state(), w.config());
    EXPECT_EQ(obs[0], 0.0);
    EXPECT_EQ(obs[1], 1.0);
    EXPECT_EQ(obs[2], 0.0);
}

TEST(Observation, EighthSlotIsZeroPadded) {
    for (int dims : {1, 2}) {
        World w(make_config(dims == 1 ? Variant::Std1D : Variant::Std2D), 4);
        w.reset();
        for (int i = 0; i < 200; ++i) {
            const auto out = w.step(i % w.config().action_count());
            const std::size_t per = dims == 1 ? 3 : 4;
            for (std::size_t k = 0; k < per; ++k) ASSERT_EQ(out.observation[7 * per + k], 0.0);
        }
    }
}

TEST(Observation, SlotsSortedByDistance) {
    World w(make_config(Variant::Std1D), 8);
    w.reset();
    for (int i = 0; i < 100; ++i) {
        const auto out = w.step(i % 3);
        for (std::size_t k = 1; k < 7; ++k) {
            ASSERT_LE(std::abs(out.observation[(k - 1) * 3]), std::abs(out.observation[k * 3]) + 1e-15);
        }
    }
}

TEST(Observation, PoisonIsInvisible) {
    for (int dims : {1, 2}) {
        World w = quiet_world(dims);
        auto& s = w.mutable_state();
        s.food[2].poison = false;
        const auto safe = build_observation(s, w.config());
        s.food[2].poison = true;
        const auto poison = build_observation(s, w.config());
        EXPECT_EQ(safe, poison);
    }
}

TEST(Nonstationary, DisabledIsIdentity) {
    std::vector<double> obs{0.1, -0.2, 0.3};
    Rng rng(1);
    auto copy = obs;
    apply_observation_noise(copy, 0.0, 0.0, rng);
    EXPECT_EQ(copy, obs);
}

TEST(Nonstationary, FullDropoutZeroesEverything) {
    std::vector<double> obs(30, 0.7);
    Rng rng(1);
    apply_observation_noise(obs, 0.15, 1.0, rng);
    for (double x : obs) EXPECT_EQ(x, 0.0);
}

TEST(Nonstationary, DropoutFractionMatchesBernoulli) {
    Rng rng(123);
    std::vector<double> obs(100000, 1.0);
    apply_observation_noise(obs, 0.0, 0.15, rng);
    const double zeros = static_cast<double>(std::count(obs.begin(), obs.end(), 0.0));
    EXPECT_NEAR(zeros / obs.size(), 0.15, 0.01);
}

TEST(Nonstationary, PoisonFractionOfSpawns) {
    World w(make_config(Variant::Nonstat1D), 2);
    int poison = 0, total = 0;
    for (int i = 0; i < 4000; ++i) {
        w.reset();
        for (const auto& f : w.state().food) {
            poison += f.poison;
            ++total;
        }
    }
    EXPECT_NEAR(static_cast<double>(poison) / total, 0.30, 0.01);
}

TEST(Invariants, RandomRolloutsStayInBounds) {
    for (auto v : {Variant::Std1D, Variant::Nonstat1D, Variant::Std2D, Variant::Nonstat2D}) {
        World w(make_config(v), 31);
        w.reset();
        Rng actions(7);
        for (int i = 0; i < 2000; ++i) {
            const auto out = w.step(static_cast<int>(actions.index(w.config().action_count())));
            const auto& s = w.state();
            ASSERT_GE(out.dt, 0.5);
            ASSERT_LE(out.dt, 2.0);
            ASSERT_GE(s.energy, 0.0);
            ASSERT_LE(s.energy, 2.0);
            for (int a = 0; a < w.config().dims; ++a) {
                ASSERT_GE(s.agent[a], 0.0);
                ASSERT_LT(s.agent[a], 100.0);
                for (const auto& p : s.predators) ASSERT_TRUE(p[a] >= 0.0 && p[a] < 100.0);
                for (const auto& f : s.food) ASSERT_TRUE(f.pos[a] >= 0.0 && f.pos[a] < 100.0);
            }
            ASSERT_EQ(out.reward, out.parts.food + out.parts.caught + out.parts.danger);
            ASSERT_EQ(out.observation.size(), w.config().observation_size());
        }
    }
}

TEST(Invariants, DeterministicReplay) {
    auto run = [] {
        World w(make_config(Variant::Nonstat2D), 77);
        std::vector<double> trace;
        auto o = w.reset();
        trace.insert(trace.end(), o.observation.begin(), o.observation.end());
        for (int i = 0; i < 500; ++i) {
            const auto out = w.step(i % 5);
            trace.push_back(out.reward);
            trace.push_back(out.dt);
            trace.insert(trace.end(), out.observation.begin(), out.observation.end());
        }
        return trace;
    };
    EXPECT_EQ(run(), run());
}

TEST(Trajectory, JsonLineHasAllFields) {
    World w = quiet_world();
    const auto out = w.step_with_dt(2, 1.0);
    std::ostringstream os;
    write_trajectory_line(os, w.state().t, 2, out);
    const auto j = nlohmann::json::parse(os.str());
    for (const char* key : {"t", "dt", "action", "reward", "events", "obs"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["obs"].size(), 30u);
    EXPECT_EQ(j["events"]["died"], false);
}
