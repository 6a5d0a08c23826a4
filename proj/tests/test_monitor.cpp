#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cortexlab/monitor/monitor.hpp"
#include "support/gradcheck.hpp"

using namespace cortexlab;
using namespace cortexlab::monitor;
using ad::Tensor;
using cortexlab::testing::gradcheck;

namespace {

Tensor random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0, bool grad = false) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor::vector(std::move(v), grad);
}

void scramble(const ad::ParameterList& ps, Rng& rng, double scale) {
    for (const auto& p : ps) {
        Tensor t = p.tensor;
        for (double& w : t.mutable_values()) w = rng.normal(0.0, scale);
    }
}

// Numerical rank by Gaussian elimination with partial pivoting.
std::size_t matrix_rank(std::vector<std::vector<double>> a, double tol = 1e-9) {
    const std::size_t m = a.size(), n = a[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n && rank < m; ++col) {
        std::size_t piv = rank;
        for (std::size_t r = rank; r < m; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < tol) continue;
        std::swap(a[piv], a[rank]);
        for (std::size_t r = rank + 1; r < m; ++r) {
            const double f = a[r][col] / a[rank][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[rank][c];
        }
        ++rank;
    }
    return rank;
}

double mse_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

}  // namespace

TEST(Metacog, SignalRangesHoldForArbitraryParameters) {
    for (int trial = 0; trial < 200; ++trial) {
        Rng rng(trial);
        MetacogParams p(32, rng);
        ad::ParameterList ps;
        p.collect(ps);
        scramble(ps, rng, 0.05 + trial * 0.001);
        const auto s = metacog_forward(p, random_vec(96, rng), 0.0);
        EXPECT_GT(s.confidence.item(), 0.0);
        EXPECT_LT(s.confidence.item(), 1.0);
        EXPECT_GE(s.uncertainty.item(), 0.0);
        const auto a = s.attn_alloc.values();
        EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(Metacog, SaturatedParametersStayInClosedRange) {
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(1000 + trial);
        MetacogParams p(32, rng);
        ad::ParameterList ps;
        p.collect(ps);
        scramble(ps, rng, 10.0);
        const auto s = metacog_forward(p, random_vec(96, rng, -5, 5), 0.0);
        EXPECT_GE(s.confidence.item(), 0.0);
        EXPECT_LE(s.confidence.item(), 1.0);
        EXPECT_GE(s.uncertainty.item(), 0.0);
        const auto a = s.attn_alloc.values();
        EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(Metacog, SignalVectorLayout) {
    Rng rng(3);
    MetacogParams p(32, rng);
    const auto s = metacog_forward(p, random_vec(96, rng), 0.25);
    const Tensor v = s.vector();
    ASSERT_EQ(v.numel(), 6u);
    EXPECT_EQ(v[0], s.confidence.item());
    EXPECT_EQ(v[1], s.uncertainty.item());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(v[2 + i], s.attn_alloc[i]);
    EXPECT_EQ(v[5], 0.25);
}

TEST(Metacog, ParameterShapes) {
    Rng rng(4);
    MetacogParams p(32, rng);
    EXPECT_EQ(p.hidden.weight.shape(), (ad::Shape{32, 96}));
    EXPECT_EQ(p.out.weight.shape(), (ad::Shape{6, 32}));
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(p.down[i].weight.shape(), (ad::Shape{8, 32}));
        EXPECT_EQ(p.up[i].weight.shape(), (ad::Shape{32, 8}));
    }
}

TEST(Surprise, ZeroOnFirstStep) {
    Rng rng(5);
    MetacogParams p(32, rng);
    const LevelHidden hs{random_vec(32, rng), random_vec(32, rng), random_vec(32, rng)};
    const auto r = surprise_predict_and_score(p, hs, std::nullopt);
    EXPECT_EQ(r.surprise, 0.0);
    EXPECT_FALSE(r.loss.has_value());
    for (const auto& pr : r.predictions) EXPECT_EQ(pr.numel(), 32u);
}

TEST(Surprise, PerfectPredictionGivesZero) {
    Rng rng(6);
    MetacogParams p(32, rng);
    const LevelHidden hs{random_vec(32, rng), random_vec(32, rng), random_vec(32, rng)};
    const auto r = surprise_predict_and_score(p, hs, std::array<Tensor, 3>{hs[0], hs[1], hs[2]});
    EXPECT_EQ(r.surprise, 0.0);
    ASSERT_TRUE(r.loss.has_value());
    EXPECT_EQ(r.loss->item(), 0.0);
}

TEST(Surprise, ZeroPredictionAgainstOnesIsOne) {
    Rng rng(7);
    MetacogParams p(32, rng);
    const Tensor ones = Tensor::from({32}, std::vector<double>(32, 1.0));
    const Tensor zeros = Tensor::zeros({32});
    const auto r = surprise_predict_and_score(p, {ones, ones, ones}, std::array<Tensor, 3>{zeros, zeros, zeros});
    EXPECT_NEAR(r.surprise, 1.0, 1e-15);
}

TEST(Surprise, MatchesMeanOfLevelMse) {
    Rng rng(8);
    MetacogParams p(32, rng);
    const LevelHidden hs{random_vec(32, rng), random_vec(32, rng), random_vec(32, rng)};
    const std::array<Tensor, 3> prev{random_vec(32, rng), random_vec(32, rng), random_vec(32, rng)};
    const auto r = surprise_predict_and_score(p, hs, prev);
    double expect = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto a = prev[i].values(), b = hs[i].values();
        expect += mse_oracle({a.begin(), a.end()}, {b.begin(), b.end()}) / 3.0;
    }
    EXPECT_NEAR(r.surprise, expect, 1e-14);
}

TEST(Surprise, ReplacementTargetsOnlyAffectTheLoss) {
    Rng rng(9);
    MetacogParams p(8, rng);
    const LevelHidden hs{random_vec(8, rng), random_vec(8, rng), random_vec(8, rng)};
    const std::array<Tensor, 3> prev{random_vec(8, rng), random_vec(8, rng), random_vec(8, rng)};
    const std::array<Tensor, 3> fake{random_vec(8, rng), random_vec(8, rng), random_vec(8, rng)};
    const auto real = surprise_predict_and_score(p, hs, prev);
    const auto ctrl = surprise_predict_and_score(p, hs, prev, fake);
    EXPECT_EQ(real.surprise, ctrl.surprise);
    EXPECT_NE(real.loss->item(), ctrl.loss->item());
}

TEST(Surprise, PredictorLinearPartHasRankAtMostEight) {
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(20 + trial);
        MetacogParams p(32, rng);
        for (std::size_t lvl = 0; lvl < 3; ++lvl) {
            const Tensor m = ad::matmul(p.up[lvl].weight, p.down[lvl].weight);
            std::vector<std::vector<double>> rows(32, std::vector<double>(32));
            for (std::size_t i = 0; i < 32; ++i)
                for (std::size_t j = 0; j < 32; ++j) rows[i][j] = m[i * 32 + j];
            EXPECT_LE(matrix_rank(rows), 8u);
        }
    }
}

TEST(Surprise, ReplayIsBitwiseReproducible) {
    Rng rng(10);
    MetacogParams p(16, rng);
    std::vector<LevelHidden> traj;
    for (int t = 0; t < 20; ++t) traj.push_back({random_vec(16, rng), random_vec(16, rng), random_vec(16, rng)});
    auto run = [&] {
        std::vector<double> out;
        std::optional<std::array<Tensor, 3>> stored;
        for (const auto& hs : traj) {
            auto r = surprise_predict_and_score(p, hs, stored);
            out.push_back(r.surprise);
            stored = r.predictions;
        }
        return out;
    };
    EXPECT_EQ(run(), run());
}

TEST(Metacog, GradientMatchesFiniteDifferences) {
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(300 + trial);
        const std::size_t d = 4;
        MetacogParams p(d, rng);
        const Tensor h = random_vec(3 * d, rng, -1, 1, true);
        const std::array<Tensor, 3> prev{random_vec(d, rng), random_vec(d, rng), random_vec(d, rng)};
        ad::ParameterList ps;
        p.collect(ps);
        std::vector<Tensor> inputs{h};
        for (const auto& e : ps) inputs.push_back(e.tensor);
        const auto r = gradcheck([&] {
            const LevelHidden hs{ad::slice(h, 0, d), ad::slice(h, d, d), ad::slice(h, 2 * d, d)};
            const auto s = metacog_forward(p, h, 0.1);
            const auto sp = surprise_predict_and_score(p, hs, prev);
            return ad::add_n({ad::sum(ad::tanh(s.vector())), *sp.loss, ad::sum(ad::tanh(sp.predictions[1]))});
        }, inputs);
        ASSERT_TRUE(r.ok) << r.detail;
    }
}

TEST(Tsm, ZeroInputGivesZeroPrediction) {
    Rng rng(11);
    TsmParams p(32, rng);
    const auto out = tsm_predict(p, Tensor::zeros({96}));
    ASSERT_EQ(out.prediction.numel(), 96u);
    for (double v : out.prediction.values()) EXPECT_EQ(v, 0.0);
}

TEST(Tsm, PredictabilityInUnitInterval) {
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(trial);
        TsmParams p(32, rng);
        ad::ParameterList ps;
        p.collect(ps);
        scramble(ps, rng, 0.5);
        const auto out = tsm_predict(p, random_vec(96, rng, -2, 2));
        ASSERT_EQ(out.predictability.numel(), 3u);
        for (double v : out.predictability.values()) {
            EXPECT_GT(v, 0.0);
            EXPECT_LT(v, 1.0);
        }
    }
}

TEST(Tsm, BufferCapacityIsTen) {
    SnapshotBuffer b;
    for (long s = 0; s < 25; ++s) b.push(s, Tensor::zeros({3}));
    EXPECT_EQ(b.size(), 10u);
    EXPECT_FALSE(b.at(14).has_value());
    EXPECT_TRUE(b.at(15).has_value());
    EXPECT_TRUE(b.at(24).has_value());
}

TEST(Tsm, DelayedLossAbsentForFirstFiveSteps) {
    Rng rng(12);
    TsmParams p(4, rng);
    SnapshotBuffer b;
    for (long step = 0; step < 8; ++step) {
        const Tensor h = random_vec(12, rng);
        b.push(step, h);
        const auto loss = tsm_delayed_loss(p, b, h, step);
        EXPECT_EQ(loss.has_value(), step >= 5) << step;
    }
}

TEST(Tsm, DelayedLossComparesExactlyFiveStepsBack) {
    Rng rng(13);
    TsmParams p(4, rng);
    SnapshotBuffer b;
    auto state = [](long step) { return Tensor::from({12}, std::vector<double>(12, static_cast<double>(step))); };
    for (long step = 0; step < 60; ++step) {
        b.push(step, state(step));
        const auto loss = tsm_delayed_loss(p, b, state(step), step);
        if (step < 5) continue;
        ASSERT_TRUE(loss.has_value());
        EXPECT_EQ(loss->source_step, step - 5);
        const Tensor pred_t = tsm_predict(p, state(step - 5)).prediction;
        const auto pred = pred_t.values();
        const std::vector<double> target(12, static_cast<double>(step));
        EXPECT_NEAR(loss->loss.item(), mse_oracle({pred.begin(), pred.end()}, target), 1e-12) << step;
    }
}

TEST(Tsm, PerfectPredictionParametersGiveZeroLoss) {
    // enc = s * P, dec = P^T diag(1 / (s * g)) with P a 16x96 orthonormal row basis and
    // g = sigmoid(hor * H); then dec(relu(enc h) * g) = h for h = P^T c, c >= 0.
    Rng rng(14);
    TsmParams p(32, rng);
    const double s = 2.5;
    std::vector<std::vector<double>> basis;
    while (basis.size() < 16) {
        std::vector<double> v(96);
        for (auto& x : v) x = rng.normal();
        for (const auto& b : basis) {
            const double dot = std::inner_product(v.begin(), v.end(), b.begin(), 0.0);
            for (std::size_t i = 0; i < 96; ++i) v[i] -= dot * b[i];
        }
        const double n = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        for (auto& x : v) x /= n;
        basis.push_back(v);
    }
    const auto hor = p.hor.weight.values();
    auto enc = p.enc.weight.mutable_values();
    auto dec = p.dec.weight.mutable_values();
    for (std::size_t k = 0; k < 16; ++k) {
        const double g = 1.0 / (1.0 + std::exp(-hor[k] * kTsmHorizon));
        for (std::size_t i = 0; i < 96; ++i) {
            enc[k * 96 + i] = s * basis[k][i];
            dec[i * 16 + k] = basis[k][i] / (s * g);
        }
    }
    std::vector<double> h(96, 0.0);
    for (std::size_t k = 0; k < 16; ++k) {
        const double c = rng.uniform(0.1, 1.0);
        for (std::size_t i = 0; i < 96; ++i) h[i] += c * basis[k][i];
    }
    const Tensor state = Tensor::vector(h);
    SnapshotBuffer b;
    for (long step = 0; step <= 7; ++step) {
        b.push(step, state);
        const auto loss = tsm_delayed_loss(p, b, state, step);
        if (step >= 5) {
            EXPECT_NEAR(loss->loss.item(), 0.0, 1e-24);
        }
    }
}

TEST(Tsm, LossGradientSkipsBufferedStates) {
    Rng rng(15);
    TsmParams p(4, rng);
    SnapshotBuffer b;
    std::vector<Tensor> states;
    for (long step = 0; step <= 5; ++step) {
        states.push_back(random_vec(12, rng, -1, 1, true));
        b.push(step, states.back());
    }
    const auto loss = tsm_delayed_loss(p, b, states.back(), 5);
    ASSERT_TRUE(loss.has_value());
    ad::backward(loss->loss);
    EXPECT_FALSE(states[0].has_grad());
    EXPECT_TRUE(states[5].has_grad());
    for (const auto* lin : {&p.enc, &p.hor, &p.dec}) {
        const auto g = lin->weight.grad();
        EXPECT_GT(std::accumulate(g.begin(), g.end(), 0.0, [](double a, double x) { return a + std::abs(x); }), 0.0);
    }
}

TEST(Tsm, GradientMatchesFiniteDifferences) {
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(400 + trial);
        TsmParams p(4, rng);
        const Tensor h = random_vec(12, rng, -1, 1, true);
        const Tensor target = random_vec(12, rng);
        ad::ParameterList ps;
        p.collect(ps);
        std::vector<Tensor> inputs{h};
        for (const auto& e : ps) inputs.push_back(e.tensor);
        const auto r = gradcheck([&] {
            const auto o = tsm_predict(p, h);
            return ad::add(ad::mse(o.prediction, target), ad::sum(o.predictability));
        }, inputs);
        ASSERT_TRUE(r.ok) << r.detail;
    }
}

TEST(Duration, FloorHoldsAndOutputsFinite) {
    Rng rng(16);
    DurationParams p(32, rng);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> f(8);
        for (auto& x : f) x = rng.uniform(-5, 5);
        const double d = felt_duration(p, f, random_vec(96, rng, -2, 2)).item();
        ASSERT_TRUE(std::isfinite(d));
        ASSERT_GE(d, 0.1);
    }
}

TEST(Duration, HugeNegativeBiasApproachesFloor) {
    Rng rng(17);
    DurationParams p(32, rng);
    p.out.bias.mutable_values()[0] = -1e3;
    const std::vector<double> f(8, 0.5);
    EXPECT_NEAR(felt_duration(p, f, random_vec(96, rng)).item(), 0.1, 1e-12);
}

TEST(Duration, WrongFeatureCountIsUsageError) {
    Rng rng(18);
    DurationParams p(32, rng);
    const std::vector<double> f(7, 0.0);
    EXPECT_THROW(felt_duration(p, f, Tensor::zeros({96})), UsageError);
}

TEST(Duration, GradientMatchesFiniteDifferences) {
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(500 + trial);
        DurationParams p(4, rng);
        const Tensor h = random_vec(12, rng, -1, 1, true);
        std::vector<double> f(8);
        for (auto& x : f) x = rng.uniform(-1, 1);
        ad::ParameterList ps;
        p.collect(ps);
        std::vector<Tensor> inputs{h};
        for (const auto& e : ps) inputs.push_back(e.tensor);
        const auto r = gradcheck([&] { return effective_gamma(felt_duration(p, f, h)); }, inputs);
        ASSERT_TRUE(r.ok) << r.detail;
    }
}

TEST(EffectiveGamma, Examples) {
    EXPECT_NEAR(effective_gamma(1.0), 0.99, 1e-15);
    EXPECT_NEAR(effective_gamma(0.73), std::pow(0.99, 0.973), 1e-15);
    EXPECT_NEAR(effective_gamma(0.73), 0.99027, 5e-6);
    EXPECT_EQ(effective_gamma(1e6), 0.9);
    EXPECT_EQ(effective_gamma(Tensor::scalar(1e6)).item(), 0.9);
}

TEST(EffectiveGamma, TensorAndScalarAgree) {
    for (double d = 0.1; d < 40.0; d += 0.37) {
        EXPECT_NEAR(effective_gamma(Tensor::scalar(d)).item(), effective_gamma(d), 1e-15);
    }
}

TEST(EffectiveGamma, MonotoneDecreasing) {
    double prev = effective_gamma(0.1);
    for (double d = 0.2; d < 20.0; d += 0.1) {
        const double g = effective_gamma(d);
        EXPECT_LE(g, prev);
        EXPECT_GE(g, 0.9);
        EXPECT_LE(g, 0.999);
        prev = g;
    }
}

TEST(MonitorSignals, RangeCheck) {
    MonitorSignals s;
    EXPECT_EQ(s.range_violation(), "");
    s.attn_alloc = {0.5, 0.5, 0.1};
    EXPECT_EQ(s.range_violation(), "attn_alloc sum");
    s = MonitorSignals{};
    s.felt_duration = 0.05;
    EXPECT_EQ(s.range_violation(), "felt_duration");
}
