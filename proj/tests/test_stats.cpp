#include <gtest/gtest.h>

#include <cmath>

#include "cortexlab/experiments/stats.hpp"
#include "cortexlab/numeric/random.hpp"
#include "support/stats_oracle.hpp"

using namespace cortexlab;
using namespace cortexlab::stats;
using namespace cortexlab::testing;

TEST(FoodDeathRatio, Examples) {
    EXPECT_EQ(food_death_ratio(10, 0), 10.0);
    EXPECT_EQ(food_death_ratio(0, 5), 0.0);
    EXPECT_EQ(food_death_ratio(15, 20), 0.75);
}

TEST(IncompleteBeta, KnownClosedForms) {
    // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b
    for (double x : {0.1, 0.37, 0.5, 0.9}) {
        EXPECT_NEAR(incomplete_beta(1, 1, x), x, 1e-14);
        EXPECT_NEAR(incomplete_beta(3.5, 1, x), std::pow(x, 3.5), 1e-14);
        EXPECT_NEAR(incomplete_beta(1, 2.5, x), 1 - std::pow(1 - x, 2.5), 1e-14);
    }
}

TEST(WelchT, SpecExample) {
    const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
    const auto r = welch_t(a, b);
    EXPECT_NEAR(r.t, -1.0, 1e-12);
    EXPECT_NEAR(r.dof, 8.0, 1e-12);
    EXPECT_NEAR(r.p, 0.3466, 5e-5);
    EXPECT_NEAR(r.p, oracle_p(-1.0, 8.0), 1e-9);
}

TEST(WelchT, IdenticalSamples) {
    const std::vector<double> a{1, 4, 2, 8};
    const auto r = welch_t(a, a);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_NEAR(r.p, 1.0, 1e-15);
    const std::vector<double> c{2, 2, 2};
    EXPECT_EQ(welch_t(c, c).p, 1.0);
}

TEST(WelchT, SwapNegatesT) {
    for (const auto& [a, b] : fixed_pairs()) {
        const auto ab = welch_t(a, b), ba = welch_t(b, a);
        EXPECT_EQ(ab.t, -ba.t);
        EXPECT_EQ(ab.p, ba.p);
    }
}

TEST(WelchT, MatchesHandFormulasOnFixedVectors) {
    for (const auto& [a, b] : fixed_pairs()) {
        const double va = var_of(a) / a.size(), vb = var_of(b) / b.size();
        const double t = (m_of(a) - m_of(b)) / std::sqrt(va + vb);
        const double dof = (va + vb) * (va + vb) / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1));
        const auto r = welch_t(a, b);
        EXPECT_NEAR(r.t, t, 1e-9);
        EXPECT_NEAR(r.dof, dof, 1e-9);
        EXPECT_NEAR(r.p, oracle_p(t, dof), 1e-9);
    }
}

TEST(PairedT, MatchesHandFormulasOnFixedVectors) {
    for (const auto& [a, b] : fixed_pairs()) {
        if (a.size() != b.size()) continue;
        std::vector<double> d;
        for (std::size_t i = 0; i < a.size(); ++i) d.push_back(a[i] - b[i]);
        if (var_of(d) == 0.0) continue;  // constant shift, covered by DegenerateCases
        const double t = m_of(d) / std::sqrt(var_of(d) / d.size());
        const auto r = paired_t(a, b);
        EXPECT_NEAR(r.t, t, 1e-9);
        EXPECT_EQ(r.dof, d.size() - 1.0);
        EXPECT_NEAR(r.p, oracle_p(t, d.size() - 1.0), 1e-9);
    }
}

TEST(PairedT, DifferencesExample) {
    // a - b = [1, -1, 2, 0, 3]
    const std::vector<double> a{1, 0, 2, 0, 3}, b{0, 1, 0, 0, 0};
    const double m = 1.0, sd = std::sqrt(2.5);
    const auto r = paired_t(a, b);
    EXPECT_NEAR(r.t, m / (sd / std::sqrt(5.0)), 1e-12);
    EXPECT_EQ(r.dof, 4.0);
    EXPECT_NEAR(r.p, oracle_p(r.t, 4.0), 1e-9);
}

TEST(PairedT, DegenerateCases) {
    const std::vector<double> a{1, 2, 3};
    const auto same = paired_t(a, a);
    EXPECT_EQ(same.p, 1.0);
    EXPECT_FALSE(same.degenerate);
    const std::vector<double> shifted{2, 3, 4};
    const auto r = paired_t(shifted, a);
    EXPECT_TRUE(r.degenerate);
    EXPECT_LT(r.p, 1e-12);
    const std::vector<double> shorter{1, 2};
    EXPECT_THROW(paired_t(a, shorter), UsageError);
}

TEST(CohensD, MatchesHandFormulaAndIsAntisymmetric) {
    for (const auto& [a, b] : fixed_pairs()) {
        const double na = a.size(), nb = b.size();
        const double pooled = std::sqrt(((na - 1) * var_of(a) + (nb - 1) * var_of(b)) / (na + nb - 2));
        EXPECT_NEAR(*cohens_d(a, b), (m_of(a) - m_of(b)) / pooled, 1e-9);
        EXPECT_EQ(*cohens_d(a, b), -*cohens_d(b, a));
    }
    const std::vector<double> a{1, 4, 2, 8};
    EXPECT_EQ(*cohens_d(a, a), 0.0);
    const std::vector<double> flat{3, 3, 3};
    EXPECT_FALSE(cohens_d(flat, flat).has_value());
}

TEST(CohensD, ReferenceEffectSize) {
    // 20 normal draws per group rescaled to exact sample moments
    auto group = [](double m, double s, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<double> x(20);
        for (auto& v : x) v = rng.normal();
        const double mu = m_of(x), sd = std::sqrt(var_of(x));
        for (auto& v : x) v = m + s * (v - mu) / sd;
        return x;
    };
    const auto a = group(1.08, 0.35, 1), b = group(0.90, 0.20, 2);
    EXPECT_NEAR(m_of(a), 1.08, 1e-12);
    EXPECT_NEAR(std::sqrt(var_of(b)), 0.20, 1e-12);
    EXPECT_NEAR(*cohens_d(a, b), 0.62, 0.05);
}

TEST(Summary, SampleStdUsesDdofOne) {
    const std::vector<double> x{0, 1};
    EXPECT_NEAR(stddev(x), std::sqrt(0.5), 1e-15);
    const std::vector<double> one{1};
    EXPECT_THROW(stddev(one), UsageError);
}
