#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cortexlab/experiments/record.hpp"

namespace cortexlab::experiments {

struct ConditionSummary {
    agent::Condition condition{};
    env::Variant variant{};
    long steps = 0;
    std::size_t n = 0;
    double mean = 0.0;
    double std = std::nan("");  // ddof = 1; NaN for a single seed
    double min = 0.0;
    double max = 0.0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> metrics;  // in seed order
};

struct Comparison {
    agent::Condition a{};
    agent::Condition b{};
    env::Variant variant{};
    long steps = 0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    stats::TTest welch;
    std::optional<stats::TTest> paired;
    std::optional<double> d;

    const char* primary() const { return paired ? "paired" : "welch"; }
    const stats::TTest& primary_test() const { return paired ? *paired : welch; }
};

struct PlanSummary {
    std::vector<ConditionSummary> rows;
    std::vector<Comparison> comparisons;
    std::vector<std::string> warnings;
};

/// The named pairings, first minus second.
inline const std::vector<std::pair<agent::Condition, agent::Condition>>& named_comparisons() {
    using agent::Condition;
    static const std::vector<std::pair<Condition, Condition>> list{
        {Condition::Structural, Condition::AddOn},
        {Condition::AddOn, Condition::NoSelfMonitoring},
        {Condition::Structural, Condition::NoSelfMonitoring},
        {Condition::Structural, Condition::AuxControl},
        {Condition::ParamMatched, Condition::Structural},
        {Condition::AddOn, Condition::ParamMatched},
        {Condition::AddOn, Condition::AuxControl},
        {Condition::AddOn, Condition::SingleTau},
        {Condition::ConfidenceOnly, Condition::Structural},
        {Condition::SurpriseOnly, Condition::Structural},
        {Condition::TsmOnly, Condition::Structural},
    };
    return list;
}

/// Index-aligned metric pairs; refuses groups whose seed lists differ.
inline std::pair<std::vector<double>, std::vector<double>> paired_samples(const ConditionSummary& a,
                                                                          const ConditionSummary& b) {
    if (a.seeds != b.seeds) throw ConfigError("paired comparison: seed lists differ");
    return {a.metrics, b.metrics};
}

inline PlanSummary summarize_records(const std::vector<RunRecord>& records) {
    using Key = std::tuple<env::Variant, long, agent::Condition>;
    std::map<Key, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) groups[{r.cell.variant, r.cell.steps, r.cell.condition}].push_back(&r);

    PlanSummary out;
    std::map<Key, std::size_t> index;
    for (auto& [key, rs] : groups) {
        std::sort(rs.begin(), rs.end(), [](const RunRecord* x, const RunRecord* y) { return x->cell.seed < y->cell.seed; });
        ConditionSummary s;
        std::tie(s.variant, s.steps, s.condition) = key;
        for (const auto* r : rs) {
            s.seeds.push_back(r->cell.seed);
            s.metrics.push_back(r->metric);
        }
        s.n = s.metrics.size();
        s.mean = stats::mean(s.metrics);
        if (s.n >= 2) s.std = stats::stddev(s.metrics);
        s.min = *std::min_element(s.metrics.begin(), s.metrics.end());
        s.max = *std::max_element(s.metrics.begin(), s.metrics.end());
        index[key] = out.rows.size();
        out.rows.push_back(std::move(s));
    }

    std::vector<std::pair<env::Variant, long>> settings;
    for (const auto& row : out.rows) {
        if (std::find(settings.begin(), settings.end(), std::pair{row.variant, row.steps}) == settings.end())
            settings.emplace_back(row.variant, row.steps);
    }
    for (const auto& [variant, steps] : settings) {
        for (const auto& [ca, cb] : named_comparisons()) {
            const auto ia = index.find({variant, steps, ca});
            const auto ib = index.find({variant, steps, cb});
            if (ia == index.end() || ib == index.end()) continue;
            const auto& A = out.rows[ia->second];
            const auto& B = out.rows[ib->second];
            const std::string label = std::string(agent::condition_name(ca)) + " vs " + agent::condition_name(cb) +
                                      " (" + env::variant_name(variant) + ", " + std::to_string(steps) + ")";
            if (A.n < 2 || B.n < 2) {
                out.warnings.push_back(label + ": fewer than 2 seeds, no test");
                continue;
            }
            Comparison c;
            c.a = ca;
            c.b = cb;
            c.variant = variant;
            c.steps = steps;
            c.n_a = A.n;
            c.n_b = B.n;
            c.mean_a = A.mean;
            c.mean_b = B.mean;
            c.welch = stats::welch_t(A.metrics, B.metrics);
            c.d = stats::cohens_d(A.metrics, B.metrics);
            try {
                const auto [pa, pb] = paired_samples(A, B);
                c.paired = stats::paired_t(pa, pb);
            } catch (const ConfigError&) {
                out.warnings.push_back(label + ": seed lists differ, Welch only");
            }
            out.comparisons.push_back(c);
        }
    }
    return out;
}

/// Empty rows (n = 0) for every planned condition/variant that has no records at all.
inline void add_gaps(PlanSummary& s, const ExperimentPlan& plan) {
    for (auto v : plan.variants) {
        for (auto c : plan.conditions) {
            const bool present = std::any_of(s.rows.begin(), s.rows.end(), [&](const ConditionSummary& r) {
                return r.condition == c && r.variant == v && r.steps == plan.steps;
            });
            if (present) continue;
            ConditionSummary gap;
            gap.condition = c;
            gap.variant = v;
            gap.steps = plan.steps;
            gap.mean = gap.min = gap.max = std::nan("");
            s.rows.push_back(gap);
        }
    }
    std::sort(s.rows.begin(), s.rows.end(), [](const ConditionSummary& x, const ConditionSummary& y) {
        return std::tie(x.variant, x.steps, x.condition) < std::tie(y.variant, y.steps, y.condition);
    });
}

namespace detail {

inline std::string num(double x) {
    if (std::isnan(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

/// condition,variant,steps,n,mean,std,min,max
inline std::string summary_csv(const PlanSummary& s) {
    std::ostringstream os;
    os << "condition,variant,steps,n,mean,std,min,max\n";
    for (const auto& r : s.rows) {
        os << agent::condition_name(r.condition) << ',' << env::variant_name(r.variant) << ',' << r.steps << ','
           << r.n << ',' << detail::num(r.mean) << ',' << detail::num(r.std) << ',' << detail::num(r.min) << ','
           << detail::num(r.max) << '\n';
    }
    return os.str();
}

/// a,b,variant,steps,n_a,n_b,mean_a,mean_b,diff,test,t,dof,p,welch_t,welch_dof,welch_p,paired_t,paired_dof,paired_p,d
inline std::string comparisons_csv(const PlanSummary& s) {
    std::ostringstream os;
    os << "a,b,variant,steps,n_a,n_b,mean_a,mean_b,diff,test,t,dof,p,welch_t,welch_dof,welch_p,paired_t,paired_dof,"
          "paired_p,d\n";
    for (const auto& c : s.comparisons) {
        const auto& t = c.primary_test();
        os << agent::condition_name(c.a) << ',' << agent::condition_name(c.b) << ',' << env::variant_name(c.variant)
           << ',' << c.steps << ',' << c.n_a << ',' << c.n_b << ',' << detail::num(c.mean_a) << ','
           << detail::num(c.mean_b) << ',' << detail::num(c.mean_a - c.mean_b) << ',' << c.primary() << ','
           << detail::num(t.t) << ',' << detail::num(t.dof) << ',' << detail::num(t.p) << ','
           << detail::num(c.welch.t) << ',' << detail::num(c.welch.dof) << ',' << detail::num(c.welch.p) << ',';
        if (c.paired) {
            os << detail::num(c.paired->t) << ',' << detail::num(c.paired->dof) << ',' << detail::num(c.paired->p);
        } else {
            os << ",,";
        }
        os << ',' << (c.d ? detail::num(*c.d) : "") << '\n';
    }
    return os.str();
}

/// Condition x variant grid of "mean +/- std" plus the comparison list, aligned for a terminal.
inline std::string summary_text(const PlanSummary& s) {
    std::vector<std::pair<env::Variant, long>> cols;
    std::vector<agent::Condition> conds;
    for (const auto& r : s.rows) {
        if (std::find(cols.begin(), cols.end(), std::pair{r.variant, r.steps}) == cols.end())
            cols.emplace_back(r.variant, r.steps);
        if (std::find(conds.begin(), conds.end(), r.condition) == conds.end()) conds.push_back(r.condition);
    }
    std::sort(conds.begin(), conds.end());
    auto cell = [&](agent::Condition c, env::Variant v, long st) -> std::string {
        for (const auto& r : s.rows) {
            if (r.condition == c && r.variant == v && r.steps == st) {
                if (r.n == 0) return "-";
                char buf[64];
                if (std::isnan(r.std))
                    std::snprintf(buf, sizeof buf, "%.3f (n=%zu)", r.mean, r.n);
                else
                    std::snprintf(buf, sizeof buf, "%.3f +/- %.3f (n=%zu)", r.mean, r.std, r.n);
                return buf;
            }
        }
        return "-";
    };
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s", "condition");
    os << line;
    for (const auto& [v, st] : cols) {
        std::snprintf(line, sizeof line, " | %-26s", (std::string(env::variant_name(v)) + " " + std::to_string(st)).c_str());
        os << line;
    }
    os << '\n';
    for (auto c : conds) {
        std::snprintf(line, sizeof line, "%-16s", agent::condition_name(c));
        os << line;
        for (const auto& [v, st] : cols) {
            std::snprintf(line, sizeof line, " | %-26s", cell(c, v, st).c_str());
            os << line;
        }
        os << '\n';
    }
    if (!s.comparisons.empty()) {
        os << '\n';
        for (const auto& c : s.comparisons) {
            const auto& t = c.primary_test();
            char d[32] = "n/a";
            if (c.d) std::snprintf(d, sizeof d, "%.3f", *c.d);
            std::snprintf(line, sizeof line, "%-14s vs %-16s %-9s %6ld  %-6s t=%8.3f p=%.4g d=%s\n",
                          agent::condition_name(c.a), agent::condition_name(c.b), env::variant_name(c.variant),
                          c.steps, c.primary(), t.t, t.p, d);
            os << line;
        }
    }
    for (const auto& w : s.warnings) os << "warning: " << w << '\n';
    return os.str();
}

}  // namespace cortexlab::experiments
