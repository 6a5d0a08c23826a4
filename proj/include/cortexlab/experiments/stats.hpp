#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cortexlab/numeric/errors.hpp"

namespace cortexlab::stats {

inline double food_death_ratio(long food, long deaths) {
    if (food < 0 || deaths < 0) throw UsageError("food_death_ratio: negative count");
    return static_cast<double>(food) / static_cast<double>(std::max(deaths, 1L));
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw UsageError("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / xs.size();
}

/// ddof = 1
inline double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw UsageError("variance: need at least 2 samples");
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / (xs.size() - 1);
}

inline double stddev(std::span<const double> xs) { return std::sqrt(variance(xs)); }

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0 && b > 0)) throw UsageError("incomplete_beta: parameters must be positive");
    if (x < 0.0 || x > 1.0) throw UsageError("incomplete_beta: x outside [0,1]");
    if (x == 0.0 || x == 1.0) return x;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of Student's t with `dof` degrees of freedom.
inline double t_two_sided_p(double t, double dof) {
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

struct TTest {
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0;
    bool degenerate = false;  // zero variance with a nonzero mean difference
};

inline TTest welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw UsageError("welch_t: each sample needs at least 2 values");
    const double va = variance(a) / a.size();
    const double vb = variance(b) / b.size();
    const double diff = mean(a) - mean(b);
    TTest r;
    r.dof = static_cast<double>(a.size() + b.size() - 2);
    if (va + vb == 0.0) {
        if (diff == 0.0) return r;
        r.degenerate = true;
        r.t = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.t = diff / std::sqrt(va + vb);
    r.dof = (va + vb) * (va + vb) / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1));
    r.p = t_two_sided_p(r.t, r.dof);
    return r;
}

inline TTest paired_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw UsageError("paired_t: samples must be index-aligned");
    if (a.size() < 2) throw UsageError("paired_t: need at least 2 pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    TTest r;
    r.dof = static_cast<double>(d.size() - 1);
    const double m = mean(d);
    const double sd = stddev(d);
    if (sd == 0.0) {
        if (m == 0.0) return r;
        r.degenerate = true;
        r.t = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.t = m / (sd / std::sqrt(static_cast<double>(d.size())));
    r.p = t_two_sided_p(r.t, r.dof);
    return r;
}

/// (mean a - mean b) / pooled sd; absent when the pooled sd is zero.
inline std::optional<double> cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw UsageError("cohens_d: each sample needs at least 2 values");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = std::sqrt(((na - 1) * variance(a) + (nb - 1) * variance(b)) / (na + nb - 2));
    if (pooled == 0.0) return std::nullopt;
    return (mean(a) - mean(b)) / pooled;
}

}  // namespace cortexlab::stats
