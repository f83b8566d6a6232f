// Copyright 2026 The Blockene Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "blockene/bounds.hpp"

#include <cmath>

namespace blockene {

namespace {

double xlogx_ratio(double x, double y) { return x == 0 ? 0.0 : x * std::log(x / y); }

}  // namespace

double kl_bernoulli(double x, double y) {
    if (!(y > 0 && y < 1)) throw DomainError("kl_bernoulli: y must lie in (0,1)");
    if (!(x >= 0 && x <= 1)) throw DomainError("kl_bernoulli: x must lie in [0,1]");
    return xlogx_ratio(x, y) + xlogx_ratio(1 - x, 1 - y);
}

double min_slack_up(double q, double n, double kappa) {
    if (q <= 0) return 0;
    if (q >= 1) return 0;
    const double target = kappa * std::log(2.0);
    if (kl_bernoulli(1.0, q) * n < target) return 1 - q;
    double lo = 0, hi = 1 - q;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (kl_bernoulli(q + mid, q) * n >= target ? hi : lo) = mid;
    }
    return hi;
}

double min_slack_down(double q, double n, double kappa) {
    if (q <= 0 || q >= 1) return 0;
    const double target = kappa * std::log(2.0);
    if (kl_bernoulli(0.0, q) * n < target) return q;
    double lo = 0, hi = q;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (kl_bernoulli(q - mid, q) * n >= target ? hi : lo) = mid;
    }
    return hi;
}

SizeBounds committee_size_bounds(const PopulationParams& params, double eps_c) {
    const double p = params.p;
    if (!(p > 0 && p < 1)) throw DomainError("committee probability must lie in (0,1)");
    if (eps_c < 0 || eps_c >= std::min(p, 1 - p)) throw DomainError("eps_c out of range");
    SizeBounds s;
    s.n_star = params.M * (p - eps_c);
    s.n_tilde = params.M * (p + eps_c);
    if (eps_c == 0) return s;
    s.p_c = std::exp(-kl_bernoulli(p - eps_c, p) * params.M);
    s.p_c_prime = std::exp(-kl_bernoulli(p + eps_c, p) * params.M);
    return s;
}

CommitteeBounds good_bad_bounds(const PopulationParams& params, const SizeBounds& size, Slacks e, bool check) {
    const double a = params.alpha;
    const double g = std::pow(params.gamma, params.m);
    CommitteeBounds b;
    b.size = size;
    b.slack = e;
    const double good_frac = (1 - g - e.eps_f) * (a - e.eps_g);
    const double bad_frac = 1 - a + e.eps_m + (a + e.eps_g) * (g + e.eps_f);
    b.n_g_star = good_frac * size.n_star;
    b.n_b_tilde = bad_frac * size.n_tilde;
    b.gap_min = (good_frac - 2 * bad_frac) * size.n_star;
    const double n = size.n_star;
    auto tail = [&](double q, double eps, bool up) {
        if (q <= 0 || q >= 1) return 0.0;
        if (eps <= 0) return 1.0;
        double x = up ? q + eps : q - eps;
        if (x < 0 || x > 1) return 0.0;
        return std::exp(-kl_bernoulli(x, q) * n);
    };
    b.p_g = std::max(tail(a, e.eps_g, false), tail(a, e.eps_g, true));
    b.p_f = tail(g, e.eps_f, true);
    b.p_m = tail(1 - a, e.eps_m, true);
    if (check && b.gap_min < 1) throw InfeasibleConfig("gap_min < 1: configuration cannot guarantee consensus", b);
    return b;
}

Slacks minimal_slacks(const PopulationParams& params, double n_star) {
    const double a = params.alpha;
    const double g = std::pow(params.gamma, params.m);
    Slacks s;
    s.eps_g = std::max(min_slack_down(a, n_star, params.kappa), min_slack_up(a, n_star, params.kappa));
    s.eps_f = min_slack_up(g, n_star, params.kappa);
    s.eps_m = min_slack_up(1 - a, n_star, params.kappa);
    return s;
}

CommitteeBounds derive_bounds(const PopulationParams& params, double eps_c) {
    SizeBounds size = committee_size_bounds(params, eps_c);
    CommitteeBounds b = good_bad_bounds(params, size, minimal_slacks(params, size.n_star), false);
    b.eps_c = eps_c;
    return b;
}

double minimal_eps_c(const PopulationParams& params) {
    return std::max(min_slack_down(params.p, params.M, params.kappa), min_slack_up(params.p, params.M, params.kappa));
}

CommitteeBounds derive_bounds(const PopulationParams& params) { return derive_bounds(params, minimal_eps_c(params)); }

CommitteeBounds full_committee_bounds(double n, double alpha, double gamma, int m, double kappa, bool check) {
    PopulationParams p;
    p.M = n;
    p.alpha = alpha;
    p.gamma = gamma;
    p.m = m;
    p.kappa = kappa;
    p.p = 1;
    SizeBounds size{n, n, 0, 0};
    Slacks s;
    s.eps_f = min_slack_up(std::pow(gamma, m), n, kappa);
    return good_bad_bounds(p, size, s, check);
}

MeanSearch minimal_committee_mean(PopulationParams params, double lo, double hi) {
    auto feasible = [&](double mean) {
        PopulationParams q = params;
        q.p = mean / q.M;
        if (q.p >= 0.5) return false;
        const double eps_c = minimal_eps_c(q);
        if (eps_c >= q.p) return false;
        return derive_bounds(q, eps_c).gap_min >= 1;
    };
    double l = std::floor(lo), h = std::ceil(hi);
    if (!feasible(h)) throw InfeasibleConfig("no feasible committee mean below search limit", {});
    if (feasible(l)) h = l;
    while (h - l > 1) {
        double mid = std::floor((l + h) / 2);
        (feasible(mid) ? h : l) = mid;
    }
    PopulationParams q = params;
    q.p = h / q.M;
    return {h, derive_bounds(q)};
}

int fooled_allowance(double n, double eps, double kappa) {
    if (eps <= 0) return 0;
    const int N = int(std::ceil(n));
    const double limit = -kappa * std::log(2.0);
    // log P(X = x) via lgamma; tail summed from the top for stability.
    auto logpmf = [&](int x) {
        return std::lgamma(N + 1.0) - std::lgamma(x + 1.0) - std::lgamma(N - x + 1.0) + x * std::log(eps) +
               (N - x) * std::log1p(-eps);
    };
    for (int x = 0; x <= N; ++x) {
        double mx = logpmf(x), s = 0;
        for (int y = x; y <= N; ++y) {
            double t = logpmf(y);
            s += std::exp(t - mx);
            if (t - mx < -50) break;
        }
        if (mx + std::log(s) <= limit) return x;
    }
    return N + 1;
}

ThresholdPlan plan_thresholds(const CommitteeBounds& b, int fooled) {
    ThresholdPlan t;
    t.n_g_star = int(std::floor(b.n_g_star));
    t.n_b_tilde = int(std::ceil(b.n_b_tilde));
    t.fooled = fooled;
    const int lo = t.n_b_tilde + fooled + 1;
    const int hi = t.n_g_star - fooled;
    if (lo > hi) throw InfeasibleConfig("empty commit-threshold window", b);
    t.t_star = lo + (hi - lo) / 2;
    t.delta = t.n_g_star - t.n_b_tilde - 1;
    return t;
}

bool threshold_condition(int n_b_tilde, int n_g_star, int fooled, int t_star) {
    return n_b_tilde + fooled < t_star && t_star <= n_g_star - fooled;
}

}  // namespace blockene
