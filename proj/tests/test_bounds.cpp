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

#include <doctest.h>

#include <cmath>

#include "blockene/bounds.hpp"

using namespace blockene;

namespace {

PopulationParams reference_params() {
    PopulationParams p;
    p.M = 1e6;
    p.alpha = 0.75;
    p.gamma = 0.8;
    p.m = 25;
    p.p = 0.002;
    p.kappa = 30;
    return p;
}

}  // namespace

TEST_CASE("kl divergence values and domain") {
    CHECK(kl_bernoulli(0.3, 0.3) == doctest::Approx(0).epsilon(1e-12));
    CHECK(kl_bernoulli(0.5, 0.25) == doctest::Approx(0.1438).epsilon(1e-3));
    CHECK(std::abs(kl_bernoulli(0.0017, 0.002) * 1e6 - 23.76) < 0.05);
    CHECK(kl_bernoulli(0.0, 0.5) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(kl_bernoulli(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(kl_bernoulli(0.5, 1.0), DomainError);
}

TEST_CASE("committee size bounds at one million citizens") {
    SizeBounds s = committee_size_bounds(reference_params(), 0.0003);
    CHECK(s.n_star == doctest::Approx(1700));
    CHECK(s.n_tilde == doctest::Approx(2300));
    CHECK(s.p_c < std::ldexp(1.0, -30));
    CHECK(s.p_c_prime < std::ldexp(1.0, -30));
    CHECK(s.p_c == doctest::Approx(4.785e-11).epsilon(1e-3));
    CHECK(s.p_c_prime == doctest::Approx(4.610e-10).epsilon(1e-3));
    SizeBounds z = committee_size_bounds(reference_params(), 0);
    CHECK(z.n_star == doctest::Approx(2000));
    CHECK(z.n_tilde == doctest::Approx(2000));
    CHECK(z.p_c == 1);
    CHECK_THROWS_AS(committee_size_bounds(reference_params(), 0.003), DomainError);
}

TEST_CASE("good and bad citizen bounds reproduce the reference values") {
    CommitteeBounds b = derive_bounds(reference_params(), 0.0003);
    // Frozen from an independent root-finding implementation.
    CHECK(b.n_g_star == doctest::Approx(1137.1664).epsilon(1e-6));
    CHECK(b.n_b_tilde == doctest::Approx(766.8808).epsilon(1e-6));
    CHECK(b.gap_min == doctest::Approx(3.5166).epsilon(1e-3));
    CHECK(b.slack.eps_g == doctest::Approx(0.069603).epsilon(1e-4));
    CHECK(b.slack.eps_f == doctest::Approx(0.013088).epsilon(1e-4));
    CHECK(int(std::floor(b.n_g_star)) >= 1137);
    CHECK(int(std::ceil(b.n_b_tilde)) <= 772);
    CHECK(int(std::floor(b.gap_min)) >= 1);
    CHECK(b.p_f <= std::ldexp(1.0, -30) * 1.0001);
    CHECK(b.p_m <= std::ldexp(1.0, -30) * 1.0001);
}

TEST_CASE("no politician corruption removes the fan-out term") {
    PopulationParams p = reference_params();
    p.gamma = 0;
    CommitteeBounds b = derive_bounds(p, 0.0003);
    CHECK(b.slack.eps_f == 0);
    CHECK(b.n_g_star == doctest::Approx((p.alpha - b.slack.eps_g) * b.n_star()));
}

TEST_CASE("thirty percent corruption needs a larger committee") {
    PopulationParams p = reference_params();
    p.alpha = 0.7;
    SizeBounds s = committee_size_bounds(p, 0.0003);
    CHECK_THROWS_AS(good_bad_bounds(p, s, minimal_slacks(p, s.n_star)), InfeasibleConfig);
    CHECK(minimal_committee_mean(p).mean > 2300);
}

TEST_CASE("committee mean search matches the reference search") {
    struct Row {
        double corrupt_citizens, corrupt_politicians, want;
    };
    // Frozen from the independent implementation.
    for (Row r : {Row{0.2, 0.8, 818}, Row{0.2, 0.75, 718}, Row{0.25, 0.8, 1974}, Row{0.25, 0.75, 1706},
                  Row{0.3, 0.8, 12350}, Row{0.3, 0.75, 9907}}) {
        PopulationParams p = reference_params();
        p.alpha = 1 - r.corrupt_citizens;
        p.gamma = r.corrupt_politicians;
        MeanSearch s = minimal_committee_mean(p);
        CHECK(s.mean == r.want);
        CHECK(s.bounds.gap_min >= 1);
    }
}

TEST_CASE("bound monotonicity over a parameter grid") {
    for (double a = 0.7; a <= 0.95; a += 0.05) {
        double prev = 1e18;
        for (double g = 0.5; g <= 0.95; g += 0.05) {
            PopulationParams p = reference_params();
            p.alpha = a;
            p.gamma = g;
            double ng = derive_bounds(p, 0.0003).n_g_star;
            CHECK(ng <= prev + 1e-9);
            prev = ng;
        }
    }
    for (double g = 0.5; g <= 0.95; g += 0.05) {
        double prev = -1;
        for (double a = 0.7; a <= 0.95; a += 0.05) {
            PopulationParams p = reference_params();
            p.alpha = a;
            p.gamma = g;
            double ng = derive_bounds(p, 0.0003).n_g_star;
            CHECK(ng >= prev - 1e-9);
            prev = ng;
        }
    }
}

TEST_CASE("positive gap implies a two-thirds good majority") {
    for (double a : {0.75, 0.8, 0.85, 0.9}) {
        for (double g : {0.5, 0.75, 0.8}) {
            PopulationParams p = reference_params();
            p.alpha = a;
            p.gamma = g;
            CommitteeBounds b = derive_bounds(p, 0.0003);
            if (b.gap_min < 1) continue;
            for (double n = b.n_star(); n <= b.n_tilde(); n += 50) {
                double good_frac = b.n_g_star / b.n_star();
                double bad_frac = b.n_b_tilde / b.n_tilde();
                CHECK(good_frac * n > 2 * n / 3);
                CHECK(good_frac * n > 2 * bad_frac * n);
            }
        }
    }
}

TEST_CASE("fooled-citizen allowance matches the binomial tail") {
    CHECK(fooled_allowance(2300, std::exp(-7.5), 30) == 14);
    CHECK(fooled_allowance(2300, std::pow(1 - 800.0 / 8192, 72), 30) == 14);
    CHECK(fooled_allowance(200, std::exp(-7.5), 30) == 7);
    CHECK(fooled_allowance(200, std::pow(1 - 48.0 / 256, 40), 30) == 6);
    CHECK(fooled_allowance(200, 0, 30) == 0);
}

TEST_CASE("threshold planning and the commit threshold condition") {
    CHECK(threshold_condition(772, 1137, 36, 850));
    CHECK_FALSE(threshold_condition(772, 1137, 36, 808));
    CHECK_FALSE(threshold_condition(772, 1137, 36, 1102));
    CommitteeBounds full = full_committee_bounds(200, 0.75, 0.8, 25, 30);
    CHECK(full.n_g_star == doctest::Approx(141.3929).epsilon(1e-5));
    CHECK(full.n_b_tilde == doctest::Approx(58.6071).epsilon(1e-5));
    ThresholdPlan t = plan_thresholds(full, 13);
    CHECK(t.n_g_star == 141);
    CHECK(t.n_b_tilde == 59);
    CHECK(threshold_condition(t.n_b_tilde, t.n_g_star, t.fooled, t.t_star));
    CHECK(t.n_b_tilde + t.delta < t.n_g_star);
    CHECK_THROWS_AS(plan_thresholds(full, 50), InfeasibleConfig);
}
