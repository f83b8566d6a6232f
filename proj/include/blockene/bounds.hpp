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
#pragma once

#include <stdexcept>
#include <string>

namespace blockene {

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PopulationParams {
    double M = 1e6;        // citizens
    double alpha = 0.75;   // honest citizen fraction, lower bound
    double gamma = 0.8;    // corrupt politician fraction, upper bound
    int m = 25;            // safe-sample fan-out
    double p = 0.002;      // committee probability, mean / M
    double kappa = 30;     // each tail event fails with probability <= 2^-kappa

    double mean() const { return M * p; }
};

struct SizeBounds {
    double n_star = 0;
    double n_tilde = 0;
    double p_c = 1;        // P(n < n_star)
    double p_c_prime = 1;  // P(n > n_tilde)
};

struct Slacks {
    double eps_f = 0;
    double eps_g = 0;
    double eps_m = 0;
};

struct CommitteeBounds {
    SizeBounds size;
    Slacks slack;
    double eps_c = 0;
    double n_g_star = 0;
    double n_b_tilde = 0;
    double gap_min = 0;
    double p_g = 0;  // honest fraction tail
    double p_f = 0;  // fan-out failure tail
    double p_m = 0;  // malicious fraction tail

    double n_star() const { return size.n_star; }
    double n_tilde() const { return size.n_tilde; }
};

class InfeasibleConfig : public std::runtime_error {
public:
    InfeasibleConfig(const std::string& what, CommitteeBounds b) : std::runtime_error(what), bounds(b) {}
    CommitteeBounds bounds;
};

double kl_bernoulli(double x, double y);

// Smallest eps with kl(q + eps, q) * n >= kappa ln 2 (capped at 1 - q).
double min_slack_up(double q, double n, double kappa);
// Smallest eps with kl(q - eps, q) * n >= kappa ln 2 (capped at q).
double min_slack_down(double q, double n, double kappa);

SizeBounds committee_size_bounds(const PopulationParams& params, double eps_c);
// Good/bad citizen bounds for explicit slacks. Throws InfeasibleConfig when
// gap_min < 1; with check = false the bounds are returned regardless.
CommitteeBounds good_bad_bounds(const PopulationParams& params, const SizeBounds& size, Slacks slack,
                                bool check = true);

// Slacks sized so each tail event at the smallest committee stays below
// 2^-kappa.
Slacks minimal_slacks(const PopulationParams& params, double n_star);
CommitteeBounds derive_bounds(const PopulationParams& params, double eps_c);
// eps_c chosen as the smallest symmetric slack meeting 2^-kappa on both sides.
double minimal_eps_c(const PopulationParams& params);
CommitteeBounds derive_bounds(const PopulationParams& params);

// Every eligible citizen sits on the committee (k_bits = 0): the size is
// exactly n and the honest count exactly alpha n, so only the fan-out tail
// remains.
CommitteeBounds full_committee_bounds(double n, double alpha, double gamma, int m, double kappa, bool check = true);

struct MeanSearch {
    double mean = 0;
    CommitteeBounds bounds;
};

// Smallest integer mean committee size with gap_min >= 1.
MeanSearch minimal_committee_mean(PopulationParams params, double lo = 10, double hi = 200000);

// Smallest x with P(Binomial(n, eps) >= x) <= 2^-kappa.
int fooled_allowance(double n, double eps, double kappa);

struct ThresholdPlan {
    int n_g_star = 0;   // floor
    int n_b_tilde = 0;  // ceil
    int fooled = 0;     // read plus write allowance
    int t_star = 0;
    int delta = 0;
};

// n_b + fooled < t_star <= n_g - fooled; delta is the largest value with
// n_b + delta < n_g.
ThresholdPlan plan_thresholds(const CommitteeBounds& b, int fooled);
bool threshold_condition(int n_b_tilde, int n_g_star, int fooled, int t_star);

}  // namespace blockene
