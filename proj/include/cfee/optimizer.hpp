// SPDX-License-Identifier: Apache-2.0
//
// cfee - energy efficiency of limited-backhaul cell-free massive MIMO
// Copyright (C) 2026 The cfee authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "cfee/gp.hpp"
#include "cfee/network.hpp"
#include "cfee/params.hpp"
#include "cfee/performance.hpp"
#include "cfee/quantizer.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cfee
{
    // Lowest power a GP variable may take, relative to p_max (GPs live on the open orthant).
    inline constexpr double power_floor_ratio = 1e-9;

    // Receiver filters maximizing each user's SINR for fixed powers: u_k = B_k^{-1} Gamma_k,
    // normalized. B_k is diagonal plus a low-rank pilot-contamination part and is inverted
    // with the Woodbury identity.
    Eigen::MatrixXd design_filters(const Eigen::VectorXd &q, const NetworkStats &stats, const QuantizerSpec &spec,
                                   const SystemParams &params);

    // SINR threshold 2^{S_r / (1 - tau_p/tau_c)} - 1 for every user (0 when S_r = 0).
    Eigen::VectorXd sinr_targets(const SystemParams &params);

    struct PmpResult
    {
        bool feasible = false;
        Eigen::VectorXd q;
        std::vector<int> violating_users; // users short of their target at full power
        gp::GpStatus status = gp::GpStatus::optimal;
    };

    // Minimum total power meeting every SE target with the filters U held fixed.
    PmpResult solve_pmp(const Eigen::MatrixXd &U, const NetworkStats &stats, const QuantizerSpec &spec,
                        const SystemParams &params);

    // Sum q+ / sum p_max, clamped to [0, 1].
    double compute_nu_star(const Eigen::VectorXd &q_plus, const std::vector<double> &p_max);

    struct ScaOptions
    {
        double delta = 0.1;     // trust region
        double tol = 0.01;      // max |t_new - t_old| to stop
        int max_iterations = 30;
        double gp_tol = 1e-7;
    };

    struct ScaIterate
    {
        int iteration = 0;
        Eigen::VectorXd q;
        Eigen::VectorXd t_hat;   // SINRs at the point the GP was built around
        Eigen::VectorXd t;       // slack SINRs returned by the GP
        Eigen::VectorXd sinr;    // true SINRs at the accepted q
        double surrogate = 0.0;  // prod (1 + t_k)
        double product = 0.0;    // prod (1 + SINR_k(q))
        double gp_violation = 0.0;
        int newton_steps = 0;
    };

    enum class ScaStatus
    {
        converged,
        iteration_cap,
        infeasible,
    };

    struct ScaResult
    {
        ScaStatus status = ScaStatus::infeasible;
        Eigen::VectorXd q;
        Eigen::VectorXd t;
        Eigen::VectorXd sinr;
        std::vector<ScaIterate> trace;
    };

    // Core SCA on the posynomial SINR form. targets[k] = 0 drops the SE constraint of k.
    ScaResult sca_power_allocation(const SinrCoefficients &coeffs, double nu, const Eigen::VectorXd &q_init,
                                   const std::vector<double> &p_max, const Eigen::VectorXd &targets,
                                   const ScaOptions &options = {}, const Eigen::VectorXd *q_restart = nullptr);

    ScaResult sca_power_allocation(const Eigen::MatrixXd &U, double nu, const Eigen::VectorXd &q_init,
                                   const SystemParams &params, const NetworkStats &stats, const QuantizerSpec &spec,
                                   const ScaOptions &options = {}, const Eigen::VectorXd *q_restart = nullptr);

    // One SCA subproblem, exposed for inspection and debugging dumps.
    gp::GpProblem build_sca_gp(const SinrCoefficients &coeffs, double nu, const Eigen::VectorXd &t_hat,
                               const std::vector<double> &p_max, const Eigen::VectorXd &targets, double delta);

    struct Algorithm1Options
    {
        ScaOptions sca;
        double per_user_tol = 0.01;  // on the per-user SE between outer iterations
        double ee_rel_tol = 1e-3;
        int max_outer = 50;
    };

    struct OuterIterate
    {
        int iteration = 0;
        double ee = 0.0;
        double sum_se = 0.0;
        double product = 0.0; // prod (1 + SINR_k)
        double max_se_change = 0.0;
        int sca_iterations = 0;
    };

    struct Algorithm1Result
    {
        bool feasible = false;
        bool converged = false;
        SolutionState state;
        std::vector<OuterIterate> trace;
        std::vector<std::pair<int, ScaIterate>> sca_trace; // (outer iteration, SCA iterate)
    };

    // Alternates SCA power allocation and filter design at a fixed budget fraction nu.
    // q_pmp is the power-minimization solution the iteration is seeded from.
    Algorithm1Result algorithm1(double nu, const SystemParams &params, const NetworkStats &stats,
                                const QuantizerSpec &spec, const Eigen::VectorXd &q_pmp,
                                const Algorithm1Options &options = {});

    // Same, solving the power-minimization problem first.
    Algorithm1Result algorithm1(double nu, const SystemParams &params, const NetworkStats &stats,
                                const QuantizerSpec &spec, const Algorithm1Options &options = {});

    struct NuSearchOptions
    {
        int grid_size = 12;
        double nu_floor = 1e-3;
        Algorithm1Options algorithm;
    };

    struct NuPoint
    {
        double nu = 0.0;
        bool feasible = false;
        int outer_iterations = 0;
        SolutionState state;
    };

    struct NuSearchResult
    {
        bool feasible = false;
        double nu_star = 0.0;
        Eigen::VectorXd q_pmp;
        std::vector<NuPoint> points;
        int best_index = -1;
        SolutionState best;
    };

    // Log-spaced grid on [max(nu_star, floor), 1].
    std::vector<double> nu_grid(double nu_star, int size, double floor = 1e-3);

    NuSearchResult maximize_ee(const SystemParams &params, const NetworkStats &stats, const QuantizerSpec &spec,
                               const NuSearchOptions &options = {});

    struct BitSearchResult
    {
        std::vector<int> bits;
        std::vector<NuSearchResult> results; // one per entry of bits
        int best_index = -1;
    };

    // Outer search over the number of quantization bits. Bit counts whose backhaul rate
    // exceeds C_bh are reported infeasible.
    BitSearchResult maximize_ee_over_bits(const SystemParams &params, const NetworkStats &stats,
                                          const std::vector<int> &bits, const NuSearchOptions &options = {});

    // q_k = p_max[k], u_k = 1/sqrt(M).
    SolutionState equal_power_baseline(const SystemParams &params, const NetworkStats &stats,
                                       const QuantizerSpec &spec);
}
