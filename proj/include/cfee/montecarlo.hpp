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

#include "cfee/network.hpp"
#include "cfee/params.hpp"
#include "cfee/performance.hpp"
#include "cfee/quantizer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace cfee
{
    // Scale fed to the per-AP automatic gain control of the quantizer.
    enum class QuantizerScale
    {
        closed_form,  // N [rho (2 beta - gamma) sum q beta + gamma]
        exact_moment, // exact second moment of g^H y under the channel model
    };

    struct SimulationOptions
    {
        int N = 1;
        double rho = 1.0;
        double pilot_snr = 1.0;
        int tau_p = 1;
        QuantizerScale scale = QuantizerScale::closed_form;
        bool inject_noise = true;   // receiver noise during data; pilot noise is always present
        bool bypass_quantizer = false;
        int threads = 1;
        int batch = 1024; // draws per RNG partition; results do not depend on threads
    };

    SimulationOptions simulation_options(const SystemParams &params);

    // Exact E|g_mk^H y_m|^2 for every AP (orthonormal pilot sequences).
    Eigen::VectorXd exact_quantizer_input_power(int k, const Eigen::VectorXd &q, const NetworkStats &stats,
                                                double rho, int N, bool with_noise = true);

    struct TermEstimate
    {
        double empirical = 0.0;
        double std_error = 0.0;
        double closed_form = 0.0;

        double rel_error() const;
    };

    struct UserTerms
    {
        TermEstimate ds;
        TermEstimate bu;
        std::vector<TermEstimate> iui; // entry k is zero
        TermEstimate iui_total;
        TermEstimate tn;
        TermEstimate tqe;
        TermEstimate sinr;
        double tqe_per_ap = 0.0; // sum_m u_mk^2 E|e_mk|^2, i.e. E|TQE|^2 without cross-AP terms
        double max_term_correlation = 0.0; // largest normalized pairwise correlation among the terms
    };

    struct TermReport
    {
        long n_draws = 0;
        std::vector<UserTerms> users;
        double gain = 1.0;                   // Bussgang gain used to split off the distortion
        Eigen::MatrixXd input_power;         // empirical E|z_mk|^2
        Eigen::MatrixXd input_power_model;   // the scale the quantizer used (squared)
        Eigen::MatrixXd input_power_exact;   // exact second moment
        double input_kurtosis = 0.0;         // mean over links of the real-part kurtosis (3 if Gaussian)
        double gamma_max_z = 0.0;            // largest |E|g^|^2/N - gamma| in standard errors
        double mmse_max_correlation = 0.0;   // largest normalized corr(g^, g - g^)
    };

    // Draws small-scale fading, pilots, symbols and noise; runs MMSE estimation, per-AP
    // matched filtering and quantization; splits r_k into its terms.
    // Pilot sequences must be orthonormal with a 0/1 Gram matrix (shared or orthogonal).
    TermReport simulate_terms(const NetworkStats &stats, const QuantizerSpec &spec, const Eigen::VectorXd &q,
                              const Eigen::MatrixXd &U, long n_draws, std::uint64_t seed,
                              const SimulationOptions &options);

    // DS / (BU + sum IUI + TN + TQE / a~^2) assembled from the simulated terms.
    Eigen::VectorXd empirical_sinr(const NetworkStats &stats, const QuantizerSpec &spec, const Eigen::VectorXd &q,
                                   const Eigen::MatrixXd &U, long n_draws, std::uint64_t seed,
                                   const SimulationOptions &options);

    struct BussgangCheck
    {
        double gain = 0.0;        // E{z h(z)} / E{z^2}
        double correlation = 0.0; // |E{z (h(z) - a z)}| / E{z^2}
        double distortion = 0.0;  // E{(h(z) - a z)^2} / E{z^2}
    };

    // Real Gaussian inputs of standard deviation sigma through the quantizer. The residual
    // uses `gain` when given, else spec.gain.
    BussgangCheck bussgang_orthogonality_check(const QuantizerSpec &spec, long n_draws, std::uint64_t seed,
                                               double sigma = 1.0, const double *gain = nullptr);
}
