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
#include "cfee/quantizer.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cfee
{
    // Closed-form SINR ingredients for user k. Diagonal matrices are stored as vectors.
    struct SinrMatrices
    {
        int k = 0;
        Eigen::VectorXd gamma;              // Gamma_k, length M
        std::vector<Eigen::VectorXd> delta; // Delta_kk' for every k' (entry k unused, zero)
        std::vector<Eigen::VectorXd> d;     // diagonal of D_kk' for every k'
        Eigen::VectorXd r;                  // diagonal of R_k
    };

    SinrMatrices build_sinr_matrices(const NetworkStats &stats, const QuantizerSpec &spec, int k);

    // Ratio of quadratic forms for user k. Invariant to scaling u_k.
    double sinr(int k, const Eigen::VectorXd &q, const Eigen::VectorXd &u_k, const SinrMatrices &mats,
                const Eigen::MatrixXd &pilot_gram, double rho, int N);

    double spectral_efficiency(double sinr_value, int tau_p, int tau_c);

    // 2 K tau_f alpha / T_c, bit/s per AP.
    double backhaul_rate(int K, int tau_f, int alpha, double coherence_time_s);

    struct PowerBreakdown
    {
        double transmit = 0.0;
        double fixed = 0.0;
        double users = 0.0;
        double backhaul = 0.0;
        double total = 0.0;
        double backhaul_rate = 0.0;
        bool backhaul_overload = false; // R_bh > C_bh
    };

    PowerBreakdown total_power(const Eigen::VectorXd &q, const SystemParams &params, int alpha);

    // The SINR of every user written as q_k / (sum_{k'!=k} a_kk' q_k' + sum_k' b_kk' q_k' + c_k).
    // a has a zero diagonal. This is the posynomial form used by the power-allocation GPs.
    struct SinrCoefficients
    {
        Eigen::MatrixXd a;
        Eigen::MatrixXd b;
        Eigen::VectorXd c;

        Eigen::VectorXd sinr(const Eigen::VectorXd &q) const;
        double sinr(int k, const Eigen::VectorXd &q) const;
    };

    // Columns of U are the filters u_k. Users whose Gamma_k^T u_k vanishes get c_k = +inf.
    SinrCoefficients sinr_coefficients(const NetworkStats &stats, const QuantizerSpec &spec,
                                       const Eigen::MatrixXd &U, double rho, int N);

    Eigen::VectorXd all_sinrs(const Eigen::VectorXd &q, const Eigen::MatrixXd &U, const NetworkStats &stats,
                              const QuantizerSpec &spec, const SystemParams &params);

    double energy_efficiency(const Eigen::VectorXd &q, const Eigen::MatrixXd &U, int alpha,
                             const SystemParams &params, const NetworkStats &stats, const QuantizerSpec &spec);

    // Per-term powers of the received-signal decomposition for user k: |DS|^2, E|BU|^2,
    // E|IUI_kk'|^2 (entry k is zero), E|TN|^2 and E|TQE|^2.
    struct SinrTerms
    {
        double ds = 0.0;
        double bu = 0.0;
        Eigen::VectorXd iui;
        double tn = 0.0;
        double tqe = 0.0;

        // |DS|^2 / (BU + sum IUI + TN + TQE / a~^2)
        double sinr(double gain) const;
    };

    // Quantizer input power E|z_mk|^2 as used for the distortion term (one entry per AP).
    Eigen::VectorXd quantizer_input_power(int k, const Eigen::VectorXd &q, const NetworkStats &stats,
                                          double rho, int N);

    SinrTerms closed_form_terms(int k, const Eigen::VectorXd &q, const Eigen::VectorXd &u_k,
                                const NetworkStats &stats, const QuantizerSpec &spec, double rho, int N);

    // Everything reported about an operating point.
    struct SolutionState
    {
        Eigen::VectorXd q;
        Eigen::MatrixXd U;
        Eigen::VectorXd sinr;
        Eigen::VectorXd se;
        double sum_se = 0.0;
        double ee = 0.0; // bit/Joule
        PowerBreakdown power;
    };

    // Normalizes the columns of U and evaluates SINR, SE, power and EE.
    SolutionState evaluate_state(const Eigen::VectorXd &q, const Eigen::MatrixXd &U, const SystemParams &params,
                                 const NetworkStats &stats, const QuantizerSpec &spec);
}
