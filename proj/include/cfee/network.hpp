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

#include "cfee/params.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace cfee
{
    // Large-scale statistics of one network realization. Matrices are M x K (AP x user)
    // except pilot_gram, which is K x K and holds |phi_k^H phi_k'|^2.
    struct NetworkStats
    {
        Eigen::MatrixXd beta;
        Eigen::MatrixXd c;
        Eigen::MatrixXd gamma;
        Eigen::MatrixXd pilot_gram;
        Eigen::MatrixXd distance_km;
        Eigen::Matrix2Xd ap_positions_km;
        Eigen::Matrix2Xd user_positions_km;
        std::vector<int> pilot_index; // orthonormal sequence used by each user
        std::uint64_t seed = 0;

        int M() const { return static_cast<int>(beta.rows()); }
        int K() const { return static_cast<int>(beta.cols()); }
    };

    struct PilotAssignment
    {
        std::vector<int> index;
        Eigen::MatrixXd gram;
    };

    // Orthogonal pilots when tau_p >= K, otherwise each user picks one of tau_p
    // orthonormal sequences uniformly at random.
    PilotAssignment assign_pilots(int K, int tau_p, std::uint64_t seed);

    // Gram matrix of a given assignment (1 where two users share a sequence).
    Eigen::MatrixXd pilot_gram_from_index(const std::vector<int> &index);

    struct EstimationStats
    {
        Eigen::MatrixXd c;
        Eigen::MatrixXd gamma;
    };

    // MMSE scaling c_mk and estimate power gamma_mk = sqrt(tau_p p_p) beta_mk c_mk.
    EstimationStats estimation_stats(const Eigen::MatrixXd &beta, const Eigen::MatrixXd &pilot_gram,
                                     double pilot_snr, int tau_p);

    // Wrap-around distance on a side x side torus.
    double wrapped_distance(const Eigen::Vector2d &a, const Eigen::Vector2d &b, double side);

    // Drops APs and users uniformly in the D x D area, then fills beta, c, gamma and the
    // pilot Gram matrix. Deterministic in (params, seed).
    NetworkStats generate_network(const SystemParams &params, std::uint64_t seed);

    // Builds stats from a given beta matrix (used by tests and for hand-made instances).
    NetworkStats stats_from_beta(const Eigen::MatrixXd &beta, const Eigen::MatrixXd &pilot_gram,
                                 double pilot_snr, int tau_p);
}
