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

#include "cfee/network.hpp"
#include "cfee/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cfee
{
    PilotAssignment assign_pilots(int K, int tau_p, std::uint64_t seed)
    {
        if (K < 1 || tau_p < 1)
            throw std::invalid_argument("assign_pilots: K and tau_p must be >= 1");
        PilotAssignment out;
        out.index.resize(static_cast<std::size_t>(K));
        if (tau_p >= K)
        {
            for (int k = 0; k < K; ++k)
                out.index[k] = k;
        }
        else
        {
            auto eng = make_engine(seed, Stream::pilots);
            std::uniform_int_distribution<int> pick(0, tau_p - 1);
            for (int k = 0; k < K; ++k)
                out.index[k] = pick(eng);
        }
        out.gram = pilot_gram_from_index(out.index);
        return out;
    }

    Eigen::MatrixXd pilot_gram_from_index(const std::vector<int> &index)
    {
        const auto K = static_cast<Eigen::Index>(index.size());
        Eigen::MatrixXd gram(K, K);
        for (Eigen::Index i = 0; i < K; ++i)
            for (Eigen::Index j = 0; j < K; ++j)
                gram(i, j) = index[i] == index[j] ? 1.0 : 0.0;
        return gram;
    }

    EstimationStats estimation_stats(const Eigen::MatrixXd &beta, const Eigen::MatrixXd &pilot_gram,
                                     double pilot_snr, int tau_p)
    {
        if ((beta.array() < 0.0).any())
            throw std::invalid_argument("estimation_stats: beta must be nonnegative");
        if (pilot_gram.rows() != beta.cols() || pilot_gram.cols() != beta.cols())
            throw std::invalid_argument("estimation_stats: pilot_gram must be K x K");

        const double tp = tau_p * pilot_snr;
        const double sq = std::sqrt(tp);
        // denom(m,k) = tp * sum_k' beta(m,k') |phi_k^H phi_k'|^2 + 1
        const Eigen::MatrixXd denom = (tp * (beta * pilot_gram)).array() + 1.0;

        EstimationStats out;
        out.c = (sq * beta.array()) / denom.array();
        out.gamma = sq * beta.array() * out.c.array();
        return out;
    }

    double wrapped_distance(const Eigen::Vector2d &a, const Eigen::Vector2d &b, double side)
    {
        double dx = std::abs(a.x() - b.x());
        double dy = std::abs(a.y() - b.y());
        dx = std::min(dx, side - dx);
        dy = std::min(dy, side - dy);
        return std::hypot(dx, dy);
    }

    NetworkStats stats_from_beta(const Eigen::MatrixXd &beta, const Eigen::MatrixXd &pilot_gram,
                                 double pilot_snr, int tau_p)
    {
        NetworkStats s;
        s.beta = beta;
        s.pilot_gram = pilot_gram;
        const auto est = estimation_stats(beta, pilot_gram, pilot_snr, tau_p);
        s.c = est.c;
        s.gamma = est.gamma;
        s.pilot_index.resize(static_cast<std::size_t>(beta.cols()));
        // Recover sequence labels from the 0/1 Gram pattern (first user of a group names it).
        for (Eigen::Index k = 0; k < beta.cols(); ++k)
        {
            int label = static_cast<int>(k);
            for (Eigen::Index j = 0; j < k; ++j)
                if (pilot_gram(k, j) > 0.5)
                {
                    label = s.pilot_index[j];
                    break;
                }
            s.pilot_index[k] = label;
        }
        return s;
    }

    NetworkStats generate_network(const SystemParams &params, std::uint64_t seed)
    {
        validate_params(params);
        const int M = params.M, K = params.K;
        const double D = params.area_km;

        NetworkStats s;
        s.seed = seed;
        s.ap_positions_km.resize(2, M);
        s.user_positions_km.resize(2, K);

        std::uniform_real_distribution<double> uni(0.0, D);
        auto ap_eng = make_engine(seed, Stream::ap_positions);
        for (int m = 0; m < M; ++m)
        {
            s.ap_positions_km(0, m) = uni(ap_eng);
            s.ap_positions_km(1, m) = uni(ap_eng);
        }
        auto ue_eng = make_engine(seed, Stream::user_positions);
        for (int k = 0; k < K; ++k)
        {
            s.user_positions_km(0, k) = uni(ue_eng);
            s.user_positions_km(1, k) = uni(ue_eng);
        }

        const auto &pl = params.path_loss;
        auto sh_eng = make_engine(seed, Stream::shadowing);
        std::normal_distribution<double> gauss(0.0, 1.0);

        s.distance_km.resize(M, K);
        s.beta.resize(M, K);
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k)
            {
                const double d = wrapped_distance(s.ap_positions_km.col(m), s.user_positions_km.col(k), D);
                // Draw for every link so the shadowing stream does not depend on the geometry.
                const double z = gauss(sh_eng);
                double gain_db = pl.gain_db(d);
                if (d > pl.d1_km)
                    gain_db += pl.shadowing_db * z;
                s.distance_km(m, k) = d;
                s.beta(m, k) = std::pow(10.0, gain_db / 10.0);
            }

        const auto pilots = assign_pilots(K, params.tau_p, seed);
        s.pilot_index = pilots.index;
        s.pilot_gram = pilots.gram;
        const auto est = estimation_stats(s.beta, s.pilot_gram, params.pilot_snr, params.tau_p);
        s.c = est.c;
        s.gamma = est.gamma;
        return s;
    }
}
