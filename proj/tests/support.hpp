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
#include "cfee/quantizer.hpp"
#include "cfee/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace cfee::testing
{
    // Reference quantizer table: bits, step, gain, distortion.
    struct TableRow
    {
        int bits;
        double step, gain, distortion;
    };

    inline constexpr TableRow table_one[] = {
        {1, 1.596, 0.6366, 0.2313},   {2, 0.9957, 0.88115, 0.10472},   {3, 0.586, 0.96256, 0.036037},
        {4, 0.3352, 0.98845, 0.011409}, {5, 0.1881, 0.996505, 0.003482}, {6, 0.1041, 0.99896, 0.0010389},
        {7, 0.0568, 0.99969, 0.0003042},
    };

    inline std::mt19937_64 engine(std::uint64_t seed)
    {
        return make_engine(seed, Stream::test_vectors);
    }

    // Random beta in [lo, hi] (log-uniform), orthogonal or given pilots.
    inline NetworkStats random_stats(int M, int K, std::mt19937_64 &eng, double pilot_snr = 10.0, int tau_p = 0,
                                     double lo = 1e-3, double hi = 1.0)
    {
        std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
        Eigen::MatrixXd beta(M, K);
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k)
                beta(m, k) = std::exp(u(eng));
        const int tp = tau_p > 0 ? tau_p : K;
        const auto pil = assign_pilots(K, tp, eng());
        return stats_from_beta(beta, pil.gram, pilot_snr, tp);
    }

    inline Eigen::VectorXd uniform_vector(int n, std::mt19937_64 &eng, double lo = 0.0, double hi = 1.0)
    {
        std::uniform_real_distribution<double> u(lo, hi);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i)
            v(i) = u(eng);
        return v;
    }

    inline Eigen::MatrixXd random_filters(int M, int K, std::mt19937_64 &eng)
    {
        Eigen::MatrixXd U(M, K);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k)
                U(m, k) = u(eng);
        for (int k = 0; k < K; ++k)
            U.col(k).normalize();
        return U;
    }

    // Small scenario used by several tests: two users near two APs.
    inline SystemParams desk_params(int M, int K)
    {
        SystemParams p = default_params();
        p.M = M;
        p.tau_p = std::max(K, 1);
        resize_users(p, K);
        return p;
    }

    // Random n-variable GP on the box [0.2, 5]^n: a posynomial objective with mixed-sign
    // exponents and `constraints` two-term posynomials that hold with slack at x = 1.
    inline gp::GpProblem random_gp(int n, int constraints, std::mt19937_64 &eng)
    {
        std::uniform_real_distribution<double> ex(-1.0, 1.0), co(0.2, 2.0), slack(0.3, 0.9);
        auto monomial = [&](double coeff) {
            gp::Monomial m(coeff);
            for (int i = 0; i < n; ++i)
                m.exponents.emplace_back(i, ex(eng));
            return m;
        };
        gp::GpProblem pr;
        for (int i = 0; i < n; ++i)
            pr.add_variable(0.2, 5.0);
        for (int t = 0; t < 3; ++t)
            pr.objective += monomial(co(eng));
        for (int c = 0; c < constraints; ++c)
        {
            const double w = co(eng), total = slack(eng);
            gp::Posynomial p;
            p += monomial(total * w / (1.0 + w));
            p += monomial(total / (1.0 + w));
            pr.inequalities.push_back(p);
        }
        return pr;
    }

    // Two-user instance used for the oracle comparisons: 16 APs, orthogonal pilots,
    // every user asking for 1 bit/s/Hz.
    struct DeskInstance
    {
        SystemParams params;
        NetworkStats stats;
        QuantizerSpec spec;
    };

    inline DeskInstance desk_instance(int K = 2, double se_req = 1.0, std::uint64_t seed = 3)
    {
        DeskInstance d;
        d.params = desk_params(16, K);
        d.params.se_req.assign(static_cast<std::size_t>(K), se_req);
        d.stats = generate_network(d.params, seed);
        d.spec = optimize_step_size(d.params.alpha);
        return d;
    }
}
