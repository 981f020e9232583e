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

#include "cfee/performance.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

using namespace cfee;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    // Quantization-free matched-filter SINR, written out term by term.
    double mrc_sinr(int k, const Eigen::VectorXd &q, const Eigen::VectorXd &u, const NetworkStats &s, double rho,
                    int N)
    {
        const int M = s.M(), K = s.K();
        double g = 0.0, self = 0.0, noise = 0.0;
        for (int m = 0; m < M; ++m)
        {
            g += u(m) * s.gamma(m, k);
            noise += u(m) * u(m) * s.gamma(m, k);
        }
        double coherent = 0.0;
        for (int kp = 0; kp < K; ++kp)
        {
            double p = 0.0;
            for (int m = 0; m < M; ++m)
            {
                self += rho * q(kp) * u(m) * u(m) * s.beta(m, kp) * s.gamma(m, k);
                p += u(m) * s.gamma(m, k) * s.beta(m, kp) / s.beta(m, k);
            }
            if (kp != k)
                coherent += rho * q(kp) * s.pilot_gram(k, kp) * p * p;
        }
        return N * N * rho * q(k) * g * g / (N * N * coherent + N * self + N * noise);
    }

    SystemParams power_params()
    {
        SystemParams p = default_params();
        p.noise_power_w = 1.0;
        p.rho = 1.0;
        return p;
    }
}

TEST_CASE("SINR matrices reduce without quantization", "[performance]")
{
    auto eng = testing::engine(1);
    const auto s = testing::random_stats(6, 3, eng);
    for (int k = 0; k < 3; ++k)
    {
        const auto m = build_sinr_matrices(s, ideal_quantizer(), k);
        for (int kp = 0; kp < 3; ++kp)
            CHECK(((m.d[kp] - s.beta.col(kp).cwiseProduct(s.gamma.col(k))).array().abs() < 1e-18).all());
        CHECK(m.r == s.gamma.col(k));
    }
}

TEST_CASE("SINR matrix entries by substitution", "[performance]")
{
    // M=1, beta = gamma = 1 for user 0, beta = 2 for user 1, kappa = 0.1.
    NetworkStats s;
    s.beta = Eigen::MatrixXd(1, 2);
    s.beta << 1.0, 2.0;
    s.gamma = Eigen::MatrixXd(1, 2);
    s.gamma << 1.0, 1.0;
    s.c = s.gamma;
    s.pilot_gram = Eigen::MatrixXd::Identity(2, 2);
    QuantizerSpec spec;
    spec.bits = 1;
    spec.gain = 1.0;
    spec.power_ratio = 1.1; // distortion / gain^2 = 0.1
    const auto m = build_sinr_matrices(s, spec, 0);
    CHECK_THAT(m.d[1](0), WithinRel(2.2, 1e-14));
    CHECK_THAT(m.r(0), WithinRel(1.1, 1e-14));
    CHECK_THAT(m.delta[1](0), WithinRel(2.0, 1e-14));

    const auto q2 = optimize_step_size(2);
    CHECK_THAT(q2.distortion_over_gain2(), WithinAbs(0.10472 / (0.88115 * 0.88115), 2e-4));
}

TEST_CASE("zero-fading links give zero contamination entries", "[performance]")
{
    auto eng = testing::engine(2);
    Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(3, 2, 0.5);
    beta(1, 0) = 0.0;
    const auto s = stats_from_beta(beta, Eigen::MatrixXd::Ones(2, 2), 5.0, 1);
    const auto m = build_sinr_matrices(s, optimize_step_size(3), 0);
    CHECK(m.delta[1](1) == 0.0);
    CHECK(std::isfinite(m.delta[1].sum()));
}

TEST_CASE("SINR examples", "[performance]")
{
    NetworkStats s;
    s.beta = Eigen::MatrixXd::Ones(1, 1);
    s.gamma = s.beta;
    s.c = s.beta;
    s.pilot_gram = s.beta;
    const auto m = build_sinr_matrices(s, ideal_quantizer(), 0);
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(1);
    CHECK_THAT(sinr(0, Eigen::VectorXd::Ones(1), u, m, s.pilot_gram, 1.0, 1), WithinRel(0.5, 1e-15));
    CHECK(sinr(0, Eigen::VectorXd::Zero(1), u, m, s.pilot_gram, 1.0, 1) == 0.0);
    CHECK_THROWS_AS(sinr(0, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), m, s.pilot_gram, 1.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(sinr(0, -Eigen::VectorXd::Ones(1), u, m, s.pilot_gram, 1.0, 1), std::invalid_argument);
}

TEST_CASE("spectral efficiency and backhaul rate", "[performance]")
{
    CHECK(spectral_efficiency(0.0, 20, 200) == 0.0);
    CHECK_THAT(spectral_efficiency(3.0, 100, 200), WithinRel(1.0, 1e-15));
    CHECK_THAT(spectral_efficiency(1.0, 20, 200), WithinRel(0.9, 1e-15));
    CHECK_THAT(backhaul_rate(20, 180, 2, 1e-3), WithinRel(14.4e6, 1e-15));
    CHECK(backhaul_rate(20, 180, 0, 1e-3) == 0.0);
    CHECK_THAT(backhaul_rate(40, 180, 3, 1e-3), WithinRel(2.0 * backhaul_rate(20, 180, 3, 1e-3), 1e-15));
}

TEST_CASE("power model", "[performance]")
{
    auto p = power_params();
    p.p_bt_w = 0.0;
    resize_users(p, 20);
    CHECK_THAT(total_power(Eigen::VectorXd::Zero(20), p, 2).total, WithinRel(84.5, 1e-12));

    p.zeta = 0.3;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(20);
    q(0) = 0.3;
    CHECK_THAT(total_power(q, p, 2).transmit, WithinRel(1.0, 1e-12));

    p.p_bt_w = 10.0;
    p.c_bh_bps = 100e6;
    const auto pw = total_power(Eigen::VectorXd::Zero(20), p, 2);
    CHECK_THAT(pw.backhaul_rate / p.c_bh_bps, WithinRel(0.144, 1e-12));
    CHECK_THAT(pw.backhaul, WithinRel(144.0, 1e-12));
    CHECK_FALSE(pw.backhaul_overload);
    p.backhaul_per_ap = false;
    CHECK_THAT(total_power(Eigen::VectorXd::Zero(20), p, 2).backhaul, WithinRel(1.44, 1e-12));
    CHECK(total_power(Eigen::VectorXd::Zero(20), p, 16).backhaul_overload);
    CHECK_THROWS_AS(total_power(-Eigen::VectorXd::Ones(20), p, 2), std::invalid_argument);
}

TEST_CASE("energy efficiency", "[performance]")
{
    auto p = default_params();
    p.M = 12;
    resize_users(p, 4);
    p.tau_p = 4;
    const auto s = generate_network(p, 5);
    const auto spec = optimize_step_size(2);
    auto eng = testing::engine(3);
    const auto U = testing::random_filters(p.M, p.K, eng);
    CHECK(energy_efficiency(Eigen::VectorXd::Zero(4), U, 2, p, s, spec) == 0.0);

    const Eigen::VectorXd q = testing::uniform_vector(4, eng, 0.1, 1.0);
    const double e1 = energy_efficiency(q, U, 2, p, s, spec);
    auto p2 = p;
    p2.bandwidth_hz *= 2.0;
    CHECK_THAT(energy_efficiency(q, U, 2, p2, s, spec), WithinRel(2.0 * e1, 1e-14));

    // Independent recomputation through the quadratic-form route.
    double se = 0.0;
    for (int k = 0; k < 4; ++k)
        se += spectral_efficiency(sinr(k, q, U.col(k), build_sinr_matrices(s, spec, k), s.pilot_gram, p.rho, p.N),
                                  p.tau_p, p.tau_c);
    CHECK_THAT(e1, WithinRel(p.bandwidth_hz * se / total_power(q, p, 2).total, 1e-12));
}

TEST_CASE("posynomial coefficients and quadratic forms agree", "[performance]")
{
    auto eng = testing::engine(4);
    for (int t = 0; t < 20; ++t)
    {
        const int M = 2 + t % 7, K = 1 + t % 5, N = 1 + t % 3;
        const auto s = testing::random_stats(M, K, eng, 50.0, 1 + t % K);
        const auto spec = optimize_step_size(1 + t % 7);
        const auto U = testing::random_filters(M, K, eng);
        const Eigen::VectorXd q = testing::uniform_vector(K, eng, 0.0, 1.0);
        const double rho = 20.0;
        const auto co = sinr_coefficients(s, spec, U, rho, N);
        for (int k = 0; k < K; ++k)
        {
            const double a = sinr(k, q, U.col(k), build_sinr_matrices(s, spec, k), s.pilot_gram, rho, N);
            CHECK_THAT(co.sinr(k, q), WithinRel(a, 1e-11));
            const auto terms = closed_form_terms(k, q, U.col(k), s, spec, rho, N);
            CHECK_THAT(terms.sinr(spec.gain), WithinRel(a, 1e-11));
        }
    }
}

TEST_CASE("SINR is invariant to filter scaling", "[performance][property]")
{
    auto eng = testing::engine(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 50; ++t)
    {
        const auto s = testing::random_stats(8, 4, eng, 10.0, 2);
        const auto spec = optimize_step_size(3);
        const auto U = testing::random_filters(8, 4, eng);
        const Eigen::VectorXd q = testing::uniform_vector(4, eng);
        const int k = t % 4;
        const auto m = build_sinr_matrices(s, spec, k);
        double c = std::pow(10.0, u(eng));
        if (t % 2)
            c = -c;
        CHECK_THAT(sinr(k, q, c * U.col(k), m, s.pilot_gram, 5.0, 2),
                   WithinRel(sinr(k, q, U.col(k), m, s.pilot_gram, 5.0, 2), 1e-12));
    }
}

TEST_CASE("SINR monotonicity in powers", "[performance][property]")
{
    auto eng = testing::engine(6);
    for (int t = 0; t < 100; ++t)
    {
        const auto s = testing::random_stats(6, 4, eng, 10.0, 1 + t % 4);
        const auto spec = optimize_step_size(1 + t % 7);
        const auto U = testing::random_filters(6, 4, eng);
        const auto co = sinr_coefficients(s, spec, U, 3.0, 1 + t % 2);
        const Eigen::VectorXd q = testing::uniform_vector(4, eng, 0.05, 1.0);
        const int k = t % 4;
        const double base = co.sinr(k, q);
        Eigen::VectorXd up = q;
        up(k) *= 1.01;
        CHECK(co.sinr(k, up) > base);
        for (int kp = 0; kp < 4; ++kp)
        {
            if (kp == k)
                continue;
            up = q;
            up(kp) *= 1.5;
            CHECK(co.sinr(k, up) <= base);
        }
    }
}

TEST_CASE("perfect quantization gives the matched-filter SINR", "[performance][property]")
{
    auto eng = testing::engine(7);
    for (int t = 0; t < 30; ++t)
    {
        const int K = 2 + t % 4;
        const auto s = testing::random_stats(7, K, eng, 10.0, 1 + t % K);
        const auto U = testing::random_filters(7, K, eng);
        const Eigen::VectorXd q = testing::uniform_vector(K, eng, 0.1, 1.0);
        const int N = 1 + t % 3;
        QuantizerSpec perfect;
        perfect.bits = 3;
        perfect.gain = 1.0;
        perfect.power_ratio = 1.0;
        const auto co = sinr_coefficients(s, perfect, U, 7.0, N);
        for (int k = 0; k < K; ++k)
        {
            CHECK_THAT(co.sinr(k, q), WithinRel(mrc_sinr(k, q, U.col(k), s, 7.0, N), 1e-12));
            CHECK(closed_form_terms(k, q, U.col(k), s, perfect, 7.0, N).tqe == 0.0);
        }
    }
}

TEST_CASE("total power lower bound", "[performance][property]")
{
    auto eng = testing::engine(8);
    auto p = default_params();
    for (int t = 0; t < 100; ++t)
    {
        const Eigen::VectorXd q = testing::uniform_vector(p.K, eng, 0.0, 1.0);
        CHECK(total_power(q, p, 1 + t % 7).total >= p.M * p.p_fix_w + p.K * p.p_user_w);
    }
}

TEST_CASE("energy efficiency is invariant to user relabeling", "[performance][property]")
{
    auto p = default_params();
    p.M = 10;
    p.tau_p = 3;
    resize_users(p, 5);
    const auto s = generate_network(p, 9);
    const auto spec = optimize_step_size(2);
    auto eng = testing::engine(9);
    const auto U = testing::random_filters(p.M, p.K, eng);
    const Eigen::VectorXd q = testing::uniform_vector(p.K, eng, 0.1, 1.0);

    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), eng);
    NetworkStats sp = s;
    Eigen::MatrixXd Up(p.M, 5);
    Eigen::VectorXd qp(5);
    for (int i = 0; i < 5; ++i)
    {
        sp.beta.col(i) = s.beta.col(perm[i]);
        sp.gamma.col(i) = s.gamma.col(perm[i]);
        sp.c.col(i) = s.c.col(perm[i]);
        Up.col(i) = U.col(perm[i]);
        qp(i) = q(perm[i]);
        for (int j = 0; j < 5; ++j)
            sp.pilot_gram(i, j) = s.pilot_gram(perm[i], perm[j]);
    }
    CHECK_THAT(energy_efficiency(qp, Up, 2, p, sp, spec), WithinRel(energy_efficiency(q, U, 2, p, s, spec), 1e-12));
}

TEST_CASE("evaluate_state normalizes filters", "[performance]")
{
    auto p = default_params();
    p.M = 6;
    p.tau_p = 3;
    resize_users(p, 3);
    const auto s = generate_network(p, 1);
    const Eigen::MatrixXd U = Eigen::MatrixXd::Constant(6, 3, 4.0);
    const auto st = evaluate_state(Eigen::VectorXd::Ones(3), U, p, s, optimize_step_size(2));
    for (int k = 0; k < 3; ++k)
    {
        CHECK_THAT(st.U.col(k).norm(), WithinAbs(1.0, 1e-12));
        CHECK_THAT(st.se(k), WithinRel(spectral_efficiency(st.sinr(k), p.tau_p, p.tau_c), 1e-15));
    }
    CHECK_THROWS_AS(evaluate_state(Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Zero(6, 3), p, s, optimize_step_size(2)),
                    std::invalid_argument);
}
