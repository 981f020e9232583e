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

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfee
{
    namespace
    {
        // gamma / beta with the continuous extension 0 where beta vanishes.
        Eigen::MatrixXd gamma_over_beta(const NetworkStats &stats)
        {
            return (stats.beta.array() > 0.0).select(stats.gamma.array() / stats.beta.array(), 0.0);
        }

        // kappa (2 beta - gamma) + gamma, the AP-side weight of D_kk'.
        Eigen::MatrixXd distortion_weight(const NetworkStats &stats, double kappa)
        {
            return kappa * (2.0 * stats.beta - stats.gamma) + stats.gamma;
        }
    }

    SinrMatrices build_sinr_matrices(const NetworkStats &stats, const QuantizerSpec &spec, int k)
    {
        const int M = stats.M(), K = stats.K();
        if (k < 0 || k >= K)
            throw std::out_of_range("build_sinr_matrices: user index out of range");
        const double kappa = spec.ideal() ? 0.0 : spec.distortion_over_gain2();

        SinrMatrices mats;
        mats.k = k;
        mats.gamma = stats.gamma.col(k);
        const Eigen::VectorXd ratio = gamma_over_beta(stats).col(k);
        const Eigen::VectorXd w = distortion_weight(stats, kappa).col(k);
        mats.delta.assign(static_cast<std::size_t>(K), Eigen::VectorXd::Zero(M));
        mats.d.resize(static_cast<std::size_t>(K));
        for (int kp = 0; kp < K; ++kp)
        {
            if (kp != k)
                mats.delta[kp] = ratio.cwiseProduct(stats.beta.col(kp));
            mats.d[kp] = stats.beta.col(kp).cwiseProduct(w);
        }
        mats.r = (kappa + 1.0) * mats.gamma;
        return mats;
    }

    double sinr(int k, const Eigen::VectorXd &q, const Eigen::VectorXd &u_k, const SinrMatrices &mats,
                const Eigen::MatrixXd &pilot_gram, double rho, int N)
    {
        if (u_k.squaredNorm() == 0.0)
            throw std::invalid_argument("sinr: receiver filter must be nonzero");
        if ((q.array() < 0.0).any())
            throw std::invalid_argument("sinr: powers must be nonnegative");

        const double n = N;
        const Eigen::VectorXd u2 = u_k.cwiseAbs2();
        const double g = mats.gamma.dot(u_k);
        const double num = n * n * q(k) * g * g;

        double coherent = 0.0, diag = 0.0;
        for (Eigen::Index kp = 0; kp < q.size(); ++kp)
        {
            if (kp != k && pilot_gram(k, kp) != 0.0)
            {
                const double p = mats.delta[kp].dot(u_k);
                coherent += q(kp) * pilot_gram(k, kp) * p * p;
            }
            diag += q(kp) * mats.d[kp].dot(u2);
        }
        const double den = n * n * coherent + n * diag + (n / rho) * mats.r.dot(u2);
        if (num == 0.0)
            return 0.0;
        return num / den;
    }

    double spectral_efficiency(double sinr_value, int tau_p, int tau_c)
    {
        if (!(tau_p < tau_c))
            throw std::invalid_argument("spectral_efficiency: need tau_p < tau_c");
        return (1.0 - static_cast<double>(tau_p) / tau_c) * std::log2(1.0 + sinr_value);
    }

    double backhaul_rate(int K, int tau_f, int alpha, double coherence_time_s)
    {
        if (tau_f <= 0 || !(coherence_time_s > 0.0))
            throw std::invalid_argument("backhaul_rate: tau_f and T_c must be positive");
        return 2.0 * K * tau_f * alpha / coherence_time_s;
    }

    PowerBreakdown total_power(const Eigen::VectorXd &q, const SystemParams &params, int alpha)
    {
        if ((q.array() < 0.0).any())
            throw std::invalid_argument("total_power: powers must be nonnegative");
        PowerBreakdown p;
        p.transmit = params.rho * params.noise_power_w * q.sum() / params.zeta;
        p.fixed = params.M * params.p_fix_w;
        p.users = params.K * params.p_user_w;
        p.backhaul_rate = backhaul_rate(params.K, params.tau_f(), alpha, params.coherence_time_s);
        const double links = params.backhaul_per_ap ? params.M : 1.0;
        p.backhaul = links * params.p_bt_w * p.backhaul_rate / params.c_bh_bps;
        p.backhaul_overload = p.backhaul_rate > params.c_bh_bps;
        p.total = p.transmit + p.fixed + p.users + p.backhaul;
        return p;
    }

    Eigen::VectorXd SinrCoefficients::sinr(const Eigen::VectorXd &q) const
    {
        Eigen::VectorXd out(q.size());
        for (Eigen::Index k = 0; k < q.size(); ++k)
            out(k) = sinr(static_cast<int>(k), q);
        return out;
    }

    double SinrCoefficients::sinr(int k, const Eigen::VectorXd &q) const
    {
        if (q(k) == 0.0)
            return 0.0;
        const double den = a.row(k).dot(q) + b.row(k).dot(q) + c(k);
        return q(k) / den;
    }

    SinrCoefficients sinr_coefficients(const NetworkStats &stats, const QuantizerSpec &spec,
                                       const Eigen::MatrixXd &U, double rho, int N)
    {
        const int K = stats.K();
        if (U.rows() != stats.M() || U.cols() != K)
            throw std::invalid_argument("sinr_coefficients: U must be M x K");
        const double kappa = spec.ideal() ? 0.0 : spec.distortion_over_gain2();
        const double n = N;

        const Eigen::MatrixXd U2 = U.cwiseAbs2();
        const Eigen::VectorXd gu = (U.cwiseProduct(stats.gamma)).colwise().sum().transpose();
        const Eigen::MatrixXd W = distortion_weight(stats, kappa);
        const Eigen::MatrixXd P = U.cwiseProduct(gamma_over_beta(stats)).transpose() * stats.beta;

        SinrCoefficients out;
        out.b = U2.cwiseProduct(W).transpose() * stats.beta;
        out.a = stats.pilot_gram.cwiseProduct(P.cwiseAbs2());
        out.c = (kappa + 1.0) * U2.cwiseProduct(stats.gamma).colwise().sum().transpose() / (rho * n);
        for (int k = 0; k < K; ++k)
        {
            out.a(k, k) = 0.0;
            const double g2 = gu(k) * gu(k);
            if (g2 > 0.0)
            {
                out.a.row(k) /= g2;
                out.b.row(k) /= n * g2;
                out.c(k) /= g2;
            }
            else
            {
                out.a.row(k).setZero();
                out.b.row(k).setZero();
                out.c(k) = std::numeric_limits<double>::infinity();
            }
        }
        return out;
    }

    Eigen::VectorXd all_sinrs(const Eigen::VectorXd &q, const Eigen::MatrixXd &U, const NetworkStats &stats,
                              const QuantizerSpec &spec, const SystemParams &params)
    {
        return sinr_coefficients(stats, spec, U, params.rho, params.N).sinr(q);
    }

    SolutionState evaluate_state(const Eigen::VectorXd &q, const Eigen::MatrixXd &U, const SystemParams &params,
                                 const NetworkStats &stats, const QuantizerSpec &spec)
    {
        SolutionState s;
        s.q = q;
        s.U = U;
        for (Eigen::Index k = 0; k < U.cols(); ++k)
        {
            const double nrm = U.col(k).norm();
            if (nrm == 0.0)
                throw std::invalid_argument("evaluate_state: receiver filter must be nonzero");
            s.U.col(k) /= nrm;
        }
        s.sinr = all_sinrs(q, s.U, stats, spec, params);
        s.se.resize(q.size());
        for (Eigen::Index k = 0; k < q.size(); ++k)
            s.se(k) = spectral_efficiency(s.sinr(k), params.tau_p, params.tau_c);
        s.sum_se = s.se.sum();
        s.power = total_power(q, params, params.alpha);
        s.ee = params.bandwidth_hz * s.sum_se / s.power.total;
        return s;
    }

    double energy_efficiency(const Eigen::VectorXd &q, const Eigen::MatrixXd &U, int alpha,
                             const SystemParams &params, const NetworkStats &stats, const QuantizerSpec &spec)
    {
        SystemParams p = params;
        p.alpha = alpha;
        return evaluate_state(q, U, p, stats, spec).ee;
    }

    double SinrTerms::sinr(double gain) const
    {
        const double den = bu + iui.sum() + tn + tqe / (gain * gain);
        return ds == 0.0 ? 0.0 : ds / den;
    }

    Eigen::VectorXd quantizer_input_power(int k, const Eigen::VectorXd &q, const NetworkStats &stats,
                                          double rho, int N)
    {
        const Eigen::VectorXd load = stats.beta * q; // sum_k' q_k' beta_mk'
        const auto b = stats.beta.col(k).array();
        const auto g = stats.gamma.col(k).array();
        return (N * (rho * (2.0 * b - g) * load.array() + g)).matrix();
    }

    SinrTerms closed_form_terms(int k, const Eigen::VectorXd &q, const Eigen::VectorXd &u_k,
                                const NetworkStats &stats, const QuantizerSpec &spec, double rho, int N)
    {
        const int K = stats.K();
        const double n = N;
        const Eigen::VectorXd u2 = u_k.cwiseAbs2();
        const Eigen::VectorXd gk = stats.gamma.col(k);
        const Eigen::VectorXd ratio = gamma_over_beta(stats).col(k);

        SinrTerms t;
        const double gu = u_k.dot(gk);
        t.ds = n * n * rho * q(k) * gu * gu;
        t.bu = rho * n * q(k) * u2.dot(gk.cwiseProduct(stats.beta.col(k)));
        t.iui = Eigen::VectorXd::Zero(K);
        for (int kp = 0; kp < K; ++kp)
        {
            if (kp == k)
                continue;
            const double p = u_k.dot(ratio.cwiseProduct(stats.beta.col(kp)));
            t.iui(kp) = n * rho * q(kp) * u2.dot(stats.beta.col(kp).cwiseProduct(gk)) +
                        n * n * rho * q(kp) * stats.pilot_gram(k, kp) * p * p;
        }
        t.tn = n * u2.dot(gk);
        const double dist = spec.ideal() ? 0.0 : spec.distortion();
        t.tqe = dist * u2.dot(quantizer_input_power(k, q, stats, rho, N));
        return t;
    }
}
