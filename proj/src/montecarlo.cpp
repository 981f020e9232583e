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

#include "cfee/montecarlo.hpp"

#include "cfee/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <thread>

namespace cfee
{
    using cd = std::complex<double>;

    SimulationOptions simulation_options(const SystemParams &params)
    {
        SimulationOptions o;
        o.N = params.N;
        o.rho = params.rho;
        o.pilot_snr = params.pilot_snr;
        o.tau_p = params.tau_p;
        return o;
    }

    Eigen::VectorXd exact_quantizer_input_power(int k, const Eigen::VectorXd &q, const NetworkStats &stats,
                                                double rho, int N, bool with_noise)
    {
        const int M = stats.M(), K = stats.K();
        const double n = N;
        Eigen::VectorXd out(M);
        for (int m = 0; m < M; ++m)
        {
            const double b = stats.beta(m, k), g = stats.gamma(m, k);
            double acc = 0.0;
            for (int kp = 0; kp < K; ++kp)
            {
                // E|g_k^H g_k'|^2 = N gamma_k beta_k' + N^2 |phi_k^H phi_k'|^2 (gamma_k beta_k' / beta_k)^2
                const double coh = b > 0.0 ? g * stats.beta(m, kp) / b : 0.0;
                acc += q(kp) * (n * g * stats.beta(m, kp) + n * n * stats.pilot_gram(k, kp) * coh * coh);
            }
            out(m) = rho * acc + (with_noise ? n * g : 0.0);
        }
        return out;
    }

    double TermEstimate::rel_error() const
    {
        if (closed_form == 0.0)
            return empirical == 0.0 ? 0.0 : INFINITY;
        return std::abs(empirical - closed_form) / std::abs(closed_form);
    }

    namespace
    {
        struct Moments
        {
            double s2 = 0.0; // sum |v|^2
            double s4 = 0.0; // sum |v|^4

            void add(cd v)
            {
                const double a = std::norm(v);
                s2 += a;
                s4 += a * a;
            }
            void merge(const Moments &o)
            {
                s2 += o.s2;
                s4 += o.s4;
            }
            TermEstimate estimate(double scale, double n) const
            {
                const double mean = s2 / n;
                const double var = std::max(s4 / n - mean * mean, 0.0);
                return {scale * mean, scale * std::sqrt(var / n), 0.0};
            }
        };

        // Sufficient statistics for one user.
        struct UserAcc
        {
            cd sx{};           // sum X, X = sum_m u g^H g_k
            Moments x;
            std::vector<Moments> iui;
            Moments itot, tn, tqe;
            double tqe_diag = 0.0; // sum_m u_mk^2 |e_mk|^2
            // Cross moments for the correlation check. Y ranges over (IUI, TN, TQE).
            cd xs_y[3]{}, s_y[3]{}, y_y[3]{}; // y_y: (0,1), (0,2), (1,2)
            cd x_s2{};
            double s2 = 0.0;

            void merge(const UserAcc &o)
            {
                sx += o.sx;
                x.merge(o.x);
                for (std::size_t i = 0; i < iui.size(); ++i)
                    iui[i].merge(o.iui[i]);
                itot.merge(o.itot);
                tn.merge(o.tn);
                tqe.merge(o.tqe);
                tqe_diag += o.tqe_diag;
                for (int i = 0; i < 3; ++i)
                {
                    xs_y[i] += o.xs_y[i];
                    s_y[i] += o.s_y[i];
                    y_y[i] += o.y_y[i];
                }
                x_s2 += o.x_s2;
                s2 += o.s2;
            }
        };

        struct Acc
        {
            std::vector<UserAcc> users;
            Eigen::MatrixXd z2, re2, re4, ghat_w, ghat_w2, err2;
            Eigen::MatrixXcd cross;

            Acc(int M, int K)
                : users(static_cast<std::size_t>(K)), z2(Eigen::MatrixXd::Zero(M, K)), re2(z2), re4(z2),
                  ghat_w(z2), ghat_w2(z2), err2(z2), cross(Eigen::MatrixXcd::Zero(M, K))
            {
                for (auto &u : users)
                    u.iui.resize(static_cast<std::size_t>(K));
            }

            void merge(const Acc &o)
            {
                for (std::size_t k = 0; k < users.size(); ++k)
                    users[k].merge(o.users[k]);
                z2 += o.z2;
                re2 += o.re2;
                re4 += o.re4;
                ghat_w += o.ghat_w;
                ghat_w2 += o.ghat_w2;
                err2 += o.err2;
                cross += o.cross;
            }
        };

        struct Setup
        {
            int M, K, N;
            std::vector<int> pilot;
            int n_pilots;
            Eigen::MatrixXd sqrt_beta, c, sigma, U;
            Eigen::VectorXd sqrt_rq;
            double sqrt_tp, gain;
            bool ideal, noise;
            const QuantizerSpec *spec;
        };

        cd cnormal(std::mt19937_64 &eng, std::normal_distribution<double> &nd)
        {
            const double a = nd(eng), b = nd(eng);
            return {a * std::numbers::sqrt2 / 2.0, b * std::numbers::sqrt2 / 2.0};
        }

        void run_partition(const Setup &s, long draws, std::uint64_t seed, std::uint64_t index, Acc &acc)
        {
            auto eng = make_engine(seed, Stream::monte_carlo, index);
            std::normal_distribution<double> nd(0.0, 1.0);
            const int M = s.M, K = s.K, N = s.N;

            // Per AP: N x K channels and estimates, N-dim noise.
            std::vector<Eigen::MatrixXcd> g(M, Eigen::MatrixXcd(N, K)), gh(M, Eigen::MatrixXcd(N, K));
            std::vector<Eigen::VectorXcd> noise(M, Eigen::VectorXcd(N));
            Eigen::MatrixXcd pilot_noise(N, s.n_pilots);
            Eigen::VectorXcd sym(K);
            Eigen::MatrixXcd inner(K, K); // inner(k, k') = g_k^H g_k' at one AP
            Eigen::VectorXcd x(K), tnv(K), tqev(K);
            Eigen::VectorXd tqed(K);
            Eigen::MatrixXcd iv(K, K);

            for (long d = 0; d < draws; ++d)
            {
                for (int k = 0; k < K; ++k)
                    sym(k) = cnormal(eng, nd);
                x.setZero();
                tnv.setZero();
                tqev.setZero();
                tqed.setZero();
                iv.setZero();
                for (int m = 0; m < M; ++m)
                {
                    for (int k = 0; k < K; ++k)
                        for (int a = 0; a < N; ++a)
                            g[m](a, k) = s.sqrt_beta(m, k) * cnormal(eng, nd);
                    for (int p = 0; p < s.n_pilots; ++p)
                        for (int a = 0; a < N; ++a)
                            pilot_noise(a, p) = cnormal(eng, nd);
                    for (int a = 0; a < N; ++a)
                        noise[m](a) = s.noise ? cnormal(eng, nd) : cd{};

                    // Projected pilot observation and MMSE estimate.
                    for (int k = 0; k < K; ++k)
                    {
                        Eigen::VectorXcd obs = pilot_noise.col(s.pilot[k]);
                        for (int kp = 0; kp < K; ++kp)
                            if (s.pilot[kp] == s.pilot[k])
                                obs += s.sqrt_tp * g[m].col(kp);
                        gh[m].col(k) = s.c(m, k) * obs;
                    }

                    inner.noalias() = gh[m].adjoint() * g[m];
                    Eigen::VectorXcd y = noise[m];
                    for (int k = 0; k < K; ++k)
                        y += s.sqrt_rq(k) * sym(k) * g[m].col(k);

                    for (int k = 0; k < K; ++k)
                    {
                        const cd z = gh[m].col(k).dot(y); // g^H y
                        const cd zn = gh[m].col(k).dot(noise[m]);
                        const double sig = s.sigma(m, k);
                        cd qz;
                        if (s.ideal)
                            qz = z;
                        else if (sig > 0.0)
                            qz = quantize(z, sig, *s.spec);
                        const cd e = qz - s.gain * z;
                        const double u = s.U(m, k);
                        x(k) += u * inner(k, k);
                        for (int kp = 0; kp < K; ++kp)
                            if (kp != k)
                                iv(k, kp) += u * inner(k, kp);
                        tnv(k) += u * zn;
                        tqev(k) += u * e;
                        tqed(k) += u * u * std::norm(e);

                        acc.z2(m, k) += std::norm(z);
                        const double r2 = z.real() * z.real();
                        acc.re2(m, k) += r2;
                        acc.re4(m, k) += r2 * r2;
                        const double w = gh[m].col(k).squaredNorm() / N;
                        acc.ghat_w(m, k) += w;
                        acc.ghat_w2(m, k) += w * w;
                        const Eigen::VectorXcd err = g[m].col(k) - gh[m].col(k);
                        acc.cross(m, k) += gh[m].col(k).dot(err);
                        acc.err2(m, k) += err.squaredNorm();
                    }
                }

                for (int k = 0; k < K; ++k)
                {
                    auto &ua = acc.users[k];
                    ua.sx += x(k);
                    ua.x.add(x(k));
                    cd itot{};
                    for (int kp = 0; kp < K; ++kp)
                    {
                        if (kp == k)
                            continue;
                        ua.iui[kp].add(iv(k, kp));
                        itot += s.sqrt_rq(kp) * iv(k, kp) * sym(kp);
                    }
                    ua.itot.add(itot);
                    ua.tn.add(tnv(k));
                    ua.tqe.add(tqev(k));
                    ua.tqe_diag += tqed(k);
                    const cd ys[3] = {itot, tnv(k), tqev(k)};
                    const cd xs = x(k) * sym(k);
                    for (int i = 0; i < 3; ++i)
                    {
                        ua.xs_y[i] += xs * std::conj(ys[i]);
                        ua.s_y[i] += sym(k) * std::conj(ys[i]);
                    }
                    ua.y_y[0] += ys[0] * std::conj(ys[1]);
                    ua.y_y[1] += ys[0] * std::conj(ys[2]);
                    ua.y_y[2] += ys[1] * std::conj(ys[2]);
                    ua.x_s2 += x(k) * std::norm(sym(k));
                    ua.s2 += std::norm(sym(k));
                }
            }
        }

        double normalized(cd cross, double pa, double pb)
        {
            const double den = std::sqrt(pa * pb);
            return den > 0.0 ? std::abs(cross) / den : 0.0;
        }
    }

    TermReport simulate_terms(const NetworkStats &stats, const QuantizerSpec &spec, const Eigen::VectorXd &q,
                              const Eigen::MatrixXd &U, long n_draws, std::uint64_t seed,
                              const SimulationOptions &options)
    {
        const int M = stats.M(), K = stats.K();
        if (n_draws < 1)
            throw std::invalid_argument("simulate_terms: n_draws must be positive");
        if (q.size() != K || U.rows() != M || U.cols() != K)
            throw std::invalid_argument("simulate_terms: q must have K entries and U must be M x K");
        if ((q.array() < 0.0).any())
            throw std::invalid_argument("simulate_terms: powers must be nonnegative");
        if (static_cast<int>(stats.pilot_index.size()) != K)
            throw std::invalid_argument("simulate_terms: pilot_index required");
        for (int k = 0; k < K; ++k)
            for (int kp = 0; kp < K; ++kp)
            {
                const double want = stats.pilot_index[k] == stats.pilot_index[kp] ? 1.0 : 0.0;
                if (std::abs(stats.pilot_gram(k, kp) - want) > 1e-12)
                    throw std::invalid_argument("simulate_terms: pilot Gram must match pilot_index");
            }

        const bool ideal = spec.ideal() || options.bypass_quantizer;
        Setup s;
        s.M = M;
        s.K = K;
        s.N = options.N;
        s.pilot = stats.pilot_index;
        s.n_pilots = *std::max_element(s.pilot.begin(), s.pilot.end()) + 1;
        s.sqrt_beta = stats.beta.cwiseSqrt();
        s.c = stats.c;
        s.U = U;
        s.sqrt_rq = (options.rho * q).cwiseSqrt();
        s.sqrt_tp = std::sqrt(options.tau_p * options.pilot_snr);
        s.gain = ideal ? 1.0 : spec.gain;
        s.ideal = ideal;
        s.noise = options.inject_noise;
        s.spec = &spec;

        TermReport rep;
        rep.n_draws = n_draws;
        rep.gain = s.gain;
        rep.input_power_model.resize(M, K);
        rep.input_power_exact.resize(M, K);
        for (int k = 0; k < K; ++k)
        {
            Eigen::VectorXd model = quantizer_input_power(k, q, stats, options.rho, options.N);
            if (!options.inject_noise)
                model -= options.N * stats.gamma.col(k);
            const Eigen::VectorXd exact =
                exact_quantizer_input_power(k, q, stats, options.rho, options.N, options.inject_noise);
            rep.input_power_exact.col(k) = exact;
            rep.input_power_model.col(k) = options.scale == QuantizerScale::closed_form ? model : exact;
        }
        s.sigma = rep.input_power_model.cwiseMax(0.0).cwiseSqrt();

        const long batch = std::max(1, options.batch);
        const long parts = (n_draws + batch - 1) / batch;
        std::vector<Acc> accs;
        accs.reserve(static_cast<std::size_t>(parts));
        for (long p = 0; p < parts; ++p)
            accs.emplace_back(M, K);

        std::atomic<long> next{0};
        auto worker = [&]
        {
            for (long p = next++; p < parts; p = next++)
            {
                const long draws = std::min(batch, n_draws - p * batch);
                run_partition(s, draws, seed, static_cast<std::uint64_t>(p), accs[p]);
            }
        };
        const int nt = std::clamp(options.threads, 1, static_cast<int>(std::min<long>(parts, 64)));
        std::vector<std::thread> pool;
        for (int t = 1; t < nt; ++t)
            pool.emplace_back(worker);
        worker();
        for (auto &t : pool)
            t.join();

        Acc total(M, K);
        for (const auto &a : accs)
            total.merge(a);

        const double n = static_cast<double>(n_draws);
        rep.input_power = total.z2 / n;
        {
            double kurt = 0.0;
            int links = 0;
            for (int m = 0; m < M; ++m)
                for (int k = 0; k < K; ++k)
                {
                    const double v = total.re2(m, k) / n;
                    if (v > 0.0)
                    {
                        kurt += (total.re4(m, k) / n) / (v * v);
                        ++links;
                    }
                    const double w = total.ghat_w(m, k) / n;
                    const double sw = std::sqrt(std::max(total.ghat_w2(m, k) / n - w * w, 0.0) / n);
                    if (sw > 0.0)
                        rep.gamma_max_z = std::max(rep.gamma_max_z, std::abs(w - stats.gamma(m, k)) / sw);
                    rep.mmse_max_correlation =
                        std::max(rep.mmse_max_correlation,
                                 normalized(total.cross(m, k) / n, options.N * w, total.err2(m, k) / n));
                }
            rep.input_kurtosis = links ? kurt / links : 0.0;
        }

        const QuantizerSpec closed_spec = ideal ? ideal_quantizer() : spec;
        for (int k = 0; k < K; ++k)
        {
            const auto &ua = total.users[k];
            const SinrTerms cf = closed_form_terms(k, q, U.col(k), stats, closed_spec, options.rho, options.N);
            UserTerms ut;

            const double rq = options.rho * q(k);
            const cd xbar = ua.sx / n;
            const double ex2 = ua.x.s2 / n;
            const TermEstimate xm = ua.x.estimate(1.0, n);
            const double se_mean = std::sqrt(std::max(ex2 - std::norm(xbar), 0.0) / n);
            ut.ds = {rq * std::norm(xbar), 2.0 * rq * std::abs(xbar) * se_mean, cf.ds};
            ut.bu = {rq * std::max(ex2 - std::norm(xbar), 0.0), rq * xm.std_error, cf.bu};

            ut.iui.resize(static_cast<std::size_t>(K));
            for (int kp = 0; kp < K; ++kp)
            {
                if (kp == k)
                    continue;
                ut.iui[kp] = ua.iui[kp].estimate(options.rho * q(kp), n);
                ut.iui[kp].closed_form = cf.iui(kp);
            }
            ut.iui_total = ua.itot.estimate(1.0, n);
            ut.iui_total.closed_form = cf.iui.sum();
            ut.tn = ua.tn.estimate(1.0, n);
            ut.tn.closed_form = options.inject_noise ? cf.tn : 0.0;
            ut.tqe = ua.tqe.estimate(1.0, n);
            ut.tqe.closed_form = cf.tqe;
            ut.tqe_per_ap = ua.tqe_diag / n;

            const double g2 = s.gain * s.gain;
            const double den = ut.bu.empirical + ut.iui_total.empirical + ut.tn.empirical + ut.tqe.empirical / g2;
            const double den_cf = cf.bu + cf.iui.sum() + ut.tn.closed_form + cf.tqe / g2;
            ut.sinr.empirical = den > 0.0 ? ut.ds.empirical / den : 0.0;
            ut.sinr.closed_form = den_cf > 0.0 ? cf.ds / den_cf : 0.0;
            if (den > 0.0 && ut.ds.empirical > 0.0)
            {
                const double rd = ut.ds.std_error / ut.ds.empirical;
                const double dv = std::sqrt(ut.bu.std_error * ut.bu.std_error +
                                            ut.iui_total.std_error * ut.iui_total.std_error +
                                            ut.tn.std_error * ut.tn.std_error +
                                            ut.tqe.std_error * ut.tqe.std_error / (g2 * g2)) /
                                  den;
                ut.sinr.std_error = ut.sinr.empirical * std::hypot(rd, dv);
            }

            // Per-draw terms: DS s = sqrt(rq) xbar s, BU s = sqrt(rq) (X - xbar) s, then IUI, TN, TQE.
            const double p_ds = ut.ds.empirical;
            const double p_bu = ut.bu.empirical;
            const double py[3] = {ut.iui_total.empirical, ut.tn.empirical, ut.tqe.empirical};
            double worst = 0.0;
            // E[DS BU*] = rq xbar (E[X* |s|^2] - xbar* E|s|^2)
            const cd ds_bu = rq * xbar * (std::conj(ua.x_s2 / n) - std::conj(xbar) * (ua.s2 / n));
            worst = std::max(worst, normalized(ds_bu, p_ds, p_bu));
            for (int i = 0; i < 3; ++i)
            {
                const cd ds_y = std::sqrt(rq) * xbar * ua.s_y[i] / n;
                const cd bu_y = std::sqrt(rq) * (ua.xs_y[i] / n - xbar * ua.s_y[i] / n);
                worst = std::max(worst, normalized(ds_y, p_ds, py[i]));
                worst = std::max(worst, normalized(bu_y, p_bu, py[i]));
            }
            worst = std::max(worst, normalized(ua.y_y[0] / n, py[0], py[1]));
            worst = std::max(worst, normalized(ua.y_y[1] / n, py[0], py[2]));
            worst = std::max(worst, normalized(ua.y_y[2] / n, py[1], py[2]));
            ut.max_term_correlation = worst;
            rep.users.push_back(std::move(ut));
        }
        return rep;
    }

    Eigen::VectorXd empirical_sinr(const NetworkStats &stats, const QuantizerSpec &spec, const Eigen::VectorXd &q,
                                   const Eigen::MatrixXd &U, long n_draws, std::uint64_t seed,
                                   const SimulationOptions &options)
    {
        const auto rep = simulate_terms(stats, spec, q, U, n_draws, seed, options);
        Eigen::VectorXd out(stats.K());
        for (int k = 0; k < stats.K(); ++k)
            out(k) = rep.users[k].sinr.empirical;
        return out;
    }

    BussgangCheck bussgang_orthogonality_check(const QuantizerSpec &spec, long n_draws, std::uint64_t seed,
                                               double sigma, const double *gain)
    {
        if (n_draws < 1 || !(sigma > 0.0))
            throw std::invalid_argument("bussgang_orthogonality_check: need n_draws >= 1 and sigma > 0");
        auto eng = make_engine(seed, Stream::monte_carlo, 0);
        std::normal_distribution<double> nd(0.0, sigma);
        const double a = gain ? *gain : spec.gain;
        double zz = 0.0, zh = 0.0, zr = 0.0, rr = 0.0;
        for (long i = 0; i < n_draws; ++i)
        {
            const double z = nd(eng);
            const double h = quantize(z, sigma, spec);
            const double r = h - a * z;
            zz += z * z;
            zh += z * h;
            zr += z * r;
            rr += r * r;
        }
        return {zh / zz, std::abs(zr) / zz, rr / zz};
    }
}
