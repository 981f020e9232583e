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

#include "cfee/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfee
{
    Eigen::MatrixXd design_filters(const Eigen::VectorXd &q, const NetworkStats &stats, const QuantizerSpec &spec,
                                   const SystemParams &params)
    {
        const int M = stats.M(), K = stats.K();
        if (q.size() != K)
            throw std::invalid_argument("design_filters: q must have K entries");
        if ((q.array() < 0.0).any())
            throw std::invalid_argument("design_filters: powers must be nonnegative");
        const double n = params.N;
        const double kappa = spec.ideal() ? 0.0 : spec.distortion_over_gain2();

        const Eigen::VectorXd load = stats.beta * q;
        Eigen::MatrixXd U(M, K);
        for (int k = 0; k < K; ++k)
        {
            const Eigen::VectorXd gk = stats.gamma.col(k);
            const Eigen::VectorXd bk = stats.beta.col(k);
            if (gk.squaredNorm() == 0.0)
            {
                U.col(k).setConstant(1.0 / std::sqrt(static_cast<double>(M)));
                continue;
            }
            // Diagonal part: N sum_k' q_k' D_kk' + (N / rho) R_k.
            const Eigen::VectorXd w = kappa * (2.0 * bk - gk) + gk;
            Eigen::VectorXd diag = n * w.cwiseProduct(load) + (n / params.rho) * (kappa + 1.0) * gk;
            if ((diag.array() <= 0.0).any())
                diag.array() += 1e-12 * diag.sum() / M;

            // Low-rank part: columns N sqrt(q_k' |phi_k^H phi_k'|^2) Delta_kk'.
            std::vector<int> contaminators;
            for (int kp = 0; kp < K; ++kp)
                if (kp != k && stats.pilot_gram(k, kp) > 0.0 && q(kp) > 0.0)
                    contaminators.push_back(kp);

            Eigen::VectorXd u = gk.cwiseQuotient(diag);
            if (!contaminators.empty())
            {
                const auto r = static_cast<Eigen::Index>(contaminators.size());
                Eigen::MatrixXd V(M, r);
                for (Eigen::Index j = 0; j < r; ++j)
                {
                    const int kp = contaminators[j];
                    const Eigen::VectorXd ratio =
                        (bk.array() > 0.0).select(gk.array() / bk.array(), 0.0).matrix();
                    V.col(j) = n * std::sqrt(q(kp) * stats.pilot_gram(k, kp)) * ratio.cwiseProduct(stats.beta.col(kp));
                }
                const Eigen::MatrixXd DiV = diag.cwiseInverse().asDiagonal() * V;
                Eigen::MatrixXd S = V.transpose() * DiV;
                S.diagonal().array() += 1.0;
                u -= DiV * S.ldlt().solve(V.transpose() * u);
            }
            U.col(k) = u / u.norm();
        }
        return U;
    }

    Eigen::VectorXd sinr_targets(const SystemParams &params)
    {
        Eigen::VectorXd t(params.K);
        for (int k = 0; k < params.K; ++k)
        {
            const double sr = params.se_req[k];
            t(k) = sr > 0.0 ? std::exp2(sr / params.prelog()) - 1.0 : 0.0;
        }
        return t;
    }

    PmpResult solve_pmp(const Eigen::MatrixXd &U, const NetworkStats &stats, const QuantizerSpec &spec,
                        const SystemParams &params)
    {
        validate_params(params);
        const int K = params.K;
        const Eigen::VectorXd targets = sinr_targets(params);
        const auto coeffs = sinr_coefficients(stats, spec, U, params.rho, params.N);

        PmpResult res;
        res.q = Eigen::VectorXd::Zero(K);
        std::vector<int> active;
        for (int k = 0; k < K; ++k)
            if (targets(k) > 0.0)
                active.push_back(k);

        // Users without a target stay silent; their power only adds interference.
        if (active.empty())
        {
            res.feasible = true;
            return res;
        }

        gp::GpProblem pr;
        std::vector<int> var_of(static_cast<std::size_t>(K), -1);
        for (int k : active)
            var_of[k] = pr.add_variable(power_floor_ratio * params.p_max[k], params.p_max[k]);

        for (int k : active)
            pr.objective += gp::var(var_of[k]);

        for (int k : active)
        {
            const int vk = var_of[k];
            gp::Posynomial con;
            for (int kp : active)
            {
                const double coef = targets(k) * ((kp != k ? coeffs.a(k, kp) : 0.0) + coeffs.b(k, kp));
                if (coef <= 0.0)
                    continue;
                if (kp == k)
                    con += gp::Monomial(coef);
                else
                    con += gp::Monomial(coef, {{var_of[kp], 1.0}, {vk, -1.0}});
            }
            if (std::isfinite(coeffs.c(k)) && coeffs.c(k) > 0.0)
                con += gp::Monomial(targets(k) * coeffs.c(k), {{vk, -1.0}});
            else if (!std::isfinite(coeffs.c(k)))
            {
                res.violating_users.push_back(k);
                continue;
            }
            if (!con.terms.empty())
                pr.inequalities.push_back(std::move(con));
        }
        if (!res.violating_users.empty())
        {
            res.status = gp::GpStatus::infeasible;
            return res;
        }

        gp::GpOptions opt;
        opt.tol = 1e-9;
        const auto sol = gp::solve_gp(pr, opt);
        res.status = sol.status;
        if (sol.status != gp::GpStatus::optimal)
        {
            Eigen::VectorXd full = Eigen::VectorXd::Zero(K);
            for (int k : active)
                full(k) = params.p_max[k];
            const Eigen::VectorXd s = coeffs.sinr(full);
            for (int k : active)
                if (s(k) < targets(k))
                    res.violating_users.push_back(k);
            return res;
        }
        for (int k : active)
            res.q(k) = sol.x[var_of[k]];
        res.feasible = true;
        return res;
    }

    double compute_nu_star(const Eigen::VectorXd &q_plus, const std::vector<double> &p_max)
    {
        double total = 0.0;
        for (double p : p_max)
            total += p;
        if (!(total > 0.0))
            throw std::invalid_argument("compute_nu_star: p_max must be positive");
        return std::clamp(q_plus.sum() / total, 0.0, 1.0);
    }

    gp::GpProblem build_sca_gp(const SinrCoefficients &coeffs, double nu, const Eigen::VectorXd &t_hat,
                               const std::vector<double> &p_max, const Eigen::VectorXd &targets, double delta)
    {
        const int K = static_cast<int>(t_hat.size());
        gp::GpProblem pr;
        for (int k = 0; k < K; ++k)
            pr.add_variable(power_floor_ratio * p_max[k], p_max[k]);
        for (int k = 0; k < K; ++k)
            pr.add_variable((1.0 - delta) * t_hat(k), (1.0 + delta) * t_hat(k));
        auto qv = [](int k) { return k; };
        auto tv = [K](int k) { return K + k; };

        // prod_k t_k^{-xi_k}, xi = t_hat / (1 + t_hat): the monomial lower bound of prod (1 + t_k).
        gp::Monomial obj(1.0);
        for (int k = 0; k < K; ++k)
            obj.exponents.emplace_back(tv(k), -t_hat(k) / (1.0 + t_hat(k)));
        pr.objective = gp::Posynomial(obj);

        double budget = 0.0;
        for (double p : p_max)
            budget += p;
        budget *= nu;

        for (int k = 0; k < K; ++k)
        {
            // t_k q_k^{-1} (sum_{k'!=k} a q_k' + sum_k' b q_k' + c_k) <= 1
            gp::Posynomial sinr_con;
            gp::Posynomial se_con;
            for (int kp = 0; kp < K; ++kp)
            {
                const double coef = (kp != k ? coeffs.a(k, kp) : 0.0) + coeffs.b(k, kp);
                if (coef <= 0.0)
                    continue;
                if (kp == k)
                {
                    sinr_con += gp::Monomial(coef, {{tv(k), 1.0}});
                    se_con += gp::Monomial(targets(k) * coef);
                }
                else
                {
                    sinr_con += gp::Monomial(coef, {{tv(k), 1.0}, {qv(kp), 1.0}, {qv(k), -1.0}});
                    se_con += gp::Monomial(targets(k) * coef, {{qv(kp), 1.0}, {qv(k), -1.0}});
                }
            }
            if (coeffs.c(k) > 0.0)
            {
                sinr_con += gp::Monomial(coeffs.c(k), {{tv(k), 1.0}, {qv(k), -1.0}});
                se_con += gp::Monomial(targets(k) * coeffs.c(k), {{qv(k), -1.0}});
            }
            pr.inequalities.push_back(std::move(sinr_con));
            if (targets(k) > 0.0)
                pr.inequalities.push_back(std::move(se_con));
        }

        gp::Posynomial budget_con;
        for (int k = 0; k < K; ++k)
            budget_con += gp::Monomial(1.0 / budget, {{qv(k), 1.0}});
        pr.inequalities.push_back(std::move(budget_con));
        return pr;
    }

    namespace
    {
        double product_one_plus(const Eigen::VectorXd &v)
        {
            return (1.0 + v.array()).prod();
        }

        // Proportional fill between q_plus and p_max that spends exactly nu * sum p_max.
        Eigen::VectorXd fill_budget(const Eigen::VectorXd &q_plus, const std::vector<double> &p_max, double nu,
                                    double lambda_scale)
        {
            const auto K = q_plus.size();
            Eigen::VectorXd pm(K);
            for (Eigen::Index k = 0; k < K; ++k)
                pm(k) = p_max[k];
            const double spare = (pm - q_plus).sum();
            const double want = nu * pm.sum() - q_plus.sum();
            const double lambda = spare > 0.0 ? std::clamp(want / spare, 0.0, 1.0) : 0.0;
            Eigen::VectorXd q = q_plus + lambda_scale * lambda * (pm - q_plus);
            for (Eigen::Index k = 0; k < K; ++k)
                q(k) = std::max(q(k), power_floor_ratio * pm(k));
            return q;
        }
    }

    ScaResult sca_power_allocation(const SinrCoefficients &coeffs, double nu, const Eigen::VectorXd &q_init,
                                   const std::vector<double> &p_max, const Eigen::VectorXd &targets,
                                   const ScaOptions &options, const Eigen::VectorXd *q_restart)
    {
        const int K = static_cast<int>(q_init.size());
        if (!(nu > 0.0 && nu <= 1.0 + 1e-12))
            throw std::invalid_argument("sca_power_allocation: nu must lie in (0, 1]");

        auto floored = [&](Eigen::VectorXd q)
        {
            for (int k = 0; k < K; ++k)
                q(k) = std::clamp(q(k), power_floor_ratio * p_max[k], p_max[k]);
            return q;
        };

        ScaResult res;
        Eigen::VectorXd q = floored(q_init);
        Eigen::VectorXd t_hat = coeffs.sinr(q);
        bool restarted = false;

        for (int it = 1; it <= options.max_iterations; ++it)
        {
            const auto pr = build_sca_gp(coeffs, nu, t_hat, p_max, targets, options.delta);
            gp::GpOptions gopt;
            gopt.tol = options.gp_tol;
            gopt.initial.resize(static_cast<std::size_t>(2 * K));
            for (int k = 0; k < K; ++k)
            {
                gopt.initial[k] = q(k) * (1.0 - 1e-6);
                gopt.initial[K + k] = t_hat(k) * (1.0 - 0.5 * options.delta);
            }
            const auto sol = gp::solve_gp(pr, gopt);
            if (sol.status != gp::GpStatus::optimal)
            {
                if (it == 1 && q_restart && !restarted)
                {
                    restarted = true;
                    q = floored(*q_restart);
                    t_hat = coeffs.sinr(q);
                    --it;
                    continue;
                }
                if (res.trace.empty())
                {
                    res.status = ScaStatus::infeasible;
                    res.q = q;
                    res.t = t_hat;
                    res.sinr = t_hat;
                    return res;
                }
                res.status = ScaStatus::iteration_cap;
                break;
            }

            ScaIterate rec;
            rec.iteration = it;
            rec.t_hat = t_hat;
            rec.q.resize(K);
            rec.t.resize(K);
            for (int k = 0; k < K; ++k)
            {
                rec.q(k) = sol.x[k];
                rec.t(k) = sol.x[K + k];
            }
            rec.sinr = coeffs.sinr(rec.q);
            rec.surrogate = product_one_plus(rec.t);
            rec.product = product_one_plus(rec.sinr);
            rec.gp_violation = sol.max_violation;
            rec.newton_steps = sol.newton_steps;

            const double change = (rec.sinr - t_hat).cwiseAbs().maxCoeff();
            q = rec.q;
            t_hat = rec.sinr;
            res.trace.push_back(std::move(rec));
            if (change <= options.tol)
            {
                res.status = ScaStatus::converged;
                break;
            }
            res.status = ScaStatus::iteration_cap;
        }
        res.q = q;
        res.sinr = coeffs.sinr(q);
        res.t = res.trace.empty() ? res.sinr : res.trace.back().t;
        return res;
    }

    ScaResult sca_power_allocation(const Eigen::MatrixXd &U, double nu, const Eigen::VectorXd &q_init,
                                   const SystemParams &params, const NetworkStats &stats, const QuantizerSpec &spec,
                                   const ScaOptions &options, const Eigen::VectorXd *q_restart)
    {
        const auto coeffs = sinr_coefficients(stats, spec, U, params.rho, params.N);
        return sca_power_allocation(coeffs, nu, q_init, params.p_max, sinr_targets(params), options, q_restart);
    }

    namespace
    {
        bool meets_targets(const SolutionState &s, const SystemParams &params, double slack = 1e-9)
        {
            for (int k = 0; k < params.K; ++k)
                if (params.se_req[k] > 0.0 && s.se(k) < params.se_req[k] - slack)
                    return false;
            return true;
        }
    }

    Algorithm1Result algorithm1(double nu, const SystemParams &params, const NetworkStats &stats,
                                const QuantizerSpec &spec, const Eigen::VectorXd &q_pmp,
                                const Algorithm1Options &options)
    {
        validate_params(params);
        Algorithm1Result res;

        // Step 1: seed from the PMP point, filled up to the budget while SE targets hold.
        Eigen::VectorXd q;
        Eigen::MatrixXd U;
        SolutionState state;
        bool seeded = false;
        for (double scale = 1.0; scale > 1e-6; scale *= 0.5)
        {
            q = fill_budget(q_pmp, params.p_max, nu, scale);
            U = design_filters(q, stats, spec, params);
            state = evaluate_state(q, U, params, stats, spec);
            if (meets_targets(state, params))
            {
                seeded = true;
                break;
            }
        }
        if (!seeded)
        {
            q = fill_budget(q_pmp, params.p_max, nu, 0.0);
            U = design_filters(q, stats, spec, params);
            state = evaluate_state(q, U, params, stats, spec);
        }
        const Eigen::VectorXd q_restart = fill_budget(q_pmp, params.p_max, nu, 0.0);

        res.trace.push_back({0, state.ee, state.sum_se, product_one_plus(state.sinr), 0.0, 0});
        const auto targets = sinr_targets(params);

        for (int outer = 1; outer <= options.max_outer; ++outer)
        {
            // Steps 3-4: SCA power allocation with the filters fixed.
            const auto coeffs = sinr_coefficients(stats, spec, U, params.rho, params.N);
            const auto sca = sca_power_allocation(coeffs, nu, q, params.p_max, targets, options.sca, &q_restart);
            if (sca.status == ScaStatus::infeasible)
            {
                if (outer == 1)
                {
                    res.state = state;
                    res.feasible = false;
                    return res;
                }
                break;
            }
            for (const auto &it : sca.trace)
                res.sca_trace.emplace_back(outer, it);

            // Step 5: filters for the new powers. Steps 6-7: objective and per-user change.
            const Eigen::VectorXd q_new = sca.q;
            const Eigen::MatrixXd U_new = design_filters(q_new, stats, spec, params);
            const SolutionState next = evaluate_state(q_new, U_new, params, stats, spec);

            const double se_change = (next.se - state.se).cwiseAbs().maxCoeff();
            const double ee_change = std::abs(next.ee - state.ee) / std::max(state.ee, 1e-300);
            q = q_new;
            U = U_new;
            state = next;
            res.trace.push_back({outer, state.ee, state.sum_se, product_one_plus(state.sinr), se_change,
                                 static_cast<int>(sca.trace.size())});
            // Step 8.
            if (se_change <= options.per_user_tol && ee_change < options.ee_rel_tol)
            {
                res.converged = true;
                break;
            }
        }
        res.state = state;
        res.feasible = meets_targets(state, params, 1e-6);
        return res;
    }

    Algorithm1Result algorithm1(double nu, const SystemParams &params, const NetworkStats &stats,
                                const QuantizerSpec &spec, const Algorithm1Options &options)
    {
        Eigen::VectorXd pm(params.K);
        for (int k = 0; k < params.K; ++k)
            pm(k) = params.p_max[k];
        const auto U_full = design_filters(pm, stats, spec, params);
        const auto pmp = solve_pmp(U_full, stats, spec, params);
        if (!pmp.feasible)
        {
            Algorithm1Result res;
            res.state = evaluate_state(pm, U_full, params, stats, spec);
            return res;
        }
        return algorithm1(nu, params, stats, spec, pmp.q, options);
    }

    std::vector<double> nu_grid(double nu_star, int size, double floor)
    {
        const double lo = std::max(nu_star, floor);
        if (size <= 1 || lo >= 1.0)
            return {1.0};
        std::vector<double> g(static_cast<std::size_t>(size));
        const double a = std::log(lo);
        for (int i = 0; i < size; ++i)
            g[i] = std::exp(a * (1.0 - static_cast<double>(i) / (size - 1)));
        g.back() = 1.0;
        return g;
    }

    NuSearchResult maximize_ee(const SystemParams &params, const NetworkStats &stats, const QuantizerSpec &spec,
                               const NuSearchOptions &options)
    {
        validate_params(params);
        NuSearchResult res;
        Eigen::VectorXd pm(params.K);
        for (int k = 0; k < params.K; ++k)
            pm(k) = params.p_max[k];
        const auto U_full = design_filters(pm, stats, spec, params);
        const auto pmp = solve_pmp(U_full, stats, spec, params);
        if (!pmp.feasible)
            return res;
        res.q_pmp = pmp.q;
        res.nu_star = compute_nu_star(pmp.q, params.p_max);

        for (double nu : nu_grid(res.nu_star, options.grid_size, options.nu_floor))
        {
            const auto a1 = algorithm1(nu, params, stats, spec, pmp.q, options.algorithm);
            NuPoint pt;
            pt.nu = nu;
            pt.feasible = a1.feasible;
            pt.outer_iterations = static_cast<int>(a1.trace.size()) - 1;
            pt.state = a1.state;
            res.points.push_back(std::move(pt));
        }
        for (std::size_t i = 0; i < res.points.size(); ++i)
            if (res.points[i].feasible && (res.best_index < 0 || res.points[i].state.ee > res.best.ee))
            {
                res.best_index = static_cast<int>(i);
                res.best = res.points[i].state;
            }
        res.feasible = res.best_index >= 0;
        return res;
    }

    BitSearchResult maximize_ee_over_bits(const SystemParams &params, const NetworkStats &stats,
                                          const std::vector<int> &bits, const NuSearchOptions &options)
    {
        BitSearchResult out;
        out.bits = bits;
        double best = -1.0;
        for (std::size_t i = 0; i < bits.size(); ++i)
        {
            SystemParams p = params;
            p.alpha = bits[i];
            NuSearchResult r;
            if (backhaul_rate(p.K, p.tau_f(), p.alpha, p.coherence_time_s) <= p.c_bh_bps)
                r = maximize_ee(p, stats, optimize_step_size(p.alpha), options);
            if (r.feasible && r.best.ee > best)
            {
                best = r.best.ee;
                out.best_index = static_cast<int>(i);
            }
            out.results.push_back(std::move(r));
        }
        return out;
    }

    SolutionState equal_power_baseline(const SystemParams &params, const NetworkStats &stats,
                                       const QuantizerSpec &spec)
    {
        Eigen::VectorXd q(params.K);
        for (int k = 0; k < params.K; ++k)
            q(k) = params.p_max[k];
        const Eigen::MatrixXd U = Eigen::MatrixXd::Constant(stats.M(), stats.K(), 1.0 / std::sqrt(double(stats.M())));
        return evaluate_state(q, U, params, stats, spec);
    }
}
