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

#include "cfee/gp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cfee::gp
{
    Monomial::Monomial(double coeff, std::vector<std::pair<int, double>> exps)
        : coefficient(coeff), exponents(std::move(exps))
    {
    }

    Monomial var(int i, double power)
    {
        return Monomial(1.0, {{i, power}});
    }

    Monomial operator*(const Monomial &a, const Monomial &b)
    {
        Monomial out(a.coefficient * b.coefficient, a.exponents);
        for (const auto &[v, e] : b.exponents)
        {
            auto it = std::find_if(out.exponents.begin(), out.exponents.end(),
                                   [v = v](const auto &p) { return p.first == v; });
            if (it == out.exponents.end())
                out.exponents.emplace_back(v, e);
            else
                it->second += e;
        }
        return out;
    }

    Monomial operator*(double s, const Monomial &m)
    {
        return Monomial(s * m.coefficient, m.exponents);
    }

    Posynomial::Posynomial(Monomial m) { terms.push_back(std::move(m)); }

    Posynomial &Posynomial::operator+=(const Monomial &m)
    {
        terms.push_back(m);
        return *this;
    }

    Posynomial &Posynomial::operator+=(const Posynomial &p)
    {
        terms.insert(terms.end(), p.terms.begin(), p.terms.end());
        return *this;
    }

    Posynomial operator+(Posynomial a, const Posynomial &b)
    {
        a += b;
        return a;
    }

    Posynomial operator*(const Posynomial &p, const Monomial &m)
    {
        Posynomial out;
        for (const auto &t : p.terms)
            out.terms.push_back(t * m);
        return out;
    }

    int GpProblem::add_variable(double lo, double hi)
    {
        lower.push_back(lo);
        upper.push_back(hi);
        return num_vars++;
    }

    std::string to_string(GpStatus s)
    {
        switch (s)
        {
        case GpStatus::optimal:
            return "optimal";
        case GpStatus::infeasible:
            return "infeasible";
        case GpStatus::unbounded:
            return "unbounded";
        case GpStatus::max_iterations:
            return "max_iterations";
        }
        return "unknown";
    }

    double monomial_eval(const Monomial &m, std::span<const double> x)
    {
        double v = m.coefficient;
        for (const auto &[i, e] : m.exponents)
        {
            if (i < 0 || static_cast<std::size_t>(i) >= x.size())
                throw std::out_of_range("monomial_eval: variable index out of range");
            if (!(x[i] > 0.0))
                throw std::invalid_argument("monomial_eval: variables must be positive");
            v *= std::pow(x[i], e);
        }
        return v;
    }

    double posynomial_eval(const Posynomial &p, std::span<const double> x)
    {
        double s = 0.0;
        for (const auto &t : p.terms)
            s += monomial_eval(t, x);
        return s;
    }

    void check_problem(const GpProblem &pr)
    {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("GpProblem: " + msg); };
        if (pr.num_vars < 1)
            fail("needs at least one variable");
        if (static_cast<int>(pr.lower.size()) != pr.num_vars || static_cast<int>(pr.upper.size()) != pr.num_vars)
            fail("bounds must have num_vars entries");
        for (int i = 0; i < pr.num_vars; ++i)
            if (!(pr.lower[i] >= 0.0) || !(pr.upper[i] > 0.0) || pr.lower[i] > pr.upper[i])
                fail("bad bounds for variable " + std::to_string(i));
        auto check_mono = [&](const Monomial &m)
        {
            if (!(m.coefficient > 0.0) || !std::isfinite(m.coefficient))
                fail("monomial coefficients must be positive and finite");
            for (const auto &[i, e] : m.exponents)
                if (i < 0 || i >= pr.num_vars || !std::isfinite(e))
                    fail("bad exponent entry");
        };
        if (pr.objective.terms.empty())
            fail("objective must have at least one term");
        for (const auto &t : pr.objective.terms)
            check_mono(t);
        for (const auto &p : pr.inequalities)
        {
            if (p.terms.empty())
                fail("inequality posynomial must have at least one term");
            for (const auto &t : p.terms)
                check_mono(t);
        }
        for (const auto &m : pr.equalities)
            check_mono(m);
    }

    double max_violation(const GpProblem &pr, std::span<const double> x)
    {
        double v = 0.0;
        for (const auto &p : pr.inequalities)
            v = std::max(v, posynomial_eval(p, x) - 1.0);
        for (const auto &m : pr.equalities)
            v = std::max(v, std::abs(monomial_eval(m, x) - 1.0));
        for (int i = 0; i < pr.num_vars; ++i)
        {
            if (pr.lower[i] > 0.0)
                v = std::max(v, pr.lower[i] / x[i] - 1.0);
            if (std::isfinite(pr.upper[i]))
                v = std::max(v, x[i] / pr.upper[i] - 1.0);
        }
        return v;
    }

    namespace
    {
        using Eigen::MatrixXd;
        using Eigen::VectorXd;

        // One log-sum-exp: log sum_j exp(b_j + a_j^T y), with a_j stored against a local
        // list of the variables the function touches.
        struct Lse
        {
            struct Term
            {
                std::vector<std::pair<int, double>> local;
                double b = 0.0;
            };
            std::vector<int> vars;
            std::vector<Term> terms;
        };

        // slack >= 0 appends exponent -1 on that variable to every term (phase I).
        Lse compile(const Posynomial &p, int slack = -1)
        {
            Lse f;
            std::map<int, int> pos;
            for (const auto &t : p.terms)
                for (const auto &[i, e] : t.exponents)
                    if (e != 0.0 && !pos.count(i))
                        pos[i] = 0;
            for (auto &[i, l] : pos)
            {
                l = static_cast<int>(f.vars.size());
                f.vars.push_back(i);
            }
            const int slack_pos = static_cast<int>(f.vars.size());
            if (slack >= 0)
                f.vars.push_back(slack);
            for (const auto &t : p.terms)
            {
                Lse::Term term;
                term.b = std::log(t.coefficient);
                std::map<int, double> acc;
                for (const auto &[i, e] : t.exponents)
                    if (e != 0.0)
                        acc[pos[i]] += e;
                for (const auto &[l, e] : acc)
                    term.local.emplace_back(l, e);
                if (slack >= 0)
                    term.local.emplace_back(slack_pos, -1.0);
                f.terms.push_back(std::move(term));
            }
            return f;
        }

        struct LseEval
        {
            double value;
            VectorXd grad; // local
            MatrixXd hess; // local
        };

        double lse_value(const Lse &f, const VectorXd &y)
        {
            double mx = -INFINITY;
            thread_local std::vector<double> e;
            e.resize(f.terms.size());
            for (std::size_t j = 0; j < f.terms.size(); ++j)
            {
                double v = f.terms[j].b;
                for (const auto &[l, a] : f.terms[j].local)
                    v += a * y(f.vars[l]);
                e[j] = v;
                mx = std::max(mx, v);
            }
            double s = 0.0;
            for (double v : e)
                s += std::exp(v - mx);
            return mx + std::log(s);
        }

        LseEval lse_eval(const Lse &f, const VectorXd &y)
        {
            const auto nl = static_cast<Eigen::Index>(f.vars.size());
            LseEval out{0.0, VectorXd::Zero(nl), MatrixXd::Zero(nl, nl)};
            thread_local std::vector<double> e;
            e.resize(f.terms.size());
            double mx = -INFINITY;
            for (std::size_t j = 0; j < f.terms.size(); ++j)
            {
                double v = f.terms[j].b;
                for (const auto &[l, a] : f.terms[j].local)
                    v += a * y(f.vars[l]);
                e[j] = v;
                mx = std::max(mx, v);
            }
            double s = 0.0;
            for (auto &v : e)
            {
                v = std::exp(v - mx);
                s += v;
            }
            out.value = mx + std::log(s);
            for (std::size_t j = 0; j < f.terms.size(); ++j)
            {
                const double p = e[j] / s;
                const auto &loc = f.terms[j].local;
                for (const auto &[l, a] : loc)
                {
                    out.grad(l) += p * a;
                    for (const auto &[l2, a2] : loc)
                        out.hess(l, l2) += p * a * a2;
                }
            }
            out.hess.noalias() -= out.grad * out.grad.transpose();
            return out;
        }

        // Barrier problem over w with y = y0 + Z w (or y = w when unmapped):
        //   minimize t * F0(y) - sum_i log(-F_i(y)).
        struct BarrierProblem
        {
            int ny = 0;
            Lse objective;
            std::vector<Lse> constraints;
            bool mapped = false;
            VectorXd y0;
            MatrixXd Z;

            int nw() const { return mapped ? static_cast<int>(Z.cols()) : ny; }
            VectorXd to_y(const VectorXd &w) const { return mapped ? VectorXd(y0 + Z * w) : w; }

            // +inf outside the strict interior.
            double value(const VectorXd &w, double t) const
            {
                const VectorXd y = to_y(w);
                double v = t * lse_value(objective, y);
                for (const auto &c : constraints)
                {
                    const double h = lse_value(c, y);
                    if (!(h < 0.0))
                        return INFINITY;
                    v -= std::log(-h);
                }
                return std::isfinite(v) ? v : INFINITY;
            }

            void derivatives(const VectorXd &w, double t, VectorXd &g, MatrixXd &H) const
            {
                const VectorXd y = to_y(w);
                VectorXd gy = VectorXd::Zero(ny);
                MatrixXd Hy = MatrixXd::Zero(ny, ny);
                auto scatter = [&](const Lse &f, const LseEval &ev, double sg, double sh, double so)
                {
                    const auto nl = static_cast<Eigen::Index>(f.vars.size());
                    for (Eigen::Index i = 0; i < nl; ++i)
                    {
                        const int gi = f.vars[i];
                        gy(gi) += sg * ev.grad(i);
                        for (Eigen::Index j = 0; j < nl; ++j)
                            Hy(gi, f.vars[j]) += sh * ev.hess(i, j) + so * ev.grad(i) * ev.grad(j);
                    }
                };
                scatter(objective, lse_eval(objective, y), t, t, 0.0);
                for (const auto &c : constraints)
                {
                    const auto ev = lse_eval(c, y);
                    const double inv = -1.0 / ev.value; // 1 / (-h) > 0
                    scatter(c, ev, inv, inv, inv * inv);
                }
                if (mapped)
                {
                    g = Z.transpose() * gy;
                    H = Z.transpose() * Hy * Z;
                }
                else
                {
                    g = std::move(gy);
                    H = std::move(Hy);
                }
            }
        };

        enum class CenterResult
        {
            converged,
            stopped,
            exhausted,
            diverged,
        };

        CenterResult center(const BarrierProblem &bp, VectorXd &w, double t, int &steps, int max_steps,
                            const std::function<bool(const VectorXd &)> &stop = {})
        {
            VectorXd g;
            MatrixXd H;
            double fw = bp.value(w, t);
            for (;;)
            {
                if (steps >= max_steps)
                    return CenterResult::exhausted;
                bp.derivatives(w, t, g, H);
                Eigen::LDLT<MatrixXd> ldlt(H);
                VectorXd dw = -ldlt.solve(g);
                double dec = -g.dot(dw);
                if (ldlt.info() != Eigen::Success || !dw.allFinite() || !(dec > 0.0))
                {
                    const double reg = 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
                    MatrixXd Hr = H;
                    Hr.diagonal().array() += reg;
                    dw = -Eigen::LDLT<MatrixXd>(Hr).solve(g);
                    dec = -g.dot(dw);
                    if (!dw.allFinite() || !(dec >= 0.0))
                        return CenterResult::diverged;
                }
                // The second test stops once the decrement is below the rounding level of the
                // barrier value itself, where Armijo comparisons are meaningless.
                if (dec / 2.0 <= 1e-10 || dec / 2.0 <= 1e-13 * std::abs(fw))
                    return CenterResult::converged;

                double step = 1.0;
                double fn = bp.value(w + step * dw, t);
                while (!(fn <= fw - 0.01 * step * dec))
                {
                    step *= 0.5;
                    if (step < 1e-14)
                        return CenterResult::converged; // no progress possible at this precision
                    fn = bp.value(w + step * dw, t);
                }
                w += step * dw;
                fw = fn;
                ++steps;
                if (stop && stop(w))
                    return CenterResult::stopped;
                if (w.cwiseAbs().maxCoeff() > 700.0)
                    return CenterResult::diverged;
            }
        }

        double initial_log(double lo, double hi)
        {
            const bool has_lo = lo > 0.0, has_hi = std::isfinite(hi);
            if (has_lo && has_hi)
                return 0.5 * (std::log(lo) + std::log(hi));
            if (has_lo)
                return std::log(lo) + 1.0;
            if (has_hi)
                return std::log(hi) - 1.0;
            return 0.0;
        }
    }

    GpSolution solve_gp(const GpProblem &pr, const GpOptions &opt)
    {
        check_problem(pr);
        const int n = pr.num_vars;
        GpSolution sol;

        // Inequalities plus one single-term constraint per finite bound.
        std::vector<Posynomial> cons = pr.inequalities;
        for (int i = 0; i < n; ++i)
        {
            if (std::isfinite(pr.upper[i]))
                cons.emplace_back(Monomial(1.0 / pr.upper[i], {{i, 1.0}}));
            if (pr.lower[i] > 0.0)
                cons.emplace_back(Monomial(pr.lower[i], {{i, -1.0}}));
        }
        const int m = static_cast<int>(cons.size());

        // Equalities a^T y = -log c, eliminated through y = y0 + Z w.
        bool mapped = false;
        VectorXd y0 = VectorXd::Zero(n);
        MatrixXd Z;
        if (!pr.equalities.empty())
        {
            const auto p = static_cast<Eigen::Index>(pr.equalities.size());
            MatrixXd A = MatrixXd::Zero(p, n);
            VectorXd rhs(p);
            for (Eigen::Index r = 0; r < p; ++r)
            {
                for (const auto &[i, e] : pr.equalities[r].exponents)
                    A(r, i) += e;
                rhs(r) = -std::log(pr.equalities[r].coefficient);
            }
            Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
            svd.setThreshold(1e-12);
            const auto rank = svd.rank();
            y0 = svd.solve(rhs);
            if ((A * y0 - rhs).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff()))
                return sol; // inconsistent equalities
            Z = svd.matrixV().rightCols(n - rank);
            mapped = true;
        }

        VectorXd y_init(n);
        for (int i = 0; i < n; ++i)
            y_init(i) = opt.initial.size() == static_cast<std::size_t>(n) && opt.initial[i] > 0.0
                            ? std::log(opt.initial[i])
                            : initial_log(pr.lower[i], pr.upper[i]);

        auto finish = [&](const VectorXd &y, GpStatus status)
        {
            sol.status = status;
            sol.x.resize(n);
            for (int i = 0; i < n; ++i)
                sol.x[i] = std::exp(y(i));
            const bool representable =
                std::all_of(sol.x.begin(), sol.x.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
            if (!representable)
            {
                // Diverged iterate: the objective went to zero or a variable left double range.
                sol.objective = status == GpStatus::unbounded ? 0.0 : NAN;
                sol.max_violation = INFINITY;
                return sol;
            }
            sol.objective = posynomial_eval(pr.objective, sol.x);
            sol.max_violation = max_violation(pr, sol.x);
            return sol;
        };

        if (mapped && Z.cols() == 0)
        {
            // Fully determined by the equalities.
            const bool ok = [&]
            {
                for (const auto &c : cons)
                    if (lse_value(compile(c), y0) > 1e-12)
                        return false;
                return true;
            }();
            return finish(y0, ok ? GpStatus::optimal : GpStatus::infeasible);
        }

        VectorXd w = mapped ? VectorXd(Z.transpose() * (y_init - y0)) : y_init;

        // Phase I when the start is not strictly feasible: minimize s s.t. F_i(y) <= s.
        {
            BarrierProblem probe;
            probe.ny = n;
            probe.mapped = mapped;
            probe.y0 = y0;
            probe.Z = Z;
            const VectorXd y = probe.to_y(w);
            double worst = -INFINITY;
            for (const auto &c : cons)
                worst = std::max(worst, lse_value(compile(c), y));

            if (m > 0 && !(worst < -1e-9))
            {
                BarrierProblem p1;
                p1.ny = n + 1;
                p1.objective = compile(Posynomial(Monomial(1.0, {{n, 1.0}})));
                for (const auto &c : cons)
                    p1.constraints.push_back(compile(c, n));
                // s >= -1 keeps phase I bounded when the feasible set is unbounded.
                p1.constraints.push_back(compile(Posynomial(Monomial(std::exp(-1.0))), n));
                const int nz = mapped ? static_cast<int>(Z.cols()) : n;
                p1.mapped = mapped;
                if (mapped)
                {
                    p1.y0 = VectorXd::Zero(n + 1);
                    p1.y0.head(n) = y0;
                    p1.Z = MatrixXd::Zero(n + 1, nz + 1);
                    p1.Z.topLeftCorner(n, nz) = Z;
                    p1.Z(n, nz) = 1.0;
                }

                VectorXd w1(nz + 1);
                w1.head(nz) = w;
                w1(nz) = worst + 1.0;

                constexpr double target = -1e-2;
                // Stop on the slack or as soon as every original constraint holds with margin:
                // an unbounded feasible set lets the phase-I barrier run off with s near 0.
                std::vector<Lse> plain;
                for (const auto &c : cons)
                    plain.push_back(compile(c));
                auto feasible = [&](const VectorXd &v)
                {
                    if (v(nz) < target)
                        return true;
                    const VectorXd yy = probe.to_y(v.head(nz));
                    for (const auto &f : plain)
                        if (!(lse_value(f, yy) < target))
                            return false;
                    return true;
                };
                double t = 1.0;
                bool found = false;
                int steps = 0;
                for (;;)
                {
                    const auto r = center(p1, w1, t, steps, opt.max_newton_steps, feasible);
                    if (r == CenterResult::stopped)
                    {
                        found = true;
                        break;
                    }
                    if (r == CenterResult::exhausted)
                    {
                        sol.phase1_steps = steps;
                        sol.newton_steps = steps;
                        return finish(probe.to_y(w1.head(nz)), GpStatus::max_iterations);
                    }
                    if (r == CenterResult::diverged)
                        break;
                    if (static_cast<double>(m) / t < 1e-10)
                        break;
                    t *= opt.mu;
                }
                sol.phase1_steps = steps;
                if (!found && !(w1(nz) < -1e-12))
                {
                    sol.newton_steps = steps;
                    return finish(probe.to_y(w1.head(nz)), GpStatus::infeasible);
                }
                w = w1.head(nz);
            }
        }

        // Phase II: barrier path on the original objective.
        BarrierProblem bp;
        bp.ny = n;
        bp.objective = compile(pr.objective);
        for (const auto &c : cons)
            bp.constraints.push_back(compile(c));
        bp.mapped = mapped;
        bp.y0 = y0;
        bp.Z = Z;

        int steps = sol.phase1_steps;
        double t = 1.0;
        for (;;)
        {
            const auto r = center(bp, w, t, steps, opt.max_newton_steps);
            sol.newton_steps = steps;
            if (r == CenterResult::exhausted)
                return finish(bp.to_y(w), GpStatus::max_iterations);
            if (r == CenterResult::diverged)
                return finish(bp.to_y(w), GpStatus::unbounded);
            sol.objective_trace.push_back(std::exp(lse_value(bp.objective, bp.to_y(w))));
            if (m == 0 || static_cast<double>(m) / t < opt.tol)
                break;
            t *= opt.mu;
        }
        return finish(bp.to_y(w), GpStatus::optimal);
    }

    GpSolution brute_force_oracle(const GpProblem &pr, int grid_points_per_dim, double equality_tol)
    {
        check_problem(pr);
        const int n = pr.num_vars;
        if (n > 4)
            throw std::invalid_argument("brute_force_oracle: at most 4 variables");
        if (grid_points_per_dim < 2)
            throw std::invalid_argument("brute_force_oracle: need at least 2 grid points per dimension");
        for (int i = 0; i < n; ++i)
            if (!(pr.lower[i] > 0.0) || !std::isfinite(pr.upper[i]))
                throw std::invalid_argument("brute_force_oracle: every variable needs a finite positive box");

        const int G = grid_points_per_dim;
        std::vector<std::vector<double>> axes(static_cast<std::size_t>(n), std::vector<double>(G));
        for (int i = 0; i < n; ++i)
        {
            const double lo = std::log(pr.lower[i]), hi = std::log(pr.upper[i]);
            for (int g = 0; g < G; ++g)
                axes[i][g] = std::exp(lo + (hi - lo) * g / (G - 1));
        }

        GpSolution best;
        best.status = GpStatus::infeasible;
        best.objective = INFINITY;
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (;;)
        {
            for (int i = 0; i < n; ++i)
                x[i] = axes[i][idx[i]];
            bool ok = true;
            for (const auto &p : pr.inequalities)
                if (posynomial_eval(p, x) > 1.0 + 1e-12)
                {
                    ok = false;
                    break;
                }
            if (ok)
                for (const auto &e : pr.equalities)
                    if (std::abs(std::log(monomial_eval(e, x))) > equality_tol)
                    {
                        ok = false;
                        break;
                    }
            if (ok)
            {
                const double f = posynomial_eval(pr.objective, x);
                if (f < best.objective)
                {
                    best.objective = f;
                    best.x = x;
                    best.status = GpStatus::optimal;
                }
            }
            int d = 0;
            while (d < n && ++idx[d] == G)
                idx[d++] = 0;
            if (d == n)
                break;
        }
        if (best.status == GpStatus::optimal)
            best.max_violation = max_violation(pr, best.x);
        return best;
    }

    namespace
    {
        void write_monomial(std::ostream &os, const Monomial &m)
        {
            os << "  term " << m.coefficient;
            for (const auto &[i, e] : m.exponents)
                os << ' ' << i << ':' << e;
            os << '\n';
        }

        void write_posynomial(std::ostream &os, const std::string &tag, const Posynomial &p)
        {
            os << tag << ' ' << p.terms.size() << '\n';
            for (const auto &t : p.terms)
                write_monomial(os, t);
        }

        Monomial read_term(std::istream &is)
        {
            std::string line;
            while (std::getline(is, line) && line.find_first_not_of(" \t") == std::string::npos)
            {
            }
            std::istringstream ls(line);
            std::string tag;
            Monomial m;
            if (!(ls >> tag >> m.coefficient) || tag != "term")
                throw std::runtime_error("read_problem: expected 'term' line, got '" + line + "'");
            std::string tok;
            while (ls >> tok)
            {
                const auto colon = tok.find(':');
                if (colon == std::string::npos)
                    throw std::runtime_error("read_problem: bad exponent token '" + tok + "'");
                m.exponents.emplace_back(std::stoi(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
            }
            return m;
        }
    }

    void write_problem(std::ostream &os, const GpProblem &pr)
    {
        const auto old = os.precision(17);
        os << "gp-problem 1\n";
        os << "variables " << pr.num_vars << '\n';
        for (int i = 0; i < pr.num_vars; ++i)
            os << "bounds " << i << ' ' << pr.lower[i] << ' ' << pr.upper[i] << '\n';
        write_posynomial(os, "objective", pr.objective);
        os << "inequalities " << pr.inequalities.size() << '\n';
        for (const auto &p : pr.inequalities)
            write_posynomial(os, "posynomial", p);
        os << "equalities " << pr.equalities.size() << '\n';
        for (const auto &m : pr.equalities)
            write_monomial(os, m);
        os.precision(old);
    }

    GpProblem read_problem(std::istream &is)
    {
        auto expect = [&](const std::string &want)
        {
            std::string tag;
            if (!(is >> tag) || tag != want)
                throw std::runtime_error("read_problem: expected '" + want + "'");
        };
        auto read_double = [&]
        {
            std::string tok;
            is >> tok;
            return std::stod(tok); // accepts "inf"
        };
        GpProblem pr;
        int version = 0;
        expect("gp-problem");
        is >> version;
        if (version != 1)
            throw std::runtime_error("read_problem: unsupported version");
        expect("variables");
        int n = 0;
        is >> n;
        for (int i = 0; i < n; ++i)
        {
            expect("bounds");
            int idx = 0;
            is >> idx;
            const double lo = read_double();
            const double hi = read_double();
            pr.add_variable(lo, hi);
        }
        auto read_posy = [&](const std::string &tag)
        {
            expect(tag);
            std::size_t cnt = 0;
            is >> cnt;
            is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
            Posynomial p;
            for (std::size_t j = 0; j < cnt; ++j)
                p.terms.push_back(read_term(is));
            return p;
        };
        pr.objective = read_posy("objective");
        expect("inequalities");
        std::size_t ni = 0;
        is >> ni;
        for (std::size_t j = 0; j < ni; ++j)
            pr.inequalities.push_back(read_posy("posynomial"));
        expect("equalities");
        std::size_t ne = 0;
        is >> ne;
        is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
        for (std::size_t j = 0; j < ne; ++j)
            pr.equalities.push_back(read_term(is));
        check_problem(pr);
        return pr;
    }
}
