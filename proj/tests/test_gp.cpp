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
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace cfee;
using namespace cfee::gp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    // log sum_j c_j exp(a_j . y), evaluated with the max shift.
    double log_sum_exp_form(const Posynomial &p, const std::vector<double> &y)
    {
        std::vector<double> e;
        for (const auto &m : p.terms)
        {
            double v = std::log(m.coefficient);
            for (const auto &[i, a] : m.exponents)
                v += a * y[i];
            e.push_back(v);
        }
        const double top = *std::max_element(e.begin(), e.end());
        double s = 0.0;
        for (double v : e)
            s += std::exp(v - top);
        return top + std::log(s);
    }
}

TEST_CASE("single tight constraint", "[gp]")
{
    GpProblem pr;
    const int x = pr.add_variable();
    pr.objective = var(x);
    pr.inequalities.push_back(Posynomial(2.0 * var(x, -1.0)));
    const auto s = solve_gp(pr);
    REQUIRE(s.status == GpStatus::optimal);
    CHECK_THAT(s.x[0], WithinRel(2.0, 1e-5));
    CHECK_THAT(s.objective, WithinRel(2.0, 1e-5));
    CHECK(s.max_violation <= 1e-6);
}

TEST_CASE("monomial equality", "[gp]")
{
    GpProblem pr;
    const int a = pr.add_variable(), b = pr.add_variable();
    pr.objective = var(a) * var(b);
    pr.inequalities.push_back(Posynomial(var(a, -1.0) * var(b, -1.0)));
    pr.equalities.push_back(var(a) * var(b, -1.0));
    const auto s = solve_gp(pr);
    REQUIRE(s.status == GpStatus::optimal);
    CHECK_THAT(s.x[0], WithinRel(1.0, 1e-5));
    CHECK_THAT(s.x[1], WithinRel(s.x[0], 1e-9));
}

TEST_CASE("oracle on the small examples", "[gp]")
{
    GpProblem pr;
    const int x = pr.add_variable(0.1, 10.0);
    pr.objective = var(x);
    pr.inequalities.push_back(Posynomial(2.0 * var(x, -1.0)));
    CHECK_THAT(brute_force_oracle(pr, 2001).objective, WithinRel(2.0, 2.5e-3));

    GpProblem eq;
    const int a = eq.add_variable(0.1, 10.0), b = eq.add_variable(0.1, 10.0);
    eq.objective = var(a) * var(b);
    eq.inequalities.push_back(Posynomial(var(a, -1.0) * var(b, -1.0)));
    eq.equalities.push_back(var(a) * var(b, -1.0));
    CHECK_THAT(brute_force_oracle(eq, 201).objective, WithinRel(1.0, 1e-9));

    GpProblem big;
    for (int i = 0; i < 5; ++i)
        big.add_variable(1.0, 2.0);
    big.objective = var(0);
    CHECK_THROWS_AS(brute_force_oracle(big, 3), std::invalid_argument);
}

TEST_CASE("empty feasible set is reported", "[gp]")
{
    GpProblem pr;
    const int x = pr.add_variable(0.0, 0.5);
    pr.objective = var(x);
    pr.inequalities.push_back(Posynomial(var(x, -1.0)));
    CHECK(solve_gp(pr).status == GpStatus::infeasible);

    GpProblem boxed;
    boxed.add_variable(0.1, 0.5);
    boxed.objective = var(0);
    boxed.inequalities.push_back(Posynomial(var(0, -1.0)));
    CHECK(brute_force_oracle(boxed, 50).status == GpStatus::infeasible);
}

TEST_CASE("unbounded objective is reported", "[gp]")
{
    GpProblem pr;
    const int x = pr.add_variable();
    const int y = pr.add_variable();
    pr.objective = var(x);
    pr.inequalities.push_back(Posynomial(var(x) * var(y, -1.0)));
    CHECK(solve_gp(pr).status == GpStatus::unbounded);
}

TEST_CASE("unconstrained posynomial minimum", "[gp]")
{
    GpProblem pr;
    const int x = pr.add_variable();
    pr.objective = Posynomial(var(x)) + Posynomial(4.0 * var(x, -1.0));
    const auto s = solve_gp(pr);
    REQUIRE(s.status == GpStatus::optimal);
    CHECK_THAT(s.objective, WithinRel(4.0, 1e-8));
}

TEST_CASE("malformed problems are rejected", "[gp]")
{
    GpProblem pr;
    pr.add_variable();
    pr.objective = Posynomial(var(3));
    CHECK_THROWS_AS(solve_gp(pr), std::invalid_argument);
    pr.objective = Posynomial(Monomial(-1.0, {{0, 1.0}}));
    CHECK_THROWS_AS(check_problem(pr), std::invalid_argument);
    pr.objective = Posynomial(var(0));
    pr.lower[0] = 3.0;
    pr.upper[0] = 2.0;
    CHECK_THROWS_AS(check_problem(pr), std::invalid_argument);
}

TEST_CASE("posynomial evaluation", "[gp]")
{
    const std::vector<double> x{2.0, 4.0};
    CHECK(posynomial_eval(Posynomial(Monomial(3.0)), x) == 3.0);
    CHECK_THAT(monomial_eval(var(0) * var(1, -1.0), x), WithinRel(0.5, 1e-15));
    CHECK_THROWS_AS(posynomial_eval(Posynomial(var(0)), std::vector<double>{0.0, 1.0}), std::invalid_argument);

    auto eng = testing::engine(20);
    std::uniform_real_distribution<double> u(0.1, 3.0), e(-2.0, 2.0);
    for (int t = 0; t < 100; ++t)
    {
        const double c1 = u(eng), c2 = u(eng), a = e(eng), b = e(eng), d = e(eng);
        const std::vector<double> p{u(eng), u(eng)};
        const Posynomial f = Posynomial(c1 * var(0, a) * var(1, b)) + Posynomial(c2 * var(1, d));
        const double hand = c1 * std::pow(p[0], a) * std::pow(p[1], b) + c2 * std::pow(p[1], d);
        CHECK_THAT(posynomial_eval(f, p), WithinRel(hand, 1e-13));
    }
}

TEST_CASE("log transform matches direct evaluation", "[gp][property]")
{
    auto eng = testing::engine(21);
    std::uniform_real_distribution<double> yd(-3.0, 3.0);
    for (int t = 0; t < 200; ++t)
    {
        const auto pr = testing::random_gp(3, 1, eng);
        const std::vector<double> y{yd(eng), yd(eng), yd(eng)};
        const std::vector<double> x{std::exp(y[0]), std::exp(y[1]), std::exp(y[2])};
        for (const auto *p : {&pr.objective, &pr.inequalities[0]})
            CHECK_THAT(posynomial_eval(*p, x), WithinRel(std::exp(log_sum_exp_form(*p, y)), 1e-12));
    }
}

TEST_CASE("random three-variable problems agree with the grid oracle", "[gp][property]")
{
    auto eng = testing::engine(22);
    for (int t = 0; t < 3; ++t)
    {
        const auto pr = testing::random_gp(3, 4, eng);
        const auto s = solve_gp(pr);
        const auto o = brute_force_oracle(pr, 200);
        REQUIRE(s.status == GpStatus::optimal);
        REQUIRE(o.status == GpStatus::optimal);
        CHECK(s.max_violation <= 1e-6);
        // The grid optimum is feasible, so it can only be worse than the true one.
        CHECK(s.objective <= o.objective * (1.0 + 1e-6));
        CHECK(o.objective <= s.objective * 1.01);
    }
}

TEST_CASE("solutions are feasible and phase II is monotone", "[gp][property]")
{
    auto eng = testing::engine(23);
    for (int t = 0; t < 100; ++t)
    {
        const auto pr = testing::random_gp(1 + t % 4, 1 + t % 5, eng);
        const auto s = solve_gp(pr);
        REQUIRE(s.status == GpStatus::optimal);
        CHECK(s.max_violation <= 1e-6);
        CHECK(max_violation(pr, s.x) <= 1e-6);
        for (std::size_t i = 1; i < s.objective_trace.size(); ++i)
            CHECK(s.objective_trace[i] <= s.objective_trace[i - 1] * (1.0 + 1e-9));
    }
}

TEST_CASE("problem text round trip", "[gp]")
{
    auto eng = testing::engine(24);
    auto pr = testing::random_gp(3, 2, eng);
    pr.equalities.push_back(var(0, 0.5) * var(2, -1.0));
    std::stringstream ss;
    write_problem(ss, pr);
    const auto back = read_problem(ss);
    const std::vector<double> x{0.7, 1.3, 2.1};
    CHECK(back.num_vars == pr.num_vars);
    CHECK(back.lower == pr.lower);
    CHECK(back.upper == pr.upper);
    CHECK(posynomial_eval(back.objective, x) == posynomial_eval(pr.objective, x));
    REQUIRE(back.inequalities.size() == pr.inequalities.size());
    CHECK(posynomial_eval(back.inequalities[1], x) == posynomial_eval(pr.inequalities[1], x));
    CHECK(monomial_eval(back.equalities[0], x) == monomial_eval(pr.equalities[0], x));
    CHECK(solve_gp(back).objective == solve_gp(pr).objective);
}
