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

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

// A small geometric-programming engine. Problems are stated over positive variables
// x_0..x_{n-1}; the solver works on y = log x where every posynomial becomes a
// log-sum-exp of affine functions and the problem is convex.
namespace cfee::gp
{
    struct Monomial
    {
        double coefficient = 1.0;
        std::vector<std::pair<int, double>> exponents; // (variable, power)

        Monomial() = default;
        Monomial(double coeff, std::vector<std::pair<int, double>> exps = {});
    };

    // x_i^power
    Monomial var(int i, double power = 1.0);

    Monomial operator*(const Monomial &a, const Monomial &b);
    Monomial operator*(double s, const Monomial &m);

    struct Posynomial
    {
        std::vector<Monomial> terms;

        Posynomial() = default;
        Posynomial(Monomial m);
        Posynomial &operator+=(const Monomial &m);
        Posynomial &operator+=(const Posynomial &p);
    };

    Posynomial operator+(Posynomial a, const Posynomial &b);
    Posynomial operator*(const Posynomial &p, const Monomial &m);

    inline constexpr double unbounded = std::numeric_limits<double>::infinity();

    // minimize objective s.t. inequalities[i] <= 1, equalities[j] == 1, lower <= x <= upper.
    // A lower bound of 0 or an upper bound of +inf means no bound on that side.
    struct GpProblem
    {
        int num_vars = 0;
        Posynomial objective;
        std::vector<Posynomial> inequalities;
        std::vector<Monomial> equalities;
        std::vector<double> lower;
        std::vector<double> upper;

        int add_variable(double lo = 0.0, double hi = unbounded);
    };

    enum class GpStatus
    {
        optimal,
        infeasible,
        unbounded,
        max_iterations,
    };

    std::string to_string(GpStatus s);

    struct GpOptions
    {
        double tol = 1e-6; // duality gap on log(objective), i.e. relative objective accuracy
        double mu = 10.0;
        int max_newton_steps = 5000;
        std::vector<double> initial; // optional starting x (need not be feasible)
    };

    struct GpSolution
    {
        GpStatus status = GpStatus::infeasible;
        std::vector<double> x;
        double objective = 0.0;
        double max_violation = 0.0; // max relative violation over all constraints and bounds
        int newton_steps = 0;
        int phase1_steps = 0;
        std::vector<double> objective_trace; // objective after each centering of phase II
    };

    // Throws std::invalid_argument on a malformed problem (bad indices, nonpositive
    // coefficients, empty objective, lower > upper).
    void check_problem(const GpProblem &problem);

    GpSolution solve_gp(const GpProblem &problem, const GpOptions &options = {});

    // Best feasible point of a log-spaced grid over the (finite, positive) variable boxes.
    // At most 4 variables.
    GpSolution brute_force_oracle(const GpProblem &problem, int grid_points_per_dim,
                                  double equality_tol = 1e-9);

    double monomial_eval(const Monomial &m, std::span<const double> x);
    double posynomial_eval(const Posynomial &p, std::span<const double> x);

    // Largest relative constraint violation of x (0 when feasible).
    double max_violation(const GpProblem &problem, std::span<const double> x);

    // Plain-text dump of a problem, readable back with read_problem.
    void write_problem(std::ostream &os, const GpProblem &problem);
    GpProblem read_problem(std::istream &is);
}
