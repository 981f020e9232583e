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
#include "cfee/quantizer.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace cfee;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("optimal step sizes reproduce the reference table", "[quantizer]")
{
    for (const auto &row : testing::table_one)
    {
        const auto q = optimize_step_size(row.bits);
        INFO("bits = " << row.bits);
        CHECK_THAT(q.step, WithinAbs(row.step, 5e-3));
        CHECK_THAT(q.gain, WithinAbs(row.gain, 1e-3));
        CHECK_THAT(q.distortion(), WithinAbs(row.distortion, 1e-3));
        CHECK(q.levels == (1 << row.bits));
    }
}

TEST_CASE("coefficients at tabulated step sizes", "[quantizer]")
{
    auto c = bussgang_coefficients(1.596, 1);
    CHECK_THAT(c.gain, WithinAbs(0.6366, 2e-4));
    CHECK_THAT(c.power_ratio - c.gain * c.gain, WithinAbs(0.2313, 2e-4));

    c = bussgang_coefficients(0.3352, 4);
    CHECK_THAT(c.gain, WithinAbs(0.98845, 2e-5));
    CHECK_THAT(c.power_ratio - c.gain * c.gain, WithinAbs(0.011409, 2e-5));

    CHECK(bussgang_coefficients(1e-3, 2).gain < 0.01);
}

TEST_CASE("one-bit gain has the arcsine-law value", "[quantizer]")
{
    // Sign quantizer with output +-d/2: gain = (d/2) E|z| = (d/2) sqrt(2/pi).
    for (double d : {0.5, 1.0, 1.596, 3.0})
    {
        const auto c = bussgang_coefficients(d, 1);
        CHECK_THAT(c.gain, WithinRel(0.5 * d * std::sqrt(2.0 / M_PI), 1e-12));
        CHECK_THAT(c.power_ratio, WithinRel(0.25 * d * d, 1e-12));
    }
}

TEST_CASE("SDNR at two bits", "[quantizer]")
{
    const auto q = optimize_step_size(2);
    CHECK_THAT(q.sdnr(), WithinAbs(0.88115 * 0.88115 / 0.10472, 0.01));
}

TEST_CASE("distortion power values", "[quantizer]")
{
    CHECK_THAT(distortion_power(optimize_step_size(5)), WithinAbs(0.003482, 2e-6));
    CHECK_THAT(distortion_power(optimize_step_size(6)), WithinAbs(0.0010389, 2e-7));
    CHECK(distortion_power(ideal_quantizer()) == 0.0);
}

TEST_CASE("midrise map", "[quantizer]")
{
    const auto q = optimize_step_size(3);
    for (double sigma : {0.1, 1.0, 7.0})
        CHECK_THAT(quantize(0.0, sigma, q), WithinRel(sigma * q.step / 2.0, 1e-15));

    auto eng = testing::engine(3);
    std::normal_distribution<double> nd(0.0, 2.0);
    const double sigma = 1.3;
    const double top = sigma * (q.levels - 1) * q.step / 2.0;
    for (int i = 0; i < 10000; ++i)
    {
        const double x = nd(eng);
        if (std::abs(std::remainder(x / sigma, q.step)) < 1e-9)
            continue;
        CHECK(quantize(-x, sigma, q) == -quantize(x, sigma, q));
        CHECK(std::abs(quantize(x, sigma, q)) <= top * (1 + 1e-15));
    }
    CHECK(quantize(1e9, sigma, q) == top);
    CHECK(quantize(0.37, 1.0, ideal_quantizer()) == 0.37);
}

TEST_CASE("invalid quantizer arguments are rejected", "[quantizer]")
{
    const auto q = optimize_step_size(2);
    CHECK_THROWS_AS(quantize(1.0, 0.0, q), std::invalid_argument);
    CHECK_THROWS_AS(quantize(1.0, -1.0, q), std::invalid_argument);
    CHECK_THROWS_AS(bussgang_coefficients(0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(bussgang_coefficients(-0.5, 2), std::invalid_argument);
}

TEST_CASE("Bussgang residual is uncorrelated with the input", "[quantizer][property]")
{
    for (int bits = 1; bits <= 7; ++bits)
    {
        const auto q = optimize_step_size(bits);
        const auto chk = bussgang_orthogonality_check(q, 1000000, 100 + bits);
        INFO("bits = " << bits);
        CHECK(chk.correlation < 3e-3);
    }
}

TEST_CASE("optimal step maximizes SDNR on a local grid", "[quantizer][property]")
{
    for (int bits = 1; bits <= 7; ++bits)
    {
        const auto q = optimize_step_size(bits);
        for (int i = 0; i < 200; ++i)
        {
            const double d = q.step * (0.5 + i / 199.0);
            const auto c = bussgang_coefficients(d, bits);
            const double s = c.gain * c.gain / (c.power_ratio - c.gain * c.gain);
            INFO("bits = " << bits << " step = " << d);
            CHECK(q.sdnr() >= s * (1.0 - 1e-9));
        }
    }
}

TEST_CASE("monotone across bit counts", "[quantizer][property]")
{
    auto prev = optimize_step_size(1);
    for (int bits = 2; bits <= 7; ++bits)
    {
        const auto q = optimize_step_size(bits);
        CHECK(q.step < prev.step);
        CHECK(q.distortion() < prev.distortion());
        CHECK(q.gain > prev.gain);
        CHECK(q.gain > 0.0);
        CHECK(q.gain < 1.0);
        CHECK(q.power_ratio >= q.gain * q.gain);
        prev = q;
    }
}

TEST_CASE("closed-form moments agree with sampling", "[quantizer][property]")
{
    const int n = 400000;
    for (int bits = 1; bits <= 7; ++bits)
    {
        const auto q = optimize_step_size(bits);
        auto eng = testing::engine(500 + bits);
        std::normal_distribution<double> nd(0.0, 1.0);
        double sa = 0, sa2 = 0, sb = 0, sb2 = 0;
        for (int i = 0; i < n; ++i)
        {
            const double z = nd(eng);
            const double h = midrise(z, q.step, bits);
            sa += z * h;
            sa2 += z * h * z * h;
            sb += h * h;
            sb2 += h * h * h * h;
        }
        const double ma = sa / n, mb = sb / n;
        const double se_a = std::sqrt(std::max(0.0, sa2 / n - ma * ma) / n);
        const double se_b = std::sqrt(std::max(0.0, sb2 / n - mb * mb) / n);
        INFO("bits = " << bits);
        CHECK(std::abs(ma - q.gain) <= 3.0 * se_a);
        CHECK(std::abs(mb - q.power_ratio) <= 3.0 * se_b + 1e-10 * q.power_ratio);
    }
}
