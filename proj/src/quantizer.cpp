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

#include "cfee/quantizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cfee
{
    namespace
    {
        double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
        double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

        void check_bits(int bits)
        {
            if (bits < 1 || bits > 16)
                throw std::invalid_argument("quantizer: bits must lie in 1..16");
        }
    }

    double midrise(double x, double step, int bits)
    {
        const long half = 1L << (bits - 1);
        long i = static_cast<long>(std::floor(x / step));
        if (i < -half)
            i = -half;
        if (i > half - 1)
            i = half - 1;
        return (static_cast<double>(i) + 0.5) * step;
    }

    BussgangCoefficients bussgang_coefficients(double step, int bits)
    {
        if (!(step > 0.0))
            throw std::invalid_argument("bussgang_coefficients: step must be > 0");
        check_bits(bits);

        // By symmetry only the positive half is summed: level j (j = 0..half-1) covers
        // [j step, (j+1) step), the last one extends to infinity.
        const long half = 1L << (bits - 1);
        double gain = 0.0, power = 0.0;
        for (long j = 0; j < half; ++j)
        {
            const double lo = static_cast<double>(j) * step;
            const bool last = j == half - 1;
            const double y = (static_cast<double>(j) + 0.5) * step;
            const double pdf_hi = last ? 0.0 : phi(lo + step);
            const double cdf_hi = last ? 1.0 : Phi(lo + step);
            gain += y * (phi(lo) - pdf_hi);
            power += y * y * (cdf_hi - Phi(lo));
        }
        return {2.0 * gain, 2.0 * power};
    }

    double quantizer_mse(double step, int bits)
    {
        const auto c = bussgang_coefficients(step, bits);
        return 1.0 - 2.0 * c.gain + c.power_ratio;
    }

    QuantizerSpec make_quantizer(double step, int bits)
    {
        const auto c = bussgang_coefficients(step, bits);
        QuantizerSpec s;
        s.bits = bits;
        s.levels = 1 << bits;
        s.step = step;
        s.gain = c.gain;
        s.power_ratio = c.power_ratio;
        return s;
    }

    QuantizerSpec ideal_quantizer()
    {
        return QuantizerSpec{};
    }

    QuantizerSpec optimize_step_size(int bits)
    {
        check_bits(bits);

        // At the SDNR optimum b~ = a~, which is also the stationarity condition of the MSE;
        // for one bit the SDNR is flat in the step and only the MSE has a unique minimizer.
        // Minimizing the MSE therefore lands on the SDNR maximizer for every bit count.
        auto cost = [bits](double log_step) { return quantizer_mse(std::exp(log_step), bits); };

        constexpr int grid = 400;
        const double lo = std::log(1e-4), hi = std::log(8.0);
        std::vector<double> xs(grid);
        int best = 0;
        double best_val = INFINITY;
        for (int i = 0; i < grid; ++i)
        {
            xs[i] = lo + (hi - lo) * i / (grid - 1);
            const double v = cost(xs[i]);
            if (v < best_val)
            {
                best_val = v;
                best = i;
            }
        }
        double a = xs[std::max(best - 1, 0)];
        double b = xs[std::min(best + 1, grid - 1)];

        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = cost(c), fd = cost(d);
        // Stop on the step itself: |exp(b) - exp(a)| < 1e-5 (tighter than needed).
        while (std::exp(b) - std::exp(a) > 1e-7)
        {
            if (fc < fd)
            {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = cost(c);
            }
            else
            {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = cost(d);
            }
        }
        return make_quantizer(std::exp(0.5 * (a + b)), bits);
    }

    double quantize(double x, double sigma, const QuantizerSpec &spec)
    {
        if (!(sigma > 0.0))
            throw std::invalid_argument("quantize: sigma must be > 0");
        if (spec.ideal())
            return x;
        return sigma * midrise(x / sigma, spec.step, spec.bits);
    }

    std::complex<double> quantize(std::complex<double> z, double sigma, const QuantizerSpec &spec)
    {
        const double s = sigma / std::numbers::sqrt2;
        return {quantize(z.real(), s, spec), quantize(z.imag(), s, spec)};
    }
}
