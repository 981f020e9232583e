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

#include <complex>

namespace cfee
{
    // Uniform midrise quantizer with 2^bits levels for a unit-variance input, together
    // with its Bussgang gain and output power under a standard normal input.
    struct QuantizerSpec
    {
        int bits = 0;           // 0 marks the ideal (unquantized) link
        int levels = 0;
        double step = 0.0;
        double gain = 1.0;        // a~ = E{z h(z)}
        double power_ratio = 1.0; // b~ = E{h(z)^2}

        double distortion() const { return power_ratio - gain * gain; }
        double sdnr() const { return gain * gain / distortion(); }
        // sigma_e^2 / a~^2, the factor that enters the SINR matrices.
        double distortion_over_gain2() const { return distortion() / (gain * gain); }
        bool ideal() const { return bits == 0; }
    };

    struct BussgangCoefficients
    {
        double gain;
        double power_ratio;
    };

    // Unit-scale midrise map: outputs (i + 1/2) * step, saturating at +-(2^bits - 1) step / 2.
    // Zero maps to +step/2.
    double midrise(double x, double step, int bits);

    // Exact Gaussian moments of the midrise quantizer via PDF/CDF sums over the levels.
    BussgangCoefficients bussgang_coefficients(double step, int bits);

    // Mean-square error 1 - 2 a~ + b~ of the unit-variance quantizer.
    double quantizer_mse(double step, int bits);

    // Step size maximizing the SDNR. Coarse log grid, then golden section to |d step| < 1e-5.
    QuantizerSpec optimize_step_size(int bits);

    // Quantizer at an arbitrary step (no optimization).
    QuantizerSpec make_quantizer(double step, int bits);

    // a~ = b~ = 1, zero distortion.
    QuantizerSpec ideal_quantizer();

    // sigma * h(x / sigma).
    double quantize(double x, double sigma, const QuantizerSpec &spec);

    // Real and imaginary parts quantized independently, each scaled by sigma / sqrt(2).
    std::complex<double> quantize(std::complex<double> z, double sigma, const QuantizerSpec &spec);

    inline double distortion_power(const QuantizerSpec &spec) { return spec.distortion(); }
}
