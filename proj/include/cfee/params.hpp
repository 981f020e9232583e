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

#include <string>
#include <vector>

namespace cfee
{
    inline constexpr double boltzmann_constant = 1.380649e-23; // J/K

    // Three-slope path loss with log-normal shadowing beyond the last breakpoint.
    // Distances in km, heights in m, carrier in MHz.
    struct PathLossModel
    {
        double carrier_mhz = 1900.0;
        double ap_height_m = 15.0;
        double user_height_m = 1.65;
        double d0_km = 0.010;
        double d1_km = 0.050;
        double shadowing_db = 8.0;

        // Hata-COST231 constant term L (dB).
        double constant_loss_db() const;

        // Large-scale gain in dB (negative) at distance d_km, without shadowing.
        double gain_db(double d_km) const;
    };

    // Scenario scalars. All powers are in Watt, capacities in bit/s, the SNRs rho and
    // pilot_snr are normalized by the noise power.
    struct SystemParams
    {
        int M = 100;            // APs
        int N = 1;              // antennas per AP
        int K = 20;             // users
        double area_km = 1.0;   // side D of the square area
        int tau_p = 20;         // pilot length
        int tau_c = 200;        // coherence interval (samples)
        double coherence_time_s = 1e-3;
        double rho = 1.0;       // normalized uplink SNR
        double pilot_snr = 1.0; // normalized pilot SNR p_p
        double bandwidth_hz = 20e6;
        double zeta = 0.3;      // PA efficiency
        double noise_power_w = 1.0;
        double p_fix_w = 0.825;
        double p_user_w = 0.1;
        double p_bt_w = 1.0;
        double c_bh_bps = 100e6;
        std::vector<double> p_max;  // per user, normalized
        std::vector<double> se_req; // per user, bit/s/Hz
        int alpha = 2;              // quantization bits
        // Sum the backhaul power over all M APs. Off reproduces the single-link form.
        bool backhaul_per_ap = true;
        PathLossModel path_loss;

        int tau_f() const { return tau_c - tau_p; }
        double prelog() const { return 1.0 - static_cast<double>(tau_p) / tau_c; }
    };

    // Thermal noise power B * k_B * T0 * NF (NF given in dB).
    double noise_power(double bandwidth_hz, double noise_figure_db, double temperature_k = 290.0);

    // Physical knobs that resolve to the normalized rho / p_p / N0 of SystemParams.
    struct RadioSettings
    {
        double rho_bar_w = 1.0;
        double pilot_bar_w = 0.2;
        double noise_figure_db = 9.0;
        double temperature_k = 290.0;
    };

    void apply_radio_settings(SystemParams &p, const RadioSettings &radio);

    // Defaults used throughout: M=100, K=20, N=1, tau_p=20, D=1 km, alpha=2, p_max=1, S_r=0.
    SystemParams default_params();

    // Resizes the per-user vectors to K, broadcasting the first entry (or the default).
    void resize_users(SystemParams &p, int K, double p_max = 1.0, double se_req = 0.0);

    // Returns human-readable violations, empty when the parameters are valid.
    std::vector<std::string> check_params(const SystemParams &p);

    // Throws std::invalid_argument listing every violation.
    void validate_params(const SystemParams &p);
}
