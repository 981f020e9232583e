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

#include "cfee/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cfee
{
    double PathLossModel::constant_loss_db() const
    {
        const double lf = std::log10(carrier_mhz);
        return 46.3 + 33.9 * lf - 13.82 * std::log10(ap_height_m) -
               (1.1 * lf - 0.7) * user_height_m + (1.56 * lf - 0.8);
    }

    double PathLossModel::gain_db(double d_km) const
    {
        const double L = constant_loss_db();
        if (d_km > d1_km)
            return -L - 35.0 * std::log10(d_km);
        if (d_km > d0_km)
            return -L - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d_km);
        return -L - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d0_km);
    }

    double noise_power(double bandwidth_hz, double noise_figure_db, double temperature_k)
    {
        if (bandwidth_hz <= 0.0 || temperature_k <= 0.0)
            throw std::invalid_argument("noise_power: bandwidth and temperature must be positive");
        return bandwidth_hz * boltzmann_constant * temperature_k * std::pow(10.0, noise_figure_db / 10.0);
    }

    void apply_radio_settings(SystemParams &p, const RadioSettings &radio)
    {
        p.noise_power_w = noise_power(p.bandwidth_hz, radio.noise_figure_db, radio.temperature_k);
        p.rho = radio.rho_bar_w / p.noise_power_w;
        p.pilot_snr = radio.pilot_bar_w / p.noise_power_w;
    }

    SystemParams default_params()
    {
        SystemParams p;
        apply_radio_settings(p, RadioSettings{});
        resize_users(p, p.K);
        return p;
    }

    void resize_users(SystemParams &p, int K, double p_max, double se_req)
    {
        p.K = K;
        const double pm = p.p_max.empty() ? p_max : p.p_max.front();
        const double sr = p.se_req.empty() ? se_req : p.se_req.front();
        p.p_max.assign(static_cast<std::size_t>(K), pm);
        p.se_req.assign(static_cast<std::size_t>(K), sr);
    }

    std::vector<std::string> check_params(const SystemParams &p)
    {
        std::vector<std::string> errs;
        auto need = [&](bool ok, const std::string &msg)
        {
            if (!ok)
                errs.push_back(msg);
        };
        need(p.M >= 1, "M must be >= 1");
        need(p.N >= 1, "N must be >= 1");
        need(p.K >= 1, "K must be >= 1");
        need(p.tau_p >= 1 && p.tau_p < p.tau_c, "need 0 < tau_p < tau_c");
        need(p.area_km > 0.0, "area_km must be > 0");
        need(p.coherence_time_s > 0.0, "coherence_time_s must be > 0");
        need(p.rho > 0.0, "rho must be > 0");
        need(p.pilot_snr > 0.0, "pilot_snr must be > 0");
        need(p.bandwidth_hz > 0.0, "bandwidth_hz must be > 0");
        need(p.zeta > 0.0 && p.zeta <= 1.0, "zeta must lie in (0, 1]");
        need(p.noise_power_w > 0.0, "noise_power_w must be > 0");
        need(p.p_fix_w > 0.0, "p_fix_w must be > 0");
        need(p.p_user_w > 0.0, "p_user_w must be > 0");
        need(p.p_bt_w >= 0.0, "p_bt_w must be >= 0");
        need(p.c_bh_bps > 0.0, "c_bh_bps must be > 0");
        need(p.alpha >= 1 && p.alpha <= 16, "alpha must lie in 1..16");
        need(static_cast<int>(p.p_max.size()) == p.K, "p_max must have K entries");
        need(static_cast<int>(p.se_req.size()) == p.K, "se_req must have K entries");
        for (double v : p.p_max)
            need(v > 0.0, "p_max entries must be > 0");
        for (double v : p.se_req)
            need(v >= 0.0, "se_req entries must be >= 0");
        return errs;
    }

    void validate_params(const SystemParams &p)
    {
        const auto errs = check_params(p);
        if (errs.empty())
            return;
        std::ostringstream os;
        os << "invalid SystemParams:";
        for (const auto &e : errs)
            os << ' ' << e << ';';
        throw std::invalid_argument(os.str());
    }
}
