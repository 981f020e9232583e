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

#include "cfee/harness.hpp"

#include "cfee/network.hpp"
#include "cfee/optimizer.hpp"
#include "cfee/quantizer.hpp"

#include <json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace cfee
{
    std::string to_string(Mode m)
    {
        switch (m)
        {
        case Mode::optimize:
            return "optimize";
        case Mode::baseline:
            return "baseline";
        case Mode::validate:
            return "validate";
        case Mode::table1:
            return "table1";
        case Mode::sweep:
            return "sweep";
        }
        return "?";
    }

    Mode parse_mode(const std::string &s)
    {
        for (Mode m : {Mode::optimize, Mode::baseline, Mode::validate, Mode::table1, Mode::sweep})
            if (to_string(m) == s)
                return m;
        throw ConfigError("unknown mode '" + s + "' (expected optimize, baseline, validate, table1 or sweep)");
    }

    namespace
    {
        std::string scale_name(QuantizerScale s)
        {
            return s == QuantizerScale::closed_form ? "closed_form" : "exact_moment";
        }

        QuantizerScale parse_scale(const std::string &s)
        {
            if (s == "closed_form")
                return QuantizerScale::closed_form;
            if (s == "exact_moment")
                return QuantizerScale::exact_moment;
            throw ConfigError("unknown quantizer_scale '" + s + "' (expected closed_form or exact_moment)");
        }

        bool same_system(const SystemParams &a, const SystemParams &b)
        {
            return a.M == b.M && a.N == b.N && a.K == b.K && a.area_km == b.area_km && a.tau_p == b.tau_p &&
                   a.tau_c == b.tau_c && a.coherence_time_s == b.coherence_time_s && a.rho == b.rho &&
                   a.pilot_snr == b.pilot_snr && a.bandwidth_hz == b.bandwidth_hz && a.zeta == b.zeta &&
                   a.noise_power_w == b.noise_power_w && a.p_fix_w == b.p_fix_w && a.p_user_w == b.p_user_w &&
                   a.p_bt_w == b.p_bt_w && a.c_bh_bps == b.c_bh_bps && a.p_max == b.p_max &&
                   a.se_req == b.se_req && a.alpha == b.alpha && a.backhaul_per_ap == b.backhaul_per_ap &&
                   a.path_loss.shadowing_db == b.path_loss.shadowing_db;
        }
    }

    bool ScenarioConfig::operator==(const ScenarioConfig &o) const
    {
        return mode == o.mode && seed == o.seed && n_seeds == o.n_seeds && threads == o.threads &&
               output_dir == o.output_dir && debug_trace == o.debug_trace && same_system(system, o.system) &&
               radio.rho_bar_w == o.radio.rho_bar_w && radio.pilot_bar_w == o.radio.pilot_bar_w &&
               radio.noise_figure_db == o.radio.noise_figure_db && radio.temperature_k == o.radio.temperature_k &&
               p_max == o.p_max && se_req == o.se_req && sweep == o.sweep && nu_grid_size == o.nu_grid_size &&
               max_outer == o.max_outer && trust_region == o.trust_region && sca_tol == o.sca_tol &&
               n_draws == o.n_draws && quantizer_scale == o.quantizer_scale;
    }

    ScenarioConfig default_config()
    {
        ScenarioConfig c;
        c.system = default_params();
        apply_radio_settings(c.system, c.radio);
        resize_users(c.system, c.system.K, c.p_max, c.se_req);
        return c;
    }

    // ------------------------------------------------------------------ parsing

    namespace
    {
        std::string at(const YAML::Node &n)
        {
            const auto mk = n.Mark();
            return mk.line >= 0 ? "line " + std::to_string(mk.line + 1) + ": " : "";
        }

        template <class T>
        T scalar(const YAML::Node &n, const std::string &key)
        {
            if (!n.IsScalar())
                throw ConfigError(at(n) + key + ": expected a scalar");
            try
            {
                return n.as<T>();
            }
            catch (const YAML::Exception &)
            {
                throw ConfigError(at(n) + key + ": cannot read '" + n.Scalar() + "'");
            }
        }

        template <class T>
        std::vector<T> list(const YAML::Node &n, const std::string &key)
        {
            std::vector<T> out;
            if (n.IsScalar())
            {
                out.push_back(scalar<T>(n, key));
                return out;
            }
            if (!n.IsSequence())
                throw ConfigError(at(n) + key + ": expected a list");
            if (n.size() == 0)
                throw ConfigError(at(n) + key + ": sweep axis must not be empty");
            for (const auto &e : n)
                out.push_back(scalar<T>(e, key));
            return out;
        }

        using Handler = std::function<void(const YAML::Node &, const std::string &)>;

        void walk(const YAML::Node &map, const std::string &section, const std::map<std::string, Handler> &keys)
        {
            if (!map.IsMap())
                throw ConfigError(at(map) + (section.empty() ? "config" : section) + ": expected a mapping");
            for (const auto &kv : map)
            {
                const auto key = kv.first.as<std::string>();
                const auto it = keys.find(key);
                const std::string full = section.empty() ? key : section + "." + key;
                if (it == keys.end())
                    throw ConfigError(at(kv.first) + "unknown key '" + full + "'");
                it->second(kv.second, full);
            }
        }

        template <class T>
        Handler into(T &dst)
        {
            return [&dst](const YAML::Node &n, const std::string &k) { dst = scalar<T>(n, k); };
        }

        template <class T>
        Handler into_list(std::vector<T> &dst)
        {
            return [&dst](const YAML::Node &n, const std::string &k) { dst = list<T>(n, k); };
        }
    }

    ScenarioConfig parse_config_text(const std::string &text)
    {
        ScenarioConfig c = default_config();
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException &e)
        {
            throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
        }

        if (root.IsDefined() && !root.IsNull())
        {
            auto &s = c.system;
            std::string mode, scale;
            std::map<std::string, Handler> system_keys = {
                {"M", into(s.M)},
                {"N", into(s.N)},
                {"K", into(s.K)},
                {"area_km", into(s.area_km)},
                {"tau_p", into(s.tau_p)},
                {"tau_c", into(s.tau_c)},
                {"coherence_time_s", into(s.coherence_time_s)},
                {"bandwidth_hz", into(s.bandwidth_hz)},
                {"noise_figure_db", into(c.radio.noise_figure_db)},
                {"temperature_k", into(c.radio.temperature_k)},
                {"rho_bar_w", into(c.radio.rho_bar_w)},
                {"pilot_bar_w", into(c.radio.pilot_bar_w)},
                {"zeta", into(s.zeta)},
                {"p_fix_w", into(s.p_fix_w)},
                {"p_user_w", into(s.p_user_w)},
                {"p_bt_w", into(s.p_bt_w)},
                {"c_bh_bps", into(s.c_bh_bps)},
                {"p_max", into(c.p_max)},
                {"se_req", into(c.se_req)},
                {"alpha", into(s.alpha)},
                {"backhaul_per_ap", into(s.backhaul_per_ap)},
                {"shadowing_db", into(s.path_loss.shadowing_db)},
            };
            std::map<std::string, Handler> sweep_keys = {
                {"M", into_list(c.sweep.M)},
                {"N", into_list(c.sweep.N)},
                {"K", into_list(c.sweep.K)},
                {"alpha", into_list(c.sweep.alpha)},
                {"p_bt_w", into_list(c.sweep.p_bt_w)},
                {"c_bh_bps", into_list(c.sweep.c_bh_bps)},
                {"area_km", into_list(c.sweep.area_km)},
                {"total_antennas", into_list(c.sweep.total_antennas)},
            };
            std::map<std::string, Handler> optimizer_keys = {
                {"nu_grid_size", into(c.nu_grid_size)},
                {"max_outer", into(c.max_outer)},
                {"trust_region", into(c.trust_region)},
                {"sca_tol", into(c.sca_tol)},
            };
            std::map<std::string, Handler> validation_keys = {
                {"n_draws", into(c.n_draws)},
                {"quantizer_scale", into(scale)},
            };
            auto section = [](std::map<std::string, Handler> &keys) -> Handler
            { return [&keys](const YAML::Node &n, const std::string &k) { walk(n, k, keys); }; };

            std::map<std::string, Handler> top = {
                {"mode", into(mode)},
                {"seed", into(c.seed)},
                {"n_seeds", into(c.n_seeds)},
                {"threads", into(c.threads)},
                {"output_dir", into(c.output_dir)},
                {"debug_trace", into(c.debug_trace)},
                {"system", section(system_keys)},
                {"sweep", section(sweep_keys)},
                {"optimizer", section(optimizer_keys)},
                {"validation", section(validation_keys)},
            };
            walk(root, "", top);
            if (!mode.empty())
                c.mode = parse_mode(mode);
            if (!scale.empty())
                c.quantizer_scale = parse_scale(scale);
        }

        apply_radio_settings(c.system, c.radio);
        c.system.p_max.clear();
        c.system.se_req.clear();
        resize_users(c.system, std::max(c.system.K, 0), c.p_max, c.se_req);

        const auto errs = check_config(c);
        if (!errs.empty())
        {
            std::string msg = "invalid configuration:";
            for (const auto &e : errs)
                msg += "\n  " + e;
            throw ConfigError(msg);
        }
        return c;
    }

    ScenarioConfig parse_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        try
        {
            return parse_config_text(ss.str());
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }

    std::string emit_config(const ScenarioConfig &c)
    {
        YAML::Emitter out;
        out.SetDoublePrecision(17);
        const auto &s = c.system;
        out << YAML::BeginMap;
        out << YAML::Key << "mode" << YAML::Value << to_string(c.mode);
        out << YAML::Key << "seed" << YAML::Value << c.seed;
        out << YAML::Key << "n_seeds" << YAML::Value << c.n_seeds;
        out << YAML::Key << "threads" << YAML::Value << c.threads;
        out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
        out << YAML::Key << "debug_trace" << YAML::Value << c.debug_trace;

        out << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "M" << YAML::Value << s.M;
        out << YAML::Key << "N" << YAML::Value << s.N;
        out << YAML::Key << "K" << YAML::Value << s.K;
        out << YAML::Key << "area_km" << YAML::Value << s.area_km;
        out << YAML::Key << "tau_p" << YAML::Value << s.tau_p;
        out << YAML::Key << "tau_c" << YAML::Value << s.tau_c;
        out << YAML::Key << "coherence_time_s" << YAML::Value << s.coherence_time_s;
        out << YAML::Key << "bandwidth_hz" << YAML::Value << s.bandwidth_hz;
        out << YAML::Key << "noise_figure_db" << YAML::Value << c.radio.noise_figure_db;
        out << YAML::Key << "temperature_k" << YAML::Value << c.radio.temperature_k;
        out << YAML::Key << "rho_bar_w" << YAML::Value << c.radio.rho_bar_w;
        out << YAML::Key << "pilot_bar_w" << YAML::Value << c.radio.pilot_bar_w;
        out << YAML::Key << "zeta" << YAML::Value << s.zeta;
        out << YAML::Key << "p_fix_w" << YAML::Value << s.p_fix_w;
        out << YAML::Key << "p_user_w" << YAML::Value << s.p_user_w;
        out << YAML::Key << "p_bt_w" << YAML::Value << s.p_bt_w;
        out << YAML::Key << "c_bh_bps" << YAML::Value << s.c_bh_bps;
        out << YAML::Key << "p_max" << YAML::Value << c.p_max;
        out << YAML::Key << "se_req" << YAML::Value << c.se_req;
        out << YAML::Key << "alpha" << YAML::Value << s.alpha;
        out << YAML::Key << "backhaul_per_ap" << YAML::Value << s.backhaul_per_ap;
        out << YAML::Key << "shadowing_db" << YAML::Value << s.path_loss.shadowing_db;
        out << YAML::EndMap;

        auto axis = [&out](const char *name, const auto &v)
        {
            if (!v.empty())
                out << YAML::Key << name << YAML::Value << YAML::Flow << v;
        };
        out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        axis("M", c.sweep.M);
        axis("N", c.sweep.N);
        axis("K", c.sweep.K);
        axis("alpha", c.sweep.alpha);
        axis("p_bt_w", c.sweep.p_bt_w);
        axis("c_bh_bps", c.sweep.c_bh_bps);
        axis("area_km", c.sweep.area_km);
        axis("total_antennas", c.sweep.total_antennas);
        out << YAML::EndMap;

        out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "nu_grid_size" << YAML::Value << c.nu_grid_size;
        out << YAML::Key << "max_outer" << YAML::Value << c.max_outer;
        out << YAML::Key << "trust_region" << YAML::Value << c.trust_region;
        out << YAML::Key << "sca_tol" << YAML::Value << c.sca_tol;
        out << YAML::EndMap;

        out << YAML::Key << "validation" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "n_draws" << YAML::Value << c.n_draws;
        out << YAML::Key << "quantizer_scale" << YAML::Value << scale_name(c.quantizer_scale);
        out << YAML::EndMap;
        out << YAML::EndMap;
        return std::string(out.c_str()) + "\n";
    }

    std::vector<std::string> check_config(const ScenarioConfig &c)
    {
        std::vector<std::string> errs;
        auto need = [&](bool ok, const std::string &msg)
        {
            if (!ok)
                errs.push_back(msg);
        };
        need(c.n_seeds >= 1, "n_seeds must be >= 1");
        need(c.threads >= 1, "threads must be >= 1");
        need(!c.output_dir.empty(), "output_dir must not be empty");
        need(c.nu_grid_size >= 1, "optimizer.nu_grid_size must be >= 1");
        need(c.max_outer >= 1, "optimizer.max_outer must be >= 1");
        need(c.trust_region > 0.0 && c.trust_region < 1.0, "optimizer.trust_region must lie in (0, 1)");
        need(c.sca_tol > 0.0, "optimizer.sca_tol must be > 0");
        need(c.n_draws >= 1000, "validation.n_draws must be >= 1000");
        need(c.p_max > 0.0, "system.p_max must be > 0");
        need(c.se_req >= 0.0, "system.se_req must be >= 0");
        need(c.radio.rho_bar_w > 0.0, "system.rho_bar_w must be > 0");
        need(c.radio.pilot_bar_w > 0.0, "system.pilot_bar_w must be > 0");
        need(c.radio.temperature_k > 0.0, "system.temperature_k must be > 0");
        need(c.sweep.M.empty() || c.sweep.total_antennas.empty(), "sweep.M and sweep.total_antennas are exclusive");
        if (!errs.empty())
            return errs;

        std::set<std::string> seen;
        for (const auto &pt : expand_sweep(c))
        {
            for (const auto &e : check_params(pt.params))
                if (seen.insert(e).second)
                    errs.push_back("system." + e);
        }
        for (int T : c.sweep.total_antennas)
            for (int n : c.sweep.N.empty() ? std::vector<int>{c.system.N} : c.sweep.N)
                need(n > 0 && T % n == 0, "sweep.total_antennas " + std::to_string(T) +
                                              " is not divisible by N = " + std::to_string(n));
        return errs;
    }

    std::vector<SweepPoint> expand_sweep(const ScenarioConfig &c)
    {
        const auto &s = c.system;
        auto or_i = [](const std::vector<int> &v, int d) { return v.empty() ? std::vector<int>{d} : v; };
        auto or_d = [](const std::vector<double> &v, double d) { return v.empty() ? std::vector<double>{d} : v; };
        const auto areas = or_d(c.sweep.area_km, s.area_km);
        const auto pbts = or_d(c.sweep.p_bt_w, s.p_bt_w);
        const auto cbhs = or_d(c.sweep.c_bh_bps, s.c_bh_bps);
        const auto Ks = or_i(c.sweep.K, s.K);
        const auto alphas = or_i(c.sweep.alpha, s.alpha);
        const bool by_total = !c.sweep.total_antennas.empty();
        const auto Ms = by_total ? c.sweep.total_antennas : or_i(c.sweep.M, s.M);
        const auto Ns = or_i(c.sweep.N, s.N);

        std::vector<SweepPoint> pts;
        for (double area : areas)
            for (double pbt : pbts)
                for (double cbh : cbhs)
                    for (int K : Ks)
                        for (int alpha : alphas)
                            for (int M : Ms)
                                for (int N : Ns)
                                {
                                    SweepPoint p;
                                    p.index = static_cast<int>(pts.size());
                                    p.params = s;
                                    p.params.area_km = area;
                                    p.params.p_bt_w = pbt;
                                    p.params.c_bh_bps = cbh;
                                    p.params.alpha = alpha;
                                    p.params.N = N;
                                    p.params.M = by_total ? (N > 0 ? M / N : 0) : M;
                                    p.params.p_max.clear();
                                    p.params.se_req.clear();
                                    resize_users(p.params, K, c.p_max, c.se_req);
                                    pts.push_back(std::move(p));
                                }
        return pts;
    }

    // ------------------------------------------------------------------ output

    std::string git_blob_sha1(const std::string &content)
    {
        const std::string head = "blob " + std::to_string(content.size()) + std::string(1, '\0');
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_MD_CTX *ctx = EVP_MD_CTX_new();
        EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
        EVP_DigestUpdate(ctx, head.data(), head.size());
        EVP_DigestUpdate(ctx, content.data(), content.size());
        EVP_DigestFinal_ex(ctx, md, &len);
        EVP_MD_CTX_free(ctx);
        std::string hex;
        char two[3];
        for (unsigned int i = 0; i < len; ++i)
        {
            std::snprintf(two, sizeof two, "%02x", md[i]);
            hex += two;
        }
        return hex;
    }

    std::string results_header()
    {
        return "point,seed,M,N,K,alpha,p_bt_w,c_bh_bps,area_km,status,ee_proposed_mbit_per_j,"
               "ee_baseline_mbit_per_j,sum_se_proposed,sum_se_baseline,nu,nu_star,outer_iterations,"
               "p_total_w,backhaul_rate_bps,se_per_user";
    }

    namespace
    {
        std::string num(double v)
        {
            if (std::isnan(v))
                return "nan";
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.10g", v);
            return buf;
        }

        void run_parallel(int n, int threads, const std::function<void(int)> &fn)
        {
            std::atomic<int> next{0};
            auto worker = [&]
            {
                for (int i = next++; i < n; i = next++)
                    fn(i);
            };
            const int nt = std::clamp(threads, 1, std::max(n, 1));
            std::vector<std::thread> pool;
            for (int t = 1; t < nt; ++t)
                pool.emplace_back(worker);
            worker();
            for (auto &t : pool)
                t.join();
        }

        void write_file(const std::filesystem::path &p, const std::string &content, RunSummary &sum)
        {
            std::ofstream out(p, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot write " + p.string());
            out << content;
            sum.files.push_back(p);
        }

        struct Row
        {
            std::string csv;
            std::string trace;
            std::string sca_trace;
            bool feasible = false;
            double ee_prop = NAN, ee_base = NAN, se_prop = NAN, se_base = NAN;
            double seconds = 0.0;
        };

        std::string point_columns(const SweepPoint &pt, std::uint64_t seed)
        {
            const auto &p = pt.params;
            return std::to_string(pt.index) + "," + std::to_string(seed) + "," + std::to_string(p.M) + "," +
                   std::to_string(p.N) + "," + std::to_string(p.K) + "," + std::to_string(p.alpha) + "," +
                   num(p.p_bt_w) + "," + num(p.c_bh_bps) + "," + num(p.area_km);
        }

        Row evaluate_point(const ScenarioConfig &cfg, const SweepPoint &pt, std::uint64_t seed)
        {
            const auto t0 = std::chrono::steady_clock::now();
            const auto &p = pt.params;
            Row row;
            const auto spec = optimize_step_size(p.alpha);
            const auto stats = generate_network(p, seed);
            const auto base = equal_power_baseline(p, stats, spec);
            row.ee_base = base.ee / 1e6;
            row.se_base = base.sum_se;
            const double rbh = backhaul_rate(p.K, p.tau_f(), p.alpha, p.coherence_time_s);

            std::string status = "ok";
            double nu = NAN, nu_star = NAN, ptot = NAN;
            int outer = 0;
            std::string se_users;
            if (cfg.mode == Mode::baseline)
            {
                status = "baseline_only";
                ptot = base.power.total;
                for (int k = 0; k < p.K; ++k)
                    se_users += (k ? ";" : "") + num(base.se(k));
                row.feasible = true;
            }
            else if (rbh > p.c_bh_bps)
                status = "backhaul_overload";
            else
            {
                NuSearchOptions opt;
                opt.grid_size = cfg.nu_grid_size;
                opt.algorithm.max_outer = cfg.max_outer;
                opt.algorithm.sca.delta = cfg.trust_region;
                opt.algorithm.sca.tol = cfg.sca_tol;
                const auto r = maximize_ee(p, stats, spec, opt);
                nu_star = r.nu_star;
                if (!r.feasible)
                    status = "infeasible";
                else
                {
                    const auto &best = r.points[r.best_index];
                    row.feasible = true;
                    row.ee_prop = best.state.ee / 1e6;
                    row.se_prop = best.state.sum_se;
                    nu = best.nu;
                    outer = best.outer_iterations;
                    ptot = best.state.power.total;
                    for (int k = 0; k < p.K; ++k)
                        se_users += (k ? ";" : "") + num(best.state.se(k));
                    if (cfg.debug_trace)
                    {
                        const auto a1 = algorithm1(best.nu, p, stats, spec, r.q_pmp, opt.algorithm);
                        for (const auto &it : a1.trace)
                            row.trace += std::to_string(pt.index) + "," + std::to_string(seed) + "," + num(best.nu) +
                                         "," + std::to_string(it.iteration) + "," + num(it.ee / 1e6) + "," +
                                         num(it.sum_se) + "," + num(it.product) + "," + num(it.max_se_change) + "," +
                                         std::to_string(it.sca_iterations) + "\n";
                        for (const auto &[outer_it, it] : a1.sca_trace)
                            row.sca_trace += std::to_string(pt.index) + "," + std::to_string(seed) + "," +
                                             num(best.nu) + "," + std::to_string(outer_it) + "," +
                                             std::to_string(it.iteration) + "," + num(it.surrogate) + "," +
                                             num(it.product) + "," + num(it.gp_violation) + "," +
                                             std::to_string(it.newton_steps) + "\n";
                    }
                }
            }
            row.csv = point_columns(pt, seed) + "," + status + "," + num(row.ee_prop) + "," + num(row.ee_base) + "," +
                      num(row.se_prop) + "," + num(row.se_base) + "," + num(nu) + "," + num(nu_star) + "," +
                      std::to_string(outer) + "," + num(ptot) + "," + num(rbh) + "," + se_users + "\n";
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return row;
        }

        Row validate_point(const ScenarioConfig &cfg, const SweepPoint &pt, std::uint64_t seed)
        {
            const auto t0 = std::chrono::steady_clock::now();
            const auto &p = pt.params;
            Row row;
            const auto spec = optimize_step_size(p.alpha);
            const auto stats = generate_network(p, seed);
            Eigen::VectorXd q(p.K);
            for (int k = 0; k < p.K; ++k)
                q(k) = p.p_max[k];
            const auto U = design_filters(q, stats, spec, p);
            auto opt = simulation_options(p);
            opt.scale = cfg.quantizer_scale;
            const auto rep = simulate_terms(stats, spec, q, U, cfg.n_draws, seed, opt);

            const std::string head = point_columns(pt, seed) + ",";
            auto line = [&](int user, const char *term, const TermEstimate &t)
            {
                row.csv += head + std::to_string(user) + "," + term + "," + num(t.empirical) + "," +
                           num(t.std_error) + "," + num(t.closed_form) + "," + num(t.rel_error()) + "\n";
            };
            for (int k = 0; k < p.K; ++k)
            {
                const auto &u = rep.users[k];
                line(k, "ds", u.ds);
                line(k, "bu", u.bu);
                line(k, "iui", u.iui_total);
                line(k, "tn", u.tn);
                line(k, "tqe", u.tqe);
                line(k, "sinr", u.sinr);
            }
            double worst = 0.0;
            for (Eigen::Index i = 0; i < rep.input_power.size(); ++i)
                if (rep.input_power_model(i) > 0.0)
                    worst = std::max(worst, std::abs(rep.input_power(i) / rep.input_power_model(i) - 1.0));
            line(-1, "input_kurtosis", {rep.input_kurtosis, 0.0, 3.0});
            line(-1, "input_power_max_rel_error", {worst, 0.0, 0.0});
            row.feasible = true;
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return row;
        }

        nlohmann::json config_json(const ScenarioConfig &c)
        {
            const auto &s = c.system;
            nlohmann::json j;
            j["mode"] = to_string(c.mode);
            j["seed"] = c.seed;
            j["n_seeds"] = c.n_seeds;
            j["threads"] = c.threads;
            j["output_dir"] = c.output_dir;
            j["debug_trace"] = c.debug_trace;
            j["system"] = {{"M", s.M},
                           {"N", s.N},
                           {"K", s.K},
                           {"area_km", s.area_km},
                           {"tau_p", s.tau_p},
                           {"tau_c", s.tau_c},
                           {"coherence_time_s", s.coherence_time_s},
                           {"bandwidth_hz", s.bandwidth_hz},
                           {"noise_figure_db", c.radio.noise_figure_db},
                           {"temperature_k", c.radio.temperature_k},
                           {"rho_bar_w", c.radio.rho_bar_w},
                           {"pilot_bar_w", c.radio.pilot_bar_w},
                           {"noise_power_w", s.noise_power_w},
                           {"rho", s.rho},
                           {"pilot_snr", s.pilot_snr},
                           {"zeta", s.zeta},
                           {"p_fix_w", s.p_fix_w},
                           {"p_user_w", s.p_user_w},
                           {"p_bt_w", s.p_bt_w},
                           {"c_bh_bps", s.c_bh_bps},
                           {"p_max", c.p_max},
                           {"se_req", c.se_req},
                           {"alpha", s.alpha},
                           {"backhaul_per_ap", s.backhaul_per_ap},
                           {"shadowing_db", s.path_loss.shadowing_db}};
            j["sweep"] = {{"M", c.sweep.M},
                          {"N", c.sweep.N},
                          {"K", c.sweep.K},
                          {"alpha", c.sweep.alpha},
                          {"p_bt_w", c.sweep.p_bt_w},
                          {"c_bh_bps", c.sweep.c_bh_bps},
                          {"area_km", c.sweep.area_km},
                          {"total_antennas", c.sweep.total_antennas}};
            j["optimizer"] = {{"nu_grid_size", c.nu_grid_size},
                              {"max_outer", c.max_outer},
                              {"trust_region", c.trust_region},
                              {"sca_tol", c.sca_tol}};
            j["validation"] = {{"n_draws", c.n_draws}, {"quantizer_scale", scale_name(c.quantizer_scale)}};
            return j;
        }

        std::string schema_line(const char *what)
        {
            return std::string("# schema_version=") + std::to_string(results_schema_version) + "; " + what + "\n";
        }
    }

    RunSummary run_scenario(const ScenarioConfig &cfg)
    {
        const auto errs = check_config(cfg);
        if (!errs.empty())
            throw ConfigError("invalid configuration: " + errs.front());
        const std::filesystem::path dir(cfg.output_dir);
        std::filesystem::create_directories(dir);
        RunSummary sum;
        std::string results, timings = "task,seconds\n", main_name;

        if (cfg.mode == Mode::table1)
        {
            main_name = "table1.csv";
            std::vector<int> bits = cfg.sweep.alpha;
            if (bits.empty())
                bits = {1, 2, 3, 4, 5, 6, 7};
            results = schema_line("quantizer for unit-variance Gaussian input") +
                      "alpha,step,gain,distortion,sdnr\n";
            for (int b : bits)
            {
                const auto t0 = std::chrono::steady_clock::now();
                const auto q = optimize_step_size(b);
                char buf[160];
                std::snprintf(buf, sizeof buf, "%d,%.5f,%.6f,%.7f,%.6f\n", b, q.step, q.gain, q.distortion(),
                              q.sdnr());
                results += buf;
                timings += "alpha=" + std::to_string(b) + "," +
                           num(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + "\n";
                ++sum.rows;
                ++sum.feasible_rows;
            }
        }
        else
        {
            const auto points = expand_sweep(cfg);
            const int n_tasks = static_cast<int>(points.size()) * cfg.n_seeds;
            std::vector<Row> rows(static_cast<std::size_t>(n_tasks));
            run_parallel(n_tasks, cfg.threads,
                         [&](int i)
                         {
                             const auto &pt = points[i / cfg.n_seeds];
                             const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i % cfg.n_seeds);
                             try
                             {
                                 rows[i] = cfg.mode == Mode::validate ? validate_point(cfg, pt, seed)
                                                                      : evaluate_point(cfg, pt, seed);
                             }
                             catch (const std::exception &e)
                             {
                                 std::string msg = e.what();
                                 std::replace(msg.begin(), msg.end(), ',', ';');
                                 std::replace(msg.begin(), msg.end(), '\n', ' ');
                                 rows[i].csv = point_columns(pt, seed) + ",error: " + msg;
                                 const int pad = cfg.mode == Mode::validate ? 6 : 10;
                                 for (int c = 0; c < pad; ++c)
                                     rows[i].csv += ",nan";
                                 rows[i].csv += "\n";
                             }
                         });

            if (cfg.mode == Mode::validate)
            {
                main_name = "validation.csv";
                results = schema_line("term powers are linear (not dB); user -1 rows are per-run diagnostics") +
                          "point,seed,M,N,K,alpha,p_bt_w,c_bh_bps,area_km,user,term,empirical,std_error,"
                          "closed_form,rel_error\n";
            }
            else
            {
                main_name = "results.csv";
                results = schema_line("ee in Mbit/J; se in bit/s/Hz; power in W; rates in bit/s") + results_header() +
                          "\n";
            }
            std::string trace = "point,seed,nu,iteration,ee_mbit_per_j,sum_se,product,max_se_change,sca_iterations\n";
            std::string sca_trace =
                "point,seed,nu,outer_iteration,sca_iteration,surrogate,product,gp_violation,newton_steps\n";
            for (int i = 0; i < n_tasks; ++i)
            {
                results += rows[i].csv;
                trace += rows[i].trace;
                sca_trace += rows[i].sca_trace;
                timings += std::to_string(i) + "," + num(rows[i].seconds) + "\n";
                ++sum.rows;
                if (rows[i].feasible)
                    ++sum.feasible_rows;
            }
            if (cfg.debug_trace && cfg.mode != Mode::validate)
            {
                write_file(dir / "trace.csv", trace, sum);
                write_file(dir / "sca_trace.csv", sca_trace, sum);
            }

            if (cfg.mode != Mode::validate)
            {
                std::string summary =
                    schema_line("means over seeds; proposed means use feasible rows only") +
                    "point,M,N,K,alpha,p_bt_w,c_bh_bps,area_km,n_seeds,n_feasible,mean_ee_proposed_mbit_per_j,"
                    "mean_ee_baseline_mbit_per_j,mean_sum_se_proposed,mean_sum_se_baseline,ee_ratio\n";
                for (const auto &pt : points)
                {
                    double ep = 0.0, eb = 0.0, sp = 0.0, sb = 0.0;
                    int nf = 0, nb = 0;
                    for (int s = 0; s < cfg.n_seeds; ++s)
                    {
                        const auto &r = rows[pt.index * cfg.n_seeds + s];
                        if (!std::isnan(r.ee_prop))
                        {
                            ep += r.ee_prop;
                            sp += r.se_prop;
                            ++nf;
                        }
                        if (!std::isnan(r.ee_base))
                        {
                            eb += r.ee_base;
                            sb += r.se_base;
                            ++nb;
                        }
                    }
                    const double mp = nf ? ep / nf : NAN, mb = nb ? eb / nb : NAN;
                    const auto &p = pt.params;
                    summary += std::to_string(pt.index) + "," + std::to_string(p.M) + "," + std::to_string(p.N) + "," +
                               std::to_string(p.K) + "," + std::to_string(p.alpha) + "," + num(p.p_bt_w) + "," +
                               num(p.c_bh_bps) + "," + num(p.area_km) + "," + std::to_string(cfg.n_seeds) + "," +
                               std::to_string(nf) + "," + num(mp) + "," + num(mb) + "," +
                               num(nf ? sp / nf : NAN) + "," + num(nb ? sb / nb : NAN) + "," + num(mp / mb) + "\n";
                }
                write_file(dir / "summary.csv", summary, sum);
            }
        }

        write_file(dir / main_name, results, sum);
        write_file(dir / "timings.csv", timings, sum);
        sum.results_hash = git_blob_sha1(results);

        nlohmann::json man;
        man["schema_version"] = results_schema_version;
        man["config"] = config_json(cfg);
        man["results_file"] = main_name;
        man["results_sha1"] = sum.results_hash;
        man["rows"] = sum.rows;
        man["feasible_rows"] = sum.feasible_rows;
        nlohmann::json files = nlohmann::json::array();
        for (const auto &f : sum.files)
        {
            std::ifstream in(f, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            files.push_back({{"name", f.filename().string()}, {"sha1", git_blob_sha1(ss.str())}});
        }
        man["files"] = files;
        const auto mpath = dir / "manifest.json";
        std::ofstream(mpath) << man.dump(2) << "\n";
        sum.files.push_back(mpath);
        return sum;
    }
}
