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

// Command-line driver: cfee_cli <optimize|baseline|validate|table1|sweep> [options]

#include "cfee/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

int main(int argc, char **argv)
{
    CLI::App app{"Energy-efficiency optimization and validation for limited-backhaul cell-free massive MIMO"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    bool debug_trace = false;
    app.add_option("--config", config_path, "YAML scenario file (defaults apply when omitted)");
    app.add_option("--seed", seed, "base seed; seed i of a point uses seed + i");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--debug-trace", debug_trace, "write per-iteration traces of the optimizer");

    for (const char *name : {"optimize", "baseline", "validate", "table1", "sweep"})
        app.add_subcommand(name, std::string("run in ") + name + " mode");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    cfee::ScenarioConfig cfg;
    try
    {
        cfg = config_path.empty() ? cfee::default_config() : cfee::parse_config(config_path);
        cfg.mode = cfee::parse_mode(app.get_subcommands().front()->get_name());
        if (seed)
            cfg.seed = *seed;
        if (out)
            cfg.output_dir = *out;
        if (threads)
            cfg.threads = *threads;
        if (debug_trace)
            cfg.debug_trace = true;
        const auto errs = cfee::check_config(cfg);
        if (!errs.empty())
        {
            for (const auto &e : errs)
                std::cerr << "config error: " << e << "\n";
            return 2;
        }
    }
    catch (const cfee::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try
    {
        const auto sum = cfee::run_scenario(cfg);
        std::printf("%s: %d rows (%d feasible) -> %s [sha1 %s]\n", cfee::to_string(cfg.mode).c_str(), sum.rows,
                    sum.feasible_rows, cfg.output_dir.c_str(), sum.results_hash.c_str());
        if (sum.rows > 0 && sum.feasible_rows == 0)
        {
            std::cerr << "no feasible point\n";
            return 3;
        }
    }
    catch (const cfee::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
