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

#include "cfee/montecarlo.hpp"
#include "cfee/params.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfee
{
    inline constexpr int results_schema_version = 1;

    enum class Mode
    {
        optimize,
        baseline,
        validate,
        table1,
        sweep,
    };

    std::string to_string(Mode m);
    Mode parse_mode(const std::string &s);

    // Axes of the Cartesian sweep. An empty axis means "the single value from system".
    struct SweepAxes
    {
        std::vector<int> M, N, K, alpha;
        std::vector<double> p_bt_w, c_bh_bps, area_km;
        std::vector<int> total_antennas; // when set, M = total / N at every point

        bool operator==(const SweepAxes &) const = default;
    };

    struct ScenarioConfig
    {
        Mode mode = Mode::optimize;
        std::uint64_t seed = 1;
        int n_seeds = 1;
        int threads = 1;
        std::string output_dir = "out";
        bool debug_trace = false;

        // System section. Per-user vectors are broadcast from p_max / se_req.
        SystemParams system;
        RadioSettings radio;
        double p_max = 1.0;
        double se_req = 0.0;

        SweepAxes sweep;

        int nu_grid_size = 12;
        int max_outer = 50;
        double trust_region = 0.1;
        double sca_tol = 0.01;

        long n_draws = 20000;
        QuantizerScale quantizer_scale = QuantizerScale::closed_form;

        bool operator==(const ScenarioConfig &o) const;
    };

    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    ScenarioConfig default_config();

    // YAML text with nested sections system / sweep / optimizer / validation.
    // Unknown keys and malformed values raise ConfigError carrying the line number.
    ScenarioConfig parse_config_text(const std::string &text);
    ScenarioConfig parse_config(const std::filesystem::path &path);

    std::string emit_config(const ScenarioConfig &cfg);

    // Every violation in the config and in each resolved sweep point; empty when valid.
    std::vector<std::string> check_config(const ScenarioConfig &cfg);

    struct SweepPoint
    {
        int index = 0;
        SystemParams params;
    };

    std::vector<SweepPoint> expand_sweep(const ScenarioConfig &cfg);

    struct RunSummary
    {
        int rows = 0;
        int feasible_rows = 0;
        std::vector<std::filesystem::path> files;
        std::string results_hash; // git blob SHA-1 of the main CSV
    };

    // Runs the configured mode and writes its files into cfg.output_dir.
    RunSummary run_scenario(const ScenarioConfig &cfg);

    // SHA-1 of "blob <size>\0<content>", as git hashes file contents.
    std::string git_blob_sha1(const std::string &content);

    // Header line of results.csv (after the schema comment).
    std::string results_header();
}
