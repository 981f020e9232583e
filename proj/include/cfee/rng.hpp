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

#include <cstdint>
#include <random>

namespace cfee
{
    // Named sub-streams derived from one master seed. Each consumer draws from its own
    // generator so that adding draws in one module never shifts another module's numbers.
    enum class Stream : std::uint64_t
    {
        ap_positions = 1,
        user_positions = 2,
        shadowing = 3,
        pilots = 4,
        monte_carlo = 5,
        test_vectors = 6,
    };

    // SplitMix64 finalizer, a bijective 64-bit mixer.
    std::uint64_t mix64(std::uint64_t x);

    // Counter-style derivation: the child seed is a pure function of (seed, stream, index).
    std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

    std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0);
}
