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

#include "cfee/rng.hpp"

namespace cfee
{
    std::uint64_t mix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index)
    {
        std::uint64_t h = mix64(seed);
        h = mix64(h ^ static_cast<std::uint64_t>(stream));
        return mix64(h ^ (index * 0xD1B54A32D192ED03ULL));
    }

    std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index)
    {
        return std::mt19937_64(derive_seed(seed, stream, index));
    }
}
