/* Copyright 2026 The stepsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <random>

namespace stepsim {

using Rng = std::mt19937_64;

// Independent generator for one Monte Carlo replicate. `stream` separates
// unrelated consumers that share a (seed, replicate) pair.
Rng make_replicate_rng(std::uint64_t seed, std::uint64_t replicate,
                       std::uint64_t stream = 0);

// Uniform on the open interval (0, 1) with 53 bits of resolution.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace stepsim
