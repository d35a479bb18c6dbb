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

// Element-wise double-precision kernels used by the Monte Carlo engine and
// the distribution algebra. Each kernel has a scalar reference and, where the
// CPU supports it, an AVX2 (x86-64) or NEON (aarch64) variant. The variant is
// picked once at startup; every variant produces bit-identical output.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace stepsim::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

const char* isa_name(Isa isa);

// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();

// The ISA the dispatching entry points below currently use.
Isa active_isa();

// Pins dispatch to `isa` (throws std::invalid_argument if unavailable), or
// restores automatic selection when empty.
void force_isa(std::optional<Isa> isa);

struct KernelTable {
  // dst[i] = src[i] > dst[i] ? src[i] : dst[i]
  void (*max_inplace)(double* dst, const double* src, std::size_t n);
  // out[i] = a[i] + b[i]; out may alias a or b.
  void (*add)(double* out, const double* a, const double* b, std::size_t n);
  // out[i] = mu + sigma * z[i], replaced by +0.0 when clamp and the value < 0.
  void (*affine_clamp)(double* out, const double* z, double mu, double sigma,
                       bool clamp, std::size_t n);
  // dst[i] *= src[i]
  void (*multiply_inplace)(double* dst, const double* src, std::size_t n);
};

// Table for a specific ISA; throws std::invalid_argument if unavailable.
const KernelTable& table(Isa isa);

void max_inplace(std::span<double> dst, std::span<const double> src);
void add(std::span<double> out, std::span<const double> a,
         std::span<const double> b);
void affine_clamp(std::span<double> out, std::span<const double> z, double mu,
                  double sigma, bool clamp);
void multiply_inplace(std::span<double> dst, std::span<const double> src);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace stepsim::kernels
