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

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "stepsim/kernels.h"

namespace stepsim::kernels {
namespace {

const KernelTable* lookup(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &detail::scalar_table();
    case Isa::kAvx2:
      return detail::avx2_table();
    case Isa::kNeon:
      return detail::neon_table();
  }
  return nullptr;
}

Isa best_isa() {
  // STEPSIM_ISA=scalar pins the reference path without recompiling.
  if (const char* env = std::getenv("STEPSIM_ISA")) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::kScalar;
    if (v == "avx2" && detail::avx2_table()) return Isa::kAvx2;
    if (v == "neon" && detail::neon_table()) return Isa::kNeon;
  }
  if (detail::avx2_table()) return Isa::kAvx2;
  if (detail::neon_table()) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Isa> g_active_isa{Isa::kScalar};

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const Isa isa = best_isa();
    g_active_isa.store(isa, std::memory_order_relaxed);
    t = lookup(isa);
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::kScalar};
  if (detail::avx2_table()) out.push_back(Isa::kAvx2);
  if (detail::neon_table()) out.push_back(Isa::kNeon);
  return out;
}

Isa active_isa() {
  active();
  return g_active_isa.load(std::memory_order_relaxed);
}

void force_isa(std::optional<Isa> isa) {
  const Isa chosen = isa.value_or(best_isa());
  const KernelTable* t = lookup(chosen);
  if (t == nullptr) {
    throw std::invalid_argument(std::string("ISA not available: ") +
                                isa_name(chosen));
  }
  g_active_isa.store(chosen, std::memory_order_relaxed);
  g_active.store(t, std::memory_order_release);
}

const KernelTable& table(Isa isa) {
  const KernelTable* t = lookup(isa);
  if (t == nullptr) {
    throw std::invalid_argument(std::string("ISA not available: ") +
                                isa_name(isa));
  }
  return *t;
}

void max_inplace(std::span<double> dst, std::span<const double> src) {
  assert(dst.size() == src.size());
  active().max_inplace(dst.data(), src.data(), dst.size());
}

void add(std::span<double> out, std::span<const double> a,
         std::span<const double> b) {
  assert(out.size() == a.size() && out.size() == b.size());
  active().add(out.data(), a.data(), b.data(), out.size());
}

void affine_clamp(std::span<double> out, std::span<const double> z, double mu,
                  double sigma, bool clamp) {
  assert(out.size() == z.size());
  active().affine_clamp(out.data(), z.data(), mu, sigma, clamp, out.size());
}

void multiply_inplace(std::span<double> dst, std::span<const double> src) {
  assert(dst.size() == src.size());
  active().multiply_inplace(dst.data(), src.data(), dst.size());
}

}  // namespace stepsim::kernels
