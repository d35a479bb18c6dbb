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

#include "stepsim/kernels.h"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace stepsim::kernels::detail {

#if defined(__aarch64__)
namespace {

// vmaxq_f64 follows IEEE maxNum for signed zeros, so compare+select is used
// to match the scalar (a > b ? a : b) exactly.

void max_inplace_neon(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t s = vld1q_f64(src + i);
    const float64x2_t d = vld1q_f64(dst + i);
    vst1q_f64(dst + i, vbslq_f64(vcgtq_f64(s, d), s, d));
  }
  for (; i < n; ++i) dst[i] = src[i] > dst[i] ? src[i] : dst[i];
}

void add_neon(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void affine_clamp_neon(double* out, const double* z, double mu, double sigma,
                       bool clamp, std::size_t n) {
  const float64x2_t vmu = vdupq_n_f64(mu);
  const float64x2_t vsigma = vdupq_n_f64(sigma);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // separate mul and add: vmlaq may fuse
    float64x2_t v = vaddq_f64(vmu, vmulq_f64(vsigma, vld1q_f64(z + i)));
    if (clamp) v = vbslq_f64(vcltq_f64(v, zero), zero, v);
    vst1q_f64(out + i, v);
  }
  for (; i < n; ++i) {
    const double v = mu + sigma * z[i];
    out[i] = (clamp && v < 0.0) ? 0.0 : v;
  }
}

void multiply_inplace_neon(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vmulq_f64(vld1q_f64(dst + i), vld1q_f64(src + i)));
  }
  for (; i < n; ++i) dst[i] *= src[i];
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable kTable{max_inplace_neon, add_neon, affine_clamp_neon,
                                  multiply_inplace_neon};
  return &kTable;
}
#else
const KernelTable* neon_table() { return nullptr; }
#endif

}  // namespace stepsim::kernels::detail
