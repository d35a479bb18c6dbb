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

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define STEPSIM_HAVE_AVX2 1
#endif

namespace stepsim::kernels::detail {

#if defined(STEPSIM_HAVE_AVX2)
namespace {

// Scalar tails reuse the exact scalar expressions so results stay identical.

__attribute__((target("avx2"))) void max_inplace_avx2(double* dst,
                                                      const double* src,
                                                      std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_loadu_pd(src + i);
    const __m256d d = _mm256_loadu_pd(dst + i);
    // MAXPD(a, b) == (a > b ? a : b)
    _mm256_storeu_pd(dst + i, _mm256_max_pd(s, d));
  }
  for (; i < n; ++i) dst[i] = src[i] > dst[i] ? src[i] : dst[i];
}

__attribute__((target("avx2"))) void add_avx2(double* out, const double* a,
                                              const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

__attribute__((target("avx2"))) void affine_clamp_avx2(double* out,
                                                       const double* z,
                                                       double mu, double sigma,
                                                       bool clamp,
                                                       std::size_t n) {
  const __m256d vmu = _mm256_set1_pd(mu);
  const __m256d vsigma = _mm256_set1_pd(sigma);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_add_pd(vmu, _mm256_mul_pd(vsigma, _mm256_loadu_pd(z + i)));
    if (clamp) {
      // blend rather than max so that -0.0 survives like in the scalar path
      const __m256d neg = _mm256_cmp_pd(v, zero, _CMP_LT_OQ);
      v = _mm256_blendv_pd(v, zero, neg);
    }
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) {
    const double v = mu + sigma * z[i];
    out[i] = (clamp && v < 0.0) ? 0.0 : v;
  }
}

__attribute__((target("avx2"))) void multiply_inplace_avx2(double* dst,
                                                           const double* src,
                                                           std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(dst + i),
                                            _mm256_loadu_pd(src + i)));
  }
  for (; i < n; ++i) dst[i] *= src[i];
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable kTable{max_inplace_avx2, add_avx2, affine_clamp_avx2,
                                  multiply_inplace_avx2};
  return __builtin_cpu_supports("avx2") ? &kTable : nullptr;
}
#else
const KernelTable* avx2_table() { return nullptr; }
#endif

}  // namespace stepsim::kernels::detail
