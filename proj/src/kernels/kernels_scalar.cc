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

namespace stepsim::kernels::detail {
namespace {

void max_inplace_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = src[i] > dst[i] ? src[i] : dst[i];
  }
}

void add_scalar(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void affine_clamp_scalar(double* out, const double* z, double mu, double sigma,
                         bool clamp, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = mu + sigma * z[i];
    out[i] = (clamp && v < 0.0) ? 0.0 : v;
  }
}

void multiply_inplace_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] *= src[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable kTable{max_inplace_scalar, add_scalar,
                                  affine_clamp_scalar, multiply_inplace_scalar};
  return kTable;
}

}  // namespace stepsim::kernels::detail
