/*
 * Copyright 2026 The fedmdl Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <arm_neon.h>

#include <bit>

#include "fedmdl/simd/bitset_kernels.h"

namespace fedmdl::simd::neon {

std::uint64_t Popcount(const std::uint64_t* words, std::size_t n) {
  uint64x2_t acc = vdupq_n_u64(0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint8x16_t bytes = vcntq_u8(vreinterpretq_u8_u64(vld1q_u64(words + i)));
    acc = vpadalq_u32(acc, vpaddlq_u16(vpaddlq_u8(bytes)));
  }
  std::uint64_t total = vgetq_lane_u64(acc, 0) + vgetq_lane_u64(acc, 1);
  for (; i < n; ++i) total += std::popcount(words[i]);
  return total;
}

std::uint64_t AndPopcount(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t n) {
  uint64x2_t acc = vdupq_n_u64(0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64x2_t both = vandq_u64(vld1q_u64(a + i), vld1q_u64(b + i));
    uint8x16_t bytes = vcntq_u8(vreinterpretq_u8_u64(both));
    acc = vpadalq_u32(acc, vpaddlq_u16(vpaddlq_u8(bytes)));
  }
  std::uint64_t total = vgetq_lane_u64(acc, 0) + vgetq_lane_u64(acc, 1);
  for (; i < n; ++i) total += std::popcount(a[i] & b[i]);
  return total;
}

void AndInto(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_u64(dst + i, vandq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
  }
  for (; i < n; ++i) dst[i] &= src[i];
}

}  // namespace fedmdl::simd::neon
