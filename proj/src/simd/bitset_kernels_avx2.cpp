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
// Compiled with -mavx2. Only reached through the dispatcher after a CPUID
// check, so nothing here may run on a pre-Haswell core.

#include <immintrin.h>

#include <bit>

#include "fedmdl/simd/bitset_kernels.h"

namespace fedmdl::simd::avx2 {
namespace {

// Per-byte popcount through a nibble lookup table (Mula's method), summed
// into four 64-bit lanes with SAD against zero.
inline __m256i PopcountLanes(__m256i v) {
  const __m256i lookup = _mm256_setr_epi8(
      0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
      0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i lo = _mm256_and_si256(v, low_mask);
  __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  __m256i counts = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo),
                                   _mm256_shuffle_epi8(lookup, hi));
  return _mm256_sad_epu8(counts, _mm256_setzero_si256());
}

inline std::uint64_t HorizontalSum(__m256i acc) {
  return static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 0)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 1)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 2)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 3));
}

}  // namespace

std::uint64_t Popcount(const std::uint64_t* words, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + i));
    acc = _mm256_add_epi64(acc, PopcountLanes(v));
  }
  std::uint64_t total = HorizontalSum(acc);
  for (; i < n; ++i) total += std::popcount(words[i]);
  return total;
}

std::uint64_t AndPopcount(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    acc = _mm256_add_epi64(acc, PopcountLanes(_mm256_and_si256(va, vb)));
  }
  std::uint64_t total = HorizontalSum(acc);
  for (; i < n; ++i) total += std::popcount(a[i] & b[i]);
  return total;
}

void AndInto(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    auto* d = reinterpret_cast<__m256i*>(dst + i);
    __m256i vs = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(d, _mm256_and_si256(_mm256_loadu_si256(d), vs));
  }
  for (; i < n; ++i) dst[i] &= src[i];
}

}  // namespace fedmdl::simd::avx2
