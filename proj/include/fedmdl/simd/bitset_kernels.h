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
#ifndef FEDMDL_SIMD_BITSET_KERNELS_H_
#define FEDMDL_SIMD_BITSET_KERNELS_H_

// Word-parallel kernels behind tidset intersection counting. Every support
// count in mining, local party counting and exact-mode queries bottoms out
// here, so each kernel has a portable scalar reference and vector variants
// that must agree with it bit for bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace fedmdl::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view IsaName(Isa isa);

struct BitsetKernels {
  Isa isa;
  // Number of set bits in words.
  std::uint64_t (*popcount)(const std::uint64_t* words, std::size_t n);
  // popcount(a & b) without materialising the conjunction.
  std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t n);
  // dst &= src.
  void (*and_into)(std::uint64_t* dst, const std::uint64_t* src,
                   std::size_t n);
};

// True if the running CPU (and this build) can execute the variant.
bool IsSupported(Isa isa);

// Kernels for a specific variant. Throws InvalidArgument if unsupported.
const BitsetKernels& KernelsFor(Isa isa);

// Best supported variant, chosen once per process. FEDMDL_SIMD=scalar|avx2|neon
// in the environment overrides the choice.
const BitsetKernels& ActiveKernels();

namespace scalar {
std::uint64_t Popcount(const std::uint64_t* words, std::size_t n);
std::uint64_t AndPopcount(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t n);
void AndInto(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
std::uint64_t Popcount(const std::uint64_t* words, std::size_t n);
std::uint64_t AndPopcount(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t n);
void AndInto(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
std::uint64_t Popcount(const std::uint64_t* words, std::size_t n);
std::uint64_t AndPopcount(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t n);
void AndInto(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
}  // namespace neon
#endif

}  // namespace fedmdl::simd

#endif  // FEDMDL_SIMD_BITSET_KERNELS_H_
