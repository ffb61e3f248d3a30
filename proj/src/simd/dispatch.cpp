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
#include <cstdlib>
#include <string>

#include "fedmdl/error.h"
#include "fedmdl/simd/bitset_kernels.h"

namespace fedmdl::simd {
namespace {

constexpr BitsetKernels kScalar{Isa::kScalar, &scalar::Popcount,
                                &scalar::AndPopcount, &scalar::AndInto};
#if defined(__x86_64__) || defined(_M_X64)
constexpr BitsetKernels kAvx2{Isa::kAvx2, &avx2::Popcount, &avx2::AndPopcount,
                              &avx2::AndInto};
#endif
#if defined(__aarch64__)
constexpr BitsetKernels kNeon{Isa::kNeon, &neon::Popcount, &neon::AndPopcount,
                              &neon::AndInto};
#endif

const BitsetKernels& Choose() {
  if (const char* forced = std::getenv("FEDMDL_SIMD")) {
    std::string name(forced);
    if (name == "scalar") return kScalar;
    if (name == "avx2" && IsSupported(Isa::kAvx2)) return KernelsFor(Isa::kAvx2);
    if (name == "neon" && IsSupported(Isa::kNeon)) return KernelsFor(Isa::kNeon);
  }
  if (IsSupported(Isa::kAvx2)) return KernelsFor(Isa::kAvx2);
  if (IsSupported(Isa::kNeon)) return KernelsFor(Isa::kNeon);
  return kScalar;
}

}  // namespace

std::string_view IsaName(Isa isa) {
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

bool IsSupported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const BitsetKernels& KernelsFor(Isa isa) {
  if (!IsSupported(isa)) {
    throw InvalidArgument("SIMD variant not supported here: " +
                          std::string(IsaName(isa)));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2:
      return kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::kNeon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const BitsetKernels& ActiveKernels() {
  static const BitsetKernels& chosen = Choose();
  return chosen;
}

}  // namespace fedmdl::simd
