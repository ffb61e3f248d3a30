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
#include <random>
#include <vector>

#include "doctest.h"
#include "fedmdl/error.h"
#include "fedmdl/simd/bitset_kernels.h"
#include "fedmdl/tid_bitmap.h"

namespace fedmdl {
namespace {

using simd::Isa;

std::vector<std::uint64_t> RandomWords(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint64_t> w(n);
  for (auto& x : w) x = rng();
  return w;
}

TEST_CASE("every supported kernel variant matches the scalar reference") {
  std::mt19937_64 rng(42);
  const auto& ref = simd::KernelsFor(Isa::kScalar);
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (!simd::IsSupported(isa)) {
      CHECK_THROWS_AS(simd::KernelsFor(isa), InvalidArgument);
      continue;
    }
    CAPTURE(simd::IsaName(isa));
    const auto& k = simd::KernelsFor(isa);
    CHECK(k.isa == isa);
    // Lengths straddle the 4-word vector width and its tails.
    for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 9, 15, 16, 17, 63, 64, 65, 257}) {
      for (int rep = 0; rep < 20; ++rep) {
        auto a = RandomWords(rng, n);
        auto b = RandomWords(rng, n);
        if (rep == 0) std::fill(a.begin(), a.end(), ~std::uint64_t{0});
        CHECK(k.popcount(a.data(), n) == ref.popcount(a.data(), n));
        CHECK(k.and_popcount(a.data(), b.data(), n) == ref.and_popcount(a.data(), b.data(), n));
        auto x = a;
        auto y = a;
        k.and_into(x.data(), b.data(), n);
        ref.and_into(y.data(), b.data(), n);
        CHECK(x == y);
      }
    }
  }
}

TEST_CASE("scalar popcount on known words") {
  const std::uint64_t w[] = {0, 1, 0xFF, ~std::uint64_t{0}};
  CHECK(simd::scalar::Popcount(w, 4) == 0 + 1 + 8 + 64);
}

TEST_CASE("active kernels are supported") {
  CHECK(simd::IsSupported(simd::ActiveKernels().isa));
}

TEST_CASE("tid bitmap basics") {
  const std::vector<Tid> tids{1, 3, 64, 65, 130};
  TidBitmap b = TidBitmap::FromTids(tids, 130);
  CHECK(b.Count() == 5);
  CHECK(b.Test(64));
  CHECK_FALSE(b.Test(2));
  CHECK(b.ToTids() == tids);
  CHECK_THROWS_AS(b.Set(0), InvalidArgument);
  CHECK_THROWS_AS(b.Set(131), InvalidArgument);
  TidBitmap full = TidBitmap::Full(130);
  CHECK(full.Count() == 130);
  CHECK(full.AndCount(b) == 5);
  full &= b;
  CHECK(full == b);
  CHECK(TidBitmap::Full(0).Count() == 0);
}

}  // namespace
}  // namespace fedmdl
