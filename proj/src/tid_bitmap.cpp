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
#include "fedmdl/tid_bitmap.h"

#include <bit>

#include "fedmdl/error.h"
#include "fedmdl/simd/bitset_kernels.h"

namespace fedmdl {

TidBitmap::TidBitmap(std::size_t n_transactions)
    : n_(n_transactions), words_((n_transactions + 63) / 64, 0) {}

TidBitmap TidBitmap::FromTids(std::span<const Tid> tids,
                              std::size_t n_transactions) {
  TidBitmap out(n_transactions);
  for (Tid t : tids) out.Set(t);
  return out;
}

TidBitmap TidBitmap::Full(std::size_t n_transactions) {
  TidBitmap out(n_transactions);
  for (auto& w : out.words_) w = ~std::uint64_t{0};
  if (std::size_t tail = n_transactions % 64; tail != 0) {
    out.words_.back() = (std::uint64_t{1} << tail) - 1;
  }
  return out;
}

void TidBitmap::Set(Tid tid) {
  if (tid == 0 || tid > n_) {
    throw InvalidArgument("tid " + std::to_string(tid) + " outside 1.." +
                          std::to_string(n_));
  }
  words_[(tid - 1) / 64] |= std::uint64_t{1} << ((tid - 1) % 64);
}

bool TidBitmap::Test(Tid tid) const {
  if (tid == 0 || tid > n_) return false;
  return (words_[(tid - 1) / 64] >> ((tid - 1) % 64)) & 1U;
}

std::uint64_t TidBitmap::Count() const {
  return simd::ActiveKernels().popcount(words_.data(), words_.size());
}

std::uint64_t TidBitmap::AndCount(const TidBitmap& other) const {
  if (other.n_ != n_) throw InvalidArgument("tid bitmaps over different universes");
  return simd::ActiveKernels().and_popcount(words_.data(), other.words_.data(),
                                            words_.size());
}

TidBitmap& TidBitmap::operator&=(const TidBitmap& other) {
  if (other.n_ != n_) throw InvalidArgument("tid bitmaps over different universes");
  simd::ActiveKernels().and_into(words_.data(), other.words_.data(),
                                 words_.size());
  return *this;
}

TidList TidBitmap::ToTids() const {
  TidList out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      int b = std::countr_zero(bits);
      out.push_back(static_cast<Tid>(w * 64 + b + 1));
      bits &= bits - 1;
    }
  }
  return out;
}

}  // namespace fedmdl
