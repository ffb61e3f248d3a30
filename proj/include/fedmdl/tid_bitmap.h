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
#ifndef FEDMDL_TID_BITMAP_H_
#define FEDMDL_TID_BITMAP_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedmdl/itemset.h"

namespace fedmdl {

// Dense tidset over tids 1..n. Intersections and counts go through the
// dispatched SIMD kernels.
class TidBitmap {
 public:
  TidBitmap() = default;
  explicit TidBitmap(std::size_t n_transactions);

  // Throws InvalidArgument if a tid is 0 or exceeds n_transactions.
  static TidBitmap FromTids(std::span<const Tid> tids,
                            std::size_t n_transactions);
  static TidBitmap Full(std::size_t n_transactions);

  std::size_t universe() const { return n_; }
  std::span<const std::uint64_t> words() const { return words_; }

  void Set(Tid tid);
  bool Test(Tid tid) const;

  std::uint64_t Count() const;
  std::uint64_t AndCount(const TidBitmap& other) const;
  TidBitmap& operator&=(const TidBitmap& other);

  TidList ToTids() const;

  friend bool operator==(const TidBitmap&, const TidBitmap&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace fedmdl

#endif  // FEDMDL_TID_BITMAP_H_
