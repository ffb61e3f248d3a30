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
#ifndef FEDMDL_ITEMSET_H_
#define FEDMDL_ITEMSET_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fedmdl {

using Item = std::uint32_t;
// Transaction ids are 1-based positions in the horizontal layout.
using Tid = std::uint32_t;
using TidList = std::vector<Tid>;

// Sorted, duplicate-free set of items. Ordering is lexicographic over the
// sorted item sequence, which is the tie-break order used everywhere else.
class Itemset {
 public:
  Itemset() = default;
  Itemset(std::initializer_list<Item> items);
  // Throws InvalidArgument on duplicates.
  static Itemset FromUnsorted(std::vector<Item> items);
  // Caller guarantees sorted and unique.
  static Itemset FromSorted(std::vector<Item> items);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::span<const Item> items() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  Item operator[](std::size_t i) const { return items_[i]; }

  bool contains(Item item) const;
  bool IsSubsetOf(const Itemset& other) const;
  bool Intersects(const Itemset& other) const;
  Itemset Union(const Itemset& other) const;
  Itemset Minus(const Itemset& other) const;
  Itemset Intersect(const Itemset& other) const;

  // "1 3 5"
  std::string ToString() const;

  friend auto operator<=>(const Itemset&, const Itemset&) = default;
  friend bool operator==(const Itemset&, const Itemset&) = default;

 private:
  std::vector<Item> items_;
};

}  // namespace fedmdl

#endif  // FEDMDL_ITEMSET_H_
