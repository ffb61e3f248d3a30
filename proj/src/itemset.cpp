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
#include "fedmdl/itemset.h"

#include <algorithm>
#include <iterator>

#include "fedmdl/error.h"

namespace fedmdl {

Itemset::Itemset(std::initializer_list<Item> items)
    : Itemset(FromUnsorted(std::vector<Item>(items))) {}

Itemset Itemset::FromUnsorted(std::vector<Item> items) {
  std::sort(items.begin(), items.end());
  if (std::adjacent_find(items.begin(), items.end()) != items.end()) {
    throw InvalidArgument("duplicate item in itemset");
  }
  return FromSorted(std::move(items));
}

Itemset Itemset::FromSorted(std::vector<Item> items) {
  Itemset out;
  out.items_ = std::move(items);
  return out;
}

bool Itemset::contains(Item item) const {
  return std::binary_search(items_.begin(), items_.end(), item);
}

bool Itemset::IsSubsetOf(const Itemset& other) const {
  return std::includes(other.items_.begin(), other.items_.end(),
                       items_.begin(), items_.end());
}

bool Itemset::Intersects(const Itemset& other) const {
  auto a = items_.begin();
  auto b = other.items_.begin();
  while (a != items_.end() && b != other.items_.end()) {
    if (*a == *b) return true;
    if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

Itemset Itemset::Union(const Itemset& other) const {
  std::vector<Item> out;
  out.reserve(items_.size() + other.items_.size());
  std::set_union(items_.begin(), items_.end(), other.items_.begin(),
                 other.items_.end(), std::back_inserter(out));
  return FromSorted(std::move(out));
}

Itemset Itemset::Minus(const Itemset& other) const {
  std::vector<Item> out;
  std::set_difference(items_.begin(), items_.end(), other.items_.begin(),
                      other.items_.end(), std::back_inserter(out));
  return FromSorted(std::move(out));
}

Itemset Itemset::Intersect(const Itemset& other) const {
  std::vector<Item> out;
  std::set_intersection(items_.begin(), items_.end(), other.items_.begin(),
                        other.items_.end(), std::back_inserter(out));
  return FromSorted(std::move(out));
}

std::string Itemset::ToString() const {
  std::string out;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(items_[i]);
  }
  return out;
}

}  // namespace fedmdl
