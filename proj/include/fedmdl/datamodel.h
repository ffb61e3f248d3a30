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
#ifndef FEDMDL_DATAMODEL_H_
#define FEDMDL_DATAMODEL_H_

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fedmdl/itemset.h"
#include "fedmdl/tid_bitmap.h"

namespace fedmdl {

// Horizontal layout: transaction t (1-based) is transactions()[t - 1]. The
// alphabet is always the union of the transactions.
class TransactionDatabase {
 public:
  TransactionDatabase() = default;
  explicit TransactionDatabase(std::vector<Itemset> transactions);

  const std::vector<Itemset>& transactions() const { return transactions_; }
  std::size_t size() const { return transactions_.size(); }
  bool empty() const { return transactions_.empty(); }
  const Itemset& alphabet() const { return alphabet_; }
  const Itemset& transaction(Tid tid) const;

  // Sum of transaction lengths.
  std::size_t ItemOccurrences() const;

  friend bool operator==(const TransactionDatabase& a,
                         const TransactionDatabase& b) {
    return a.transactions_ == b.transactions_;
  }

 private:
  std::vector<Itemset> transactions_;
  Itemset alphabet_;
};

// Vertical layout: item -> ascending tids containing it.
struct VerticalIndex {
  std::map<Item, TidList> tidsets;

  friend bool operator==(const VerticalIndex&, const VerticalIndex&) = default;
};

// One transaction per line, whitespace-separated non-negative integer items.
// Blank lines are empty transactions. Throws ParseError (with line number)
// on a bad token or a repeated item within one line.
TransactionDatabase LoadTransactionDb(std::istream& in);
TransactionDatabase ParseTransactionDb(std::string_view text);
TransactionDatabase LoadTransactionFile(const std::string& path);
std::string FormatTransactionDb(const TransactionDatabase& db);

VerticalIndex ToVertical(const TransactionDatabase& db);

// Inverse of ToVertical. Throws InvalidArgument if any tid is outside
// 1..n_transactions.
TransactionDatabase ToHorizontal(const VerticalIndex& index,
                                 std::size_t n_transactions);

// Contiguous tid ranges; sizes differ by at most one and earlier parts get
// the extra transaction. A single part is always allowed, otherwise
// n_parts must not exceed the transaction count.
std::vector<TransactionDatabase> PartitionHorizontal(
    const TransactionDatabase& db, std::size_t n_parts);

// Bitmap for every item of the alphabet.
std::map<Item, TidBitmap> ItemBitmaps(const TransactionDatabase& db);

}  // namespace fedmdl

#endif  // FEDMDL_DATAMODEL_H_
