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
#include "fedmdl/datamodel.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fedmdl/error.h"

namespace fedmdl {

TransactionDatabase::TransactionDatabase(std::vector<Itemset> transactions)
    : transactions_(std::move(transactions)) {
  std::set<Item> items;
  for (const auto& t : transactions_) items.insert(t.begin(), t.end());
  alphabet_ = Itemset::FromSorted({items.begin(), items.end()});
}

const Itemset& TransactionDatabase::transaction(Tid tid) const {
  if (tid == 0 || tid > transactions_.size()) {
    throw InvalidArgument("no transaction " + std::to_string(tid));
  }
  return transactions_[tid - 1];
}

std::size_t TransactionDatabase::ItemOccurrences() const {
  std::size_t total = 0;
  for (const auto& t : transactions_) total += t.size();
  return total;
}

TransactionDatabase LoadTransactionDb(std::istream& in) {
  std::vector<Itemset> transactions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<Item> items;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
      Item value = 0;
      auto [ptr, ec] =
          std::from_chars(line.data() + pos, line.data() + end, value);
      if (ec != std::errc() || ptr != line.data() + end) {
        throw ParseError("not a non-negative integer item: '" +
                             line.substr(pos, end - pos) + "'",
                         line_no);
      }
      items.push_back(value);
      pos = end;
    }
    try {
      transactions.push_back(Itemset::FromUnsorted(std::move(items)));
    } catch (const InvalidArgument&) {
      throw ParseError("duplicate item in transaction", line_no);
    }
  }
  return TransactionDatabase(std::move(transactions));
}

TransactionDatabase ParseTransactionDb(std::string_view text) {
  std::istringstream in{std::string(text)};
  return LoadTransactionDb(in);
}

TransactionDatabase LoadTransactionFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return LoadTransactionDb(in);
}

std::string FormatTransactionDb(const TransactionDatabase& db) {
  std::string out;
  for (const auto& t : db.transactions()) {
    out += t.ToString();
    out += '\n';
  }
  return out;
}

VerticalIndex ToVertical(const TransactionDatabase& db) {
  VerticalIndex index;
  Tid tid = 0;
  for (const auto& t : db.transactions()) {
    ++tid;
    for (Item i : t) index.tidsets[i].push_back(tid);
  }
  return index;
}

TransactionDatabase ToHorizontal(const VerticalIndex& index,
                                 std::size_t n_transactions) {
  std::vector<std::vector<Item>> rows(n_transactions);
  for (const auto& [item, tids] : index.tidsets) {
    for (Tid t : tids) {
      if (t == 0 || t > n_transactions) {
        throw InvalidArgument("tid " + std::to_string(t) + " of item " +
                              std::to_string(item) + " outside 1.." +
                              std::to_string(n_transactions));
      }
      rows[t - 1].push_back(item);
    }
  }
  std::vector<Itemset> transactions;
  transactions.reserve(n_transactions);
  // Map iteration is ascending by item, so every row is already sorted.
  for (auto& row : rows) transactions.push_back(Itemset::FromSorted(std::move(row)));
  return TransactionDatabase(std::move(transactions));
}

std::vector<TransactionDatabase> PartitionHorizontal(
    const TransactionDatabase& db, std::size_t n_parts) {
  if (n_parts == 0) throw InvalidArgument("n_parts must be at least 1");
  if (n_parts > 1 && n_parts > db.size()) {
    throw InvalidArgument("cannot split " + std::to_string(db.size()) +
                          " transactions into " + std::to_string(n_parts) +
                          " parts");
  }
  std::vector<TransactionDatabase> parts;
  const std::size_t base = db.size() / n_parts;
  const std::size_t extra = db.size() % n_parts;
  auto it = db.transactions().begin();
  for (std::size_t p = 0; p < n_parts; ++p) {
    std::size_t len = base + (p < extra ? 1 : 0);
    parts.emplace_back(std::vector<Itemset>(it, it + static_cast<long>(len)));
    it += static_cast<long>(len);
  }
  return parts;
}

std::map<Item, TidBitmap> ItemBitmaps(const TransactionDatabase& db) {
  std::map<Item, TidBitmap> out;
  for (Item i : db.alphabet()) out.emplace(i, TidBitmap(db.size()));
  Tid tid = 0;
  for (const auto& t : db.transactions()) {
    ++tid;
    for (Item i : t) out.at(i).Set(tid);
  }
  return out;
}

}  // namespace fedmdl
