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
#include "fedmdl/krimp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "fedmdl/error.h"
#include "fedmdl/tid_bitmap.h"

namespace fedmdl {
namespace {

using StandardLengths = std::map<Item, double>;

StandardLengths SingletonLengths(const TransactionDatabase& db) {
  std::map<Item, std::uint64_t> counts;
  for (const auto& t : db.transactions()) {
    for (Item i : t) ++counts[i];
  }
  const double total = static_cast<double>(db.ItemOccurrences());
  StandardLengths out;
  for (const auto& [item, c] : counts) {
    out[item] = -std::log2(static_cast<double>(c) / total);
  }
  return out;
}

// Sizes from the usages already stored in ct.
EncodedSize SizeFromUsages(const CodeTable& ct, const StandardLengths& st) {
  EncodedSize out;
  for (std::size_t i = 0; i < ct.size(); ++i) {
    auto cl = ct.CodeLength(i);
    if (!cl) continue;
    out.data_bits += static_cast<double>(ct[i].usage) * *cl;
    double model = *cl;
    for (Item item : ct[i].items) model += st.at(item);
    out.model_bits += model;
  }
  return out;
}

void Eclat(std::vector<Item>& prefix,
           const std::vector<std::pair<Item, TidBitmap>>& klass,
           std::uint64_t min_count, CandidateSet& out) {
  for (std::size_t i = 0; i < klass.size(); ++i) {
    prefix.push_back(klass[i].first);
    std::vector<std::pair<Item, TidBitmap>> next;
    for (std::size_t j = i + 1; j < klass.size(); ++j) {
      if (klass[i].second.AndCount(klass[j].second) < min_count) continue;
      TidBitmap joined = klass[i].second;
      joined &= klass[j].second;
      next.emplace_back(klass[j].first, std::move(joined));
    }
    for (const auto& [item, bm] : next) {
      std::vector<Item> items = prefix;
      items.push_back(item);
      out.push_back({Itemset::FromSorted(std::move(items)), bm.Count()});
    }
    if (!next.empty()) Eclat(prefix, next, min_count, out);
    prefix.pop_back();
  }
}

}  // namespace

bool CoverOrderLess(const CodeTableEntry& a, const CodeTableEntry& b) {
  if (a.items.size() != b.items.size()) return a.items.size() > b.items.size();
  if (a.support != b.support) return a.support > b.support;
  return a.items < b.items;
}

bool CandidateOrderLess(const Candidate& a, const Candidate& b) {
  if (a.support != b.support) return a.support > b.support;
  if (a.items.size() != b.items.size()) return a.items.size() > b.items.size();
  return a.items < b.items;
}

std::size_t CodeTable::NonSingletonCount() const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(),
      [](const CodeTableEntry& e) { return e.items.size() > 1; }));
}

std::optional<std::size_t> CodeTable::Find(const Itemset& items) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].items == items) return i;
  }
  return std::nullopt;
}

std::uint64_t CodeTable::TotalUsage() const {
  std::uint64_t total = 0;
  for (const auto& e : entries_) total += e.usage;
  return total;
}

std::optional<double> CodeTable::CodeLength(std::size_t index) const {
  const std::uint64_t usage = entries_.at(index).usage;
  if (usage == 0) return std::nullopt;
  return -std::log2(static_cast<double>(usage) /
                    static_cast<double>(TotalUsage()));
}

std::size_t CodeTable::InsertStandard(CodeTableEntry entry) {
  if (Find(entry.items)) throw InvalidArgument("itemset already in code table");
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), entry,
                              CoverOrderLess);
  // Directed placement can leave the multi-item region out of standard
  // order; never land inside the singleton region for a multi-item entry.
  if (entry.items.size() > 1) {
    auto region_end = entries_.begin() + static_cast<long>(NonSingletonCount());
    if (pos > region_end) pos = region_end;
  }
  std::size_t index = static_cast<std::size_t>(pos - entries_.begin());
  entries_.insert(pos, std::move(entry));
  return index;
}

void CodeTable::InsertAt(std::size_t slot, CodeTableEntry entry) {
  if (entry.items.size() < 2) throw InvalidArgument("InsertAt takes multi-item entries");
  if (Find(entry.items)) throw InvalidArgument("itemset already in code table");
  slot = std::min(slot, NonSingletonCount());
  entries_.insert(entries_.begin() + static_cast<long>(slot), std::move(entry));
}

void CodeTable::Erase(std::size_t index) {
  entries_.erase(entries_.begin() + static_cast<long>(index));
}

void CodeTable::Recover(const TransactionDatabase& db) {
  for (auto& e : entries_) e.usage = 0;
  for (const auto& t : db.transactions()) {
    for (std::size_t i : CoverIndices(t, *this)) ++entries_[i].usage;
  }
  n_transactions_ = db.size();
}

std::string CodeTable::ToText() const {
  std::string out;
  bool separated = false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.items.size() == 1 && !separated) {
      out += "--\n";
      separated = true;
    }
    out += e.items.ToString();
    out += " | usage=" + std::to_string(e.usage) + " | bits=";
    if (auto cl = CodeLength(i)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", *cl);
      out += buf;
    } else {
      out += "none";
    }
    out += '\n';
  }
  if (!separated) out += "--\n";
  return out;
}

CodeTable SingletonTable(const TransactionDatabase& db) {
  CodeTable ct;
  std::map<Item, std::uint64_t> counts;
  for (const auto& t : db.transactions()) {
    for (Item i : t) ++counts[i];
  }
  for (const auto& [item, c] : counts) {
    ct.entries_.push_back({Itemset::FromSorted({item}), c, c});
  }
  std::sort(ct.entries_.begin(), ct.entries_.end(), CoverOrderLess);
  ct.n_transactions_ = db.size();
  return ct;
}

std::vector<std::size_t> CoverIndices(const Itemset& t, const CodeTable& ct) {
  std::vector<std::size_t> out;
  Itemset rest = t;
  for (std::size_t i = 0; i < ct.size() && !rest.empty(); ++i) {
    if (ct[i].items.IsSubsetOf(rest)) {
      out.push_back(i);
      rest = rest.Minus(ct[i].items);
    }
  }
  if (!rest.empty()) {
    throw InvalidArgument("items {" + rest.ToString() + "} have no code in the table");
  }
  return out;
}

std::vector<Itemset> Cover(const Itemset& t, const CodeTable& ct) {
  std::vector<Itemset> out;
  for (std::size_t i : CoverIndices(t, ct)) out.push_back(ct[i].items);
  return out;
}

CandidateSet MineCandidates(const TransactionDatabase& db,
                            std::uint64_t min_count) {
  if (min_count == 0) throw InvalidArgument("min_count must be at least 1");
  CandidateSet out;
  std::vector<std::pair<Item, TidBitmap>> singles;
  for (auto& [item, bm] : ItemBitmaps(db)) {
    std::uint64_t support = bm.Count();
    if (support < min_count) continue;
    out.push_back({Itemset::FromSorted({item}), support});
    singles.emplace_back(item, std::move(bm));
  }
  std::vector<Item> prefix;
  Eclat(prefix, singles, min_count, out);
  std::sort(out.begin(), out.end(), CandidateOrderLess);
  return out;
}

EncodedSize TotalEncodedSize(const TransactionDatabase& db, const CodeTable& ct) {
  CodeTable covered = ct;
  covered.Recover(db);
  return SizeFromUsages(covered, SingletonLengths(db));
}

KrimpResult KrimpCompressTraced(const TransactionDatabase& db,
                                std::uint64_t min_count) {
  KrimpResult result;
  result.table = SingletonTable(db);
  const StandardLengths st = SingletonLengths(db);
  const auto bitmaps = ItemBitmaps(db);
  double best = SizeFromUsages(result.table, st).total();
  result.baseline_bits = best;

  for (const Candidate& cand : MineCandidates(db, min_count)) {
    if (cand.items.size() < 2) continue;
    CodeTable trial = result.table;
    const std::size_t pos = trial.InsertStandard({cand.items, cand.support, 0});

    // Only transactions containing the candidate can change their cover.
    TidBitmap affected = TidBitmap::Full(db.size());
    for (Item i : cand.items) affected &= bitmaps.at(i);
    std::vector<std::uint64_t> usage(trial.size());
    for (std::size_t i = 0; i < result.table.size(); ++i) {
      usage[i + (i >= pos ? 1 : 0)] = result.table[i].usage;
    }
    for (Tid tid : affected.ToTids()) {
      const Itemset& t = db.transaction(tid);
      for (std::size_t i : CoverIndices(t, result.table)) --usage[i + (i >= pos ? 1 : 0)];
      for (std::size_t i : CoverIndices(t, trial)) ++usage[i];
    }
    for (std::size_t i = 0; i < usage.size(); ++i) trial.set_usage(i, usage[i]);
    const double size = SizeFromUsages(trial, st).total();
    const bool accepted = size < best - kSizeEpsilon;
    result.trace.push_back({cand.items, cand.support, accepted, size});
    if (accepted) {
      result.table = std::move(trial);
      best = size;
    }
  }
  result.final_bits = best;
  result.table.set_provenance("krimp");
  return result;
}

CodeTable KrimpCompress(const TransactionDatabase& db, std::uint64_t min_count) {
  return KrimpCompressTraced(db, min_count).table;
}

std::size_t PlacementSlot(std::size_t i, std::size_t l, std::size_t m) {
  std::size_t slot = (2 * i * m + l) / (2 * l);
  return std::clamp<std::size_t>(slot, 1, m);
}

std::vector<CodeTable> DirectedPlacement(const TransactionDatabase& db,
                                         const CodeTable& ct,
                                         const Candidate& f, std::size_t l) {
  if (l == 0) throw InvalidArgument("l must be at least 1");
  if (ct.Find(f.items)) throw InvalidArgument("candidate already in code table");
  const std::size_t m = ct.NonSingletonCount() + 1;
  std::vector<CodeTable> out;
  for (std::size_t i = 1; i <= l; ++i) {
    CodeTable variant = ct;
    variant.InsertAt(PlacementSlot(i, l, m) - 1, {f.items, f.support, 0});
    variant.Recover(db);
    out.push_back(std::move(variant));
  }
  return out;
}

}  // namespace fedmdl
