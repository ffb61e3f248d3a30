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
#ifndef FEDMDL_KRIMP_H_
#define FEDMDL_KRIMP_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedmdl/datamodel.h"
#include "fedmdl/itemset.h"

namespace fedmdl {

struct CodeTableEntry {
  Itemset items;
  std::uint64_t support = 0;  // exact count in the source database
  std::uint64_t usage = 0;    // times chosen by the cover of the source
};

// Standard cover order: longer first, then higher support, then
// lexicographic.
bool CoverOrderLess(const CodeTableEntry& a, const CodeTableEntry& b);

struct Candidate {
  Itemset items;
  std::uint64_t support = 0;
};

// Candidate order: higher support first, then longer, then lexicographic.
bool CandidateOrderLess(const Candidate& a, const Candidate& b);

using CandidateSet = std::vector<Candidate>;

// Code table M for a database D. Entries are kept in cover order with every
// multi-item entry ahead of the singleton region; directed placement may
// reorder the multi-item region, the singletons stay in standard order.
class CodeTable {
 public:
  CodeTable() = default;

  const std::vector<CodeTableEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const CodeTableEntry& operator[](std::size_t i) const { return entries_[i]; }

  std::size_t n_transactions() const { return n_transactions_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  std::size_t NonSingletonCount() const;
  std::optional<std::size_t> Find(const Itemset& items) const;
  std::uint64_t TotalUsage() const;

  // -log2(usage / total usage). nullopt for zero-usage entries, which carry
  // no code.
  std::optional<double> CodeLength(std::size_t index) const;

  // Inserts at the standard cover-order position; returns that index.
  std::size_t InsertStandard(CodeTableEntry entry);
  // Inserts a multi-item entry at slot position (0-based) within the
  // multi-item region.
  void InsertAt(std::size_t slot, CodeTableEntry entry);
  void Erase(std::size_t index);
  void set_usage(std::size_t index, std::uint64_t usage) {
    entries_.at(index).usage = usage;
  }

  // Re-covers db and replaces every usage.
  void Recover(const TransactionDatabase& db);

  // One line per entry: "<items> | usage=<n> | bits=<x.xxxxxx>" (bits=none
  // for zero usage); a "--" line separates the singleton region.
  std::string ToText() const;

  friend bool operator==(const CodeTable&, const CodeTable&) = default;

 private:
  friend CodeTable SingletonTable(const TransactionDatabase& db);
  std::vector<CodeTableEntry> entries_;
  std::size_t n_transactions_ = 0;
  std::string provenance_;
};

// Every alphabet item as a singleton entry, usages = supports.
CodeTable SingletonTable(const TransactionDatabase& db);

// Indices into ct of the greedy cover of t. Throws InvalidArgument if an item
// of t has no singleton in ct.
std::vector<std::size_t> CoverIndices(const Itemset& t, const CodeTable& ct);
std::vector<Itemset> Cover(const Itemset& t, const CodeTable& ct);

// All itemsets with support >= min_count, in candidate order. Supports are
// counted with tid bitmaps.
CandidateSet MineCandidates(const TransactionDatabase& db,
                            std::uint64_t min_count);

struct EncodedSize {
  double data_bits = 0;   // L(D | CT)
  double model_bits = 0;  // L(CT), items priced by the singleton table of D
  double total() const { return data_bits + model_bits; }
};

// Covers db from scratch with ct's order; stored usages are ignored.
EncodedSize TotalEncodedSize(const TransactionDatabase& db, const CodeTable& ct);

// Absolute slack on "strictly smaller": insertions that leave every usage
// unchanged tie exactly in real arithmetic and must not win on rounding.
inline constexpr double kSizeEpsilon = 1e-9;

struct KrimpStep {
  Itemset candidate;
  std::uint64_t support = 0;
  bool accepted = false;
  double size_with_candidate = 0;
};

struct KrimpResult {
  CodeTable table;
  std::vector<KrimpStep> trace;
  double baseline_bits = 0;  // singleton table
  double final_bits = 0;
};

KrimpResult KrimpCompressTraced(const TransactionDatabase& db,
                                std::uint64_t min_count);
CodeTable KrimpCompress(const TransactionDatabase& db, std::uint64_t min_count);

// l variants of ct with f inserted at fractional depth i/l, i = 1..l, of the
// multi-item region (slot round-half-up(i/l * m), m = region size + 1,
// clamped to 1..m). Usages of every variant are recomputed on db.
std::vector<CodeTable> DirectedPlacement(const TransactionDatabase& db,
                                         const CodeTable& ct,
                                         const Candidate& f, std::size_t l);

// 1-based slot used by DirectedPlacement for variant i.
std::size_t PlacementSlot(std::size_t i, std::size_t l, std::size_t m);

}  // namespace fedmdl

#endif  // FEDMDL_KRIMP_H_
