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
#ifndef FEDMDL_TESTS_SUPPORT_ORACLES_H_
#define FEDMDL_TESTS_SUPPORT_ORACLES_H_

// Brute-force references used by unit and acceptance tests. Nothing here
// calls into the library's algorithms: covers, sizes and supports are
// recomputed naively from the horizontal rows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fedmdl/datamodel.h"
#include "fedmdl/fragment.h"
#include "fedmdl/itemset.h"

namespace fedmdl::testing {

inline TransactionDatabase RandomDb(std::mt19937_64& rng, std::size_t max_tx,
                                    std::size_t max_items, double density = 0.4) {
  std::uniform_int_distribution<std::size_t> ntx(1, max_tx);
  std::uniform_int_distribution<std::size_t> nitems(2, max_items);
  std::bernoulli_distribution present(density);
  const std::size_t n = ntx(rng);
  const std::size_t m = nitems(rng);
  std::vector<Itemset> rows;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<Item> row;
    for (Item i = 1; i <= m; ++i) {
      if (present(rng)) row.push_back(i);
    }
    rows.push_back(Itemset::FromSorted(std::move(row)));
  }
  return TransactionDatabase(std::move(rows));
}

// Random assignment of the alphabet to parties 1..n, every party non-empty.
inline std::map<Item, PartyId> RandomAssignment(std::mt19937_64& rng, const Itemset& alphabet,
                                                std::size_t n) {
  std::vector<Item> items(alphabet.begin(), alphabet.end());
  std::shuffle(items.begin(), items.end(), rng);
  std::map<Item, PartyId> out;
  std::uniform_int_distribution<std::uint32_t> pick(1, static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < items.size(); ++i) {
    out[items[i]] = PartyId{i < n ? static_cast<std::uint32_t>(i + 1) : pick(rng)};
  }
  return out;
}

inline std::uint64_t BruteSupport(const TransactionDatabase& db, const Itemset& x) {
  std::uint64_t n = 0;
  for (const auto& t : db.transactions()) {
    if (std::includes(t.begin(), t.end(), x.begin(), x.end())) ++n;
  }
  return n;
}

inline std::vector<Tid> BruteTids(const TransactionDatabase& db, const Itemset& x) {
  std::vector<Tid> out;
  for (Tid t = 1; t <= db.size(); ++t) {
    const auto& row = db.transaction(t);
    if (std::includes(row.begin(), row.end(), x.begin(), x.end())) out.push_back(t);
  }
  return out;
}

// Every non-empty subset of the alphabet with support >= min_count.
inline std::vector<std::pair<Itemset, std::uint64_t>> BruteFrequent(
    const TransactionDatabase& db, std::uint64_t min_count) {
  std::vector<Item> alpha(db.alphabet().begin(), db.alphabet().end());
  std::vector<std::pair<Itemset, std::uint64_t>> out;
  const std::size_t m = alpha.size();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<Item> items;
    for (std::size_t b = 0; b < m; ++b) {
      if (mask >> b & 1) items.push_back(alpha[b]);
    }
    Itemset x = Itemset::FromSorted(std::move(items));
    const std::uint64_t s = BruteSupport(db, x);
    if (s >= min_count && s > 0) out.emplace_back(std::move(x), s);
  }
  return out;
}

struct OracleEntry {
  Itemset items;
  std::uint64_t support = 0;
};

inline bool OracleCoverLess(const OracleEntry& a, const OracleEntry& b) {
  if (a.items.size() != b.items.size()) return a.items.size() > b.items.size();
  if (a.support != b.support) return a.support > b.support;
  return a.items < b.items;
}

inline std::vector<std::uint64_t> OracleUsages(const TransactionDatabase& db,
                                               const std::vector<OracleEntry>& table) {
  std::vector<std::uint64_t> usage(table.size(), 0);
  for (const auto& t : db.transactions()) {
    Itemset rest = t;
    for (std::size_t i = 0; i < table.size() && !rest.empty(); ++i) {
      if (table[i].items.IsSubsetOf(rest)) {
        ++usage[i];
        rest = rest.Minus(table[i].items);
      }
    }
  }
  return usage;
}

// (data bits, model bits) of table on db; items priced by singleton supports.
inline std::pair<double, double> OracleSize(const TransactionDatabase& db,
                                            const std::vector<OracleEntry>& table) {
  std::map<Item, double> st_len;
  double st_total = 0;
  for (Item i : db.alphabet()) st_total += static_cast<double>(BruteSupport(db, Itemset{i}));
  for (Item i : db.alphabet()) {
    st_len[i] = -std::log2(static_cast<double>(BruteSupport(db, Itemset{i})) / st_total);
  }
  const auto usage = OracleUsages(db, table);
  double total = 0;
  for (auto u : usage) total += static_cast<double>(u);
  double data = 0;
  double model = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (usage[i] == 0) continue;
    const double len = -std::log2(static_cast<double>(usage[i]) / total);
    data += static_cast<double>(usage[i]) * len;
    model += len;
    for (Item it : table[i].items) model += st_len.at(it);
  }
  return {data, model};
}

struct OracleStep {
  Itemset candidate;
  bool accepted = false;
  double size = 0;
};

struct OracleKrimp {
  std::vector<OracleEntry> table;
  std::vector<OracleStep> trace;
  double baseline = 0;
  double final_size = 0;
};

// Greedy KRIMP by brute force: every candidate of length >= 2 in candidate
// order (support desc, length desc, lexicographic), tentatively inserted in
// cover order, kept on strict decrease of the total size.
inline OracleKrimp OracleKrimpRun(const TransactionDatabase& db, std::uint64_t min_count) {
  OracleKrimp r;
  for (Item i : db.alphabet()) r.table.push_back({Itemset{i}, BruteSupport(db, Itemset{i})});
  std::sort(r.table.begin(), r.table.end(), OracleCoverLess);
  auto total = [&](const std::vector<OracleEntry>& t) {
    auto [d, m] = OracleSize(db, t);
    return d + m;
  };
  r.baseline = total(r.table);
  double best = r.baseline;
  auto cands = BruteFrequent(db, std::max<std::uint64_t>(min_count, 1));
  std::erase_if(cands, [](const auto& c) { return c.first.size() < 2; });
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });
  for (const auto& [items, support] : cands) {
    auto trial = r.table;
    trial.push_back({items, support});
    std::sort(trial.begin(), trial.end(), OracleCoverLess);
    const double size = total(trial);
    const bool accept = size < best - 1e-9;
    r.trace.push_back({items, accept, size});
    if (accept) {
      best = size;
      r.table = std::move(trial);
    }
  }
  r.final_size = best;
  return r;
}

}  // namespace fedmdl::testing

#endif  // FEDMDL_TESTS_SUPPORT_ORACLES_H_
