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
#include "fedmdl/cparmdl.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "fedmdl/error.h"

namespace fedmdl {
namespace {

// item -> index into fragments. This is the metadata lookup that routes a
// candidate without asking the parties.
std::map<Item, std::size_t> OwnerIndex(const std::vector<Fragment>& fragments) {
  std::map<Item, std::size_t> owner;
  for (std::size_t f = 0; f < fragments.size(); ++f) {
    for (Item i : fragments[f].items) owner[i] = f;
  }
  return owner;
}

template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::uint64_t CandidateSeed(std::uint64_t seed, const Itemset& c) {
  std::uint64_t h = Mix64(seed);
  for (Item i : c) h = Mix64(h ^ i);
  return h;
}

// Apriori join of sorted frequent (k-1)-itemsets sharing a (k-2)-prefix,
// pruned to joins whose every (k-1)-subset is frequent.
std::vector<Itemset> JoinLevel(const std::vector<Itemset>& frequent) {
  std::set<Itemset> members(frequent.begin(), frequent.end());
  std::vector<Itemset> out;
  for (std::size_t a = 0; a < frequent.size(); ++a) {
    for (std::size_t b = a + 1; b < frequent.size(); ++b) {
      const auto& x = frequent[a];
      const auto& y = frequent[b];
      if (!std::equal(x.begin(), x.end() - 1, y.begin())) break;
      std::vector<Item> items(x.begin(), x.end());
      items.push_back(y[y.size() - 1]);
      Itemset joined = Itemset::FromSorted(std::move(items));
      bool closed = true;
      for (std::size_t drop = 0; drop + 2 < joined.size() && closed; ++drop) {
        std::vector<Item> sub;
        for (std::size_t k = 0; k < joined.size(); ++k) {
          if (k != drop) sub.push_back(joined[k]);
        }
        closed = members.contains(Itemset::FromSorted(std::move(sub)));
      }
      if (closed) out.push_back(std::move(joined));
    }
  }
  return out;
}

std::string JoinItems(const Itemset& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out;
}

}  // namespace

CandidateCount LocalCount(const Fragment& party, const Itemset& c) {
  CandidateCount out;
  out.items = c;
  out.mode = CountMode::kLocal;
  out.local_party = party.party;
  out.count = party.Intersect(c).Count();
  return out;
}

CrossCount CrossPartyCount(const Itemset& c, const std::vector<Fragment>& parties,
                           std::uint64_t seed, const ProtocolOptions& options) {
  const auto owner = OwnerIndex(parties);
  std::map<std::size_t, std::vector<Item>> share;
  for (Item i : c) {
    auto it = owner.find(i);
    if (it == owner.end()) {
      throw InvalidArgument("no party holds item " + std::to_string(i));
    }
    share[it->second].push_back(i);
  }
  if (share.size() < 2) {
    throw InvalidArgument("candidate {" + c.ToString() +
                          "} lies within one party; count it locally");
  }
  std::size_t assigned = 0;
  std::vector<PartySet> sets;
  for (auto& [f, items] : share) {
    assigned += items.size();
    const Fragment& frag = parties[f];
    TidList tids = frag.Intersect(Itemset::FromSorted(std::move(items))).ToTids();
    sets.push_back({frag.party, {tids.begin(), tids.end()}});
  }
  if (assigned != c.size()) throw InvalidArgument("party shares do not sum to |c|");

  for (std::size_t attempt = 0; attempt < kMaxProtocolAttempts; ++attempt) {
    ProtocolTranscript t =
        RingIntersectionCount(sets, Mix64(seed + attempt * 0x51ed270b27ULL), options);
    if (!t.accepted) continue;
    CrossCount out;
    out.result.items = c;
    out.result.count = t.count;
    out.result.mode = CountMode::kCross;
    out.result.approximate = t.collisions > 0;
    out.transcript = std::move(t);
    out.attempts = attempt + 1;
    return out;
  }
  throw ProtocolError("collision threshold exceeded on " +
                      std::to_string(kMaxProtocolAttempts) + " attempts for {" +
                      c.ToString() + "}");
}

std::string TraceRecord::ToLine() const {
  return "k=" + std::to_string(level) + " c=" + JoinItems(items) + " mode=" +
         (mode == CountMode::kLocal ? "local" : "cross") +
         " count=" + std::to_string(count) + " kept=" + (kept ? "true" : "false");
}

void CheckPartition(const std::vector<Fragment>& fragments) {
  std::set<Item> seen;
  for (const auto& f : fragments) {
    if (!VerifyDigest(f)) {
      throw IntegrityError("digest mismatch for fragment " + f.FragmentId());
    }
    if (f.db_name != fragments.front().db_name) {
      throw IntegrityError("fragment " + f.FragmentId() + " belongs to database " +
                           f.db_name + ", expected " + fragments.front().db_name);
    }
    if (f.n_transactions != fragments.front().n_transactions) {
      throw IntegrityError("fragment " + f.FragmentId() +
                           " disagrees on the transaction count");
    }
    for (Item i : f.items) {
      if (!seen.insert(i).second) {
        throw IntegrityError("item " + std::to_string(i) +
                             " appears in more than one fragment");
      }
    }
  }
}

CparmdlResult RunCparmdl(const std::vector<Fragment>& fragments,
                         const CparmdlOptions& options) {
  if (options.min_count == 0) throw InvalidArgument("min_count must be at least 1");
  CparmdlResult result;
  if (fragments.empty()) return result;
  CheckPartition(fragments);
  for (const auto& f : fragments) result.fragment_ids.push_back(f.FragmentId());

  const auto owner = OwnerIndex(fragments);

  // Level 1: every singleton, counted where it lives.
  std::vector<ItemsetCount> level;
  for (const auto& [item, f] : owner) {
    CandidateCount c = LocalCount(fragments[f], Itemset::FromSorted({item}));
    result.trace.push_back({1, c.items, CountMode::kLocal, c.count, true});
    level.push_back({c.items, c.count});
  }
  result.itemsets = level;

  for (std::size_t k = 2;; ++k) {
    std::vector<Itemset> frequent;
    for (const auto& m : level) {
      if (m.count >= options.min_count) frequent.push_back(m.items);
    }
    std::sort(frequent.begin(), frequent.end());
    const std::vector<Itemset> candidates = JoinLevel(frequent);
    if (candidates.empty()) break;

    struct Slot {
      CandidateCount count;
      std::optional<ProtocolTranscript> transcript;
    };
    std::vector<Slot> slots(candidates.size());
    ParallelFor(candidates.size(), options.workers, [&](std::size_t idx) {
      const Itemset& c = candidates[idx];
      std::set<std::size_t> holders;
      for (Item i : c) holders.insert(owner.at(i));
      if (holders.size() == 1) {
        slots[idx].count = LocalCount(fragments[*holders.begin()], c);
      } else {
        CrossCount cc = CrossPartyCount(c, fragments, CandidateSeed(options.seed, c),
                                        options.protocol);
        slots[idx].count = std::move(cc.result);
        slots[idx].transcript = std::move(cc.transcript);
      }
    });

    level.clear();
    for (auto& slot : slots) {
      const bool kept = slot.count.count >= options.min_count;
      result.trace.push_back(
          {k, slot.count.items, slot.count.mode, slot.count.count, kept});
      if (slot.transcript) {
        result.transcripts.push_back({slot.count.items, std::move(*slot.transcript)});
      }
      if (kept) level.push_back({slot.count.items, slot.count.count});
    }
    if (level.empty()) break;
    result.itemsets.insert(result.itemsets.end(), level.begin(), level.end());
  }
  std::sort(result.itemsets.begin(), result.itemsets.end(),
            [](const ItemsetCount& a, const ItemsetCount& b) {
              if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
              return a.items < b.items;
            });
  return result;
}

GlobalModel PruningMerging(const std::vector<ItemsetCount>& itemsets,
                           const TransactionDatabase& joined, double theta) {
  GlobalModel model;
  CodeTable table = SingletonTable(joined);
  std::set<Itemset> added;
  for (const auto& m : itemsets) {
    if (m.items.size() < 2 || !added.insert(m.items).second) continue;
    table.InsertStandard({m.items, m.count, 0});
  }
  table.Recover(joined);
  double current = TotalEncodedSize(joined, table).total();
  model.baseline_bits = current;

  std::vector<Itemset> order;
  for (const auto& e : table.entries()) {
    if (e.items.size() > 1) order.push_back(e.items);
  }
  for (const Itemset& x : order) {
    auto xi = table.Find(x);
    if (!xi) continue;
    const std::uint64_t x_count = table[*xi].support;
    std::optional<std::size_t> parent;
    for (std::size_t y = 0; y < table.size(); ++y) {
      const auto& cand = table[y];
      if (cand.items.size() <= x.size() || !x.IsSubsetOf(cand.items)) continue;
      if (x_count == 0 ||
          static_cast<double>(cand.support) / static_cast<double>(x_count) < theta) {
        continue;
      }
      if (!parent) {
        parent = y;
        continue;
      }
      const auto& best = table[*parent];
      if (cand.usage != best.usage) {
        if (cand.usage > best.usage) parent = y;
      } else if (cand.support != best.support) {
        if (cand.support > best.support) parent = y;
      } else if (cand.items < best.items) {
        parent = y;
      }
    }
    if (!parent) continue;

    MergeRecord record;
    record.removed = x;
    record.parent = table[*parent].items;
    record.ratio = static_cast<double>(table[*parent].support) /
                   static_cast<double>(x_count);
    record.size_before = current;
    CodeTable trial = table;
    trial.Erase(*xi);
    trial.Recover(joined);
    record.size_after = TotalEncodedSize(joined, trial).total();
    record.accepted = record.size_after <= current + kSizeEpsilon;
    if (record.accepted) {
      table = std::move(trial);
      current = record.size_after;
    }
    model.audit.push_back(std::move(record));
  }
  model.final_bits = current;
  table.set_provenance("pruning-merging");
  model.table = std::move(table);
  return model;
}

GlobalModel PruningMerging(const std::vector<CodeTable>& tables,
                           const TransactionDatabase& joined, double theta) {
  std::map<Itemset, std::uint64_t> merged;
  std::vector<std::string> sources;
  for (const auto& t : tables) {
    sources.push_back(t.provenance());
    for (const auto& e : t.entries()) {
      auto [it, inserted] = merged.emplace(e.items, e.support);
      if (!inserted) it->second = std::max(it->second, e.support);
    }
  }
  std::vector<ItemsetCount> itemsets;
  for (const auto& [items, count] : merged) itemsets.push_back({items, count});
  GlobalModel model = PruningMerging(itemsets, joined, theta);
  model.source_fragments = std::move(sources);
  return model;
}

std::string FormatItemsets(const std::vector<ItemsetCount>& itemsets) {
  std::string out;
  for (const auto& m : itemsets) {
    out += m.items.ToString() + " | count=" + std::to_string(m.count) + "\n";
  }
  return out;
}

}  // namespace fedmdl
