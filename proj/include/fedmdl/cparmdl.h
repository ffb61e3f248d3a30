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
#ifndef FEDMDL_CPARMDL_H_
#define FEDMDL_CPARMDL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedmdl/fragment.h"
#include "fedmdl/krimp.h"
#include "fedmdl/protocol.h"

namespace fedmdl {

// An itemset with its joined-database count. This is all the levelwise
// stage releases: no tid lists, no rows.
struct ItemsetCount {
  Itemset items;
  std::uint64_t count = 0;
  friend bool operator==(const ItemsetCount&, const ItemsetCount&) = default;
};

enum class CountMode { kLocal, kCross };

struct CandidateCount {
  Itemset items;
  std::uint64_t count = 0;
  CountMode mode = CountMode::kLocal;
  std::optional<PartyId> local_party;  // set for kLocal
  // Cross-party count accepted with collisions <= tau, so possibly inexact.
  bool approximate = false;
};

// Count of c computed entirely inside one party. Throws InvalidArgument if
// an item of c is not held by that party.
CandidateCount LocalCount(const Fragment& party, const Itemset& c);

struct CrossCount {
  CandidateCount result;
  ProtocolTranscript transcript;  // of the accepted attempt
  std::size_t attempts = 1;
};

inline constexpr std::size_t kMaxProtocolAttempts = 3;

// Each involved party intersects its own tidsets for its share of c, then the
// ring protocol counts the intersection of those sets. A rejected run is
// retried with fresh keys; after kMaxProtocolAttempts rejections a
// ProtocolError is thrown. Throws InvalidArgument if c lies within one party
// (that is LocalCount's job) or names an item no party holds.
CrossCount CrossPartyCount(const Itemset& c, const std::vector<Fragment>& parties,
                           std::uint64_t seed, const ProtocolOptions& options = {});

struct TraceRecord {
  std::size_t level = 0;
  Itemset items;
  CountMode mode = CountMode::kLocal;
  std::uint64_t count = 0;
  bool kept = false;

  // "k=<level> c=<i,j,...> mode=<local|cross> count=<n> kept=<bool>"
  std::string ToLine() const;
};

struct CparmdlOptions {
  std::uint64_t min_count = 1;
  std::uint64_t seed = 0;
  ProtocolOptions protocol;
  std::size_t workers = 0;  // 0 = hardware concurrency
};

struct CparmdlResult {
  std::vector<ItemsetCount> itemsets;  // F, by (size, lexicographic)
  std::vector<TraceRecord> trace;
  struct Transcript {
    Itemset candidate;
    ProtocolTranscript transcript;
  };
  std::vector<Transcript> transcripts;  // one per cross-party candidate
  std::vector<std::string> fragment_ids;
};

// Levelwise federated counting. L_1 holds every singleton; each later level
// joins the members of the previous level that meet min_count, keeps joins
// whose every (k-1)-subset did, and counts them locally or through the ring
// protocol depending on where their items live. F is the union of levels.
//
// Throws IntegrityError if a fragment fails its digest or the fragments do
// not form one vertical partition (mixed databases, overlapping items,
// mismatched transaction counts).
CparmdlResult RunCparmdl(const std::vector<Fragment>& fragments,
                         const CparmdlOptions& options);

void CheckPartition(const std::vector<Fragment>& fragments);

struct MergeRecord {
  Itemset removed;
  Itemset parent;
  double ratio = 0;
  double size_before = 0;
  double size_after = 0;
  bool accepted = false;
};

struct GlobalModel {
  CodeTable table;  // F'
  std::vector<std::string> source_fragments;
  std::vector<MergeRecord> audit;
  double baseline_bits = 0;  // table built from F before any merge
  double final_bits = 0;
};

inline constexpr double kDefaultTheta = 0.5;

// Builds one code table from F (all singletons kept), then for every
// multi-item entry X, in cover order, with a strict superset Y in the table
// such that count(Y) / count(X) >= theta: drops X so its transactions are
// re-covered, Y being the preferred parent (highest usage, then highest
// count, then lexicographic). A drop is kept only if the total encoded size
// on joined does not grow.
GlobalModel PruningMerging(const std::vector<ItemsetCount>& itemsets,
                           const TransactionDatabase& joined, double theta);

// Per-fragment code tables are concatenated (duplicates merged) first.
GlobalModel PruningMerging(const std::vector<CodeTable>& tables,
                           const TransactionDatabase& joined, double theta);

std::string FormatItemsets(const std::vector<ItemsetCount>& itemsets);

}  // namespace fedmdl

#endif  // FEDMDL_CPARMDL_H_
