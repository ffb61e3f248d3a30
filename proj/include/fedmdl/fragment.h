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
#ifndef FEDMDL_FRAGMENT_H_
#define FEDMDL_FRAGMENT_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fedmdl/datamodel.h"
#include "fedmdl/digest.h"
#include "fedmdl/itemset.h"
#include "fedmdl/tid_bitmap.h"

namespace fedmdl {

struct PartyId {
  std::uint32_t value = 0;
  friend auto operator<=>(const PartyId&, const PartyId&) = default;
};

// One party's vertical slice of a database.
//
// The digest binds the content (items, tidsets, transaction count) to the
// database name and fragment id. The holding party is deliberately left out:
// fragments migrate between nodes and parties without being re-hashed.
struct Fragment {
  std::string db_name;
  PartyId party;
  Itemset items;
  std::size_t n_transactions = 0;
  std::map<Item, TidList> tidsets;  // keys == items
  Digest digest{};

  // "<db>.<min item>-<max item>"; unique within a vertical partition since
  // item subsets are disjoint.
  std::string FragmentId() const;

  // Intersection of this party's tidsets for items (all must be held here).
  TidBitmap Intersect(const Itemset& items) const;

  friend bool operator==(const Fragment&, const Fragment&) = default;
};

// Canonical digest input: db name, fragment id, transaction count, then
// items ascending with their ascending tids.
Digest FragmentDigest(const Fragment& f);
bool VerifyDigest(const Fragment& f);

// One fragment per party, ordered by party id, digests filled in. Throws
// InvalidArgument if an alphabet item is unassigned or the assignment names
// an item outside the alphabet.
std::vector<Fragment> PartitionVertical(const TransactionDatabase& db,
                                        const std::map<Item, PartyId>& assignment,
                                        const std::string& db_name);

// Items split into n_parties contiguous blocks of the sorted alphabet,
// earlier parties taking the remainder. Party ids are 1..n_parties.
std::map<Item, PartyId> BlockAssignment(const Itemset& alphabet,
                                        std::size_t n_parties);

// Text form:
//   fragment <db> <party> <items...>
//   transactions <n>
//   item <id>: <tid,tid,...>
//   <digest hex>
std::string SerializeFragment(const Fragment& f);
// Parses without verifying; call VerifyDigest on the result.
Fragment ParseFragment(std::string_view text);
// Parses and verifies. Throws IntegrityError naming the fragment on mismatch.
Fragment LoadFragmentFile(const std::string& path);

// Reassembles the joined database from a vertical partition.
TransactionDatabase JoinFragments(const std::vector<Fragment>& fragments);

}  // namespace fedmdl

#endif  // FEDMDL_FRAGMENT_H_
