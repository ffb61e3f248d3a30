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

#include <random>
#include <set>

#include "doctest.h"
#include "fedmdl/error.h"
#include "oracles.h"

namespace fedmdl {
namespace {

const char* kSample = "2 1 5 3\n2 3\n1 4\n3 1 5\n2 1 3\n2 4\n";

TEST_CASE("parse the sample horizontal layout") {
  const TransactionDatabase db = ParseTransactionDb(kSample);
  CHECK(db.size() == 6);
  CHECK(db.alphabet() == Itemset{1, 2, 3, 4, 5});
  CHECK(db.ItemOccurrences() == 16);
  CHECK(db.transaction(1) == Itemset{1, 2, 3, 5});
  CHECK_THROWS_AS(db.transaction(0), InvalidArgument);
  CHECK_THROWS_AS(db.transaction(7), InvalidArgument);
}

TEST_CASE("vertical layout of the sample db") {
  const VerticalIndex v = ToVertical(ParseTransactionDb(kSample));
  CHECK(v.tidsets.at(1) == TidList{1, 3, 4, 5});
  CHECK(v.tidsets.at(2) == TidList{1, 2, 5, 6});
  CHECK(v.tidsets.at(3) == TidList{1, 2, 4, 5});
  CHECK(v.tidsets.at(4) == TidList{3, 6});
  CHECK(v.tidsets.at(5) == TidList{1, 4});
}

TEST_CASE("parse errors carry line numbers") {
  try {
    ParseTransactionDb("1 2\n3 x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(ParseTransactionDb("1 1\n"), ParseError);
  CHECK_THROWS_AS(ParseTransactionDb("-1\n"), ParseError);
}

TEST_CASE("empty input and blank lines") {
  CHECK(ParseTransactionDb("").size() == 0);
  const auto db = ParseTransactionDb("1\n\n2\n");
  CHECK(db.size() == 3);
  CHECK(db.transaction(2).empty());
}

TEST_CASE("horizontal/vertical round trip on random databases") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto db = testing::RandomDb(rng, 40, 12);
    CHECK(ToHorizontal(ToVertical(db), db.size()) == db);
    CHECK(ParseTransactionDb(FormatTransactionDb(db)) == db);
  }
}

TEST_CASE("to_horizontal rejects out-of-range tids") {
  VerticalIndex v;
  v.tidsets[1] = {1, 4};
  CHECK_THROWS_AS(ToHorizontal(v, 3), InvalidArgument);
}

TEST_CASE("horizontal partition") {
  const auto db = ParseTransactionDb(kSample);
  auto parts = PartitionHorizontal(db, 4);
  REQUIRE(parts.size() == 4);
  CHECK(parts[0].size() == 2);
  CHECK(parts[1].size() == 2);
  CHECK(parts[2].size() == 1);
  CHECK(parts[3].size() == 1);
  std::vector<Itemset> rows;
  for (const auto& p : parts) {
    for (const auto& t : p.transactions()) rows.push_back(t);
  }
  CHECK(TransactionDatabase(rows) == db);
  CHECK(PartitionHorizontal(db, 1).front() == db);
  CHECK_THROWS_AS(PartitionHorizontal(db, 7), InvalidArgument);
  CHECK_THROWS_AS(PartitionHorizontal(db, 0), InvalidArgument);
  CHECK(PartitionHorizontal(TransactionDatabase{}, 1).size() == 1);
}

TEST_CASE("item bitmaps agree with brute-force tids") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto db = testing::RandomDb(rng, 150, 10);
    for (const auto& [item, bm] : ItemBitmaps(db)) {
      CHECK(bm.ToTids() == testing::BruteTids(db, Itemset{item}));
    }
  }
}

}  // namespace
}  // namespace fedmdl
