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

#include <cmath>
#include <random>

#include "doctest.h"
#include "fedmdl/error.h"
#include "oracles.h"

namespace fedmdl {
namespace {

const TransactionDatabase& Sample() {
  static const TransactionDatabase db = ParseTransactionDb("2 1 5 3\n2 3\n1 4\n3 1 5\n2 1 3\n2 4\n");
  return db;
}

double KraftSum(const CodeTable& ct) {
  double s = 0;
  for (std::size_t i = 0; i < ct.size(); ++i) {
    if (auto len = ct.CodeLength(i)) s += std::exp2(-*len);
  }
  return s;
}

// Values frozen from tests/oracles/krimp_oracle.py.
TEST_CASE("singleton baseline on the sample db") {
  const CodeTable st = SingletonTable(Sample());
  const EncodedSize s = TotalEncodedSize(Sample(), st);
  CHECK(s.data_bits == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(s.model_bits == doctest::Approx(24.0).epsilon(1e-12));
  CHECK(st.NonSingletonCount() == 0);
  CHECK(*st.CodeLength(*st.Find(Itemset{1})) == doctest::Approx(2.0));
  CHECK(*st.CodeLength(*st.Find(Itemset{4})) == doctest::Approx(3.0));
}

TEST_CASE("candidates at min_count 3 in candidate order") {
  const CandidateSet c = MineCandidates(Sample(), 3);
  REQUIRE(c.size() == 5);
  CHECK(c[0].items == Itemset{1});
  CHECK(c[1].items == Itemset{2});
  CHECK(c[2].items == Itemset{3});
  CHECK(c[3].items == Itemset{1, 3});
  CHECK(c[3].support == 3);
  CHECK(c[4].items == Itemset{2, 3});
}

TEST_CASE("KRIMP trace on the sample db at min_count 2") {
  const KrimpResult r = KrimpCompressTraced(Sample(), 2);
  struct Expect {
    Itemset items;
    bool accepted;
    double size;
  };
  const std::vector<Expect> want{
      {{1, 3}, false, 63.96850464179613},   {{2, 3}, false, 63.96850464179613},
      {{1, 2, 3}, false, 64.5293250129808}, {{1, 3, 5}, true, 54.94436251225965},
      {{1, 2}, false, 63.47048751394942},   {{1, 5}, false, 54.94436251225965},
      {{3, 5}, false, 54.94436251225965}};
  REQUIRE(r.trace.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CAPTURE(i);
    CHECK(r.trace[i].candidate == want[i].items);
    CHECK(r.trace[i].accepted == want[i].accepted);
    CHECK(r.trace[i].size_with_candidate == doctest::Approx(want[i].size).epsilon(1e-12));
  }
  CHECK(r.baseline_bits == doctest::Approx(60.0));
  CHECK(r.final_bits == doctest::Approx(54.94436251225965).epsilon(1e-12));
  const CodeTable& ct = r.table;
  REQUIRE(ct.size() == 6);
  CHECK(ct[0].items == Itemset{1, 3, 5});
  CHECK(ct[0].usage == 2);
  const std::vector<std::pair<Item, std::uint64_t>> singles{{1, 2}, {2, 4}, {3, 2}, {4, 2}, {5, 0}};
  for (auto [item, usage] : singles) CHECK(ct[*ct.Find(Itemset{item})].usage == usage);
  CHECK_FALSE(ct.CodeLength(*ct.Find(Itemset{5})).has_value());
}

TEST_CASE("KRIMP at min_count 3 keeps the singleton table") {
  const KrimpResult r = KrimpCompressTraced(Sample(), 3);
  CHECK(r.final_bits == doctest::Approx(60.0));
  CHECK(r.table.NonSingletonCount() == 0);
  REQUIRE(r.trace.size() == 2);
  CHECK_FALSE(r.trace[0].accepted);
  CHECK_FALSE(r.trace[1].accepted);
}

TEST_CASE("cover uses the code table order") {
  const CodeTable ct = KrimpCompress(Sample(), 2);
  CHECK(Cover(Itemset{1, 2, 3, 5}, ct) == std::vector<Itemset>{{1, 3, 5}, {2}});
  CHECK(Cover(Itemset{}, ct).empty());
  CHECK_THROWS_AS(Cover(Itemset{9}, ct), InvalidArgument);
}

TEST_CASE("code table text") {
  const std::string text = KrimpCompress(Sample(), 2).ToText();
  CHECK(text.find("1 3 5 | usage=2 | bits=") == 0);
  CHECK(text.find("--\n") != std::string::npos);
  CHECK(text.find("5 | usage=0 | bits=none") != std::string::npos);
}

TEST_CASE("KRIMP matches the brute-force replay on small random databases") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 150; ++rep) {
    const auto db = testing::RandomDb(rng, 8, 5, 0.5);
    if (db.alphabet().empty()) continue;
    for (std::uint64_t mc : {1, 2}) {
      const KrimpResult r = KrimpCompressTraced(db, mc);
      const auto o = testing::OracleKrimpRun(db, mc);
      REQUIRE(r.trace.size() == o.trace.size());
      for (std::size_t i = 0; i < o.trace.size(); ++i) {
        CHECK(r.trace[i].candidate == o.trace[i].candidate);
        CHECK(r.trace[i].accepted == o.trace[i].accepted);
        CHECK(r.trace[i].size_with_candidate == doctest::Approx(o.trace[i].size).epsilon(1e-9));
      }
      CHECK(r.final_bits == doctest::Approx(o.final_size).epsilon(1e-9));
    }
  }
}

TEST_CASE("Kraft sum, baseline bound and cover partition on random databases") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const auto db = testing::RandomDb(rng, 60, 9);
    if (db.alphabet().empty()) continue;
    const KrimpResult r = KrimpCompressTraced(db, 2);
    CHECK(std::abs(KraftSum(r.table) - 1.0) <= 1e-9);
    CHECK(r.final_bits <= r.baseline_bits + 1e-9);
    CHECK(TotalEncodedSize(db, r.table).total() == doctest::Approx(r.final_bits));
    for (const auto& t : db.transactions()) {
      Itemset acc;
      for (const auto& part : Cover(t, r.table)) {
        CHECK_FALSE(acc.Intersects(part));
        acc = acc.Union(part);
      }
      CHECK(acc == t);
    }
  }
}

TEST_CASE("directed placement slots") {
  CHECK(PlacementSlot(1, 4, 4) == 1);
  CHECK(PlacementSlot(2, 4, 4) == 2);
  CHECK(PlacementSlot(4, 4, 4) == 4);
  CHECK(PlacementSlot(1, 2, 1) == 1);
  CHECK(PlacementSlot(1, 3, 2) == 1);  // 2/3 rounds to 1
  CHECK(PlacementSlot(2, 3, 2) == 1);  // 4/3 rounds to 1
  CHECK(PlacementSlot(3, 3, 2) == 2);
  CHECK(PlacementSlot(1, 4, 2) == 1);  // 0.5 rounds half up to 1
}

TEST_CASE("directed placement variants") {
  const CodeTable ct = KrimpCompress(Sample(), 2);
  const Candidate f{Itemset{2, 3}, 3};
  const auto variants = DirectedPlacement(Sample(), ct, f, 2);
  REQUIRE(variants.size() == 2);
  CHECK(variants[0][0].items == Itemset{2, 3});
  CHECK(variants[1][1].items == Itemset{2, 3});
  for (const auto& v : variants) {
    CHECK(v.size() == ct.size() + 1);
    CHECK(std::abs(KraftSum(v) - 1.0) <= 1e-9);
  }
}

TEST_CASE("empty database") {
  const TransactionDatabase empty;
  const KrimpResult r = KrimpCompressTraced(empty, 1);
  CHECK(r.table.size() == 0);
  CHECK(r.final_bits == 0.0);
}

}  // namespace
}  // namespace fedmdl
