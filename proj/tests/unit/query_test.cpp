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
#include "fedmdl/query.h"

#include <random>

#include "doctest.h"
#include "fedmdl/cparmdl.h"
#include "fedmdl/error.h"
#include "oracles.h"

namespace fedmdl {
namespace {

const TransactionDatabase& Sample() {
  static const TransactionDatabase db = ParseTransactionDb("2 1 5 3\n2 3\n1 4\n3 1 5\n2 1 3\n2 4\n");
  return db;
}

QueryCatalog SampleCatalog(std::uint64_t min_count = 3) {
  auto frags = PartitionVertical(Sample(), BlockAssignment(Sample().alphabet(), 2), "d1");
  CparmdlOptions opts;
  opts.min_count = min_count;
  opts.seed = 5;
  GlobalModel g = PruningMerging(RunCparmdl(frags, opts).itemsets, Sample(), kDefaultTheta);
  QueryCatalog c;
  c["d1"] = QueryDatabase{std::move(frags), g.table};
  return c;
}

TEST_CASE("parse select") {
  const QueryAst a = ParseQuery("SELECT * FROM d1 WHERE HAS 1 AND HAS 3");
  CHECK(a.op == QueryOp::kSelect);
  CHECK(a.predicate == Itemset{1, 3});
  CHECK(a.mode == QueryMode::kModel);
  CHECK_FALSE(a.attributes.has_value());
  CHECK(a.databases == std::vector<std::string>{"d1"});
}

TEST_CASE("parse is case-insensitive on keywords") {
  const QueryAst a = ParseQuery("select 1, 3 from D1 where has 2 mode EXACT");
  CHECK(a.op == QueryOp::kProject);
  CHECK(a.attributes == Itemset{1, 3});
  CHECK(a.mode == QueryMode::kExact);
  CHECK(a.databases.front() == "D1");
}

TEST_CASE("parse topk and join") {
  const QueryAst t = ParseQuery("TOPK 5 ITEMSETS FROM d1");
  CHECK(t.op == QueryOp::kTopK);
  CHECK(t.k == 5);
  const QueryAst j = ParseQuery("SELECT * FROM a JOIN b ON id WHERE HAS 1");
  CHECK(j.op == QueryOp::kJoin);
  CHECK(j.databases == std::vector<std::string>{"a", "b"});
}

TEST_CASE("syntax errors report the token position") {
  auto pos = [](const char* q) -> std::size_t {
    try {
      ParseQuery(q);
    } catch (const QuerySyntaxError& e) {
      return e.position();
    }
    return 0;
  };
  CHECK(pos("SELECT FROM") == 2);
  CHECK(pos("DELETE * FROM d") == 1);
  CHECK(pos("SELECT * FROM d WHERE 1") == 6);
  CHECK(pos("SELECT * FROM d WHERE HAS") == 7);
  CHECK(pos("SELECT * FROM d MODE fast") == 6);
  CHECK(pos("SELECT * FROM d extra") == 5);
  CHECK(pos("TOPK 0 ITEMSETS FROM d") == 2);
  CHECK(pos("SELECT * FROM where") == 4);
  CHECK(pos("") == 1);
  const std::set<std::string> known{"d1"};
  CHECK_THROWS_AS(ParseQuery("SELECT * FROM d2", &known), QuerySyntaxError);
  CHECK_NOTHROW(ParseQuery("SELECT * FROM d1", &known));
}

TEST_CASE("support estimates on the sample model") {
  const auto cat = SampleCatalog();
  const CodeTable& ct = cat.at("d1").model;
  const SupportEstimate one = EstimateSupport(Itemset{1}, ct);
  CHECK(one.count == 4);
  CHECK_FALSE(one.approximate);
  CHECK(EstimateSupport(Itemset{}, ct).count == 6);
  REQUIRE(ct.Find(Itemset{1, 3}).has_value());
  CHECK(EstimateSupport(Itemset{1, 3}, ct).count == 3);
  const SupportEstimate absent = EstimateSupport(Itemset{1, 2}, ct);
  CHECK(absent.approximate);
  CHECK(absent.count >= absent.lower_bound);
  CHECK(absent.count == 2);  // floor(6 * 4/6 * 4/6) = 2
  CHECK_THROWS_AS(EstimateSupport(Itemset{9}, ct), InvalidArgument);
}

TEST_CASE("exact select on the sample db") {
  const auto cat = SampleCatalog();
  const QueryResult r = ExecuteQuery(ParseQuery("SELECT * FROM d1 WHERE HAS 1 AND HAS 3 MODE exact"), cat);
  CHECK(r.count == 3);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].tid == 1);
  CHECK(r.rows[1].tid == 4);
  CHECK(r.rows[2].tid == 5);
  // Items 1 and 3 live at one party: no protocol run.
  CHECK_FALSE(r.transcript.has_value());
  for (const auto& row : r.rows) {
    Itemset acc;
    for (auto s : row.symbols) acc = acc.Union(r.symbols.at(s));
    CHECK(acc == Sample().transaction(row.tid));
  }
}

TEST_CASE("exact select spanning parties uses the secure count") {
  const QueryResult r = ExecuteQuery(ParseQuery("SELECT * FROM d1 WHERE HAS 1 AND HAS 5 MODE exact"),
                                     SampleCatalog());
  CHECK(r.count == 2);
  REQUIRE(r.transcript.has_value());
  CHECK(r.transcript->count == 2);
  CHECK_FALSE(r.approximate);
}

TEST_CASE("topk is ordered by support then lexicographically") {
  const QueryResult r = ExecuteQuery(ParseQuery("TOPK 3 ITEMSETS FROM d1"), SampleCatalog());
  REQUIRE(r.ranking.size() == 3);
  CHECK(r.ranking[0].items == Itemset{1});
  CHECK(r.ranking[1].items == Itemset{2});
  CHECK(r.ranking[2].items == Itemset{3});
  CHECK(r.ranking[2].support == 4);
  CHECK(ExecuteQuery(ParseQuery("TOPK 100 ITEMSETS FROM d1"), SampleCatalog()).ranking.size() ==
        SampleCatalog().at("d1").model.size());
}

TEST_CASE("self join pairs every object with itself once") {
  const auto cat = SampleCatalog();
  const QueryResult r = ExecuteQuery(ParseQuery("SELECT * FROM d1 JOIN d1 ON id MODE exact"), cat);
  REQUIRE(r.rows.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(r.rows[i].tid == i + 1);
  CHECK_THROWS_AS(ExecuteQuery(ParseQuery("SELECT * FROM d1 JOIN d1 ON id"), cat), ModelInsufficient);
}

TEST_CASE("projection restricts the symbol-coded rows") {
  const QueryResult r = ExecuteQuery(ParseQuery("SELECT 4 FROM d1 WHERE HAS 2 MODE exact"), SampleCatalog());
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) {
    Itemset acc;
    for (auto s : row.symbols) acc = acc.Union(r.symbols.at(s));
    CHECK(acc == Sample().transaction(row.tid).Intersect(Itemset{4}));
  }
}

TEST_CASE("model mode signals insufficiency and unknown inputs fail") {
  const auto cat = SampleCatalog();
  CHECK_THROWS_AS(ExecuteQuery(ParseQuery("SELECT * FROM d1 WHERE HAS 9"), cat), ModelInsufficient);
  CHECK_THROWS_AS(ExecuteQuery(ParseQuery("SELECT * FROM d1 WHERE HAS 9 MODE exact"), cat),
                  InvalidArgument);
  CHECK_THROWS_AS(ExecuteQuery(ParseQuery("SELECT * FROM zz"), cat), InvalidArgument);
  const QueryResult m = ExecuteQuery(ParseQuery("SELECT * FROM d1 WHERE HAS 1"), cat);
  CHECK(m.count == 4);
  CHECK(m.rows.empty());
}

TEST_CASE("model-mode soundness against exact supports") {
  std::mt19937_64 rng(51);
  for (int rep = 0; rep < 40; ++rep) {
    const auto db = testing::RandomDb(rng, 50, 7, 0.5);
    if (db.alphabet().size() < 2) continue;
    auto frags = PartitionVertical(db, BlockAssignment(db.alphabet(), 2), "r");
    CparmdlOptions opts;
    opts.min_count = 2;
    opts.seed = rng();
    const CodeTable ct = PruningMerging(RunCparmdl(frags, opts).itemsets, db, 0.5).table;
    for (const auto& [x, support] : testing::BruteFrequent(db, 1)) {
      const SupportEstimate e = EstimateSupport(x, ct);
      if (ct.Find(x)) {
        CHECK(e.count == support);
        CHECK_FALSE(e.approximate);
      } else {
        CHECK(e.approximate);
        CHECK(e.count >= e.lower_bound);
        CHECK(e.lower_bound <= support);
      }
    }
  }
}

TEST_CASE("answer envelope round trip, wrong key and tampering") {
  const auto cat = SampleCatalog();
  const QueryResult r = ExecuteQuery(ParseQuery("SELECT * FROM d1 WHERE HAS 2 MODE exact"), cat);
  const UserKey key = KeyFromSeed(1);
  const SealedAnswer sealed = EncryptAnswer(r, key, 3);
  CHECK(DecryptAnswer(sealed, key) == r);
  CHECK(DecryptAnswer(SealedAnswer::FromBase64(sealed.ToBase64()), key) == r);
  CHECK_THROWS_AS(DecryptAnswer(sealed, KeyFromSeed(2)), AuthError);
  auto wire = sealed.ToWire();
  for (std::size_t i = 0; i < wire.size(); ++i) {
    auto bad = wire;
    bad[i] ^= 0x01;
    CHECK_THROWS_AS(DecryptAnswer(SealedAnswer::FromWire(bad), key), AuthError);
  }
  CHECK_THROWS_AS(SealedAnswer::FromWire({1, 2, 3}), AuthError);
  CHECK_THROWS_AS(SealedAnswer::FromBase64("!!!!"), AuthError);
  CHECK(EncryptAnswer(r, key, 3).ToWire() == wire);
}

TEST_CASE("base64 and keys") {
  CHECK(Base64Encode({}) == "");
  CHECK(Base64Encode({'f'}) == "Zg==");
  CHECK(Base64Encode({'f', 'o'}) == "Zm8=");
  CHECK(Base64Encode({'f', 'o', 'o'}) == "Zm9v");
  for (std::size_t n = 0; n < 20; ++n) {
    std::vector<std::uint8_t> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(i * 37);
    CHECK(Base64Decode(Base64Encode(b)) == b);
  }
  CHECK_THROWS_AS(Base64Decode("abc"), ParseError);
  const UserKey k = KeyFromSeed(4);
  CHECK(ParseKey(" " + FormatKey(k) + "\n") == k);
  CHECK_THROWS_AS(ParseKey("abc"), ParseError);
}

TEST_CASE("sealed answers carry no plaintext item identifiers") {
  // Items with sentinel byte patterns must not appear in the envelope.
  const Item sentinel_a = 0x5A5A5A5A;
  const Item sentinel_b = 0x3C3C3C3C;
  const auto db = TransactionDatabase({Itemset{sentinel_a, sentinel_b}, Itemset{sentinel_a}});
  auto frags = PartitionVertical(db, BlockAssignment(db.alphabet(), 2), "s");
  CparmdlOptions opts;
  QueryCatalog cat;
  cat["s"] = QueryDatabase{frags, PruningMerging(RunCparmdl(frags, opts).itemsets, db, 0.5).table};
  const QueryResult r = ExecuteQuery(ParseQuery("SELECT * FROM s MODE exact"), cat);
  const SealedAnswer sealed = EncryptAnswer(r, KeyFromSeed(9), 1);
  const auto wire = sealed.ToWire();
  const std::string bytes(wire.begin(), wire.end());
  for (Item s : {sentinel_a, sentinel_b}) {
    CHECK(bytes.find(std::to_string(s)) == std::string::npos);
    const char raw[4] = {static_cast<char>(s & 0xFF), static_cast<char>(s >> 8 & 0xFF),
                         static_cast<char>(s >> 16 & 0xFF), static_cast<char>(s >> 24)};
    CHECK(bytes.find(std::string(raw, 4)) == std::string::npos);
  }
  CHECK(SerializeResult(r).find(std::to_string(sentinel_a)) != std::string::npos);
}

TEST_CASE("result rendering") {
  const auto cat = SampleCatalog();
  const std::string csv = FormatResult(
      ExecuteQuery(ParseQuery("SELECT * FROM d1 WHERE HAS 1 AND HAS 3 MODE exact"), cat));
  CHECK(csv.rfind("tid,symbols\n1,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(FormatResult(ExecuteQuery(ParseQuery("SELECT * FROM d1 WHERE HAS 1"), cat)) ==
        "count=4 approximate=false\n");
  CHECK(FormatResult(ExecuteQuery(ParseQuery("TOPK 2 ITEMSETS FROM d1"), cat)) ==
        "1 | support=4\n2 | support=4\n");
}

}  // namespace
}  // namespace fedmdl
