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
#ifndef FEDMDL_QUERY_H_
#define FEDMDL_QUERY_H_

// Query language over the global model or, in exact mode, the fragments:
//
//   SELECT <*|item[,item]*> FROM <db> [JOIN <db2> ON id]
//       [WHERE HAS <item> [AND HAS <item>]*] [MODE model|exact]
//   TOPK <k> ITEMSETS FROM <db>
//
// Keywords are case-insensitive. Answers are symbol-coded: a row lists the
// ids of the code-table entries covering it, and the id -> itemset table
// travels inside the same encrypted envelope.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fedmdl/answer_crypto.h"
#include "fedmdl/fragment.h"
#include "fedmdl/krimp.h"
#include "fedmdl/protocol.h"

namespace fedmdl {

enum class QueryOp { kSelect, kProject, kJoin, kTopK };
enum class QueryMode { kModel, kExact };

std::string_view QueryOpName(QueryOp op);
std::string_view QueryModeName(QueryMode mode);

struct QueryAst {
  QueryOp op = QueryOp::kSelect;
  std::vector<std::string> databases;  // one, or two for a join
  Itemset predicate;                   // conjunction of HAS terms
  std::optional<Itemset> attributes;   // nullopt for *
  std::size_t k = 0;                   // topk only
  QueryMode mode = QueryMode::kModel;

  friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

// Throws QuerySyntaxError (1-based token position). With known_databases
// set, an unknown database name is reported at its token too.
QueryAst ParseQuery(std::string_view text,
                    const std::set<std::string>* known_databases = nullptr);

struct SupportEstimate {
  std::uint64_t count = 0;
  std::uint64_t lower_bound = 0;  // summed usage of entries containing x
  bool approximate = false;
};

// Exact when x is an entry (its tracked support) or empty (|D|). Otherwise
// max(lower bound, floor of the independence estimate from singleton
// supports), flagged approximate. Throws InvalidArgument on an item outside
// the table's alphabet.
SupportEstimate EstimateSupport(const Itemset& x, const CodeTable& ct);

struct QueryDatabase {
  std::vector<Fragment> fragments;  // needed for exact mode
  CodeTable model;                  // F'
};
using QueryCatalog = std::map<std::string, QueryDatabase>;

struct QueryOptions {
  std::uint64_t seed = 0;
  ProtocolOptions protocol;
};

struct QueryRow {
  Tid tid = 0;
  std::vector<std::size_t> symbols;
  friend bool operator==(const QueryRow&, const QueryRow&) = default;
};

struct RankedItemset {
  Itemset items;
  std::uint64_t support = 0;
  friend bool operator==(const RankedItemset&, const RankedItemset&) = default;
};

struct QueryResult {
  QueryOp op = QueryOp::kSelect;
  QueryMode mode = QueryMode::kModel;
  std::uint64_t count = 0;
  bool approximate = false;
  std::vector<QueryRow> rows;          // exact select / project / join
  std::vector<RankedItemset> ranking;  // topk
  std::vector<Itemset> symbols;        // symbol id -> itemset
  // Transcript of the secure count, when the predicate spans parties.
  std::optional<ProtocolTranscript> transcript;

  friend bool operator==(const QueryResult& a, const QueryResult& b) {
    return a.op == b.op && a.mode == b.mode && a.count == b.count &&
           a.approximate == b.approximate && a.rows == b.rows && a.ranking == b.ranking &&
           a.symbols == b.symbols;
  }
};

// Throws InvalidArgument for unknown databases or items, ModelInsufficient
// when model mode cannot answer (join, or items the model does not know).
QueryResult ExecuteQuery(const QueryAst& ast, const QueryCatalog& catalog,
                         const QueryOptions& options = {});

// Text the envelope carries (transcript excluded) and its inverse.
std::string SerializeResult(const QueryResult& r);
QueryResult DeserializeResult(std::string_view text);

SealedAnswer EncryptAnswer(const QueryResult& r, const UserKey& key, std::uint64_t seed);
QueryResult DecryptAnswer(const SealedAnswer& answer, const UserKey& key);

// Human-facing rendering: "tid,symbols" CSV for row answers, one
// "<items> support=<n>" line per topk entry, "count=<n> approximate=<bool>"
// for model-mode counts.
std::string FormatResult(const QueryResult& r);
// "<id>: <items>" per symbol.
std::string FormatSymbols(const QueryResult& r);

}  // namespace fedmdl

#endif  // FEDMDL_QUERY_H_
