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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "fedmdl/cparmdl.h"
#include "fedmdl/error.h"
#include "fedmdl/tid_bitmap.h"

namespace fedmdl {
namespace {

using nlohmann::json;

struct Token {
  std::string text;
  std::size_t position;  // 1-based
};

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back({cur, out.size() + 1});
      cur.clear();
    }
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == ',') {
      flush();
      out.push_back({",", out.size() + 1});
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

std::string Upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const std::set<std::string>* known)
      : tokens_(std::move(tokens)), known_(known) {}

  QueryAst Parse() {
    QueryAst ast;
    const std::string head = Upper(Expect("SELECT or TOPK"));
    if (head == "TOPK") {
      ast.op = QueryOp::kTopK;
      ast.k = Count("k");
      Keyword("ITEMSETS");
      Keyword("FROM");
      ast.databases.push_back(Database());
      End();
      return ast;
    }
    if (head != "SELECT") Fail("expected SELECT or TOPK", pos_ - 1);
    if (Peek() == "*") {
      ++pos_;
    } else {
      std::vector<Item> attrs{ItemToken("attribute list or *")};
      while (Peek() == ",") {
        ++pos_;
        attrs.push_back(ItemToken("attribute"));
      }
      ast.attributes = Dedupe(std::move(attrs));
      ast.op = QueryOp::kProject;
    }
    Keyword("FROM");
    ast.databases.push_back(Database());
    if (PeekKeyword("JOIN")) {
      ++pos_;
      ast.databases.push_back(Database());
      Keyword("ON");
      Keyword("ID");
      ast.op = QueryOp::kJoin;
    }
    if (PeekKeyword("WHERE")) {
      ++pos_;
      std::vector<Item> items;
      Keyword("HAS");
      items.push_back(ItemToken("item"));
      while (PeekKeyword("AND")) {
        ++pos_;
        Keyword("HAS");
        items.push_back(ItemToken("item"));
      }
      ast.predicate = Dedupe(std::move(items));
    }
    if (PeekKeyword("MODE")) {
      ++pos_;
      const std::string mode = Upper(Expect("model or exact"));
      if (mode == "MODEL") {
        ast.mode = QueryMode::kModel;
      } else if (mode == "EXACT") {
        ast.mode = QueryMode::kExact;
      } else {
        Fail("expected model or exact", pos_ - 1);
      }
    }
    End();
    return ast;
  }

 private:
  [[noreturn]] void Fail(const std::string& what, std::size_t index) const {
    throw QuerySyntaxError(what, index + 1);
  }

  std::string Peek() const { return pos_ < tokens_.size() ? tokens_[pos_].text : ""; }
  bool PeekKeyword(const char* kw) const { return Upper(Peek()) == kw; }

  const std::string& Expect(const std::string& what) {
    if (pos_ >= tokens_.size()) Fail("expected " + what + ", found end of query", pos_);
    return tokens_[pos_++].text;
  }

  void Keyword(const char* kw) {
    const std::string& t = Expect(kw);
    if (Upper(t) != kw) Fail(std::string("expected ") + kw + ", found '" + t + "'", pos_ - 1);
  }

  std::uint64_t Number(const std::string& what, std::uint64_t max) {
    const std::string& t = Expect(what);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v > max) {
      Fail("expected " + what + ", found '" + t + "'", pos_ - 1);
    }
    return v;
  }

  Item ItemToken(const std::string& what) {
    return static_cast<Item>(Number(what, std::numeric_limits<Item>::max()));
  }

  std::size_t Count(const std::string& what) {
    auto v = Number(what, std::numeric_limits<std::uint32_t>::max());
    if (v == 0) Fail(what + " must be at least 1", pos_ - 1);
    return static_cast<std::size_t>(v);
  }

  std::string Database() {
    const std::string& t = Expect("database name");
    static const std::set<std::string> kReserved = {"SELECT", "TOPK", "FROM", "JOIN",
                                                    "ON",     "WHERE", "HAS", "AND",
                                                    "MODE",   "ITEMSETS"};
    bool ok = !t.empty() && !kReserved.contains(Upper(t));
    for (char c : t) {
      ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.');
    }
    if (!ok) Fail("expected database name, found '" + t + "'", pos_ - 1);
    if (known_ != nullptr && !known_->contains(t)) Fail("unknown database " + t, pos_ - 1);
    return t;
  }

  void End() {
    if (pos_ < tokens_.size()) Fail("unexpected '" + tokens_[pos_].text + "'", pos_);
  }

  static Itemset Dedupe(std::vector<Item> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return Itemset::FromSorted(std::move(items));
  }

  std::vector<Token> tokens_;
  const std::set<std::string>* known_;
  std::size_t pos_ = 0;
};

const QueryDatabase& Lookup(const QueryCatalog& catalog, const std::string& name) {
  auto it = catalog.find(name);
  if (it == catalog.end()) throw InvalidArgument("unknown database " + name);
  return it->second;
}

std::vector<Itemset> SymbolTable(const CodeTable& ct) {
  std::vector<Itemset> out;
  for (const auto& e : ct.entries()) out.push_back(e.items);
  return out;
}

Itemset HeldItems(const std::vector<Fragment>& fragments) {
  Itemset all;
  for (const auto& f : fragments) all = all.Union(f.items);
  return all;
}

std::vector<std::size_t> Symbols(const Itemset& t, const CodeTable& ct, std::size_t offset) {
  std::vector<std::size_t> out;
  for (std::size_t idx : CoverIndices(t, ct)) out.push_back(idx + offset);
  std::sort(out.begin(), out.end());
  return out;
}

QueryResult ExactSingle(const QueryAst& ast, const QueryDatabase& db,
                        const QueryOptions& options) {
  QueryResult r;
  r.op = ast.op;
  r.mode = ast.mode;
  const Itemset held = HeldItems(db.fragments);
  Itemset needed = ast.predicate.Union(ast.attributes.value_or(Itemset{}));
  if (!needed.IsSubsetOf(held)) {
    throw InvalidArgument("unknown item in query: " + needed.Minus(held).ToString());
  }
  const std::size_t n = db.fragments.front().n_transactions;
  TidBitmap acc = TidBitmap::Full(n);
  std::size_t involved = 0;
  for (const auto& f : db.fragments) {
    Itemset mine = ast.predicate.Intersect(f.items);
    if (mine.empty()) continue;
    ++involved;
    acc &= f.Intersect(mine);
  }
  r.count = acc.Count();
  if (involved >= 2) {
    CrossCount cc = CrossPartyCount(ast.predicate, db.fragments, options.seed, options.protocol);
    r.count = cc.result.count;
    r.approximate = r.count != acc.Count();
    r.transcript = std::move(cc.transcript);
  }
  const TransactionDatabase joined = JoinFragments(db.fragments);
  for (Tid tid : acc.ToTids()) {
    Itemset t = joined.transaction(tid);
    if (ast.attributes) t = t.Intersect(*ast.attributes);
    r.rows.push_back({tid, Symbols(t, db.model, 0)});
  }
  r.symbols = SymbolTable(db.model);
  return r;
}

QueryResult ExactJoin(const QueryAst& ast, const QueryDatabase& a, const QueryDatabase& b) {
  QueryResult r;
  r.op = ast.op;
  r.mode = ast.mode;
  Itemset held = HeldItems(a.fragments).Union(HeldItems(b.fragments));
  Itemset needed = ast.predicate.Union(ast.attributes.value_or(Itemset{}));
  if (!needed.IsSubsetOf(held)) {
    throw InvalidArgument("unknown item in query: " + needed.Minus(held).ToString());
  }
  const TransactionDatabase ja = JoinFragments(a.fragments);
  const TransactionDatabase jb = JoinFragments(b.fragments);
  const std::size_t offset = a.model.size();
  const std::size_t n = std::min(ja.size(), jb.size());
  for (Tid tid = 1; tid <= n; ++tid) {
    Itemset ta = ja.transaction(tid);
    Itemset tb = jb.transaction(tid);
    if (!ast.predicate.IsSubsetOf(ta.Union(tb))) continue;
    if (ast.attributes) {
      ta = ta.Intersect(*ast.attributes);
      tb = tb.Intersect(*ast.attributes);
    }
    std::vector<std::size_t> sym = Symbols(ta, a.model, 0);
    for (std::size_t s : Symbols(tb, b.model, offset)) sym.push_back(s);
    r.rows.push_back({tid, std::move(sym)});
  }
  r.count = r.rows.size();
  r.symbols = SymbolTable(a.model);
  for (auto& s : SymbolTable(b.model)) r.symbols.push_back(std::move(s));
  return r;
}

json ItemsJson(const Itemset& s) { return json(std::vector<Item>(s.begin(), s.end())); }

Itemset ItemsFromJson(const json& j) {
  return Itemset::FromUnsorted(j.get<std::vector<Item>>());
}

}  // namespace

std::string_view QueryOpName(QueryOp op) {
  switch (op) {
    case QueryOp::kSelect:
      return "select";
    case QueryOp::kProject:
      return "project";
    case QueryOp::kJoin:
      return "join";
    case QueryOp::kTopK:
      return "topk";
  }
  return "unknown";
}

std::string_view QueryModeName(QueryMode mode) {
  return mode == QueryMode::kExact ? "exact" : "model";
}

QueryAst ParseQuery(std::string_view text, const std::set<std::string>* known_databases) {
  return Parser(Tokenize(text), known_databases).Parse();
}

SupportEstimate EstimateSupport(const Itemset& x, const CodeTable& ct) {
  const std::uint64_t n = ct.n_transactions();
  SupportEstimate est;
  if (x.empty()) {
    est.count = est.lower_bound = n;
    return est;
  }
  long double indep = static_cast<long double>(n);
  for (Item i : x) {
    auto idx = ct.Find(Itemset{i});
    if (!idx) throw InvalidArgument("item " + std::to_string(i) + " is not in the model");
    indep *= n == 0 ? 0.0L
                    : static_cast<long double>(ct[*idx].support) / static_cast<long double>(n);
  }
  for (const auto& e : ct.entries()) {
    if (x.IsSubsetOf(e.items)) est.lower_bound += e.usage;
  }
  if (auto idx = ct.Find(x)) {
    est.count = ct[*idx].support;
    return est;
  }
  const auto floor_indep = static_cast<std::uint64_t>(std::floor(indep + 1e-9L));
  est.count = std::max(est.lower_bound, floor_indep);
  est.approximate = true;
  return est;
}

QueryResult ExecuteQuery(const QueryAst& ast, const QueryCatalog& catalog,
                         const QueryOptions& options) {
  if (ast.databases.empty()) throw InvalidArgument("query names no database");
  const QueryDatabase& db = Lookup(catalog, ast.databases.front());
  if (ast.op == QueryOp::kTopK) {
    QueryResult r;
    r.op = ast.op;
    r.mode = ast.mode;
    for (const auto& e : db.model.entries()) r.ranking.push_back({e.items, e.support});
    std::sort(r.ranking.begin(), r.ranking.end(),
              [](const RankedItemset& a, const RankedItemset& b) {
                if (a.support != b.support) return a.support > b.support;
                return a.items < b.items;
              });
    if (r.ranking.size() > ast.k) r.ranking.resize(ast.k);
    r.count = r.ranking.size();
    return r;
  }
  if (ast.mode == QueryMode::kModel) {
    if (ast.op == QueryOp::kJoin) {
      throw ModelInsufficient("model insufficient: the model has no object ids to join on, rerun with MODE exact");
    }
    const Itemset needed = ast.predicate.Union(ast.attributes.value_or(Itemset{}));
    std::vector<Item> missing;
    for (Item i : needed) {
      if (!db.model.Find(Itemset{i})) missing.push_back(i);
    }
    if (!missing.empty()) {
      throw ModelInsufficient("model insufficient: no code for items " +
                              Itemset::FromSorted(std::move(missing)).ToString() +
                              ", rerun with MODE exact");
    }
    QueryResult r;
    r.op = ast.op;
    r.mode = ast.mode;
    const SupportEstimate est = EstimateSupport(ast.predicate, db.model);
    r.count = est.count;
    r.approximate = est.approximate;
    r.symbols = SymbolTable(db.model);
    return r;
  }
  if (db.fragments.empty()) {
    throw InvalidArgument("exact mode needs the fragments of " + ast.databases.front());
  }
  if (ast.op == QueryOp::kJoin) {
    const QueryDatabase& other = Lookup(catalog, ast.databases.at(1));
    if (other.fragments.empty()) {
      throw InvalidArgument("exact mode needs the fragments of " + ast.databases.at(1));
    }
    return ExactJoin(ast, db, other);
  }
  return ExactSingle(ast, db, options);
}

std::string SerializeResult(const QueryResult& r) {
  json j;
  j["op"] = std::string(QueryOpName(r.op));
  j["mode"] = std::string(QueryModeName(r.mode));
  j["count"] = r.count;
  j["approximate"] = r.approximate;
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back(json::array({row.tid, row.symbols}));
  j["rows"] = std::move(rows);
  json ranking = json::array();
  for (const auto& e : r.ranking) ranking.push_back(json::array({ItemsJson(e.items), e.support}));
  j["ranking"] = std::move(ranking);
  json symbols = json::array();
  for (const auto& s : r.symbols) symbols.push_back(ItemsJson(s));
  j["symbols"] = std::move(symbols);
  return j.dump();
}

QueryResult DeserializeResult(std::string_view text) {
  try {
    const json j = json::parse(text);
    QueryResult r;
    const std::string op = j.at("op").get<std::string>();
    bool known = false;
    for (QueryOp o : {QueryOp::kSelect, QueryOp::kProject, QueryOp::kJoin, QueryOp::kTopK}) {
      if (QueryOpName(o) == op) {
        r.op = o;
        known = true;
      }
    }
    if (!known) throw ParseError("unknown op " + op, 0);
    r.mode = j.at("mode").get<std::string>() == "exact" ? QueryMode::kExact : QueryMode::kModel;
    r.count = j.at("count").get<std::uint64_t>();
    r.approximate = j.at("approximate").get<bool>();
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at(0).get<Tid>(), row.at(1).get<std::vector<std::size_t>>()});
    }
    for (const auto& e : j.at("ranking")) {
      r.ranking.push_back({ItemsFromJson(e.at(0)), e.at(1).get<std::uint64_t>()});
    }
    for (const auto& s : j.at("symbols")) r.symbols.push_back(ItemsFromJson(s));
    for (const auto& row : r.rows) {
      for (std::size_t s : row.symbols) {
        if (s >= r.symbols.size()) throw ParseError("row references unknown symbol", 0);
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed answer: ") + e.what(), 0);
  }
}

SealedAnswer EncryptAnswer(const QueryResult& r, const UserKey& key, std::uint64_t seed) {
  const std::string plain = SerializeResult(r);
  return Seal(plain, key, DeriveNonce(seed, plain));
}

QueryResult DecryptAnswer(const SealedAnswer& answer, const UserKey& key) {
  return DeserializeResult(Open(answer, key));
}

std::string FormatResult(const QueryResult& r) {
  std::ostringstream out;
  if (r.op == QueryOp::kTopK) {
    for (const auto& e : r.ranking) out << e.items.ToString() << " | support=" << e.support << "\n";
    return out.str();
  }
  if (r.mode == QueryMode::kModel) {
    out << "count=" << r.count << " approximate=" << (r.approximate ? "true" : "false") << "\n";
    return out.str();
  }
  out << "tid,symbols\n";
  for (const auto& row : r.rows) {
    out << row.tid << ",";
    for (std::size_t i = 0; i < row.symbols.size(); ++i) {
      if (i) out << ' ';
      out << row.symbols[i];
    }
    out << "\n";
  }
  return out.str();
}

std::string FormatSymbols(const QueryResult& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.symbols.size(); ++i) {
    out << i << ": " << r.symbols[i].ToString() << "\n";
  }
  return out.str();
}

}  // namespace fedmdl
