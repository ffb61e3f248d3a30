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
#include "fedmdl/anonymize.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fedmdl/error.h"

namespace fedmdl {
namespace {

constexpr long kBinWidth = 5;

long ParseInteger(const std::string& value) {
  long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("numeric quasi-identifier holds '" + value + "'");
  }
  return out;
}

long FloorDiv(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::vector<std::vector<std::string>> ParseCsvRows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
      ++line;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line);
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

RelationSchema::RelationSchema(std::vector<std::string> objects,
                               std::vector<std::string> attributes,
                               std::vector<std::vector<std::string>> values)
    : objects_(std::move(objects)),
      attributes_(std::move(attributes)),
      values_(std::move(values)) {
  if (values_.size() != attributes_.size()) {
    throw InvalidArgument("one valuation per attribute required");
  }
  std::set<std::string> seen;
  for (const auto& a : attributes_) {
    if (!seen.insert(a).second) throw InvalidArgument("duplicate attribute " + a);
  }
  for (const auto& column : values_) {
    if (column.size() != objects_.size()) {
      throw InvalidArgument("valuation is not total over the objects");
    }
  }
}

std::size_t RelationSchema::AttributeIndex(std::string_view name) const {
  auto it = std::find(attributes_.begin(), attributes_.end(), name);
  if (it == attributes_.end()) {
    throw InvalidArgument("unknown attribute " + std::string(name));
  }
  return static_cast<std::size_t>(it - attributes_.begin());
}

RelationSchema ParseRelationCsv(std::string_view text) {
  auto rows = ParseCsvRows(text);
  if (rows.empty()) throw ParseError("missing header row", 1);
  const auto& header = rows[0];
  if (header.size() < 1) throw ParseError("empty header", 1);
  std::vector<std::string> attributes(header.begin() + 1, header.end());
  std::vector<std::string> objects;
  std::vector<std::vector<std::string>> values(attributes.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields",
                       r + 1);
    }
    objects.push_back(rows[r][0]);
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      values[a].push_back(rows[r][a + 1]);
    }
  }
  return RelationSchema(std::move(objects), std::move(attributes), std::move(values));
}

RelationSchema LoadRelationCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseRelationCsv(buffer.str());
}

int MaxLevel(const std::string& value, Generalization kind) {
  return kind == Generalization::kCode ? static_cast<int>(value.size()) : 2;
}

std::string GeneralizeValue(const std::string& value, Generalization kind,
                            int level) {
  if (level <= 0) return value;
  if (kind == Generalization::kCode) {
    std::size_t masked = std::min<std::size_t>(static_cast<std::size_t>(level), value.size());
    return value.substr(0, value.size() - masked) + std::string(masked, '*');
  }
  if (level >= 2) return "*";
  long lo = FloorDiv(ParseInteger(value), kBinWidth) * kBinWidth;
  return "[" + std::to_string(lo) + "," + std::to_string(lo + kBinWidth) + "]";
}

AnonymizedTable KAnonymize(const RelationSchema& table,
                           const std::map<std::string, Generalization>& quasi_ids,
                           std::size_t k) {
  const std::size_t n = table.objects().size();
  if (k == 0) throw InvalidArgument("k must be at least 1");
  if (k > n) {
    throw InvalidArgument("cannot make " + std::to_string(n) +
                          " rows " + std::to_string(k) + "-anonymous");
  }
  struct Qi {
    std::size_t column;
    Generalization kind;
  };
  // Deterministic order: attribute order of the table.
  std::vector<Qi> qis;
  for (const auto& [name, kind] : quasi_ids) {
    qis.push_back({table.AttributeIndex(name), kind});
  }
  std::sort(qis.begin(), qis.end(),
            [](const Qi& a, const Qi& b) { return a.column < b.column; });
  for (const auto& q : qis) {
    if (q.kind == Generalization::kNumeric) {
      for (std::size_t r = 0; r < n; ++r) ParseInteger(table.Value(r, q.column));
    }
  }

  std::vector<std::vector<int>> level(n, std::vector<int>(qis.size(), 0));
  auto cell = [&](std::size_t r, std::size_t q) {
    return GeneralizeValue(table.Value(r, qis[q].column), qis[q].kind, level[r][q]);
  };
  auto key = [&](std::size_t r) {
    std::vector<std::string> out;
    for (std::size_t q = 0; q < qis.size(); ++q) out.push_back(cell(r, q));
    return out;
  };

  std::vector<bool> frozen(n, false);
  bool reopened = false;
  while (true) {
    std::map<std::vector<std::string>, std::vector<std::size_t>> classes;
    for (std::size_t r = 0; r < n; ++r) classes[key(r)].push_back(r);
    bool all_done = true;
    for (const auto& [_, members] : classes) {
      if (members.size() >= k) {
        if (!reopened) {
          for (std::size_t r : members) frozen[r] = true;
        }
      } else {
        all_done = false;
      }
    }
    if (all_done) break;

    // Attribute with the most distinct values among open rows that can
    // still be raised.
    std::size_t best = qis.size();
    std::size_t best_distinct = 0;
    for (std::size_t q = 0; q < qis.size(); ++q) {
      std::set<std::string> distinct;
      bool raisable = false;
      for (std::size_t r = 0; r < n; ++r) {
        if (frozen[r]) continue;
        distinct.insert(cell(r, q));
        if (level[r][q] < MaxLevel(table.Value(r, qis[q].column), qis[q].kind)) {
          raisable = true;
        }
      }
      if (raisable && distinct.size() > best_distinct) {
        best = q;
        best_distinct = distinct.size();
      }
    }
    if (best == qis.size()) {
      // Open rows are fully generalized yet still too few: from here on
      // every row widens together until the stragglers are absorbed.
      if (reopened) {
        throw InvalidArgument("quasi-identifier hierarchies cannot reach k");
      }
      reopened = true;
      std::fill(frozen.begin(), frozen.end(), false);
      continue;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (frozen[r]) continue;
      int cap = MaxLevel(table.Value(r, qis[best].column), qis[best].kind);
      level[r][best] = std::min(level[r][best] + 1, cap);
    }
  }

  AnonymizedTable out;
  out.k = k;
  out.attributes = table.attributes();
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::string> row;
    for (std::size_t a = 0; a < table.attributes().size(); ++a) {
      row.push_back(table.Value(r, a));
    }
    for (std::size_t q = 0; q < qis.size(); ++q) row[qis[q].column] = cell(r, q);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string FormatAnonymizedCsv(const AnonymizedTable& table) {
  std::string out;
  for (std::size_t a = 0; a < table.attributes.size(); ++a) {
    if (a) out += ',';
    out += CsvField(table.attributes[a]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (a) out += ',';
      out += CsvField(row[a]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace fedmdl
