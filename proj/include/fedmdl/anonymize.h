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
#ifndef FEDMDL_ANONYMIZE_H_
#define FEDMDL_ANONYMIZE_H_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fedmdl {

// Relation S(X, A, F): objects X, attributes A, one total valuation per
// attribute. values[a][x] is f_a(x).
class RelationSchema {
 public:
  RelationSchema(std::vector<std::string> objects,
                 std::vector<std::string> attributes,
                 std::vector<std::vector<std::string>> values);

  const std::vector<std::string>& objects() const { return objects_; }
  const std::vector<std::string>& attributes() const { return attributes_; }
  std::size_t AttributeIndex(std::string_view name) const;
  const std::string& Value(std::size_t object, std::size_t attribute) const {
    return values_[attribute][object];
  }

 private:
  std::vector<std::string> objects_;
  std::vector<std::string> attributes_;
  std::vector<std::vector<std::string>> values_;
};

// CSV with a header row; the first column holds object ids. Quoted fields
// with doubled quotes are accepted.
RelationSchema ParseRelationCsv(std::string_view text);
RelationSchema LoadRelationCsv(const std::string& path);

enum class Generalization {
  // "17601" -> "1760*" -> "176**" -> ... one trailing character per level.
  kCode,
  // 31 -> "[30,35]" -> "*": width-5 bins anchored at multiples of 5, then
  // full suppression.
  kNumeric,
};

struct AnonymizedTable {
  std::vector<std::string> attributes;  // object id column is dropped
  std::vector<std::vector<std::string>> rows;
  std::size_t k = 1;
};

// Greedy bottom-up local recoding. Each round picks the quasi-identifier with
// the most distinct current values among rows whose equivalence class is
// still smaller than k, and raises it one level on exactly those rows. Rows
// in classes of size >= k are never widened again. If the remaining rows are
// stuck at the top of every hierarchy, all rows become eligible again.
//
// Throws InvalidArgument if k is 0, exceeds the row count, names an unknown
// attribute, or a numeric quasi-identifier holds a non-integer.
AnonymizedTable KAnonymize(const RelationSchema& table,
                           const std::map<std::string, Generalization>& quasi_ids,
                           std::size_t k);

// Generalized value of one cell at a hierarchy level.
std::string GeneralizeValue(const std::string& value, Generalization kind,
                            int level);
int MaxLevel(const std::string& value, Generalization kind);

std::string FormatAnonymizedCsv(const AnonymizedTable& table);

}  // namespace fedmdl

#endif  // FEDMDL_ANONYMIZE_H_
