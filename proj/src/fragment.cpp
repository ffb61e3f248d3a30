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
#include "fedmdl/fragment.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fedmdl/error.h"

namespace fedmdl {
namespace {

std::string JoinTids(const TidList& tids) {
  std::string out;
  for (std::size_t i = 0; i < tids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(tids[i]);
  }
  return out;
}

std::string ItemLines(const Fragment& f) {
  std::string out;
  for (Item i : f.items) {
    auto it = f.tidsets.find(i);
    out += "item " + std::to_string(i) + ": ";
    if (it != f.tidsets.end()) out += JoinTids(it->second);
    out += '\n';
  }
  return out;
}

template <typename T>
T ParseNumber(std::string_view token, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("expected a number, got '" + std::string(token) + "'", line);
  }
  return value;
}

std::vector<std::string_view> SplitSpaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (pos >= s.size()) break;
    std::size_t end = s.find(' ', pos);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

}  // namespace

std::string Fragment::FragmentId() const {
  if (items.empty()) return db_name + ".empty";
  return db_name + "." + std::to_string(items[0]) + "-" +
         std::to_string(items[items.size() - 1]);
}

TidBitmap Fragment::Intersect(const Itemset& wanted) const {
  TidBitmap acc = TidBitmap::Full(n_transactions);
  for (Item i : wanted) {
    auto it = tidsets.find(i);
    if (it == tidsets.end()) {
      throw InvalidArgument("item " + std::to_string(i) + " is not held by party " +
                            std::to_string(party.value));
    }
    acc &= TidBitmap::FromTids(it->second, n_transactions);
  }
  return acc;
}

Digest FragmentDigest(const Fragment& f) {
  std::string canonical = "db=" + f.db_name + "\nfragment=" + f.FragmentId() +
                          "\ntransactions=" + std::to_string(f.n_transactions) +
                          "\n" + ItemLines(f);
  return Sha256(canonical);
}

bool VerifyDigest(const Fragment& f) { return FragmentDigest(f) == f.digest; }

std::vector<Fragment> PartitionVertical(const TransactionDatabase& db,
                                        const std::map<Item, PartyId>& assignment,
                                        const std::string& db_name) {
  for (Item i : db.alphabet()) {
    if (!assignment.contains(i)) {
      throw InvalidArgument("item " + std::to_string(i) + " is not assigned to a party");
    }
  }
  for (const auto& [item, party] : assignment) {
    if (!db.alphabet().contains(item)) {
      throw InvalidArgument("assignment names item " + std::to_string(item) +
                            " which is not in the alphabet");
    }
  }
  const VerticalIndex index = ToVertical(db);
  std::map<PartyId, std::vector<Item>> per_party;
  for (const auto& [item, party] : assignment) per_party[party].push_back(item);

  std::vector<Fragment> out;
  for (auto& [party, items] : per_party) {
    Fragment f;
    f.db_name = db_name;
    f.party = party;
    f.items = Itemset::FromSorted(std::move(items));
    f.n_transactions = db.size();
    for (Item i : f.items) f.tidsets[i] = index.tidsets.at(i);
    f.digest = FragmentDigest(f);
    out.push_back(std::move(f));
  }
  return out;
}

std::map<Item, PartyId> BlockAssignment(const Itemset& alphabet,
                                        std::size_t n_parties) {
  if (n_parties == 0) throw InvalidArgument("need at least one party");
  if (n_parties > alphabet.size() && !alphabet.empty()) {
    throw InvalidArgument("more parties than items");
  }
  std::map<Item, PartyId> out;
  const std::size_t base = alphabet.size() / n_parties;
  const std::size_t extra = alphabet.size() % n_parties;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < n_parties; ++p) {
    std::size_t len = base + (p < extra ? 1 : 0);
    for (std::size_t k = 0; k < len; ++k) {
      out[alphabet[pos++]] = PartyId{static_cast<std::uint32_t>(p + 1)};
    }
  }
  return out;
}

std::string SerializeFragment(const Fragment& f) {
  std::string out = "fragment " + f.db_name + " " + std::to_string(f.party.value);
  for (Item i : f.items) out += " " + std::to_string(i);
  out += "\ntransactions " + std::to_string(f.n_transactions) + "\n";
  out += ItemLines(f);
  out += ToHex(f.digest);
  out += '\n';
  return out;
}

Fragment ParseFragment(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 3) throw ParseError("truncated fragment", lines.size());

  Fragment f;
  auto header = SplitSpaces(lines[0]);
  if (header.size() < 3 || header[0] != "fragment") {
    throw ParseError("expected 'fragment <db> <party> <items...>'", 1);
  }
  f.db_name = std::string(header[1]);
  f.party = PartyId{ParseNumber<std::uint32_t>(header[2], 1)};
  std::vector<Item> items;
  for (std::size_t i = 3; i < header.size(); ++i) {
    items.push_back(ParseNumber<Item>(header[i], 1));
  }
  try {
    f.items = Itemset::FromUnsorted(std::move(items));
  } catch (const InvalidArgument&) {
    throw ParseError("duplicate item in fragment header", 1);
  }

  auto count_line = SplitSpaces(lines[1]);
  if (count_line.size() != 2 || count_line[0] != "transactions") {
    throw ParseError("expected 'transactions <n>'", 2);
  }
  f.n_transactions = ParseNumber<std::size_t>(count_line[1], 2);

  for (std::size_t ln = 2; ln + 1 < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    const std::size_t line_no = ln + 1;
    if (!line.starts_with("item ")) throw ParseError("expected 'item <id>: ...'", line_no);
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("missing ':'", line_no);
    Item item = ParseNumber<Item>(line.substr(5, colon - 5), line_no);
    std::string_view rest = line.substr(colon + 1);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    TidList tids;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      std::string_view tok = rest.substr(0, comma);
      tids.push_back(ParseNumber<Tid>(tok, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!f.items.contains(item)) {
      throw ParseError("item " + std::to_string(item) + " not in header", line_no);
    }
    f.tidsets[item] = std::move(tids);
  }
  auto digest = DigestFromHex(lines.back());
  if (!digest) throw ParseError("final line is not a 256-bit hex digest", lines.size());
  f.digest = *digest;
  return f;
}

Fragment LoadFragmentFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  Fragment f = ParseFragment(buffer.str());
  if (!VerifyDigest(f)) {
    throw IntegrityError("digest mismatch for fragment " + f.FragmentId() +
                         " (" + path + ")");
  }
  return f;
}

TransactionDatabase JoinFragments(const std::vector<Fragment>& fragments) {
  VerticalIndex index;
  std::size_t n = 0;
  for (const auto& f : fragments) {
    n = std::max(n, f.n_transactions);
    for (const auto& [item, tids] : f.tidsets) index.tidsets[item] = tids;
  }
  return ToHorizontal(index, n);
}

}  // namespace fedmdl
