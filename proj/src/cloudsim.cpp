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
#include "fedmdl/cloudsim.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "fedmdl/error.h"

namespace fedmdl::cloud {
namespace {

constexpr std::uint64_t kControlBytes = 64;

std::string Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return std::string(s);
}

double ParseDouble(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v) || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected a non-negative number, got '" + s + "'", line);
  }
}

std::uint64_t WordsFor(std::size_t n_transactions) { return (n_transactions + 63) / 64; }

// Accumulates the simulated schedule of one job.
class Timeline {
 public:
  Timeline(const Topology& topo, JobResult& result) : topo_(topo), result_(result) {}

  void RequireUp(const std::string& node) {
    if (!topo_.node(node).up) {
      Flush();
      std::string partial;
      for (const auto& line : result_.trace) partial += line + "\n";
      throw JobFailure("node " + node + " is unreachable", partial);
    }
  }

  std::uint64_t Send(std::uint64_t t, const std::string& from, const std::string& to,
                     std::uint64_t bytes, const std::string& what) {
    RequireUp(from);
    RequireUp(to);
    const std::uint64_t arrive = t + topo_.LatencyUs(from, to);
    Event(t, from, "send", "to=" + to + " bytes=" + std::to_string(bytes) + " " + what);
    Event(arrive, to, "recv", "from=" + from + " bytes=" + std::to_string(bytes) + " " + what);
    ++result_.messages;
    result_.bytes += bytes;
    if (topo_.CspOf(from) != topo_.CspOf(to)) {
      ++result_.cross_csp_messages;
      result_.cross_csp_bytes += bytes;
    }
    return arrive;
  }

  std::uint64_t Compute(std::uint64_t t, const std::string& node, std::uint64_t units,
                        const char* kind, const std::string& what) {
    RequireUp(node);
    const auto dur = static_cast<std::uint64_t>(
        std::llround(topo_.Alpha(node) * static_cast<double>(units)));
    Event(t, node, kind, "units=" + std::to_string(units) + " " + what);
    result_.node_busy_us[node] += dur;
    return t + dur;
  }

  void Flush() {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    result_.trace.clear();
    for (const auto& [t, line] : events_) result_.trace.push_back(line);
  }

 private:
  void Event(std::uint64_t t, const std::string& node, const char* kind,
             const std::string& rest) {
    events_.emplace_back(t, "t=" + std::to_string(t) + " node=" + node +
                                " event=" + kind + " " + rest);
  }

  const Topology& topo_;
  JobResult& result_;
  std::vector<std::pair<std::uint64_t, std::string>> events_;
};

// Replays a protocol transcript on the nodes holding each party's fragment.
std::uint64_t ReplayProtocol(Timeline& tl, std::uint64_t start,
                             const ProtocolTranscript& transcript,
                             const std::map<std::uint32_t, std::string>& node_of_party,
                             const std::string& label) {
  std::uint64_t t = start;
  std::size_t i = 0;
  const auto& msgs = transcript.messages;
  while (i < msgs.size()) {
    const std::size_t round = msgs[i].round;
    std::uint64_t round_end = t;
    for (; i < msgs.size() && msgs[i].round == round; ++i) {
      const auto& m = msgs[i];
      const std::string& from = node_of_party.at(m.from.value);
      const std::string& to = node_of_party.at(m.to.value);
      std::uint64_t ready = tl.Compute(t, from, m.tokens.size() + 1, "map",
                                       "mask " + label + " round=" + std::to_string(round));
      round_end = std::max(round_end,
                           tl.Send(ready, from, to, m.tokens.size() * sizeof(std::uint64_t),
                                   "tokens " + label));
    }
    t = round_end;
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------- Topology

const Node& Topology::node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return n;
  }
  throw InvalidArgument("unknown node " + std::string(id));
}

Node& Topology::node(std::string_view id) {
  for (auto& n : nodes) {
    if (n.id == id) return n;
  }
  throw InvalidArgument("unknown node " + std::string(id));
}

const Cloud& Topology::cloud(std::string_view name) const {
  for (const auto& c : clouds) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("unknown cloud " + std::string(name));
}

const Csp& Topology::csp(std::string_view name) const {
  for (const auto& c : csps) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("unknown CSP " + std::string(name));
}

const std::string& Topology::CspOf(std::string_view node_id) const {
  return cloud(node(node_id).cloud).csp;
}

double Topology::Alpha(std::string_view node_id) const {
  return csp(CspOf(node_id)).alpha;
}

std::uint64_t Topology::LatencyUs(std::string_view a, std::string_view b) const {
  if (a == b) return 0;
  auto it = latency_overrides_us.find({std::string(a), std::string(b)});
  if (it == latency_overrides_us.end()) {
    it = latency_overrides_us.find({std::string(b), std::string(a)});
  }
  if (it != latency_overrides_us.end()) return it->second;
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.cloud == nb.cloud) return defaults.intra_cloud_us;
  if (cloud(na.cloud).csp == cloud(nb.cloud).csp) return defaults.intra_csp_us;
  return defaults.cross_csp_us;
}

const std::string& Topology::MasterOf(std::string_view cloud_name) const {
  for (const auto& n : nodes) {
    if (n.cloud == cloud_name && n.role == NodeRole::kMaster) return n.id;
  }
  throw InvalidArgument("cloud " + std::string(cloud_name) + " has no master");
}

const std::string& Topology::Coordinator() const {
  if (clouds.empty()) throw InvalidArgument("topology has no clouds");
  return MasterOf(clouds.front().name);
}

std::vector<std::string> Topology::StorageNodes() const {
  std::vector<std::vector<std::string>> per_cloud;
  for (const auto& c : clouds) {
    std::vector<std::string> ids;
    for (const auto& n : nodes) {
      if (n.cloud == c.name && n.stores_data) ids.push_back(n.id);
    }
    per_cloud.push_back(std::move(ids));
  }
  std::vector<std::string> out;
  for (std::size_t rank = 0;; ++rank) {
    bool any = false;
    for (const auto& ids : per_cloud) {
      if (rank < ids.size()) {
        out.push_back(ids[rank]);
        any = true;
      }
    }
    if (!any) break;
  }
  return out;
}

void Topology::Validate() const {
  std::set<std::string> names;
  for (const auto& c : csps) {
    if (!names.insert("csp:" + c.name).second) throw InvalidArgument("duplicate CSP " + c.name);
  }
  for (const auto& c : clouds) {
    if (!names.insert("cloud:" + c.name).second) {
      throw InvalidArgument("duplicate cloud " + c.name);
    }
    csp(c.csp);
  }
  for (const auto& n : nodes) {
    if (!names.insert("node:" + n.id).second) throw InvalidArgument("duplicate node " + n.id);
    cloud(n.cloud);
  }
  for (const auto& c : clouds) {
    std::size_t masters = 0;
    for (const auto& n : nodes) {
      if (n.cloud == c.name && n.role == NodeRole::kMaster) ++masters;
    }
    if (masters != 1) {
      throw InvalidArgument("cloud " + c.name + " has " + std::to_string(masters) +
                            " masters, expected exactly one");
    }
  }
  for (const auto& [pair, _] : latency_overrides_us) {
    node(pair.first);
    node(pair.second);
  }
}

std::string_view ScenarioName(Scenario s) {
  switch (s) {
    case Scenario::kStandalone:
      return "standalone";
    case Scenario::kOneCloud:
      return "one-cloud";
    case Scenario::kMultiCloud:
      return "multi-cloud";
    case Scenario::kHeterogeneous:
      return "heterogeneous";
  }
  return "unknown";
}

std::optional<Scenario> ParseScenario(std::string_view name) {
  for (Scenario s : kAllScenarios) {
    if (ScenarioName(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

void AddCloud(Topology& t, const std::string& csp, const std::string& cloud,
              std::size_t slaves) {
  t.clouds.push_back({cloud, csp});
  t.nodes.push_back({cloud + "-m", cloud, NodeRole::kMaster, false, true});
  for (std::size_t s = 1; s <= slaves; ++s) {
    t.nodes.push_back({cloud + "-s" + std::to_string(s), cloud, NodeRole::kSlave, true, true});
  }
}

}  // namespace

Topology BuildPreset(Scenario s) {
  Topology t;
  t.name = std::string(ScenarioName(s));
  switch (s) {
    case Scenario::kStandalone:
      t.csps.push_back({"local", 1.0});
      t.clouds.push_back({"local", "local"});
      t.nodes.push_back({"local-0", "local", NodeRole::kMaster, true, true});
      break;
    case Scenario::kOneCloud:
      t.csps.push_back({"aws", 1.0});
      AddCloud(t, "aws", "aws1", 2);
      break;
    case Scenario::kMultiCloud:
      t.csps.push_back({"aws", 1.0});
      AddCloud(t, "aws", "aws1", 2);
      AddCloud(t, "aws", "aws2", 2);
      AddCloud(t, "aws", "aws3", 2);
      break;
    case Scenario::kHeterogeneous:
      t.csps.push_back({"aws", 1.0});
      t.csps.push_back({"azure", 1.25});
      t.csps.push_back({"gcp", 0.8});
      AddCloud(t, "aws", "aws1", 2);
      AddCloud(t, "azure", "azure1", 2);
      AddCloud(t, "gcp", "gcp1", 2);
      break;
  }
  t.Validate();
  return t;
}

Topology ParseTopologyConfig(std::string_view text) {
  Topology t;
  std::optional<std::string> preset;
  std::string section;
  std::string section_name;
  std::map<std::string, std::map<std::string, std::string>> nodes_kv;
  std::vector<std::string> node_order;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = Trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      std::string header = line.substr(1, line.size() - 2);
      auto dot = header.find('.');
      section = header.substr(0, dot);
      section_name = dot == std::string::npos ? "" : header.substr(dot + 1);
      if (section == "csp") {
        t.csps.push_back({section_name, 1.0});
      } else if (section == "cloud") {
        t.clouds.push_back({section_name, ""});
      } else if (section == "node") {
        node_order.push_back(section_name);
        nodes_kv[section_name];
      } else if (section != "latency" && section != "scenario") {
        throw ParseError("unknown section [" + header + "]", line_no);
      }
      if ((section == "csp" || section == "cloud" || section == "node") &&
          section_name.empty()) {
        throw ParseError("section needs a name", line_no);
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (section.empty()) throw ParseError("key outside any section", line_no);
    if (section == "scenario") {
      if (key != "preset") throw ParseError("unknown key " + key, line_no);
      preset = value;
    } else if (section == "csp") {
      if (key != "alpha") throw ParseError("unknown key " + key, line_no);
      t.csps.back().alpha = ParseDouble(value, line_no);
    } else if (section == "cloud") {
      if (key != "csp") throw ParseError("unknown key " + key, line_no);
      t.clouds.back().csp = value;
    } else if (section == "node") {
      if (key != "cloud" && key != "role" && key != "store") {
        throw ParseError("unknown key " + key, line_no);
      }
      nodes_kv[section_name][key] = value;
    } else if (section == "latency") {
      auto us = static_cast<std::uint64_t>(std::llround(ParseDouble(value, line_no) * 1000));
      if (key == "default.intra_cloud") {
        t.defaults.intra_cloud_us = us;
      } else if (key == "default.intra_csp") {
        t.defaults.intra_csp_us = us;
      } else if (key == "default.cross_csp") {
        t.defaults.cross_csp_us = us;
      } else {
        auto arrow = key.find("->");
        if (arrow == std::string::npos) throw ParseError("expected <a>-><b>", line_no);
        t.latency_overrides_us[{Trim(key.substr(0, arrow)), Trim(key.substr(arrow + 2))}] = us;
      }
    }
  }
  if (preset) {
    auto s = ParseScenario(*preset);
    if (!s) throw InvalidArgument("unknown preset " + *preset);
    if (!t.csps.empty() || !t.clouds.empty() || !node_order.empty()) {
      throw InvalidArgument("a preset cannot be combined with custom sections");
    }
    Topology p = BuildPreset(*s);
    for (const auto& kv : t.latency_overrides_us) p.latency_overrides_us.insert(kv);
    p.defaults = t.defaults;
    p.Validate();
    return p;
  }
  for (const auto& id : node_order) {
    const auto& kv = nodes_kv[id];
    Node n;
    n.id = id;
    auto cloud_it = kv.find("cloud");
    if (cloud_it == kv.end()) throw InvalidArgument("node " + id + " has no cloud");
    n.cloud = cloud_it->second;
    auto role_it = kv.find("role");
    if (role_it == kv.end() || (role_it->second != "master" && role_it->second != "slave")) {
      throw InvalidArgument("node " + id + " needs role=master|slave");
    }
    n.role = role_it->second == "master" ? NodeRole::kMaster : NodeRole::kSlave;
    n.stores_data = n.role == NodeRole::kSlave;
    if (auto store = kv.find("store"); store != kv.end()) n.stores_data = store->second == "true";
    t.nodes.push_back(std::move(n));
  }
  t.Validate();
  return t;
}

std::string FormatTopologyConfig(const Topology& t) {
  std::ostringstream out;
  for (const auto& c : t.csps) out << "[csp." << c.name << "]\nalpha=" << c.alpha << "\n";
  for (const auto& c : t.clouds) out << "[cloud." << c.name << "]\ncsp=" << c.csp << "\n";
  for (const auto& n : t.nodes) {
    out << "[node." << n.id << "]\ncloud=" << n.cloud
        << "\nrole=" << (n.role == NodeRole::kMaster ? "master" : "slave")
        << "\nstore=" << (n.stores_data ? "true" : "false") << "\n";
  }
  out << "[latency]\n"
      << "default.intra_cloud=" << t.defaults.intra_cloud_us / 1000.0 << "\n"
      << "default.intra_csp=" << t.defaults.intra_csp_us / 1000.0 << "\n"
      << "default.cross_csp=" << t.defaults.cross_csp_us / 1000.0 << "\n";
  for (const auto& [pair, us] : t.latency_overrides_us) {
    out << pair.first << "->" << pair.second << "=" << us / 1000.0 << "\n";
  }
  return out.str();
}

// ----------------------------------------------------------------- Cluster

Cluster::Cluster(Topology topology) : topology_(std::move(topology)) {
  topology_.Validate();
  for (const auto& n : topology_.nodes) storage_[n.id];
}

std::vector<std::string> Cluster::PlaceFragments(const std::vector<Fragment>& fragments) {
  for (const auto& f : fragments) {
    if (!VerifyDigest(f)) {
      throw IntegrityError("digest mismatch on placement of fragment " + f.FragmentId());
    }
    if (catalog_.contains(f.FragmentId())) {
      throw InvalidArgument("fragment " + f.FragmentId() + " is already placed");
    }
  }
  const auto targets = topology_.StorageNodes();
  if (targets.empty()) throw InvalidArgument("no storage node available");
  std::vector<std::string> placed;
  for (const auto& f : fragments) {
    const std::string& node = targets[cursor_++ % targets.size()];
    CatalogEntry entry;
    entry.node = node;
    entry.digest = f.digest;
    entry.db_name = f.db_name;
    entry.table = "party" + std::to_string(f.party.value);
    entry.storage_id = node + "/" + f.FragmentId();
    entry.key_id = "party-key-" + std::to_string(f.party.value);
    catalog_[f.FragmentId()] = std::move(entry);
    storage_[node][f.FragmentId()] = f;
    placed.push_back(node);
  }
  return placed;
}

std::vector<Fragment> Cluster::FragmentsOf(std::string_view db) const {
  std::vector<Fragment> out;
  for (const auto& [fid, entry] : catalog_) {
    if (entry.db_name == db) out.push_back(storage_.at(entry.node).at(fid));
  }
  std::sort(out.begin(), out.end(),
            [](const Fragment& a, const Fragment& b) { return a.party < b.party; });
  return out;
}

const Fragment& Cluster::fragment(std::string_view fragment_id) const {
  auto it = catalog_.find(std::string(fragment_id));
  if (it == catalog_.end()) throw InvalidArgument("unknown fragment " + std::string(fragment_id));
  return storage_.at(it->second.node).at(it->first);
}

Fragment& Cluster::MutableFragmentForTest(std::string_view fragment_id) {
  auto it = catalog_.find(std::string(fragment_id));
  if (it == catalog_.end()) throw InvalidArgument("unknown fragment " + std::string(fragment_id));
  return storage_.at(it->second.node).at(it->first);
}

std::vector<std::string> Cluster::Databases() const {
  std::set<std::string> dbs;
  for (const auto& [_, entry] : catalog_) dbs.insert(entry.db_name);
  return {dbs.begin(), dbs.end()};
}

void Cluster::AddNode(const std::string& cloud, const std::string& node_id) {
  topology_.cloud(cloud);
  for (const auto& n : topology_.nodes) {
    if (n.id == node_id) throw InvalidArgument("node " + node_id + " already exists");
  }
  topology_.nodes.push_back({node_id, cloud, NodeRole::kSlave, true, true});
  storage_[node_id];
}

void Cluster::RemoveNode(const std::string& node_id) {
  const Node victim = topology_.node(node_id);
  if (victim.role == NodeRole::kMaster) {
    throw InvalidArgument("cannot remove master " + node_id);
  }
  std::vector<std::string> same_cloud;
  std::vector<std::string> anywhere;
  for (const auto& id : topology_.StorageNodes()) {
    if (id == node_id) continue;
    anywhere.push_back(id);
    if (topology_.node(id).cloud == victim.cloud) same_cloud.push_back(id);
  }
  const auto& targets = same_cloud.empty() ? anywhere : same_cloud;
  auto moving = storage_.at(node_id);
  if (targets.empty()) {
    throw InvalidArgument("removing " + node_id + " would leave no storage node");
  }
  for (const auto& [fid, f] : moving) {
    if (!VerifyDigest(f) || catalog_.at(fid).digest != f.digest) {
      throw IntegrityError("digest mismatch while migrating fragment " + fid);
    }
  }
  std::size_t rr = 0;
  for (auto& [fid, f] : moving) {
    const std::string& dest = targets[rr++ % targets.size()];
    storage_[dest][fid] = std::move(f);
    catalog_[fid].node = dest;
    catalog_[fid].storage_id = dest + "/" + fid;
  }
  storage_.erase(node_id);
  std::erase_if(topology_.nodes, [&](const Node& n) { return n.id == node_id; });
  std::erase_if(topology_.latency_overrides_us, [&](const auto& kv) {
    return kv.first.first == node_id || kv.first.second == node_id;
  });
}

void Cluster::SetNodeUp(const std::string& node_id, bool up) {
  topology_.node(node_id).up = up;
}

std::map<std::string, std::size_t> Cluster::Load() const {
  std::map<std::string, std::size_t> out;
  for (const auto& n : topology_.nodes) out[n.id] = storage_.at(n.id).size();
  return out;
}

JobResult Cluster::Submit(const Job& job) const {
  JobResult result;
  Timeline tl(topology_, result);
  const std::string& coord = topology_.Coordinator();

  std::vector<Fragment> frags;
  if (job.kind != JobKind::kMerge) {
    frags = FragmentsOf(job.db);
    if (frags.empty()) throw InvalidArgument("unknown database " + job.db);
    for (const auto& f : frags) {
      if (!VerifyDigest(f) || catalog_.at(f.FragmentId()).digest != f.digest) {
        throw IntegrityError("digest mismatch for stored fragment " + f.FragmentId());
      }
    }
  }
  std::map<std::uint32_t, std::string> node_of_party;
  for (const auto& f : frags) node_of_party[f.party.value] = catalog_.at(f.FragmentId()).node;

  // Dispatch from the coordinator.
  std::map<std::string, std::uint64_t> ready;
  for (const auto& f : frags) {
    const std::string& node = node_of_party[f.party.value];
    std::uint64_t arrive = tl.Send(0, coord, node, kControlBytes, "dispatch " + f.FragmentId());
    ready[node] = std::max(ready[node], arrive);
  }

  // Partial results flow fragment node -> its cloud master -> coordinator.
  auto reduce = [&](std::uint64_t start, std::uint64_t bytes_per_fragment) {
    std::map<std::string, std::uint64_t> at_master;
    for (const auto& f : frags) {
      const std::string& node = node_of_party[f.party.value];
      const std::string& master = topology_.MasterOf(topology_.node(node).cloud);
      std::uint64_t arrive =
          tl.Send(start, node, master, bytes_per_fragment, "partial " + f.FragmentId());
      at_master[master] = std::max(at_master[master], arrive);
    }
    std::uint64_t end = start;
    for (auto& [master, t] : at_master) {
      std::uint64_t done = tl.Compute(t, master, frags.size(), "reduce", "combine");
      end = std::max(end, tl.Send(done, master, coord, bytes_per_fragment, "combined"));
    }
    return end;
  };

  std::uint64_t end = 0;
  switch (job.kind) {
    case JobKind::kMine: {
      CparmdlOptions opts;
      opts.min_count = job.min_count;
      opts.seed = job.seed;
      opts.protocol = job.protocol;
      opts.workers = job.workers;
      CparmdlResult mined = RunCparmdl(frags, opts);
      GlobalModel model = PruningMerging(mined.itemsets, JoinFragments(frags), job.theta);
      result.payload = model.table.ToText();

      // Level 1 at every party.
      std::uint64_t barrier = 0;
      for (const auto& f : frags) {
        const std::string& node = node_of_party[f.party.value];
        std::uint64_t units = 0;
        for (const auto& [_, tids] : f.tidsets) units += tids.size();
        ready[node] = tl.Compute(ready[node], node, units, "map", "singletons " + f.FragmentId());
        barrier = std::max(barrier, ready[node]);
      }
      std::map<Itemset, const ProtocolTranscript*> transcript_of;
      for (const auto& t : mined.transcripts) transcript_of[t.candidate] = &t.transcript;
      std::size_t r = 0;
      const auto& trace = mined.trace;
      while (r < trace.size() && trace[r].level == 1) ++r;
      while (r < trace.size()) {
        const std::size_t level = trace[r].level;
        std::uint64_t level_end = barrier;
        std::map<std::string, std::uint64_t> node_t;
        for (; r < trace.size() && trace[r].level == level; ++r) {
          const TraceRecord& rec = trace[r];
          const std::string label = "k=" + std::to_string(level) + " c=" + rec.items.ToString();
          if (rec.mode == CountMode::kLocal) {
            std::string node;
            for (const auto& f : frags) {
              if (f.items.contains(rec.items[0])) node = node_of_party[f.party.value];
            }
            auto& t = node_t.try_emplace(node, barrier).first->second;
            t = tl.Compute(t, node, rec.items.size() * WordsFor(frags.front().n_transactions),
                           "map", "count " + label);
            level_end = std::max(level_end, t);
          } else {
            const auto& tr = *transcript_of.at(rec.items);
            level_end = std::max(level_end,
                                 ReplayProtocol(tl, barrier, tr, node_of_party, label));
          }
        }
        barrier = level_end;
      }
      end = reduce(barrier, 16 * mined.itemsets.size() / std::max<std::size_t>(1, frags.size()) + 16);
      end = tl.Compute(end, coord, model.table.size() * (frags.front().n_transactions + 1),
                       "reduce", "pruning-merging");
      for (auto& t : mined.transcripts) result.transcripts.push_back(t.transcript);
      result.mining = std::move(mined);
      result.model = std::move(model);
      break;
    }
    case JobKind::kCount:
    case JobKind::kQuery: {
      if (job.itemset.empty()) throw InvalidArgument("job needs a non-empty itemset");
      std::set<std::size_t> holders;
      for (Item i : job.itemset) {
        bool found = false;
        for (std::size_t f = 0; f < frags.size(); ++f) {
          if (frags[f].items.contains(i)) {
            holders.insert(f);
            found = true;
          }
        }
        if (!found) throw InvalidArgument("no fragment of " + job.db + " holds item " + std::to_string(i));
      }
      std::uint64_t barrier = 0;
      for (const auto& [_, t] : ready) barrier = std::max(barrier, t);
      const std::string label = "c=" + job.itemset.ToString();
      if (job.kind == JobKind::kQuery) {
        TidBitmap acc = TidBitmap::Full(frags.front().n_transactions);
        for (std::size_t f : holders) {
          const std::string& node = node_of_party[frags[f].party.value];
          Itemset mine = job.itemset.Intersect(frags[f].items);
          acc &= frags[f].Intersect(mine);
          std::uint64_t t = tl.Compute(barrier, node,
                                       mine.size() * WordsFor(frags[f].n_transactions),
                                       "map", "select " + label);
          end = std::max(end, tl.Send(t, node, coord,
                                      WordsFor(frags[f].n_transactions) * 8, "tidset " + label));
        }
        TidList tids = acc.ToTids();
        result.payload = "tids=";
        for (std::size_t i = 0; i < tids.size(); ++i) {
          if (i) result.payload += ',';
          result.payload += std::to_string(tids[i]);
        }
        result.payload += "\n";
        end = tl.Compute(end, coord, tids.size() + 1, "reduce", "collect " + label);
      } else if (holders.size() == 1) {
        const Fragment& f = frags[*holders.begin()];
        CandidateCount c = LocalCount(f, job.itemset);
        const std::string& node = node_of_party[f.party.value];
        std::uint64_t t = tl.Compute(barrier, node,
                                     job.itemset.size() * WordsFor(f.n_transactions), "map",
                                     "count " + label);
        end = reduce(t, 16);
        result.payload = "count=" + std::to_string(c.count) + " mode=local\n";
      } else {
        CrossCount cc = CrossPartyCount(job.itemset, frags, job.seed, job.protocol);
        std::uint64_t t = ReplayProtocol(tl, barrier, cc.transcript, node_of_party, label);
        end = reduce(t, 16);
        result.payload = "count=" + std::to_string(cc.result.count) + " mode=cross\n";
        result.transcripts.push_back(std::move(cc.transcript));
      }
      break;
    }
    case JobKind::kMerge: {
      if (job.db.empty()) throw InvalidArgument("merge job needs a database");
      frags = FragmentsOf(job.db);
      if (frags.empty()) throw InvalidArgument("unknown database " + job.db);
      GlobalModel model = PruningMerging(job.itemsets, JoinFragments(frags), job.theta);
      result.payload = model.table.ToText();
      end = tl.Compute(0, coord, model.table.size() * (frags.front().n_transactions + 1),
                       "reduce", "pruning-merging");
      result.model = std::move(model);
      break;
    }
  }
  result.elapsed_us = end;
  tl.Flush();
  return result;
}

}  // namespace fedmdl::cloud
