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
#ifndef FEDMDL_CLOUDSIM_H_
#define FEDMDL_CLOUDSIM_H_

// Deterministic simulation of fragments spread over cloud providers. Only
// timings depend on the topology; every job payload is computed by the same
// code path whatever the layout.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedmdl/cparmdl.h"
#include "fedmdl/fragment.h"
#include "fedmdl/protocol.h"

namespace fedmdl::cloud {

enum class NodeRole { kMaster, kSlave };

struct Node {
  std::string id;
  std::string cloud;
  NodeRole role = NodeRole::kSlave;
  bool stores_data = true;  // slaves always; a lone master may too
  bool up = true;
};

struct Cloud {
  std::string name;
  std::string csp;
};

struct Csp {
  std::string name;
  double alpha = 1.0;  // simulated microseconds per work unit
};

struct LatencyDefaults {
  std::uint64_t intra_cloud_us = 1'000;
  std::uint64_t intra_csp_us = 10'000;
  std::uint64_t cross_csp_us = 50'000;
};

class Topology {
 public:
  std::string name = "custom";
  std::vector<Csp> csps;
  std::vector<Cloud> clouds;
  std::vector<Node> nodes;
  LatencyDefaults defaults;
  std::map<std::pair<std::string, std::string>, std::uint64_t> latency_overrides_us;

  const Node& node(std::string_view id) const;
  Node& node(std::string_view id);
  const Cloud& cloud(std::string_view name) const;
  const Csp& csp(std::string_view name) const;
  const std::string& CspOf(std::string_view node_id) const;
  double Alpha(std::string_view node_id) const;

  // Zero on the same node; otherwise an override if configured (either
  // direction), else the intra-cloud / intra-CSP / cross-CSP default.
  std::uint64_t LatencyUs(std::string_view a, std::string_view b) const;

  const std::string& MasterOf(std::string_view cloud) const;
  // Master of the first cloud: receives results and runs the final reduce.
  const std::string& Coordinator() const;

  // Data-holding nodes in placement order: the first of every cloud, then
  // the second of every cloud, and so on, so consecutive fragments land in
  // different clouds.
  std::vector<std::string> StorageNodes() const;

  // Throws InvalidArgument unless every cloud has exactly one master, node
  // ids are unique and every reference resolves.
  void Validate() const;
};

enum class Scenario { kStandalone, kOneCloud, kMultiCloud, kHeterogeneous };

inline constexpr Scenario kAllScenarios[] = {
    Scenario::kStandalone, Scenario::kOneCloud, Scenario::kMultiCloud,
    Scenario::kHeterogeneous};

std::string_view ScenarioName(Scenario s);
std::optional<Scenario> ParseScenario(std::string_view name);

// standalone: one node. one-cloud: master + 2 slaves. multi-cloud: 3 clouds
// of 3 nodes in one CSP. heterogeneous: 3 CSPs, one cloud of 3 nodes each.
Topology BuildPreset(Scenario s);

// Key-value config:
//   [scenario]        preset=<name>   (alone: use that preset)
//   [csp.<name>]      alpha=<f>
//   [cloud.<name>]    csp=<name>
//   [node.<name>]     cloud=<name> role=master|slave [store=true|false]
//   [latency]         <a>-><b>=<ms>   default.intra_cloud|intra_csp|cross_csp=<ms>
// Throws ParseError / InvalidArgument.
Topology ParseTopologyConfig(std::string_view text);
std::string FormatTopologyConfig(const Topology& t);

struct CatalogEntry {
  std::string node;
  Digest digest{};
  std::string db_name;
  std::string table;
  std::string storage_id;
  std::string key_id;
  std::string structure = "vertical-tidset";
};

using MetadataCatalog = std::map<std::string, CatalogEntry>;  // by fragment id

enum class JobKind { kMine, kCount, kMerge, kQuery };

struct Job {
  JobKind kind = JobKind::kMine;
  std::string db;
  Itemset itemset;  // kCount candidate, kQuery predicate
  std::vector<ItemsetCount> itemsets;  // kMerge input
  std::uint64_t min_count = 1;
  double theta = kDefaultTheta;
  ProtocolOptions protocol;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

struct JobResult {
  std::string payload;  // identical across topologies for the same job
  std::vector<std::string> trace;
  std::map<std::string, std::uint64_t> node_busy_us;
  std::uint64_t elapsed_us = 0;
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  std::uint64_t cross_csp_messages = 0;
  std::uint64_t cross_csp_bytes = 0;
  // Mine / count extras.
  std::optional<CparmdlResult> mining;
  std::optional<GlobalModel> model;
  std::vector<ProtocolTranscript> transcripts;
};

class Cluster {
 public:
  explicit Cluster(Topology topology);

  const Topology& topology() const { return topology_; }
  const MetadataCatalog& catalog() const { return catalog_; }

  // Round-robin over StorageNodes, cursor kept across calls. Every fragment
  // is digest-checked first; a mismatch throws IntegrityError naming it and
  // nothing is placed. Returns the chosen node per fragment.
  std::vector<std::string> PlaceFragments(const std::vector<Fragment>& fragments);

  std::vector<Fragment> FragmentsOf(std::string_view db) const;
  const Fragment& fragment(std::string_view fragment_id) const;
  std::vector<std::string> Databases() const;

  // Adds a slave to an existing cloud.
  void AddNode(const std::string& cloud, const std::string& node_id);
  // Removes a slave; its fragments move round-robin to the remaining storage
  // nodes of its cloud, or of the whole cluster if the cloud has none, with
  // digests re-checked. Throws InvalidArgument for masters, unknown nodes, or
  // when no target remains.
  void RemoveNode(const std::string& node_id);
  void SetNodeUp(const std::string& node_id, bool up);

  // Fragment count per node, every node listed.
  std::map<std::string, std::size_t> Load() const;

  // Runs the job. Throws JobFailure (with the trace so far) if a node it
  // needs is down, IntegrityError if a stored fragment no longer verifies.
  JobResult Submit(const Job& job) const;

  // Test hook: corrupt a stored fragment in place.
  Fragment& MutableFragmentForTest(std::string_view fragment_id);

 private:
  Topology topology_;
  MetadataCatalog catalog_;
  std::map<std::string, std::map<std::string, Fragment>> storage_;
  std::size_t cursor_ = 0;
};

}  // namespace fedmdl::cloud

#endif  // FEDMDL_CLOUDSIM_H_
