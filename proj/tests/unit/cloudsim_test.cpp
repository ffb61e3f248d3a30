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

#include <random>
#include <set>

#include "doctest.h"
#include "fedmdl/error.h"
#include "oracles.h"

namespace fedmdl::cloud {
namespace {

const TransactionDatabase& Sample() {
  static const TransactionDatabase db = ParseTransactionDb("2 1 5 3\n2 3\n1 4\n3 1 5\n2 1 3\n2 4\n");
  return db;
}

std::vector<Fragment> Frags(std::size_t n, const std::string& name = "d") {
  return PartitionVertical(Sample(), BlockAssignment(Sample().alphabet(), n), name);
}

TEST_CASE("presets") {
  const Topology h = BuildPreset(Scenario::kHeterogeneous);
  CHECK(h.csps.size() == 3);
  CHECK(h.nodes.size() == 9);
  CHECK(h.clouds.size() == 3);
  const Topology s = BuildPreset(Scenario::kStandalone);
  REQUIRE(s.nodes.size() == 1);
  CHECK(s.LatencyUs(s.nodes[0].id, s.nodes[0].id) == 0);
  CHECK(BuildPreset(Scenario::kOneCloud).nodes.size() == 3);
  CHECK(BuildPreset(Scenario::kMultiCloud).nodes.size() == 9);
  CHECK(BuildPreset(Scenario::kMultiCloud).csps.size() == 1);
  for (Scenario sc : kAllScenarios) CHECK(ParseScenario(ScenarioName(sc)) == sc);
  CHECK_FALSE(ParseScenario("moon").has_value());
}

TEST_CASE("latency defaults and overrides") {
  Topology h = BuildPreset(Scenario::kHeterogeneous);
  CHECK(h.LatencyUs("aws1-s1", "aws1-s2") == 1000);
  CHECK(h.LatencyUs("aws1-s1", "gcp1-s1") == 50000);
  Topology m = BuildPreset(Scenario::kMultiCloud);
  CHECK(m.LatencyUs("aws1-s1", "aws2-s1") == 10000);
  h.latency_overrides_us[{"gcp1-s1", "aws1-s1"}] = 7;
  CHECK(h.LatencyUs("aws1-s1", "gcp1-s1") == 7);
}

TEST_CASE("topology config parsing") {
  const Topology t = ParseTopologyConfig(
      "[csp.a]\nalpha=2\n[cloud.c]\ncsp=a\n[node.m]\ncloud=c\nrole=master\n"
      "[node.s]\ncloud=c\nrole=slave\n[latency]\nm->s=3\ndefault.intra_cloud=0.5\n");
  CHECK(t.nodes.size() == 2);
  CHECK(t.Alpha("s") == 2.0);
  CHECK(t.LatencyUs("s", "m") == 3000);
  CHECK(t.defaults.intra_cloud_us == 500);
  CHECK(ParseTopologyConfig(FormatTopologyConfig(t)).nodes.size() == 2);
  CHECK(ParseTopologyConfig("[scenario]\npreset=heterogeneous\n").nodes.size() == 9);
  CHECK_THROWS_AS(ParseTopologyConfig("[cloud.c]\ncsp=a\n[csp.a]\n[node.m1]\ncloud=c\nrole=master\n"
                                      "[node.m2]\ncloud=c\nrole=master\n"),
                  InvalidArgument);
  CHECK_THROWS_AS(ParseTopologyConfig("[bogus]\n"), ParseError);
  CHECK_THROWS_AS(ParseTopologyConfig("[csp.a]\nalpha=x\n"), ParseError);
  CHECK_THROWS_AS(ParseTopologyConfig("[scenario]\npreset=moon\n"), InvalidArgument);
}

TEST_CASE("round-robin placement") {
  Cluster one(BuildPreset(Scenario::kOneCloud));
  const auto nodes = one.PlaceFragments(PartitionVertical(
      Sample(), BlockAssignment(Sample().alphabet(), 3), "d"));
  CHECK(nodes == std::vector<std::string>{"aws1-s1", "aws1-s2", "aws1-s1"});
  CHECK(one.catalog().size() == 3);
  for (const auto& [fid, e] : one.catalog()) {
    CHECK(e.digest == one.fragment(fid).digest);
    CHECK(e.db_name == "d");
  }

  Cluster het(BuildPreset(Scenario::kHeterogeneous));
  const auto db6 = ParseTransactionDb("1 2 3 4 5 6\n");
  het.PlaceFragments(PartitionVertical(db6, BlockAssignment(db6.alphabet(), 6), "six"));
  for (const auto& [node, n] : het.Load()) {
    CHECK(n == (het.topology().node(node).role == NodeRole::kSlave ? 1u : 0u));
  }
}

TEST_CASE("tampered fragments are refused on placement") {
  Cluster c(BuildPreset(Scenario::kOneCloud));
  auto frags = Frags(2);
  frags[1].tidsets.begin()->second.push_back(2);
  try {
    c.PlaceFragments(frags);
    FAIL("expected an integrity error");
  } catch (const IntegrityError& e) {
    CHECK(std::string(e.what()).find(frags[1].FragmentId()) != std::string::npos);
  }
  CHECK(c.catalog().empty());
}

Job Mine(const std::string& db, std::uint64_t min_count = 2) {
  Job j;
  j.kind = JobKind::kMine;
  j.db = db;
  j.min_count = min_count;
  j.seed = 17;
  return j;
}

TEST_CASE("mine payload is topology independent and equals the serial pipeline") {
  std::optional<std::string> payload;
  std::map<Scenario, JobResult> results;
  for (Scenario s : kAllScenarios) {
    Cluster c(BuildPreset(s));
    c.PlaceFragments(Frags(2));
    results[s] = c.Submit(Mine("d"));
    if (!payload) payload = results[s].payload;
    CHECK(results[s].payload == *payload);
  }
  CparmdlOptions opts;
  opts.min_count = 2;
  opts.seed = 17;
  const auto serial = PruningMerging(RunCparmdl(Frags(2), opts).itemsets, Sample(), kDefaultTheta);
  CHECK(*payload == serial.table.ToText());
  CHECK(results[Scenario::kStandalone].cross_csp_messages == 0);
  CHECK(results[Scenario::kStandalone].cross_csp_bytes == 0);
  CHECK(results[Scenario::kHeterogeneous].cross_csp_messages > 0);
  CHECK(results[Scenario::kHeterogeneous].messages >= results[Scenario::kOneCloud].messages);
  CHECK(results[Scenario::kHeterogeneous].elapsed_us > results[Scenario::kStandalone].elapsed_us);
}

TEST_CASE("single fragment on standalone") {
  Cluster c(BuildPreset(Scenario::kStandalone));
  c.PlaceFragments(Frags(1));
  const JobResult r = c.Submit(Mine("d", 1));
  CHECK(r.transcripts.empty());
  CHECK(r.cross_csp_messages == 0);
  CparmdlOptions opts;
  opts.seed = 17;
  CHECK(r.payload ==
        PruningMerging(RunCparmdl(Frags(1), opts).itemsets, Sample(), kDefaultTheta).table.ToText());
}

TEST_CASE("simulation is deterministic") {
  auto run = [] {
    Cluster c(BuildPreset(Scenario::kHeterogeneous));
    c.PlaceFragments(Frags(3));
    return c.Submit(Mine("d"));
  };
  const JobResult a = run();
  const JobResult b = run();
  CHECK(a.payload == b.payload);
  CHECK(a.trace == b.trace);
  CHECK(a.elapsed_us == b.elapsed_us);
  CHECK(a.node_busy_us == b.node_busy_us);
  REQUIRE_FALSE(a.trace.empty());
  CHECK(a.trace.front().rfind("t=0 node=", 0) == 0);
}

TEST_CASE("count job across CSPs attaches the protocol transcript") {
  Cluster c(BuildPreset(Scenario::kHeterogeneous));
  auto frags = PartitionVertical(Sample(), {{1, PartyId{1}}, {2, PartyId{2}}, {3, PartyId{3}},
                                          {4, PartyId{3}}, {5, PartyId{3}}}, "d");
  const auto placed = c.PlaceFragments(frags);
  CHECK(c.topology().CspOf(placed[0]) != c.topology().CspOf(placed[1]));
  Job j;
  j.kind = JobKind::kCount;
  j.db = "d";
  j.itemset = Itemset{1, 2};
  const JobResult r = c.Submit(j);
  CHECK(r.payload == "count=2 mode=cross\n");
  REQUIRE(r.transcripts.size() == 1);
  CHECK(r.transcripts[0].count == 2);
  CHECK(r.cross_csp_messages > 0);
  j.itemset = Itemset{3, 5};
  CHECK(c.Submit(j).payload == "count=2 mode=local\n");
  j.kind = JobKind::kQuery;
  j.itemset = Itemset{1, 3};
  CHECK(c.Submit(j).payload == "tids=1,4,5\n");
}

TEST_CASE("down nodes fail the job with a partial trace") {
  Cluster c(BuildPreset(Scenario::kOneCloud));
  c.PlaceFragments(Frags(2));
  c.SetNodeUp("aws1-s2", false);
  try {
    c.Submit(Mine("d"));
    FAIL("expected a job failure");
  } catch (const JobFailure& e) {
    CHECK(std::string(e.what()).find("aws1-s2") != std::string::npos);
    CHECK(e.partial_trace().find("event=send") != std::string::npos);
  }
}

TEST_CASE("stored fragments are re-verified on every job") {
  Cluster c(BuildPreset(Scenario::kOneCloud));
  c.PlaceFragments(Frags(2));
  c.MutableFragmentForTest("d.1-3").tidsets[1].push_back(2);
  CHECK_THROWS_AS(c.Submit(Mine("d")), IntegrityError);
  CHECK_THROWS_AS(c.Submit(Mine("nope")), InvalidArgument);
}

TEST_CASE("rebalance") {
  Cluster c(BuildPreset(Scenario::kOneCloud));
  c.PlaceFragments(Frags(3));
  c.RemoveNode("aws1-s1");
  CHECK(c.Load().at("aws1-s2") == 3);
  for (const auto& [fid, e] : c.catalog()) CHECK(e.node == "aws1-s2");
  CHECK_THROWS_AS(c.RemoveNode("aws1-s2"), InvalidArgument);
  CHECK_THROWS_AS(c.RemoveNode("aws1-m"), InvalidArgument);
  c.AddNode("aws1", "aws1-s3");
  const auto placed = c.PlaceFragments(Frags(2, "e"));
  CHECK(std::find(placed.begin(), placed.end(), "aws1-s3") != placed.end());
  CHECK_THROWS_AS(c.AddNode("nowhere", "x"), InvalidArgument);
  CHECK_THROWS_AS(c.AddNode("aws1", "aws1-s3"), InvalidArgument);
}

TEST_CASE("catalog stays consistent over random place/rebalance sequences") {
  std::mt19937_64 rng(41);
  Cluster c(BuildPreset(Scenario::kHeterogeneous));
  std::size_t next_db = 0;
  std::size_t next_node = 0;
  for (int step = 0; step < 60; ++step) {
    const int op = static_cast<int>(rng() % 3);
    if (op == 0) {
      c.PlaceFragments(Frags(1 + rng() % 3, "db" + std::to_string(next_db++)));
    } else if (op == 1) {
      const auto& clouds = c.topology().clouds;
      c.AddNode(clouds[rng() % clouds.size()].name, "extra" + std::to_string(next_node++));
    } else {
      std::vector<std::string> slaves;
      for (const auto& n : c.topology().nodes) {
        if (n.role == NodeRole::kSlave) slaves.push_back(n.id);
      }
      if (slaves.size() > 1) c.RemoveNode(slaves[rng() % slaves.size()]);
    }
    std::size_t stored = 0;
    for (const auto& [node, n] : c.Load()) stored += n;
    CHECK(stored == c.catalog().size());
    for (const auto& [fid, e] : c.catalog()) {
      const Fragment& f = c.fragment(fid);
      CHECK(VerifyDigest(f));
      CHECK(f.digest == e.digest);
    }
  }
}

}  // namespace
}  // namespace fedmdl::cloud
