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
#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "fedmdl/anonymize.h"
#include "fedmdl/answer_crypto.h"
#include "fedmdl/cloudsim.h"
#include "fedmdl/cparmdl.h"
#include "fedmdl/datamodel.h"
#include "fedmdl/digest.h"
#include "fedmdl/error.h"
#include "fedmdl/fragment.h"
#include "fedmdl/query.h"

namespace fedmdl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string scenario = "standalone";
  std::string topology_config;
  std::uint64_t min_count = 1;
  double theta = kDefaultTheta;
  double tau = 0.01;
  std::optional<std::uint64_t> seed;
  std::string key_path;
  std::string enc_key_path;
  std::string mode;
  bool raw = false;
  bool symbols = false;
  std::size_t parties = 2;
  std::size_t workers = 0;
  std::string out_dir = "out";
  std::vector<std::string> dbs;
  std::string input;
  std::string output;
  std::string text;
  std::size_t k = 2;
  std::vector<std::string> quasi_ids;
  std::string name;
  std::string host = "127.0.0.1";
  int port = 8080;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << data;
}

std::uint64_t RequireSeed(const Flags& f) {
  if (!f.seed) throw CLI::ValidationError("--seed", "--seed is required for this command");
  return *f.seed;
}

cloud::Topology ResolveTopology(const Flags& f) {
  if (!f.topology_config.empty()) {
    return cloud::ParseTopologyConfig(ReadFile(f.topology_config));
  }
  auto s = cloud::ParseScenario(f.scenario);
  if (!s) throw CLI::ValidationError("--scenario", "unknown scenario " + f.scenario);
  return cloud::BuildPreset(*s);
}

// "name=path" or "path" (name = file stem). A directory is read as a set of
// fragment files; a regular file as a transaction database split into
// contiguous item blocks.
struct Source {
  std::string name;
  std::vector<Fragment> fragments;
};

Source LoadSource(const std::string& spec, std::size_t parties) {
  std::string name;
  std::string path = spec;
  if (auto eq = spec.find('='); eq != std::string::npos) {
    name = spec.substr(0, eq);
    path = spec.substr(eq + 1);
  }
  Source src;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.path().extension() == ".frag") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InvalidArgument("no .frag files in " + path);
    for (const auto& p : files) src.fragments.push_back(LoadFragmentFile(p.string()));
    src.name = src.fragments.front().db_name;
    if (!name.empty() && name != src.name) {
      throw InvalidArgument("fragments in " + path + " belong to " + src.name + ", not " + name);
    }
    CheckPartition(src.fragments);
    return src;
  }
  src.name = name.empty() ? fs::path(path).stem().string() : name;
  TransactionDatabase db = LoadTransactionFile(path);
  if (db.alphabet().empty()) throw InvalidArgument("database " + src.name + " has no items");
  const std::size_t n = std::clamp<std::size_t>(parties, 1, db.alphabet().size());
  src.fragments = PartitionVertical(db, BlockAssignment(db.alphabet(), n), src.name);
  return src;
}

std::vector<Source> LoadSources(const Flags& f) {
  if (f.dbs.empty()) throw CLI::ValidationError("--db", "at least one --db is required");
  std::vector<Source> out;
  for (const auto& spec : f.dbs) out.push_back(LoadSource(spec, f.parties));
  return out;
}

cloud::Job MineJob(const Flags& f, const std::string& db) {
  cloud::Job job;
  job.kind = cloud::JobKind::kMine;
  job.db = db;
  job.min_count = f.min_count;
  job.theta = f.theta;
  job.protocol.tau = f.tau;
  job.seed = RequireSeed(f);
  job.workers = f.workers;
  return job;
}

std::string BenchHeader() {
  return "scenario,elapsed_us,messages,bytes,cross_csp_messages,cross_csp_bytes\n";
}

std::string BenchRow(const std::string& name, const cloud::JobResult& r) {
  std::ostringstream row;
  row << name << "," << r.elapsed_us << "," << r.messages << "," << r.bytes << ","
      << r.cross_csp_messages << "," << r.cross_csp_bytes << "\n";
  return row.str();
}

// ---------------------------------------------------------------- commands

int CmdIngest(const Flags& f, std::ostream& out) {
  const TransactionDatabase db = LoadTransactionFile(f.input);
  out << db.size() << " transactions, " << db.alphabet().size() << " items, "
      << db.ItemOccurrences() << " item occurrences\n";
  if (!f.output.empty()) WriteFile(f.output, FormatTransactionDb(db));
  return kOk;
}

int CmdAnonymize(const Flags& f, std::ostream& out) {
  std::map<std::string, Generalization> qi;
  for (const auto& spec : f.quasi_ids) {
    auto colon = spec.find(':');
    std::string col = spec.substr(0, colon);
    std::string kind = colon == std::string::npos ? "code" : spec.substr(colon + 1);
    if (kind != "code" && kind != "numeric") {
      throw CLI::ValidationError("--qi", "kind must be code or numeric: " + spec);
    }
    qi[col] = kind == "code" ? Generalization::kCode : Generalization::kNumeric;
  }
  const std::string csv = FormatAnonymizedCsv(KAnonymize(LoadRelationCsv(f.input), qi, f.k));
  if (f.output.empty()) {
    out << csv;
  } else {
    WriteFile(f.output, csv);
  }
  return kOk;
}

int CmdPartition(const Flags& f, std::ostream& out) {
  const TransactionDatabase db = LoadTransactionFile(f.input);
  const std::string name = f.name.empty() ? fs::path(f.input).stem().string() : f.name;
  if (db.alphabet().empty()) throw InvalidArgument("database " + name + " has no items");
  const std::size_t n = std::clamp<std::size_t>(f.parties, 1, db.alphabet().size());
  for (const auto& frag : PartitionVertical(db, BlockAssignment(db.alphabet(), n), name)) {
    const fs::path p = fs::path(f.output) / (frag.FragmentId() + ".frag");
    WriteFile(p, SerializeFragment(frag));
    out << p.string() << " party=" << frag.party.value << " items=" << frag.items.ToString()
        << "\n";
  }
  return kOk;
}

int CmdVerifyFragment(const Flags& f, std::ostream& out) {
  const Fragment frag = LoadFragmentFile(f.input);
  out << frag.FragmentId() << " ok " << ToHex(frag.digest) << "\n";
  return kOk;
}

int CmdKeygen(const Flags& f, std::ostream& out) {
  const std::string key = FormatKey(KeyFromSeed(RequireSeed(f))) + "\n";
  if (f.output.empty()) {
    out << key;
  } else {
    WriteFile(f.output, key);
  }
  return kOk;
}

int CmdMine(const Flags& f, std::ostream& out) {
  const std::uint64_t seed = RequireSeed(f);
  Source src = LoadSource(f.dbs.at(0), f.parties);
  cloud::Topology topo = ResolveTopology(f);
  cloud::Cluster cluster(topo);
  cluster.PlaceFragments(src.fragments);
  const cloud::JobResult r = cluster.Submit(MineJob(f, src.name));

  std::ostringstream config;
  config << "topology=" << ToHex(Sha256(cloud::FormatTopologyConfig(topo))) << "\n"
         << "min_count=" << f.min_count << "\ntheta=" << f.theta << "\ntau=" << f.tau
         << "\nparties=" << src.fragments.size() << "\n";
  for (const auto& frag : src.fragments) config << "fragment=" << ToHex(frag.digest) << "\n";
  const std::string run_id =
      std::to_string(seed) + "-" + ToHex(Sha256(config.str())).substr(0, 12);
  const fs::path dir = fs::path(f.out_dir) / run_id;

  WriteFile(dir / "codetable.txt", r.payload);
  std::string trace;
  for (const auto& rec : r.mining->trace) trace += rec.ToLine() + "\n";
  WriteFile(dir / "trace.log", trace);
  fs::create_directories(dir / "transcripts");
  std::size_t i = 0;
  for (const auto& t : r.mining->transcripts) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04zu.log", i++);
    WriteFile(dir / "transcripts" / name, "candidate=" + t.candidate.ToString() + "\n" +
                                              t.transcript.ToLog());
  }
  std::string events;
  for (const auto& line : r.trace) events += line + "\n";
  WriteFile(dir / "events.log", events);
  WriteFile(dir / "bench.csv", BenchHeader() + BenchRow(topo.name, r));
  out << "run " << run_id << " -> " << dir.string() << "\n" << r.payload;
  return kOk;
}

struct Deployment {
  std::unique_ptr<cloud::Cluster> cluster;
  QueryCatalog catalog;
};

Deployment Deploy(const Flags& f) {
  Deployment d;
  d.cluster = std::make_unique<cloud::Cluster>(ResolveTopology(f));
  for (auto& src : LoadSources(f)) {
    if (d.catalog.contains(src.name)) throw InvalidArgument("duplicate database " + src.name);
    d.cluster->PlaceFragments(src.fragments);
    cloud::JobResult r = d.cluster->Submit(MineJob(f, src.name));
    d.catalog[src.name] = QueryDatabase{std::move(src.fragments), r.model->table};
  }
  return d;
}

QueryAst ParseWithMode(const std::string& text, const std::string& mode,
                       const QueryCatalog& catalog) {
  std::set<std::string> names;
  for (const auto& [name, _] : catalog) names.insert(name);
  QueryAst ast = ParseQuery(text, &names);
  static const std::regex kModeClause(R"(\bmode\b)", std::regex::icase);
  if (!mode.empty() && !std::regex_search(text, kModeClause)) {
    ast.mode = mode == "exact" ? QueryMode::kExact : QueryMode::kModel;
  }
  return ast;
}

int CmdQuery(const Flags& f, std::ostream& out) {
  const std::uint64_t seed = RequireSeed(f);
  const UserKey user_key = LoadKeyFile(f.key_path);
  const UserKey seal_key = f.enc_key_path.empty() ? user_key : LoadKeyFile(f.enc_key_path);
  Deployment d = Deploy(f);
  QueryOptions opts;
  opts.seed = seed;
  opts.protocol.tau = f.tau;
  const QueryResult result = ExecuteQuery(ParseWithMode(f.text, f.mode, d.catalog), d.catalog, opts);
  const SealedAnswer sealed = EncryptAnswer(result, seal_key, seed);
  if (f.raw) {
    out << sealed.ToBase64() << "\n";
    return kOk;
  }
  const QueryResult decoded = DecryptAnswer(sealed, user_key);
  out << FormatResult(decoded);
  if (f.symbols) out << FormatSymbols(decoded);
  return kOk;
}

int CmdDecrypt(const Flags& f, std::ostream& out) {
  std::string text;
  if (f.input.empty() || f.input == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    text = ReadFile(f.input);
  }
  const QueryResult r = DecryptAnswer(SealedAnswer::FromBase64(text), LoadKeyFile(f.key_path));
  out << FormatResult(r);
  if (f.symbols) out << FormatSymbols(r);
  return kOk;
}

int CmdBench(const Flags& f, std::ostream& out) {
  RequireSeed(f);
  Source src = LoadSource(f.dbs.at(0), f.parties);
  std::string csv = BenchHeader();
  std::optional<std::string> first_payload;
  bool equal = true;
  for (cloud::Scenario s : cloud::kAllScenarios) {
    cloud::Cluster cluster(cloud::BuildPreset(s));
    cluster.PlaceFragments(src.fragments);
    const cloud::JobResult r = cluster.Submit(MineJob(f, src.name));
    if (!first_payload) first_payload = r.payload;
    equal = equal && r.payload == *first_payload;
    csv += BenchRow(std::string(cloud::ScenarioName(s)), r);
  }
  out << csv << "payload-equal=" << (equal ? "true" : "false") << "\n";
  if (!f.output.empty()) WriteFile(f.output, csv);
  return equal ? kOk : kFailure;
}

json ClusterJson(const cloud::Cluster& cluster) {
  const auto& topo = cluster.topology();
  const auto load = cluster.Load();
  json j;
  j["name"] = topo.name;
  j["csps"] = json::array();
  for (const auto& csp : topo.csps) {
    json jc{{"name", csp.name}, {"alpha", csp.alpha}, {"clouds", json::array()}};
    for (const auto& c : topo.clouds) {
      if (c.csp != csp.name) continue;
      json jcl{{"name", c.name}, {"nodes", json::array()}};
      for (const auto& n : topo.nodes) {
        if (n.cloud != c.name) continue;
        jcl["nodes"].push_back({{"id", n.id},
                                {"role", n.role == cloud::NodeRole::kMaster ? "master" : "slave"},
                                {"stores_data", n.stores_data},
                                {"up", n.up},
                                {"fragments", load.at(n.id)}});
      }
      jc["clouds"].push_back(std::move(jcl));
    }
    j["csps"].push_back(std::move(jc));
  }
  j["databases"] = cluster.Databases();
  return j;
}

json ErrorJson(const std::exception& e, int code) {
  return json{{"error", e.what()}, {"code", code}};
}

int ExitCodeFor(const std::exception& e);

int CmdServe(const Flags& f, std::ostream& out) {
  const std::uint64_t seed = RequireSeed(f);
  const UserKey key = LoadKeyFile(f.key_path);
  Deployment d = Deploy(f);
  std::mutex mu;
  httplib::Server server;
  auto reply = [](httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  auto guarded = [&](auto&& handler) {
    return [&, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        std::lock_guard lock(mu);
        handler(req, res);
      } catch (const std::exception& e) {
        const int code = ExitCodeFor(e);
        reply(res, ErrorJson(e, code), code == kAuth ? 403 : code == kFailure ? 500 : 400);
      }
    };
  };
  server.Post("/query", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    const std::string text = body.at("text").get<std::string>();
    const std::string mode = body.value("mode", std::string());
    if (!mode.empty() && mode != "model" && mode != "exact") {
      throw InvalidArgument("mode must be model or exact");
    }
    QueryOptions opts;
    opts.seed = seed;
    opts.protocol.tau = f.tau;
    const QueryResult r = ExecuteQuery(ParseWithMode(text, mode, d.catalog), d.catalog, opts);
    reply(res, {{"answer", EncryptAnswer(r, key, seed).ToBase64()}});
  }));
  server.Get("/cluster", guarded([&](const httplib::Request&, httplib::Response& res) {
    reply(res, ClusterJson(*d.cluster));
  }));
  server.Get("/codetable", guarded([&](const httplib::Request& req, httplib::Response& res) {
    json j = json::object();
    for (const auto& [name, db] : d.catalog) {
      if (req.has_param("db") && req.get_param_value("db") != name) continue;
      json entries = json::array();
      for (std::size_t i = 0; i < db.model.size(); ++i) {
        const auto& e = db.model[i];
        auto bits = db.model.CodeLength(i);
        entries.push_back({{"symbol", i},
                           {"items", std::vector<Item>(e.items.begin(), e.items.end())},
                           {"usage", e.usage},
                           {"bits", bits ? json(*bits) : json(nullptr)}});
      }
      j[name] = std::move(entries);
    }
    reply(res, j);
  }));
  server.Post("/rebalance", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    const std::string action = body.at("action").get<std::string>();
    const std::string node = body.at("node").get<std::string>();
    if (action == "add") {
      d.cluster->AddNode(body.at("cloud").get<std::string>(), node);
    } else if (action == "remove") {
      d.cluster->RemoveNode(node);
    } else {
      throw InvalidArgument("action must be add or remove");
    }
    reply(res, ClusterJson(*d.cluster));
  }));
  out << "serving on http://" << f.host << ":" << f.port << "\n" << std::flush;
  if (!server.listen(f.host, f.port)) throw Error("cannot listen on port " + std::to_string(f.port));
  return kOk;
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const CLI::Error*>(&e)) return kUsage;
  if (dynamic_cast<const json::exception*>(&e)) return kParse;
  if (dynamic_cast<const ParseError*>(&e)) return kParse;
  if (dynamic_cast<const QuerySyntaxError*>(&e)) return kParse;
  if (dynamic_cast<const IntegrityError*>(&e)) return kIntegrity;
  if (dynamic_cast<const ProtocolError*>(&e)) return kProtocol;
  if (dynamic_cast<const AuthError*>(&e)) return kAuth;
  if (dynamic_cast<const ModelInsufficient*>(&e)) return kModelInsufficient;
  if (dynamic_cast<const InvalidArgument*>(&e)) return kUsage;
  return kFailure;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Federated MDL pattern mining over simulated multi-cloud fragments", "fedmdl"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", f.seed, "Seed for all randomness"); };
  auto add_mining = [&](CLI::App* c) {
    c->add_option("--scenario", f.scenario, "Topology preset")
        ->check(CLI::IsMember({"standalone", "one-cloud", "multi-cloud", "heterogeneous"}));
    c->add_option("--topology", f.topology_config, "Topology config file (overrides --scenario)")
        ->check(CLI::ExistingFile);
    c->add_option("--min-count", f.min_count, "Minimum joined support (>= 1)")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
    c->add_option("--theta", f.theta, "PruningMerging frequency ratio")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--tau", f.tau, "Collision threshold")->check(CLI::Range(0.0, 1.0));
    c->add_option("--parties", f.parties, "Parties for a transaction-file input")
        ->check(CLI::PositiveNumber);
    c->add_option("--workers", f.workers, "Counting workers (0 = hardware)");
    add_seed(c);
  };

  auto* ingest = app.add_subcommand("ingest", "Load a transaction file and report its size");
  ingest->add_option("path", f.input)->required();
  ingest->add_option("--out", f.output, "Write the normalized database here");
  ingest->callback([&] { action = [&] { return CmdIngest(f, out); }; });

  auto* anon = app.add_subcommand("anonymize", "k-anonymize a CSV relation");
  anon->add_option("path", f.input)->required()->check(CLI::ExistingFile);
  anon->add_option("--k", f.k, "Anonymity level")->required();
  anon->add_option("--qi", f.quasi_ids, "Quasi-identifier as column[:code|numeric]")->required();
  anon->add_option("--out", f.output);
  anon->callback([&] { action = [&] { return CmdAnonymize(f, out); }; });

  auto* part = app.add_subcommand("partition", "Split a database into vertical fragments");
  part->add_option("path", f.input)->required();
  part->add_option("--parties", f.parties)->check(CLI::PositiveNumber);
  part->add_option("--name", f.name, "Database name (default: file stem)");
  part->add_option("--out", f.output, "Output directory")->required();
  part->callback([&] { action = [&] { return CmdPartition(f, out); }; });

  auto* verify = app.add_subcommand("verify-fragment", "Check a fragment's digest");
  verify->add_option("path", f.input)->required();
  verify->callback([&] { action = [&] { return CmdVerifyFragment(f, out); }; });

  auto* keygen = app.add_subcommand("keygen", "Derive a user key from a seed");
  add_seed(keygen);
  keygen->add_option("--out", f.output);
  keygen->callback([&] { action = [&] { return CmdKeygen(f, out); }; });

  auto* mine = app.add_subcommand("mine", "Mine the global code table");
  mine->add_option("--db", f.dbs, "Transaction file or fragment directory")->required();
  mine->add_option("--out", f.out_dir, "Output root");
  add_mining(mine);
  mine->callback([&] { action = [&] { return CmdMine(f, out); }; });

  auto* query = app.add_subcommand("query", "Run a query and decrypt the answer");
  query->add_option("text", f.text)->required();
  query->add_option("--db", f.dbs, "[name=]path, repeatable")->required();
  query->add_option("--key", f.key_path, "User key file")->required();
  query->add_option("--enc-key", f.enc_key_path, "Key the answer is sealed for (default --key)");
  query->add_option("--mode", f.mode, "Mode when the query has no MODE clause")
      ->check(CLI::IsMember({"model", "exact"}));
  query->add_flag("--raw", f.raw, "Print the sealed answer instead of decrypting");
  query->add_flag("--symbols", f.symbols, "Also print the symbol table");
  add_mining(query);
  query->callback([&] { action = [&] { return CmdQuery(f, out); }; });

  auto* decrypt = app.add_subcommand("decrypt", "Decrypt a raw answer");
  decrypt->add_option("path", f.input, "Base64 answer file (default stdin)");
  decrypt->add_option("--key", f.key_path)->required();
  decrypt->add_flag("--symbols", f.symbols);
  decrypt->callback([&] { action = [&] { return CmdDecrypt(f, out); }; });

  auto* bench = app.add_subcommand("bench", "Mine under all four presets and compare");
  bench->add_option("--db", f.dbs)->required();
  bench->add_option("--out", f.output, "Write the table as CSV here");
  add_mining(bench);
  bench->callback([&] { action = [&] { return CmdBench(f, out); }; });

  auto* serve = app.add_subcommand("serve", "HTTP+JSON endpoint for the console");
  serve->add_option("--db", f.dbs)->required();
  serve->add_option("--key", f.key_path)->required();
  serve->add_option("--host", f.host);
  serve->add_option("--port", f.port)->check(CLI::Range(0, 65535));
  add_mining(serve);
  serve->callback([&] { action = [&] { return CmdServe(f, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    if (const auto* jf = dynamic_cast<const JobFailure*>(&e)) err << jf->partial_trace();
    return ExitCodeFor(e);
  }
}

}  // namespace fedmdl::cli
