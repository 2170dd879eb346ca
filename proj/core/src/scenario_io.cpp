#include "didcnc/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace didcnc {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ScenarioError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw ScenarioError(where + "." + key + ": unknown key");
  }
}

const json& require(const json& obj, const std::string& where,
                    const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ScenarioError(where + "." + key + ": missing required field");
  }
  return *it;
}

double number(const json& value, const std::string& where) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    try {
      return parse_rational(value.get<std::string>());
    } catch (const ScenarioError& e) {
      throw ScenarioError(where + ": " + e.what());
    }
  }
  throw ScenarioError(where + ": expected a number");
}

std::string text(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw ScenarioError(where + ": expected a string");
}

NodeId node_ref(const NetworkGraph& g, const json& value,
                const std::string& where) {
  const std::string name = text(value, where);
  if (auto id = g.find_node(name)) return *id;
  throw ScenarioError(where + ": unknown node id \"" + name + "\"");
}

}  // namespace

double parse_rational(std::string_view s) {
  auto parse = [&](std::string_view part) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw ScenarioError("malformed number \"" + std::string(s) + "\"");
    }
    return v;
  };
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse(s);
  const double den = parse(s.substr(slash + 1));
  if (den == 0.0) throw ScenarioError("zero denominator in \"" + std::string(s) + "\"");
  return parse(s.substr(0, slash)) / den;
}

Scenario parse_scenario(std::string_view input) {
  json doc;
  try {
    doc = json::parse(input.begin(), input.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  reject_unknown_keys(doc, "scenario",
                      {"nodes", "links", "databases", "clients", "slots",
                       "seed", "alpha_proc", "alpha_tx", "policy",
                       "max_arrivals_per_slot"});

  Scenario s;
  NetworkGraph& g = s.graph;

  const json& nodes = require(doc, "scenario", "nodes");
  if (!nodes.is_array()) throw ScenarioError("nodes: expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    reject_unknown_keys(nodes[i], where, {"id", "capacity"});
    g.add_node(text(require(nodes[i], where, "id"), where + ".id"),
               number(require(nodes[i], where, "capacity"),
                      where + ".capacity"));
  }

  if (auto it = doc.find("links"); it != doc.end()) {
    if (!it->is_array()) throw ScenarioError("links: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& l = (*it)[i];
      const std::string where = "links[" + std::to_string(i) + "]";
      reject_unknown_keys(l, where, {"from", "to", "capacity"});
      const NodeId from = node_ref(g, require(l, where, "from"), where + ".from");
      const NodeId to = node_ref(g, require(l, where, "to"), where + ".to");
      try {
        g.add_link(from, to,
                   number(require(l, where, "capacity"), where + ".capacity"));
      } catch (const ScenarioError& e) {
        throw ScenarioError(where + ": " + e.what());
      }
    }
  }

  if (auto it = doc.find("databases"); it != doc.end()) {
    if (!it->is_object()) throw ScenarioError("databases: expected an object");
    for (const auto& [db, hosts] : it->items()) {
      const std::string where = "databases." + db;
      if (!hosts.is_array()) throw ScenarioError(where + ": expected an array");
      std::vector<NodeId> ids;
      for (const json& h : hosts) ids.push_back(node_ref(g, h, where));
      g.set_static_sources(db, std::move(ids));
    }
  }

  const json& clients = require(doc, "scenario", "clients");
  if (!clients.is_array()) throw ScenarioError("clients: expected an array");
  for (std::size_t c = 0; c < clients.size(); ++c) {
    const std::string where = "clients[" + std::to_string(c) + "]";
    const json& cj = clients[c];
    reject_unknown_keys(cj, where, {"source", "destination", "rate", "service"});
    ClientSpec client;
    client.source = node_ref(g, require(cj, where, "source"), where + ".source");
    client.destination =
        node_ref(g, require(cj, where, "destination"), where + ".destination");
    client.arrival_rate = number(require(cj, where, "rate"), where + ".rate");
    const json& service = require(cj, where, "service");
    if (!service.is_array()) {
      throw ScenarioError(where + ".service: expected an array");
    }
    for (std::size_t m = 0; m < service.size(); ++m) {
      const std::string fw = where + ".service[" + std::to_string(m) + "]";
      const json& fj = service[m];
      reject_unknown_keys(fj, fw,
                          {"scaling_factor", "workload", "database",
                           "merging_ratio"});
      FunctionSpec f;
      f.scaling_factor = number(require(fj, fw, "scaling_factor"),
                                fw + ".scaling_factor");
      f.workload = number(require(fj, fw, "workload"), fw + ".workload");
      f.database = text(require(fj, fw, "database"), fw + ".database");
      const json& zeta = require(fj, fw, "merging_ratio");
      if (!zeta.is_number_integer()) {
        throw ScenarioError(fw + ".merging_ratio: expected an integer");
      }
      f.merging_ratio = zeta.get<int>();
      client.service.functions.push_back(std::move(f));
    }
    s.clients.push_back(std::move(client));
  }

  if (auto it = doc.find("slots"); it != doc.end()) {
    if (!it->is_number_integer()) throw ScenarioError("slots: expected an integer");
    s.slot_count = it->get<std::int64_t>();
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned() && !it->is_number_integer()) {
      throw ScenarioError("seed: expected a non-negative integer");
    }
    s.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("alpha_proc"); it != doc.end()) {
    s.alpha_proc = number(*it, "alpha_proc");
  }
  if (auto it = doc.find("alpha_tx"); it != doc.end()) {
    s.alpha_tx = number(*it, "alpha_tx");
  }
  if (auto it = doc.find("policy"); it != doc.end()) {
    s.policy = parse_policy(text(*it, "policy"));
  }
  if (auto it = doc.find("max_arrivals_per_slot"); it != doc.end()) {
    if (!it->is_number_integer()) {
      throw ScenarioError("max_arrivals_per_slot: expected an integer");
    }
    s.max_arrivals_per_slot = it->get<int>();
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  const NetworkGraph& g = s.graph;
  json doc;
  json nodes = json::array();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    nodes.push_back({{"id", g.node_name(id)}, {"capacity", g.proc_capacity(id)}});
  }
  doc["nodes"] = std::move(nodes);
  json links = json::array();
  for (const Link& l : g.links()) {
    links.push_back({{"from", g.node_name(l.from)},
                     {"to", g.node_name(l.to)},
                     {"capacity", l.capacity}});
  }
  doc["links"] = std::move(links);
  json dbs = json::object();
  for (const auto& [db, hosts] : g.databases()) {
    json arr = json::array();
    for (NodeId h : hosts) arr.push_back(g.node_name(h));
    dbs[db] = std::move(arr);
  }
  doc["databases"] = std::move(dbs);
  json clients = json::array();
  for (const ClientSpec& c : s.clients) {
    json service = json::array();
    for (const FunctionSpec& f : c.service.functions) {
      service.push_back({{"scaling_factor", f.scaling_factor},
                         {"workload", f.workload},
                         {"database", f.database},
                         {"merging_ratio", f.merging_ratio}});
    }
    clients.push_back({{"source", g.node_name(c.source)},
                       {"destination", g.node_name(c.destination)},
                       {"rate", c.arrival_rate},
                       {"service", std::move(service)}});
  }
  doc["clients"] = std::move(clients);
  doc["slots"] = s.slot_count;
  doc["seed"] = s.seed;
  doc["alpha_proc"] = s.alpha_proc;
  doc["alpha_tx"] = s.alpha_tx;
  doc["policy"] = std::string(policy_name(s.policy));
  if (s.max_arrivals_per_slot) {
    doc["max_arrivals_per_slot"] = *s.max_arrivals_per_slot;
  }
  return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write scenario file " + path.string());
  out << serialize_scenario(scenario);
}

}  // namespace didcnc
