#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tsnr/scenario.hpp"

namespace tsnr {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
}

std::int64_t get_int(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail(where, std::string("'") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

template <typename T>
void opt_int(const json& j, const char* key, const std::string& where, T& out, std::int64_t scale = 1) {
  if (j.contains(key)) out = static_cast<T>(get_int(j, key, where) * scale);
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

Rational get_rational(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return rat(v.get<std::int64_t>());
    if (v.is_number_float()) return parse_rational(v.dump());
  } catch (const std::exception& e) {
    fail(where, std::string("'") + key + "': " + e.what());
  }
  fail(where, std::string("'") + key + "' must be a number or a fraction string");
}

bool get_bool(const json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) fail(where, std::string("'") + key + "' must be true or false");
  return v.get<bool>();
}

NodeKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "host") return NodeKind::Host;
  if (s == "switch") return NodeKind::Switch;
  fail(where, "node kind must be 'host' or 'switch'");
}

CtMode parse_ct_mode(const std::string& s) {
  if (s == "bect" || s == "BECT") return CtMode::BECT;
  if (s == "pct" || s == "PCT") return CtMode::PCT;
  throw ConfigError("ct_mode must be 'bect' or 'pct'");
}

GeneratorSpec parse_generator(const json& j) {
  const std::string w = "topology.generator";
  GeneratorSpec g;
  g.type = get_string(j, "type", w);
  if (g.type == "study") {
    check_keys(j, w, {"type", "N", "M", "ct_mode", "stage_budget_us", "aggregate_budget_us", "deadline_us",
                      "bect_load"});
    opt_int(j, "N", w, g.study.inputs);
    opt_int(j, "M", w, g.study.stages);
    if (j.contains("ct_mode")) g.study.ct_mode = parse_ct_mode(get_string(j, "ct_mode", w));
    opt_int(j, "stage_budget_us", w, g.study.stage_budget, 1000);
    opt_int(j, "aggregate_budget_us", w, g.study.aggregate_budget, 1000);
    opt_int(j, "deadline_us", w, g.study.deadline, 1000);
    if (j.contains("bect_load")) {
      if (!j.at("bect_load").is_number()) fail(w, "bect_load must be a number");
      g.study.bect_load = j.at("bect_load").get<double>();
      if (!(g.study.bect_load > 0.0 && g.study.bect_load <= 1.0)) fail(w, "bect_load must be in (0, 1]");
    }
  } else if (g.type == "ivn") {
    check_keys(j, w, {"type", "cameras", "camera_total_bps", "can_services", "ecus_per_zone", "be_flows",
                      "start_scatter_us", "deadline_us", "seed"});
    opt_int(j, "cameras", w, g.ivn.cameras);
    opt_int(j, "camera_total_bps", w, g.ivn.camera_total_bps);
    opt_int(j, "can_services", w, g.ivn.can_services);
    opt_int(j, "ecus_per_zone", w, g.ivn.ecus_per_zone);
    opt_int(j, "be_flows", w, g.ivn.be_flows);
    opt_int(j, "start_scatter_us", w, g.ivn.start_scatter, 1000);
    opt_int(j, "deadline_us", w, g.ivn.deadline, 1000);
    opt_int(j, "seed", w, g.ivn.seed);
  } else if (g.type == "motivation") {
    check_keys(j, w, {"type", "capacity_bps", "interval_us", "second_flow"});
    opt_int(j, "capacity_bps", w, g.motivation.capacity_bps);
    opt_int(j, "interval_us", w, g.motivation.interval, 1000);
    if (j.contains("second_flow")) g.motivation.second_flow = get_bool(j, "second_flow", w);
  } else {
    fail(w, "unknown generator type '" + g.type + "'");
  }
  return g;
}

QosOptions parse_qos(const json& j, const std::string& w) {
  check_keys(j, w, {"max_payload", "min_interval_us", "max_burst", "deadline_us", "priority", "transport", "wire_frame"});
  QosOptions q;
  q.max_payload = get_int(j, "max_payload", w);
  q.min_interval_us = get_int(j, "min_interval_us", w);
  q.max_burst = j.contains("max_burst") ? get_int(j, "max_burst", w) : q.max_payload;
  if (j.contains("deadline_us")) q.deadline_us = get_int(j, "deadline_us", w);
  if (j.contains("priority")) q.priority = static_cast<int>(get_int(j, "priority", w));
  if (j.contains("wire_frame")) q.wire_frame = get_int(j, "wire_frame", w);
  if (j.contains("transport")) {
    auto t = get_string(j, "transport", w);
    if (t == "udp") q.transport = Transport::UDP;
    else if (t == "tcp") q.transport = Transport::TCP;
    else fail(w, "transport must be 'udp' or 'tcp'");
  }
  try {
    q.validate();
  } catch (const NegotiationError& e) {
    fail(w, e.what());
  }
  return q;
}

ServiceConfig parse_service(const json& j, std::size_t index) {
  const std::string w = "services[" + std::to_string(index) + "]";
  check_keys(j, w, {"name", "publisher", "family", "qos", "subscribers", "offer_us", "denied", "send", "send_class",
                    "send_wire_frame", "send_load"});
  ServiceConfig s;
  s.name = get_string(j, "name", w);
  s.publisher = get_string(j, "publisher", w);
  if (j.contains("family")) s.family = get_string(j, "family", w);
  if (j.contains("qos")) s.qos = parse_qos(j.at("qos"), w + ".qos");
  if (j.contains("subscribers")) {
    for (const auto& sub : j.at("subscribers")) {
      SubscriberConfig c;
      if (sub.is_string()) {
        c.node = sub.get<std::string>();
      } else {
        check_keys(sub, w + ".subscribers", {"node", "deadline_us", "start_us"});
        c.node = get_string(sub, "node", w);
        if (sub.contains("deadline_us")) c.deadline_us = get_int(sub, "deadline_us", w);
        opt_int(sub, "start_us", w, c.start, 1000);
      }
      s.subscribers.push_back(c);
    }
  }
  opt_int(j, "offer_us", w, s.offer_time, 1000);
  if (j.contains("denied"))
    for (const auto& d : j.at("denied")) s.denied.push_back(d.get<std::string>());
  if (j.contains("send")) {
    auto m = get_string(j, "send", w);
    if (m == "contract") s.send = SendMode::Contract;
    else if (m == "saturating") s.send = SendMode::Saturating;
    else if (m == "silent") s.send = SendMode::Silent;
    else fail(w, "send must be contract, saturating or silent");
  }
  if (j.contains("send_class")) s.send_class = parse_class(get_string(j, "send_class", w));
  if (j.contains("send_wire_frame")) s.send_wire_frame = get_int(j, "send_wire_frame", w);
  if (j.contains("send_load")) {
    if (!j.at("send_load").is_number()) fail(w, "send_load must be a number");
    s.send_load = j.at("send_load").get<double>();
    if (!(s.send_load > 0.0 && s.send_load <= 1.0)) fail(w, "send_load must be in (0, 1]");
  }
  return s;
}

void parse_topology(const json& j, Scenario& s) {
  const std::string w = "topology";
  check_keys(j, w, {"nodes", "links", "generator"});
  if (j.contains("generator")) {
    if (j.contains("nodes") || j.contains("links")) fail(w, "generator and explicit nodes are exclusive");
    s = generate(parse_generator(j.at("generator")));
    return;
  }
  for (const auto& n : j.at("nodes")) {
    check_keys(n, "topology.nodes", {"name", "kind", "role"});
    NodeDescription d;
    d.name = get_string(n, "name", "topology.nodes");
    d.kind = parse_kind(get_string(n, "kind", "topology.nodes"), "topology.nodes");
    if (n.contains("role")) d.role = get_string(n, "role", "topology.nodes");
    s.topology.nodes.push_back(d);
  }
  for (const auto& l : j.at("links")) {
    const std::string lw = "topology.links";
    check_keys(l, lw, {"a", "b", "capacity_bps", "propagation_ns", "forwarding_ns", "duplex"});
    LinkDescription d;
    d.a = get_string(l, "a", lw);
    d.b = get_string(l, "b", lw);
    d.capacity_bps = get_int(l, "capacity_bps", lw);
    opt_int(l, "propagation_ns", lw, d.propagation_delay);
    opt_int(l, "forwarding_ns", lw, d.forwarding_delay);
    if (l.contains("duplex")) d.duplex = get_bool(l, "duplex", lw);
    s.topology.links.push_back(d);
  }
}

void parse_constants(const json& j, Scenario& s) {
  const std::string w = "constants";
  check_keys(j, w, {"l_max_bits", "l_min_bits", "admission_fraction", "cmi_a_us", "cmi_b_us", "class_a_cutoff_us", "pcp_map"});
  opt_int(j, "l_max_bits", w, s.constants.l_max);
  opt_int(j, "l_min_bits", w, s.constants.l_min);
  if (j.contains("admission_fraction")) s.constants.admission_fraction = get_rational(j, "admission_fraction", w);
  opt_int(j, "cmi_a_us", w, s.constants.cmi_a, 1000);
  opt_int(j, "cmi_b_us", w, s.constants.cmi_b, 1000);
  opt_int(j, "class_a_cutoff_us", w, s.priority.class_a_cutoff, 1000);
  if (j.contains("pcp_map")) {
    s.priority.pcp_map.clear();
    for (auto it = j.at("pcp_map").begin(); it != j.at("pcp_map").end(); ++it) {
      int pcp = 0;
      try {
        pcp = std::stoi(it.key());
      } catch (const std::exception&) {
        fail(w, "pcp_map key '" + it.key() + "' is not a number");
      }
      s.priority.pcp_map[pcp] = parse_class(it.value().get<std::string>());
    }
  }
  try {
    s.constants.validate();
  } catch (const ModelError& e) {
    fail(w, e.what());
  }
}

void parse_control(const json& j, Scenario& s) {
  const std::string w = "control";
  check_keys(j, w, {"switch_forwarding_ns", "switch_processing_ns", "controller_processing_ns", "control_link_bps",
                    "control_link_propagation_ns", "message_bytes", "retry_interval_ns", "retries"});
  auto& c = s.control;
  opt_int(j, "switch_forwarding_ns", w, c.switch_forwarding);
  opt_int(j, "switch_processing_ns", w, c.switch_processing);
  opt_int(j, "controller_processing_ns", w, c.controller_processing);
  opt_int(j, "control_link_bps", w, c.control_link_bps);
  opt_int(j, "control_link_propagation_ns", w, c.control_link_propagation);
  opt_int(j, "message_bytes", w, c.message_bytes);
  opt_int(j, "retry_interval_ns", w, c.retry_interval);
  opt_int(j, "retries", w, c.retries);
}

void parse_budgets(const json& j, Scenario& s) {
  const std::string w = "budgets";
  check_keys(j, w, {"automatic", "roles", "queues", "default_us", "utilization_target", "iterations"});
  auto& b = s.budgets;
  if (j.contains("automatic")) b.automatic = get_bool(j, "automatic", w);
  if (j.contains("roles")) {
    b.role_defaults.clear();
    for (auto it = j.at("roles").begin(); it != j.at("roles").end(); ++it) {
      if (!it.value().is_number_integer()) fail(w, "role budgets are integers in microseconds");
      b.role_defaults[it.key()] = it.value().get<std::int64_t>() * 1000;
    }
  }
  if (j.contains("queues")) {
    b.queues.clear();
    for (const auto& q : j.at("queues")) {
      check_keys(q, "budgets.queues", {"node", "next", "class", "budget_us"});
      QueueBudgetOverride o;
      o.node = get_string(q, "node", w);
      o.next = get_string(q, "next", w);
      if (q.contains("class")) o.cls = parse_class(get_string(q, "class", w));
      o.budget = get_int(q, "budget_us", w) * 1000;
      b.queues.push_back(o);
    }
  }
  if (j.contains("default_us")) b.default_budget = get_int(j, "default_us", w) * 1000;
  if (j.contains("utilization_target")) b.utilization_target = get_rational(j, "utilization_target", w);
  opt_int(j, "iterations", w, b.iterations);
}

void parse_sim(const json& j, Scenario& s) {
  const std::string w = "sim";
  check_keys(j, w, {"duration_ms", "duration_us", "seed", "phase_jitter_us", "be_queue_limit", "traffic_start_us",
                    "start_scatter_us", "preinstalled"});
  auto& m = s.sim;
  opt_int(j, "duration_ms", w, m.duration, 1'000'000);
  opt_int(j, "duration_us", w, m.duration, 1000);
  opt_int(j, "seed", w, m.seed);
  opt_int(j, "phase_jitter_us", w, m.phase_jitter, 1000);
  opt_int(j, "be_queue_limit", w, m.be_queue_limit);
  opt_int(j, "traffic_start_us", w, m.traffic_start, 1000);
  opt_int(j, "start_scatter_us", w, m.start_scatter, 1000);
  if (j.contains("preinstalled")) m.preinstalled = get_bool(j, "preinstalled", w);
  if (m.duration < 0 || m.be_queue_limit < 1) fail(w, "duration must be non-negative and the queue limit positive");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  Scenario s;
  try {
    check_keys(j, "scenario", {"name", "topology", "constants", "control", "services", "scheme", "budgets", "sim"});
    if (j.contains("topology")) parse_topology(j.at("topology"), s);
    if (j.contains("name")) s.name = get_string(j, "name", "scenario");
    if (j.contains("constants")) parse_constants(j.at("constants"), s);
    if (j.contains("control")) parse_control(j.at("control"), s);
    if (j.contains("scheme")) s.scheme = parse_scheme(get_string(j, "scheme", "scenario"));
    if (j.contains("budgets")) parse_budgets(j.at("budgets"), s);
    if (j.contains("sim")) parse_sim(j.at("sim"), s);
    if (j.contains("services")) {
      s.services.clear();
      std::size_t i = 0;
      for (const auto& svc : j.at("services")) s.services.push_back(parse_service(svc, i++));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
  s.source_json = json_text;
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

Scenario apply_axis(const Scenario& base, const std::string& axis, const std::string& value) {
  auto number = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<std::int64_t>(x);
    } catch (const std::exception&) {
      throw ConfigError("sweep value '" + v + "' for " + axis + " is not an integer");
    }
  };
  if (axis == "seed") {
    Scenario s = base;
    s.sim.seed = static_cast<std::uint64_t>(number(value));
    return s;
  }
  if (axis == "scheme") {
    Scenario s = base;
    s.scheme = parse_scheme(value);
    return s;
  }
  if (axis == "N" || axis == "M" || axis == "ct_mode") {
    if (!base.generator || base.generator->type != "study") throw ConfigError("axis " + axis + " needs the study generator");
    if (!base.source_json.empty()) {
      json j = json::parse(base.source_json);
      auto& g = j["topology"]["generator"];
      if (axis == "ct_mode") g[axis] = value;
      else g[axis] = number(value);
      Scenario s = parse_scenario(j.dump());
      s.sim.seed = base.sim.seed;
      s.scheme = base.scheme;
      return s;
    }
    GeneratorSpec g = *base.generator;
    if (axis == "N") g.study.inputs = static_cast<int>(number(value));
    else if (axis == "M") g.study.stages = static_cast<int>(number(value));
    else g.study.ct_mode = parse_ct_mode(value);
    g.study.scheme = base.scheme;
    Scenario s = generate(g);
    s.sim = base.sim;
    return s;
  }
  throw ConfigError("unknown sweep axis '" + axis + "'");
}

}  // namespace tsnr
