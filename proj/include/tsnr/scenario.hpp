#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsnr/budget.hpp"
#include "tsnr/model.hpp"
#include "tsnr/negotiation.hpp"
#include "tsnr/reservation.hpp"

namespace tsnr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SendMode : std::uint8_t { Contract, Saturating, Silent };

struct SubscriberConfig {
  std::string node;
  std::optional<std::int64_t> deadline_us;
  Nanos start = 0;
};

struct ServiceConfig {
  std::string name;
  std::string publisher;
  std::string family;
  std::optional<QosOptions> qos;
  std::vector<SubscriberConfig> subscribers;
  Nanos offer_time = 0;
  std::vector<std::string> denied;
  // Data-plane behaviour, which may differ from the negotiated contract.
  SendMode send = SendMode::Contract;
  std::optional<TrafficClass> send_class;
  std::optional<std::int64_t> send_wire_frame;  // bytes without IFG and safety byte
  double send_load = 1.0;                       // saturating sources only
};

enum class CtMode : std::uint8_t { BECT, PCT };

struct StudyParams {
  int inputs = 4;   // N publishers, 2..13
  int stages = 5;   // M switch stages, 1..15
  CtMode ct_mode = CtMode::BECT;
  Scheme scheme = Scheme::DelayBudget;
  Nanos stage_budget = 300'000;
  Nanos aggregate_budget = 5'000'000;
  Nanos deadline = 9'250'000;
  double bect_load = 1.0;  // share of the link used by each best-effort cross source
};

struct IvnParams {
  int cameras = 8;
  std::int64_t camera_total_bps = 800'000'000;
  int can_services = 204;
  int ecus_per_zone = 3;
  int be_flows = 0;
  Nanos start_scatter = 10'000'000;
  Nanos deadline = 1'000'000;
  std::uint64_t seed = 7;
  Scheme scheme = Scheme::DelayBudget;
};

struct MotivationParams {
  std::int64_t capacity_bps = 100'000'000;
  Nanos interval = 10'000'000;
  bool second_flow = true;
};

struct GeneratorSpec {
  std::string type;  // "study", "ivn", "motivation"
  StudyParams study;
  IvnParams ivn;
  MotivationParams motivation;
};

struct ScenarioSim {
  Nanos duration = 1'000'000'000;
  std::uint64_t seed = 1;
  Nanos phase_jitter = 0;
  int be_queue_limit = 100;
  Nanos traffic_start = 2'000'000;
  Nanos start_scatter = 0;  // subscriber starts shifted by U[0, start_scatter]
  bool preinstalled = false;
};

struct Scenario {
  std::string name;
  TopologyDescription topology;
  NetworkConstants constants;
  PriorityConfig priority;
  ControlTiming control;
  Scheme scheme = Scheme::DelayBudget;
  BudgetConfig budgets;
  std::vector<ServiceConfig> services;
  ScenarioSim sim;
  std::optional<GeneratorSpec> generator;
  std::string source_json;  // file contents when loaded, used to re-apply sweep values
};

Scenario study_scenario(const StudyParams& p);
Scenario ivn_like_scenario(const IvnParams& p);
Scenario motivation_scenario(const MotivationParams& p);
Scenario generate(const GeneratorSpec& g);

// Frame sizes of the parameter study, rounded down to whole bytes (without IFG and safety byte).
std::int64_t study_publisher_frame(int inputs);
std::int64_t study_cross_frame(int inputs);

// Reservation-time view of the services: one flow per service over shortest paths.
std::vector<FlowSpec> anticipated_flows(const Scenario& s, const Topology& topology);

Scenario load_scenario_file(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

// Sweep axis values: "a..b" (integers, inclusive) or "v1,v2,...".
std::vector<std::string> expand_axis(const std::string& spec);
// Applies one sweep value; throws ConfigError when the axis does not fit the scenario.
Scenario apply_axis(const Scenario& base, const std::string& axis, const std::string& value);

}  // namespace tsnr
