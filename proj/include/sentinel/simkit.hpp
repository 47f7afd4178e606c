#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sentinel/events.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::simkit {

/// Mean events per step for each ActionKind, indexed by the enum value.
using Rates = std::array<double, 5>;

/// Benign behaviour of one role.
struct RoleProfile {
  Rates rates{};
  double after_hours_login_prob = 0.02;
  double new_location_login_prob = 0.005;
  double sensitive_access_prob = 0.03;
  double external_export_prob = 0.05;
  double export_volume_median = 300;
  double export_volume_sigma = 0.6;  // log-space
  double external_email_prob = 0.2;
  std::int64_t external_export_cap = 2000;  // policy cap; benign volumes stay below
};

struct SimConfig {
  std::uint64_t seed = 1;
  Step total_steps = 240;
  Step warmup_steps = 60;

  std::map<Role, int> benign_population{{Role::staff, 14}, {Role::developer, 10}, {Role::admin, 6}};
  int power_users = 4;
  std::map<Scenario, int> scenario_assignment{{Scenario::exfiltration, 2},
                                              {Scenario::stealth, 2},
                                              {Scenario::takeover, 1},
                                              {Scenario::staging_exfiltration, 2},
                                              {Scenario::email_leakage, 1}};
  int compliance_approvals = 2;  // granted to the first power users

  std::map<Role, RoleProfile> roles = default_roles();

  /// Admin scheduled backups to the staging area, one every period steps.
  int backup_period_min = 8;
  int backup_period_max = 12;
  /// Approved bulk transfers by power users with compliance approval.
  int approved_transfer_gap_min = 25;
  int approved_transfer_gap_max = 40;
  /// Rare benign policy mistakes.
  double restricted_access_mistake_prob = 0.0005;
  double deny_domain_mistake_prob = 0.004;
  /// Share of benign external emails sent to personal webmail.
  double personal_email_prob = 0.02;

  /// Scripted misuse starts within this many steps after warm-up.
  Step script_start_min_offset = 5;
  Step script_start_max_offset = 60;

  std::set<std::string> deny_domains{"rival-corp.com", "filedrop.io"};
  /// Resource name -> roles allowed to touch it.
  std::map<std::string, std::set<Role>> restricted_resources{{"srv-admin-01", {Role::admin}},
                                                             {"srv-payroll-db", {Role::admin, Role::power_user}},
                                                             {"srv-research-vault", {Role::developer}}};

  static std::map<Role, RoleProfile> default_roles();
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  int malicious_count() const;
  int population() const;
};

enum class ActionTemplate {
  sensitive_access,
  rare_resource_access,  // restricted resource outside the actor's role
  large_external_export,
  small_external_export,
  external_export,
  staging_export,
  after_hours_login,
  new_location_login,
  external_email,
  suspicious_external_email,
};

struct Phase {
  Step offset_lo = 0;  // inclusive, relative to the script start
  Step offset_hi = 0;  // inclusive
  ActionTemplate action = ActionTemplate::sensitive_access;
  int intensity = 1;  // number of actions placed in the range
  std::int64_t volume_lo = 0;
  std::int64_t volume_hi = 0;
};

struct ScenarioScript {
  Scenario scenario = Scenario::exfiltration;
  Step start_step = 0;
  std::vector<Phase> phases;
};

struct ScriptedAction {
  Step step = 0;
  ActionTemplate action = ActionTemplate::sensitive_access;
  std::int64_t volume = 0;
};

/// Phase list for one scenario; episode spacing is drawn from `seed`.
ScenarioScript expand_scenario(Scenario scenario, std::uint64_t seed, Step start_step);
/// Places each phase's actions at seeded steps inside its offset range,
/// sorted by step (ties keep phase order).
std::vector<ScriptedAction> schedule(const ScenarioScript& script, std::uint64_t seed);

/// Per-actor writing style for benign email bodies.
struct ActorStyle {
  double mean_sentence_length = 14.6;
  double sentence_length_sd = 4.0;
  int min_sentences = 2;
  int max_sentences = 5;
};

/// Benign body: sentence lengths are normal around the style mean,
/// stochastically rounded and clamped to [4, 40].
std::string generate_benign_email_body(std::uint64_t seed, const ActorStyle& style);

enum class SystemAgent { auth_monitor, db_monitor, email_monitor, siem_agent };
std::string_view to_string(SystemAgent a);
/// Monitor that forwards events of this kind.
SystemAgent monitor_for(ActionKind kind);

struct ActorPlan {
  ActorInfo info;
  bool malicious = false;
  std::optional<ScenarioScript> script;
  ActorStyle style;
};

struct SimulationResult {
  std::vector<Event> events;
  std::vector<ActorInfo> actors;
  std::vector<GroundTruth> truth;
};

/// Called once per step with the batch forwarded by the monitors
/// (auth, then db, then email); stands in for the SIEM agent.
using StepObserver = std::function<void(Step, std::span<const Event>)>;

/// Roster and scripts for a run; deterministic in config.seed.
std::vector<ActorPlan> plan_population(const SimConfig& config);
SimulationResult run_simulation(const SimConfig& config, const StepObserver& observer = {});

}  // namespace sentinel::simkit
