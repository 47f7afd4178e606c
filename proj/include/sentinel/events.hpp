#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sentinel {

/// Discrete simulation time. Non-negative within a run.
using Step = std::int64_t;
using ActorId = std::string;

enum class ActionKind { login, db_query, file_access, file_export, email_send };
enum class LoginContext { normal, after_hours, new_location };
enum class Sensitivity { normal, sensitive };
enum class Destination { internal, external, staging };
enum class RecipientScope { internal, external };
enum class Role { staff, developer, admin, power_user };
enum class Scenario { exfiltration, stealth, takeover, staging_exfiltration, email_leakage };
enum class AlertTier { early, confirmed };
enum class EvidenceKind {
  policy_violation,
  baseline_deviation,
  ml_anomaly,
  tom_intent,
  forensics_flag,
  peer_export_outlier,
  after_hours_login,
  staging_pattern,
};

inline constexpr std::array kAllScenarios{Scenario::exfiltration, Scenario::stealth, Scenario::takeover,
                                          Scenario::staging_exfiltration, Scenario::email_leakage};
inline constexpr std::array kAllRoles{Role::staff, Role::developer, Role::admin, Role::power_user};

std::string_view to_string(ActionKind v);
std::string_view to_string(LoginContext v);
std::string_view to_string(Sensitivity v);
std::string_view to_string(Destination v);
std::string_view to_string(RecipientScope v);
std::string_view to_string(Role v);
std::string_view to_string(Scenario v);
std::string_view to_string(AlertTier v);
std::string_view to_string(EvidenceKind v);

/// Inverse of to_string; nullopt for names outside the closed set.
template <typename E>
std::optional<E> enum_from_string(std::string_view name);

struct LoginPayload {
  LoginContext context = LoginContext::normal;
  bool operator==(const LoginPayload&) const = default;
};

/// Payload of db_query and file_access events.
struct AccessPayload {
  std::string resource;
  Sensitivity sensitivity = Sensitivity::normal;
  bool operator==(const AccessPayload&) const = default;
};

struct ExportPayload {
  std::int64_t volume = 0;  // abstract byte units
  std::string resource;
  Destination destination = Destination::internal;
  bool operator==(const ExportPayload&) const = default;
};

struct EmailPayload {
  RecipientScope scope = RecipientScope::internal;
  std::string domain;
  std::string body;
  bool operator==(const EmailPayload&) const = default;
};

using Payload = std::variant<LoginPayload, AccessPayload, ExportPayload, EmailPayload>;

struct Event {
  Step step = 0;
  ActorId actor_id;
  ActionKind kind = ActionKind::login;
  Payload payload;

  bool operator==(const Event&) const = default;

  static Event login(Step step, ActorId actor, LoginContext context);
  static Event access(Step step, ActorId actor, ActionKind kind, std::string resource, Sensitivity s);
  static Event export_(Step step, ActorId actor, std::int64_t volume, std::string resource, Destination d);
  static Event email(Step step, ActorId actor, RecipientScope scope, std::string domain, std::string body);

  /// True when the payload alternative matches the kind.
  bool payload_matches_kind() const;

  const LoginPayload* as_login() const { return std::get_if<LoginPayload>(&payload); }
  const AccessPayload* as_access() const { return std::get_if<AccessPayload>(&payload); }
  const ExportPayload* as_export() const { return std::get_if<ExportPayload>(&payload); }
  const EmailPayload* as_email() const { return std::get_if<EmailPayload>(&payload); }

  bool is_sensitive_access() const;
  bool is_unusual_login() const;  // after_hours or new_location
  bool is_external_export() const;
  bool is_staging_export() const;
  bool is_external_email() const;
};

struct Evidence {
  EvidenceKind kind = EvidenceKind::policy_violation;
  double weight = 0.0;
  Step step = 0;
  std::string detail;

  bool operator==(const Evidence&) const = default;
};

struct Alert {
  AlertTier tier = AlertTier::early;
  ActorId actor_id;
  Step step = 0;
  double score = 0.0;
  std::vector<Evidence> evidence;
  bool tom_assisted = false;

  bool operator==(const Alert&) const = default;
};

/// Number of distinct evidence kinds in a set.
std::size_t distinct_kinds(const std::vector<Evidence>& evidence);
bool has_kind(const std::vector<Evidence>& evidence, EvidenceKind kind);
double total_weight(const std::vector<Evidence>& evidence);

struct GroundTruth {
  ActorId actor_id;
  bool malicious = false;
  std::optional<Scenario> scenario;
  std::optional<Step> first_malicious_step;

  bool operator==(const GroundTruth&) const = default;
};

/// Static attributes the SIEM knows about each actor.
struct ActorInfo {
  ActorId actor_id;
  Role role = Role::staff;
  bool compliance_approval = false;

  bool operator==(const ActorInfo&) const = default;
};

}  // namespace sentinel
