#include "sentinel/events.hpp"

#include <algorithm>
#include <set>

namespace sentinel {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<ActionKind, 5> kActionNames{{{ActionKind::login, "login"},
                                                {ActionKind::db_query, "db_query"},
                                                {ActionKind::file_access, "file_access"},
                                                {ActionKind::file_export, "file_export"},
                                                {ActionKind::email_send, "email_send"}}};
constexpr NameTable<LoginContext, 3> kContextNames{{{LoginContext::normal, "normal"},
                                                   {LoginContext::after_hours, "after_hours"},
                                                   {LoginContext::new_location, "new_location"}}};
constexpr NameTable<Sensitivity, 2> kSensitivityNames{
    {{Sensitivity::normal, "normal"}, {Sensitivity::sensitive, "sensitive"}}};
constexpr NameTable<Destination, 3> kDestinationNames{{{Destination::internal, "internal"},
                                                      {Destination::external, "external"},
                                                      {Destination::staging, "staging"}}};
constexpr NameTable<RecipientScope, 2> kScopeNames{
    {{RecipientScope::internal, "internal"}, {RecipientScope::external, "external"}}};
constexpr NameTable<Role, 4> kRoleNames{{{Role::staff, "staff"},
                                         {Role::developer, "developer"},
                                         {Role::admin, "admin"},
                                         {Role::power_user, "power_user"}}};
constexpr NameTable<Scenario, 5> kScenarioNames{{{Scenario::exfiltration, "exfiltration"},
                                                 {Scenario::stealth, "stealth"},
                                                 {Scenario::takeover, "takeover"},
                                                 {Scenario::staging_exfiltration, "staging_exfiltration"},
                                                 {Scenario::email_leakage, "email_leakage"}}};
constexpr NameTable<AlertTier, 2> kTierNames{{{AlertTier::early, "early"}, {AlertTier::confirmed, "confirmed"}}};
constexpr NameTable<EvidenceKind, 8> kEvidenceNames{{{EvidenceKind::policy_violation, "policy_violation"},
                                                     {EvidenceKind::baseline_deviation, "baseline_deviation"},
                                                     {EvidenceKind::ml_anomaly, "ml_anomaly"},
                                                     {EvidenceKind::tom_intent, "tom_intent"},
                                                     {EvidenceKind::forensics_flag, "forensics_flag"},
                                                     {EvidenceKind::peer_export_outlier, "peer_export_outlier"},
                                                     {EvidenceKind::after_hours_login, "after_hours_login"},
                                                     {EvidenceKind::staging_pattern, "staging_pattern"}}};

template <typename E, std::size_t N>
std::string_view lookup(const NameTable<E, N>& table, E value) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> reverse(const NameTable<E, N>& table, std::string_view name) {
  for (const auto& [v, n] : table)
    if (n == name) return v;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ActionKind v) { return lookup(kActionNames, v); }
std::string_view to_string(LoginContext v) { return lookup(kContextNames, v); }
std::string_view to_string(Sensitivity v) { return lookup(kSensitivityNames, v); }
std::string_view to_string(Destination v) { return lookup(kDestinationNames, v); }
std::string_view to_string(RecipientScope v) { return lookup(kScopeNames, v); }
std::string_view to_string(Role v) { return lookup(kRoleNames, v); }
std::string_view to_string(Scenario v) { return lookup(kScenarioNames, v); }
std::string_view to_string(AlertTier v) { return lookup(kTierNames, v); }
std::string_view to_string(EvidenceKind v) { return lookup(kEvidenceNames, v); }

template <>
std::optional<ActionKind> enum_from_string<ActionKind>(std::string_view n) { return reverse(kActionNames, n); }
template <>
std::optional<LoginContext> enum_from_string<LoginContext>(std::string_view n) { return reverse(kContextNames, n); }
template <>
std::optional<Sensitivity> enum_from_string<Sensitivity>(std::string_view n) { return reverse(kSensitivityNames, n); }
template <>
std::optional<Destination> enum_from_string<Destination>(std::string_view n) { return reverse(kDestinationNames, n); }
template <>
std::optional<RecipientScope> enum_from_string<RecipientScope>(std::string_view n) { return reverse(kScopeNames, n); }
template <>
std::optional<Role> enum_from_string<Role>(std::string_view n) { return reverse(kRoleNames, n); }
template <>
std::optional<Scenario> enum_from_string<Scenario>(std::string_view n) { return reverse(kScenarioNames, n); }
template <>
std::optional<AlertTier> enum_from_string<AlertTier>(std::string_view n) { return reverse(kTierNames, n); }
template <>
std::optional<EvidenceKind> enum_from_string<EvidenceKind>(std::string_view n) { return reverse(kEvidenceNames, n); }

Event Event::login(Step step, ActorId actor, LoginContext context) {
  return Event{step, std::move(actor), ActionKind::login, LoginPayload{context}};
}

Event Event::access(Step step, ActorId actor, ActionKind kind, std::string resource, Sensitivity s) {
  return Event{step, std::move(actor), kind, AccessPayload{std::move(resource), s}};
}

Event Event::export_(Step step, ActorId actor, std::int64_t volume, std::string resource, Destination d) {
  return Event{step, std::move(actor), ActionKind::file_export, ExportPayload{volume, std::move(resource), d}};
}

Event Event::email(Step step, ActorId actor, RecipientScope scope, std::string domain, std::string body) {
  return Event{step, std::move(actor), ActionKind::email_send,
               EmailPayload{scope, std::move(domain), std::move(body)}};
}

bool Event::payload_matches_kind() const {
  switch (kind) {
    case ActionKind::login:
      return as_login() != nullptr;
    case ActionKind::db_query:
    case ActionKind::file_access:
      return as_access() != nullptr;
    case ActionKind::file_export:
      return as_export() != nullptr;
    case ActionKind::email_send:
      return as_email() != nullptr;
  }
  return false;
}

bool Event::is_sensitive_access() const {
  const auto* a = as_access();
  return a && a->sensitivity == Sensitivity::sensitive;
}

bool Event::is_unusual_login() const {
  const auto* l = as_login();
  return l && l->context != LoginContext::normal;
}

bool Event::is_external_export() const {
  const auto* x = as_export();
  return x && x->destination == Destination::external;
}

bool Event::is_staging_export() const {
  const auto* x = as_export();
  return x && x->destination == Destination::staging;
}

bool Event::is_external_email() const {
  const auto* m = as_email();
  return m && m->scope == RecipientScope::external;
}

std::size_t distinct_kinds(const std::vector<Evidence>& evidence) {
  std::set<EvidenceKind> kinds;
  for (const auto& e : evidence) kinds.insert(e.kind);
  return kinds.size();
}

bool has_kind(const std::vector<Evidence>& evidence, EvidenceKind kind) {
  return std::any_of(evidence.begin(), evidence.end(), [kind](const Evidence& e) { return e.kind == kind; });
}

double total_weight(const std::vector<Evidence>& evidence) {
  double sum = 0.0;
  for (const auto& e : evidence) sum += e.weight;
  return sum;
}

}  // namespace sentinel
