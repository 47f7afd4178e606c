#include "sentinel/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentinel/error.hpp"
#include "sentinel/forensics.hpp"

namespace sentinel::simkit {

namespace {

constexpr std::size_t idx(ActionKind k) { return static_cast<std::size_t>(k); }

struct ResourcePool {
  std::vector<std::string> normal;
  std::vector<std::string> sensitive;
};

const ResourcePool& pool_for(Role role) {
  static const std::map<Role, ResourcePool> pools{
      {Role::staff, {{"wiki", "crm", "shared-drive", "hr-portal"}, {"crm-customer-records", "hr-records"}}},
      {Role::developer, {{"git-repo", "ci-server", "wiki", "issue-tracker"}, {"prod-db", "deploy-keys"}}},
      {Role::admin, {{"backup-store", "monitoring", "wiki", "ticketing"}, {"iam-console", "backup-vault"}}},
      {Role::power_user,
       {{"analytics-warehouse", "crm", "reports", "wiki"}, {"finance-ledger", "analytics-pii"}}}};
  return pools.at(role);
}

const std::vector<std::string> kPartnerDomains{"partner-a.com", "vendor-b.net", "client-c.org", "auditor-d.com"};
const std::vector<std::string> kPersonalDomains{"gmail.com", "proton.me", "outlook.com"};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
}

std::int64_t lognormal_volume(Rng& rng, double median, double sigma, std::int64_t cap) {
  double v = median * std::exp(sigma * rng.normal());
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(v)), 10, cap - 1);
}

std::string restricted_outside(const SimConfig& config, Role role, Rng& rng) {
  std::vector<std::string> names;
  for (const auto& [name, allowed] : config.restricted_resources)
    if (!allowed.contains(role)) names.push_back(name);
  if (names.empty()) return "srv-unknown";
  return pick(rng, names);
}

int stochastic_round(Rng& rng, double x) {
  double f = std::floor(x);
  return static_cast<int>(f) + (rng.bernoulli(x - f) ? 1 : 0);
}

/// Per-actor mutable state during a run.
struct ActorState {
  const ActorPlan* plan = nullptr;
  Rng rng{0};
  std::vector<ScriptedAction> script;
  std::size_t next_scripted = 0;
  int backup_period = 0;
  int backup_phase = 0;
  Step next_transfer = -1;
};

Event email_event(Step step, const ActorId& id, RecipientScope scope, std::string domain, std::string body) {
  return Event::email(step, id, scope, std::move(domain), std::move(body));
}

void benign_step(const SimConfig& config, ActorState& st, Step step, std::vector<Event>& out) {
  const auto& info = st.plan->info;
  const auto& profile = config.roles.at(info.role);
  const auto& pool = pool_for(info.role);
  Rng& rng = st.rng;

  auto n_login = rng.poisson(profile.rates[idx(ActionKind::login)]);
  for (std::int64_t i = 0; i < n_login; ++i) {
    LoginContext c = LoginContext::normal;
    double u = rng.uniform();
    if (u < profile.after_hours_login_prob)
      c = LoginContext::after_hours;
    else if (u < profile.after_hours_login_prob + profile.new_location_login_prob)
      c = LoginContext::new_location;
    out.push_back(Event::login(step, info.actor_id, c));
  }
  for (ActionKind kind : {ActionKind::db_query, ActionKind::file_access}) {
    auto n = rng.poisson(profile.rates[idx(kind)]);
    for (std::int64_t i = 0; i < n; ++i) {
      bool sensitive = rng.bernoulli(profile.sensitive_access_prob);
      std::string resource = sensitive ? pick(rng, pool.sensitive) : pick(rng, pool.normal);
      if (rng.bernoulli(config.restricted_access_mistake_prob)) resource = restricted_outside(config, info.role, rng);
      out.push_back(Event::access(step, info.actor_id, kind, resource,
                                  sensitive ? Sensitivity::sensitive : Sensitivity::normal));
    }
  }
  auto n_export = rng.poisson(profile.rates[idx(ActionKind::file_export)]);
  for (std::int64_t i = 0; i < n_export; ++i) {
    Destination d = rng.bernoulli(profile.external_export_prob) ? Destination::external : Destination::internal;
    auto volume = lognormal_volume(rng, profile.export_volume_median, profile.export_volume_sigma,
                                   profile.external_export_cap);
    out.push_back(Event::export_(step, info.actor_id, volume, pick(rng, pool.normal), d));
  }
  if (st.backup_period > 0 && step % st.backup_period == st.backup_phase) {
    out.push_back(Event::export_(step, info.actor_id, rng.uniform_int(1500, 2500), "backup-store",
                                 Destination::staging));
  }
  if (st.next_transfer >= 0 && step == st.next_transfer) {
    out.push_back(Event::access(step, info.actor_id, ActionKind::db_query, pick(rng, pool.sensitive),
                                Sensitivity::sensitive));
    out.push_back(Event::export_(step, info.actor_id, rng.uniform_int(9000, 15000), "analytics-warehouse",
                                 Destination::external));
    st.next_transfer = step + rng.uniform_int(config.approved_transfer_gap_min, config.approved_transfer_gap_max);
  }
  auto n_email = rng.poisson(profile.rates[idx(ActionKind::email_send)]);
  for (std::int64_t i = 0; i < n_email; ++i) {
    bool external = rng.bernoulli(profile.external_email_prob);
    std::string domain = "corp.example";
    if (external) {
      double u = rng.uniform();
      if (u < config.deny_domain_mistake_prob)
        domain = *std::next(config.deny_domains.begin(),
                            rng.uniform_int(0, static_cast<std::int64_t>(config.deny_domains.size()) - 1));
      else if (u < config.deny_domain_mistake_prob + config.personal_email_prob)
        domain = pick(rng, kPersonalDomains);
      else
        domain = pick(rng, kPartnerDomains);
    }
    out.push_back(email_event(step, info.actor_id, external ? RecipientScope::external : RecipientScope::internal,
                              domain, generate_benign_email_body(rng.next(), st.plan->style)));
  }
}

void scripted_step(const SimConfig& config, ActorState& st, Step step, std::vector<Event>& out) {
  const auto& info = st.plan->info;
  const auto& pool = pool_for(info.role);
  Rng& rng = st.rng;
  while (st.next_scripted < st.script.size() && st.script[st.next_scripted].step == step) {
    const auto& a = st.script[st.next_scripted++];
    switch (a.action) {
      case ActionTemplate::sensitive_access:
        out.push_back(Event::access(step, info.actor_id, ActionKind::db_query, pick(rng, pool.sensitive),
                                    Sensitivity::sensitive));
        break;
      case ActionTemplate::rare_resource_access:
        out.push_back(Event::access(step, info.actor_id, ActionKind::file_access,
                                    restricted_outside(config, info.role, rng), Sensitivity::sensitive));
        break;
      case ActionTemplate::large_external_export:
      case ActionTemplate::small_external_export:
      case ActionTemplate::external_export:
        out.push_back(Event::export_(step, info.actor_id, a.volume, pick(rng, pool.sensitive), Destination::external));
        break;
      case ActionTemplate::staging_export:
        out.push_back(Event::export_(step, info.actor_id, a.volume, pick(rng, pool.sensitive), Destination::staging));
        break;
      case ActionTemplate::after_hours_login:
        out.push_back(Event::login(step, info.actor_id, LoginContext::after_hours));
        break;
      case ActionTemplate::new_location_login:
        out.push_back(Event::login(step, info.actor_id, LoginContext::new_location));
        break;
      case ActionTemplate::external_email:
        out.push_back(email_event(step, info.actor_id, RecipientScope::external, pick(rng, kPersonalDomains),
                                  generate_benign_email_body(rng.next(), st.plan->style)));
        break;
      case ActionTemplate::suspicious_external_email: {
        std::string domain = rng.bernoulli(0.3) ? *config.deny_domains.begin() : pick(rng, kPersonalDomains);
        out.push_back(email_event(step, info.actor_id, RecipientScope::external, domain,
                                  forensics::suspicious_body(rng, forensics::SuspiciousCategory::leak)));
        break;
      }
    }
  }
}

}  // namespace

std::map<Role, RoleProfile> SimConfig::default_roles() {
  std::map<Role, RoleProfile> m;
  auto& staff = m[Role::staff];
  staff.rates = {0.25, 0.4, 0.6, 0.08, 0.5};
  staff.after_hours_login_prob = 0.02;
  staff.sensitive_access_prob = 0.03;
  staff.external_export_prob = 0.05;
  staff.export_volume_median = 300;
  staff.external_email_prob = 0.2;
  staff.external_export_cap = 2000;

  auto& dev = m[Role::developer];
  dev.rates = {0.3, 0.8, 0.5, 0.1, 0.35};
  dev.after_hours_login_prob = 0.06;
  dev.sensitive_access_prob = 0.05;
  dev.external_export_prob = 0.03;
  dev.export_volume_median = 400;
  dev.external_email_prob = 0.1;
  dev.external_export_cap = 3000;

  auto& admin = m[Role::admin];
  admin.rates = {0.4, 0.6, 0.6, 0.12, 0.3};
  admin.after_hours_login_prob = 0.05;
  admin.sensitive_access_prob = 0.15;
  admin.external_export_prob = 0.03;
  admin.export_volume_median = 600;
  admin.external_email_prob = 0.1;
  admin.external_export_cap = 3000;

  auto& pu = m[Role::power_user];
  pu.rates = {0.35, 1.5, 1.2, 0.4, 0.45};
  pu.after_hours_login_prob = 0.03;
  pu.sensitive_access_prob = 0.12;
  pu.external_export_prob = 0.04;
  pu.export_volume_median = 1500;
  pu.external_email_prob = 0.25;
  pu.external_export_cap = 8000;
  return m;
}

int SimConfig::malicious_count() const {
  int n = 0;
  for (const auto& [_, c] : scenario_assignment) n += c;
  return n;
}

int SimConfig::population() const {
  int n = power_users + malicious_count();
  for (const auto& [_, c] : benign_population) n += c;
  return n;
}

void SimConfig::validate() const {
  if (total_steps <= 0) throw ConfigError("total_steps must be positive");
  if (warmup_steps < 0 || warmup_steps >= total_steps) throw ConfigError("warmup_steps must lie in [0, total_steps)");
  for (const auto& [role, n] : benign_population) {
    if (n < 0) throw ConfigError("negative population for role " + std::string(to_string(role)));
    if (role == Role::power_user) throw ConfigError("power users are configured with power_users");
  }
  for (const auto& [s, n] : scenario_assignment)
    if (n < 0) throw ConfigError("negative count for scenario " + std::string(to_string(s)));
  if (power_users < 0) throw ConfigError("power_users must be non-negative");
  if (compliance_approvals < 0 || compliance_approvals > power_users)
    throw ConfigError("compliance_approvals must lie in [0, power_users]");
  if (population() == 0) throw ConfigError("population is empty");
  if (malicious_count() > 0) {
    int benign_mix = 0;
    for (const auto& [_, n] : benign_population) benign_mix += n;
    if (benign_mix == 0) throw ConfigError("insiders need at least one benign role to blend into");
  }
  for (Role r : kAllRoles) {
    auto it = roles.find(r);
    if (it == roles.end()) throw ConfigError("missing role profile for " + std::string(to_string(r)));
    for (double rate : it->second.rates)
      if (rate < 0) throw ConfigError("negative rate for role " + std::string(to_string(r)));
    if (it->second.external_export_cap <= 10) throw ConfigError("external_export_cap must exceed 10");
  }
  if (backup_period_min < 1 || backup_period_max < backup_period_min) throw ConfigError("invalid backup period range");
  if (approved_transfer_gap_min < 1 || approved_transfer_gap_max < approved_transfer_gap_min)
    throw ConfigError("invalid approved transfer gap range");
  if (script_start_min_offset < 0 || script_start_max_offset < script_start_min_offset)
    throw ConfigError("invalid script start range");
  if (deny_domains.empty()) throw ConfigError("deny_domains must not be empty");
}

ScenarioScript expand_scenario(Scenario scenario, std::uint64_t seed, Step start_step) {
  Rng rng(seed);
  ScenarioScript s{scenario, start_step, {}};
  auto add = [&s](Step lo, Step hi, ActionTemplate a, int n, std::int64_t vlo = 0, std::int64_t vhi = 0) {
    s.phases.push_back(Phase{lo, hi, a, n, vlo, vhi});
  };
  using A = ActionTemplate;
  switch (scenario) {
    case Scenario::exfiltration: {
      Step b = 0;
      for (int k = 0; k < 3; ++k) {
        add(b, b + 1, A::sensitive_access, 1 + k);
        add(b + 2, b + 4, A::large_external_export, 1 + k, 3500 + 2000 * k, 5000 + 3500 * k);
        if (k > 0) add(b + 4, b + 6, A::external_email, 1);
        b += rng.uniform_int(22, 32);
      }
      break;
    }
    case Scenario::stealth: {
      add(0, 49, A::after_hours_login, 2);
      add(0, 49, A::small_external_export, 3, 150, 450);
      add(0, 49, A::sensitive_access, 1);
      add(50, 99, A::after_hours_login, 3);
      add(50, 99, A::small_external_export, 4, 150, 450);
      add(100, 150, A::after_hours_login, 4);
      add(100, 150, A::small_external_export, 5, 150, 450);
      add(100, 150, A::sensitive_access, 2);
      break;
    }
    case Scenario::takeover: {
      add(0, 0, A::new_location_login, 1);
      add(1, 4, A::rare_resource_access, 2);
      add(2, 5, A::sensitive_access, 1);
      add(5, 8, A::external_export, 1, 2500, 4500);
      Step b = rng.uniform_int(25, 35);
      add(b, b, A::new_location_login, 1);
      add(b + 1, b + 3, A::rare_resource_access, 3);
      add(b + 3, b + 6, A::external_export, 2, 4000, 7000);
      add(b + 5, b + 7, A::external_email, 1);
      break;
    }
    case Scenario::staging_exfiltration: {
      add(0, 8, A::staging_export, 3, 1500, 3000);
      add(10, 13, A::large_external_export, 1, 6000, 10000);
      Step b = rng.uniform_int(35, 50);
      add(b, b + 8, A::staging_export, 3, 1500, 3000);
      add(b + 10, b + 13, A::large_external_export, 1, 9000, 15000);
      add(b + 12, b + 14, A::external_email, 1);
      break;
    }
    case Scenario::email_leakage: {
      for (int i = 0; i < 8; ++i) {
        Step b = 12 * i;
        add(b, b + 4, A::sensitive_access, 1);
        add(b + 5, b + 11, A::suspicious_external_email, i < 4 ? 1 : 2);
      }
      break;
    }
  }
  return s;
}

std::vector<ScriptedAction> schedule(const ScenarioScript& script, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScriptedAction> out;
  for (const auto& p : script.phases) {
    for (int i = 0; i < p.intensity; ++i) {
      ScriptedAction a;
      a.step = script.start_step + rng.uniform_int(p.offset_lo, p.offset_hi);
      a.action = p.action;
      a.volume = p.volume_hi > 0 ? rng.uniform_int(p.volume_lo, p.volume_hi) : 0;
      out.push_back(a);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
  return out;
}

std::string generate_benign_email_body(std::uint64_t seed, const ActorStyle& style) {
  Rng rng(seed);
  auto n = rng.uniform_int(style.min_sentences, style.max_sentences);
  std::string body;
  for (std::int64_t i = 0; i < n; ++i) {
    double target = style.sentence_length_sd > 0 ? rng.normal(style.mean_sentence_length, style.sentence_length_sd)
                                                 : style.mean_sentence_length;
    int len = std::clamp(stochastic_round(rng, target), 4, 40);
    if (!body.empty()) body += ' ';
    body += forensics::business_sentence(rng, len);
  }
  return body;
}

std::string_view to_string(SystemAgent a) {
  switch (a) {
    case SystemAgent::auth_monitor:
      return "auth_monitor";
    case SystemAgent::db_monitor:
      return "db_monitor";
    case SystemAgent::email_monitor:
      return "email_monitor";
    case SystemAgent::siem_agent:
      return "siem_agent";
  }
  return "?";
}

SystemAgent monitor_for(ActionKind kind) {
  switch (kind) {
    case ActionKind::login:
      return SystemAgent::auth_monitor;
    case ActionKind::email_send:
      return SystemAgent::email_monitor;
    default:
      return SystemAgent::db_monitor;
  }
}

std::vector<ActorPlan> plan_population(const SimConfig& config) {
  config.validate();
  Rng rng = Rng::substream(config.seed, "population");

  std::vector<Role> benign_mix;
  for (const auto& [role, n] : config.benign_population) benign_mix.insert(benign_mix.end(), n, role);

  struct Slot {
    Role role;
    bool power;
    bool malicious;
  };
  std::vector<Slot> slots;
  for (Role r : benign_mix) slots.push_back({r, false, false});
  for (int i = 0; i < config.power_users; ++i) slots.push_back({Role::power_user, true, false});
  for (int i = 0; i < config.malicious_count(); ++i) slots.push_back({pick(rng, benign_mix), false, true});
  for (std::size_t i = slots.size(); i > 1; --i)
    std::swap(slots[i - 1], slots[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

  std::vector<Scenario> scenarios;
  for (const auto& [s, n] : config.scenario_assignment) scenarios.insert(scenarios.end(), n, s);
  for (std::size_t i = scenarios.size(); i > 1; --i)
    std::swap(scenarios[i - 1],
              scenarios[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

  int width = slots.size() > 100 ? 3 : 2;
  std::vector<ActorPlan> plans;
  std::size_t next_scenario = 0;
  int approvals = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    std::string num = std::to_string(i);
    ActorPlan p;
    p.info.actor_id = "u" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(num.size(), width), '0') + num;
    p.info.role = slots[i].role;
    p.malicious = slots[i].malicious;
    if (slots[i].power && approvals < config.compliance_approvals) {
      p.info.compliance_approval = true;
      ++approvals;
    }
    Rng srng = Rng::substream(config.seed, "style/" + p.info.actor_id);
    p.style.mean_sentence_length = std::clamp(srng.normal(14.6, 2.0), 8.0, 24.0);
    p.style.sentence_length_sd = srng.uniform(3.0, 6.0);
    if (p.malicious) {
      Scenario s = scenarios[next_scenario++];
      Step start = config.warmup_steps + rng.uniform_int(config.script_start_min_offset, config.script_start_max_offset);
      p.script = expand_scenario(s, Rng::substream(config.seed, "script/" + p.info.actor_id).next(), start);
    }
    plans.push_back(std::move(p));
  }
  return plans;
}

SimulationResult run_simulation(const SimConfig& config, const StepObserver& observer) {
  auto plans = plan_population(config);
  std::vector<ActorState> states(plans.size());
  SimulationResult result;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    auto& st = states[i];
    const auto& p = plans[i];
    st.plan = &p;
    st.rng = Rng::substream(config.seed, "actor/" + p.info.actor_id);
    if (p.info.role == Role::admin) {
      st.backup_period = static_cast<int>(st.rng.uniform_int(config.backup_period_min, config.backup_period_max));
      st.backup_phase = static_cast<int>(st.rng.uniform_int(0, st.backup_period - 1));
    }
    if (p.info.compliance_approval) st.next_transfer = st.rng.uniform_int(5, config.approved_transfer_gap_max);
    GroundTruth gt{p.info.actor_id, p.malicious, std::nullopt, std::nullopt};
    if (p.script) {
      st.script = schedule(*p.script, Rng::substream(config.seed, "schedule/" + p.info.actor_id).next());
      std::erase_if(st.script, [&](const ScriptedAction& a) { return a.step >= config.total_steps; });
      gt.scenario = p.script->scenario;
      if (!st.script.empty()) gt.first_malicious_step = st.script.front().step;
    }
    result.actors.push_back(p.info);
    result.truth.push_back(gt);
  }

  std::vector<std::vector<Event>> per_actor(states.size());
  std::vector<Event> batch;
  for (Step t = 0; t < config.total_steps; ++t) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      per_actor[i].clear();
      benign_step(config, states[i], t, per_actor[i]);
      scripted_step(config, states[i], t, per_actor[i]);
    }
    batch.clear();
    for (SystemAgent monitor : {SystemAgent::auth_monitor, SystemAgent::db_monitor, SystemAgent::email_monitor})
      for (const auto& events : per_actor)
        for (const auto& e : events)
          if (monitor_for(e.kind) == monitor) batch.push_back(e);
    if (observer) observer(t, batch);
    result.events.insert(result.events.end(), batch.begin(), batch.end());
  }
  return result;
}

}  // namespace sentinel::simkit
