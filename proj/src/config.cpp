#include "sentinel/config.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "sentinel/error.hpp"
#include "sentinel/event_io.hpp"

namespace sentinel {

namespace {

using json = nlohmann::ordered_json;

/// Reads fields from one object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items())
      if (!seen_.contains(key)) throw ConfigError("unknown config key '" + where(key) + "'");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + where(key) + "' has the wrong type");
    }
  }

  template <typename E>
  void get_enum(const std::string& key, E& out) {
    std::string name;
    get(key, name);
    if (name.empty()) return;
    auto v = enum_from_string<E>(name);
    if (!v) throw ConfigError("config key '" + where(key) + "' has unknown value '" + name + "'");
    out = *v;
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_rates(const json& j, const std::string& path, simkit::Rates& rates) {
  Section s(j, path);
  for (auto kind : {ActionKind::login, ActionKind::db_query, ActionKind::file_access, ActionKind::file_export,
                    ActionKind::email_send})
    s.get(std::string(to_string(kind)), rates[static_cast<std::size_t>(kind)]);
}

void read_role(const json& j, const std::string& path, simkit::RoleProfile& p) {
  Section s(j, path);
  if (const auto* r = s.child("rates")) read_rates(*r, s.where("rates"), p.rates);
  s.get("after_hours_login_prob", p.after_hours_login_prob);
  s.get("new_location_login_prob", p.new_location_login_prob);
  s.get("sensitive_access_prob", p.sensitive_access_prob);
  s.get("external_export_prob", p.external_export_prob);
  s.get("export_volume_median", p.export_volume_median);
  s.get("export_volume_sigma", p.export_volume_sigma);
  s.get("external_email_prob", p.external_email_prob);
  s.get("external_export_cap", p.external_export_cap);
}

template <typename E>
E key_enum(const std::string& name, const std::string& path) {
  auto v = enum_from_string<E>(name);
  if (!v) throw ConfigError("unknown name '" + name + "' under '" + path + "'");
  return *v;
}

void read_simulation(const json& j, simkit::SimConfig& c) {
  Section s(j, "simulation");
  s.get("total_steps", c.total_steps);
  s.get("warmup_steps", c.warmup_steps);
  if (const auto* pop = s.child("benign_population")) {
    c.benign_population.clear();
    for (const auto& [name, n] : pop->items())
      c.benign_population[key_enum<Role>(name, "simulation.benign_population")] = n.get<int>();
  }
  s.get("power_users", c.power_users);
  if (const auto* sa = s.child("scenario_assignment")) {
    c.scenario_assignment.clear();
    for (const auto& [name, n] : sa->items())
      c.scenario_assignment[key_enum<Scenario>(name, "simulation.scenario_assignment")] = n.get<int>();
  }
  s.get("compliance_approvals", c.compliance_approvals);
  if (const auto* roles = s.child("roles")) {
    Section rs(*roles, "simulation.roles");
    for (Role r : kAllRoles) {
      std::string name(to_string(r));
      if (const auto* rj = rs.child(name)) read_role(*rj, "simulation.roles." + name, c.roles[r]);
    }
  }
  s.get("backup_period_min", c.backup_period_min);
  s.get("backup_period_max", c.backup_period_max);
  s.get("approved_transfer_gap_min", c.approved_transfer_gap_min);
  s.get("approved_transfer_gap_max", c.approved_transfer_gap_max);
  s.get("restricted_access_mistake_prob", c.restricted_access_mistake_prob);
  s.get("deny_domain_mistake_prob", c.deny_domain_mistake_prob);
  s.get("personal_email_prob", c.personal_email_prob);
  s.get("script_start_min_offset", c.script_start_min_offset);
  s.get("script_start_max_offset", c.script_start_max_offset);
  s.get("deny_domains", c.deny_domains);
  if (const auto* rr = s.child("restricted_resources")) {
    c.restricted_resources.clear();
    for (const auto& [res, roles] : rr->items())
      for (const auto& name : roles)
        c.restricted_resources[res].insert(key_enum<Role>(name.get<std::string>(), "simulation.restricted_resources"));
  }
}

void read_detection(const json& j, siem::DetectionConfig& d) {
  Section s(j, "detection");
  std::string variant;
  s.get("variant", variant);
  if (!variant.empty()) {
    auto v = siem::parse_variant(variant);
    if (!v) throw ConfigError("config key 'detection.variant' has unknown value '" + variant + "'");
    d.variant = *v;
  }
  s.get("theta_base", d.theta_base);
  s.get("theta_slope", d.theta_slope);
  s.get("early_fraction", d.early_fraction);
  s.get("window", d.window);
  s.get("chain_window", d.chain_window);
  s.get("excess_kinds", d.excess_kinds);
  s.get("ewma_alpha", d.ewma_alpha);
  s.get("ewma_epsilon", d.ewma_epsilon);
  s.get("large_export_volume", d.large_export_volume);
  s.get("feedback", d.feedback);
  s.get("exclude_insiders_from_training", d.exclude_insiders_from_training);
  s.get("enhanced_anomaly", d.enhanced_anomaly);
  s.get("enhanced_regular_cv", d.enhanced_regular_cv);

  if (const auto* w = s.child("weights")) {
    Section ws(*w, "detection.weights");
    auto& e = d.correlation.weights;
    ws.get("policy", e.policy);
    ws.get("policy_max_items", e.policy_max_items);
    ws.get("baseline_per_deviation", e.baseline_per_deviation);
    ws.get("baseline_cap", e.baseline_cap);
    ws.get("deviation_min", e.deviation_min);
    ws.get("after_hours", e.after_hours);
    ws.get("staging", e.staging);
    ws.get("forensics", e.forensics);
    ws.get("forensics_style", e.forensics_style);
    ws.get("forensics_threshold", e.forensics_threshold);
    ws.get("scorer", e.scorer);
  }
  if (const auto* a = s.child("ml_advice")) {
    Section as(*a, "detection.ml_advice");
    as.get("weight", d.correlation.advice.weight);
    as.get("score_floor", d.correlation.advice.score_floor);
    as.get("band", d.correlation.advice.band);
  }
  if (const auto* t = s.child("trust")) {
    Section ts(*t, "detection.trust");
    ts.get("initial", d.trust.initial);
    ts.get("true_positive_delta", d.trust.true_positive_delta);
    ts.get("false_positive_delta", d.trust.false_positive_delta);
    ts.get("decay", d.trust.decay);
    ts.get("lo", d.trust.lo);
    ts.get("hi", d.trust.hi);
  }
  if (const auto* sc = s.child("scorer")) {
    Section ss(*sc, "detection.scorer");
    ss.get("learning_rate", d.scorer.learning_rate);
    ss.get("warmup_epochs", d.scorer.warmup_epochs);
    ss.get("l2", d.scorer.l2);
  }
  if (const auto* f = s.child("forest")) {
    Section fs(*f, "detection.forest");
    fs.get("subsample", d.forest.subsample);
    fs.get("trees", d.forest.trees);
    fs.get("seed", d.forest.seed);
  }
  if (const auto* t = s.child("tom")) {
    Section ts(*t, "detection.tom");
    ts.get("threshold", d.tom.threshold);
    ts.get("weight", d.tom.weight);
    ts.get("specificity_sensitive", d.specificity.sensitive);
    ts.get("specificity_external", d.specificity.external);
    ts.get("specificity_login", d.specificity.login);
  }
  if (const auto* p = s.child("peer")) {
    Section ps(*p, "detection.peer");
    ps.get("z_min", d.peer.z_min);
    ps.get("epsilon", d.peer.epsilon);
    ps.get("weight_per_z", d.peer.weight_per_z);
    ps.get("weight_cap", d.peer.weight_cap);
  }
  if (const auto* r = s.child("regularity")) {
    Section rs(*r, "detection.regularity");
    rs.get("cv_min", d.regularity.cv_min);
    rs.get("factor", d.regularity.factor);
    rs.get("min_period", d.regularity.min_period);
    rs.get("lookback", d.regularity.lookback);
  }
  if (const auto* a = s.child("analyzer")) {
    Section as(*a, "detection.analyzer");
    as.get("tau_ai", d.analyzer.tau_ai);
    as.get("heuristic_slope", d.analyzer.heuristic_slope);
    as.get("heuristic_offset", d.analyzer.heuristic_offset);
  }
  if (const auto* p = s.child("policy")) {
    Section ps(*p, "detection.policy");
    ps.get("deny_domains", d.policy.deny_domains);
    if (const auto* rr = ps.child("restricted_resources")) {
      d.policy.restricted_resources.clear();
      for (const auto& [res, roles] : rr->items())
        for (const auto& name : roles)
          d.policy.restricted_resources[res].insert(
              key_enum<Role>(name.get<std::string>(), "detection.policy.restricted_resources"));
    }
    if (const auto* caps = ps.child("external_export_cap"))
      for (const auto& [name, cap] : caps->items())
        d.policy.external_export_cap[key_enum<Role>(name, "detection.policy.external_export_cap")] =
            cap.get<std::int64_t>();
  }
}

void read_forensics(const json& j, ForensicsSettings& f) {
  Section s(j, "forensics");
  s.get("model_path", f.model_path);
  s.get("corpus_path", f.corpus_path);
  s.get("corpus_seed", f.corpus_seed);
  s.get("corpus_ham", f.corpus_ham);
  s.get("corpus_spam", f.corpus_spam);
  s.get("keywords_sensitive", f.keywords_sensitive);
  s.get("keywords_urgent", f.keywords_urgent);
  if (const auto* t = s.child("train")) {
    Section ts(*t, "forensics.train");
    ts.get("vocabulary_cap", f.train.vocabulary_cap);
    ts.get("test_fraction", f.train.test_fraction);
    ts.get("seed", f.train.seed);
    ts.get("min_words", f.train.min_words);
    ts.get("multinomial_alpha", f.train.multinomial_alpha);
    ts.get("linear_learning_rate", f.train.linear_learning_rate);
    ts.get("linear_l2", f.train.linear_l2);
    ts.get("linear_epochs", f.train.linear_epochs);
  }
}

}  // namespace

void AppConfig::validate() const {
  simulation.validate();
  detection.validate();
  if (detection.warmup_steps != simulation.warmup_steps)
    throw ConfigError("detection warm-up must match simulation.warmup_steps");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (forensics.train.test_fraction <= 0.0 || forensics.train.test_fraction >= 1.0)
    throw ConfigError("forensics.train.test_fraction must lie in (0, 1)");
  if (forensics.keywords_sensitive.empty() != forensics.keywords_urgent.empty())
    throw ConfigError("forensics keyword lists must be given together");
}

AppConfig config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  AppConfig c;
  {
    Section s(doc, "");
    if (const auto* j = s.child("simulation")) read_simulation(*j, c.simulation);
    if (const auto* j = s.child("detection")) read_detection(*j, c.detection);
    if (const auto* j = s.child("forensics")) read_forensics(*j, c.forensics);
    s.get("plan_library", c.plan_library);
    s.get("output_dir", c.output_dir);
    s.get("seeds", c.seeds);
    s.get("sweep_thetas", c.sweep_thetas);
  }
  c.detection.warmup_steps = c.simulation.warmup_steps;
  if (!c.forensics.keywords_sensitive.empty() && !c.forensics.keywords_urgent.empty())
    c.detection.analyzer.keywords =
        forensics::KeywordLists::load(c.forensics.keywords_sensitive, c.forensics.keywords_urgent);
  c.validate();
  return c;
}

AppConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(text);
}

forensics::PretrainedModel prepare_model(const ForensicsSettings& settings) {
  if (!settings.model_path.empty()) return forensics::load_model(read_file(settings.model_path));
  auto corpus = settings.corpus_path.empty()
                    ? forensics::generate_synthetic_corpus(settings.corpus_seed, settings.corpus_ham, settings.corpus_spam)
                    : forensics::parse_corpus(read_file(settings.corpus_path));
  return forensics::train_classifier(corpus, settings.train);
}

tom::PlanLibrary load_plan_library(const std::string& path) {
  if (path.empty()) return tom::PlanLibrary::defaults();
  return tom::PlanLibrary::from_json(read_file(path));
}

std::string default_config_json() {
  AppConfig c;
  json j;
  auto& sim = j["simulation"];
  sim["total_steps"] = c.simulation.total_steps;
  sim["warmup_steps"] = c.simulation.warmup_steps;
  for (const auto& [r, n] : c.simulation.benign_population) sim["benign_population"][std::string(to_string(r))] = n;
  sim["power_users"] = c.simulation.power_users;
  for (const auto& [s, n] : c.simulation.scenario_assignment)
    sim["scenario_assignment"][std::string(to_string(s))] = n;
  sim["compliance_approvals"] = c.simulation.compliance_approvals;
  for (const auto& [r, p] : c.simulation.roles) {
    auto& rj = sim["roles"][std::string(to_string(r))];
    for (auto kind : {ActionKind::login, ActionKind::db_query, ActionKind::file_access, ActionKind::file_export,
                      ActionKind::email_send})
      rj["rates"][std::string(to_string(kind))] = p.rates[static_cast<std::size_t>(kind)];
    rj["after_hours_login_prob"] = p.after_hours_login_prob;
    rj["new_location_login_prob"] = p.new_location_login_prob;
    rj["sensitive_access_prob"] = p.sensitive_access_prob;
    rj["external_export_prob"] = p.external_export_prob;
    rj["export_volume_median"] = p.export_volume_median;
    rj["export_volume_sigma"] = p.export_volume_sigma;
    rj["external_email_prob"] = p.external_email_prob;
    rj["external_export_cap"] = p.external_export_cap;
  }
  sim["backup_period_min"] = c.simulation.backup_period_min;
  sim["backup_period_max"] = c.simulation.backup_period_max;
  sim["approved_transfer_gap_min"] = c.simulation.approved_transfer_gap_min;
  sim["approved_transfer_gap_max"] = c.simulation.approved_transfer_gap_max;
  sim["restricted_access_mistake_prob"] = c.simulation.restricted_access_mistake_prob;
  sim["deny_domain_mistake_prob"] = c.simulation.deny_domain_mistake_prob;
  sim["personal_email_prob"] = c.simulation.personal_email_prob;
  sim["script_start_min_offset"] = c.simulation.script_start_min_offset;
  sim["script_start_max_offset"] = c.simulation.script_start_max_offset;
  sim["deny_domains"] = c.simulation.deny_domains;
  for (const auto& [res, roles] : c.simulation.restricted_resources)
    for (Role r : roles) sim["restricted_resources"][res].push_back(std::string(to_string(r)));

  const auto& d = c.detection;
  auto& dj = j["detection"];
  dj["variant"] = std::string(siem::to_string(d.variant));
  dj["theta_base"] = d.theta_base;
  dj["theta_slope"] = d.theta_slope;
  dj["early_fraction"] = d.early_fraction;
  dj["window"] = d.window;
  dj["chain_window"] = d.chain_window;
  dj["excess_kinds"] = d.excess_kinds;
  dj["ewma_alpha"] = d.ewma_alpha;
  dj["ewma_epsilon"] = d.ewma_epsilon;
  dj["large_export_volume"] = d.large_export_volume;
  dj["feedback"] = d.feedback;
  dj["exclude_insiders_from_training"] = d.exclude_insiders_from_training;
  dj["enhanced_anomaly"] = d.enhanced_anomaly;
  dj["enhanced_regular_cv"] = d.enhanced_regular_cv;
  const auto& w = d.correlation.weights;
  dj["weights"] = {{"policy", w.policy},
                   {"policy_max_items", w.policy_max_items},
                   {"baseline_per_deviation", w.baseline_per_deviation},
                   {"baseline_cap", w.baseline_cap},
                   {"deviation_min", w.deviation_min},
                   {"after_hours", w.after_hours},
                   {"staging", w.staging},
                   {"forensics", w.forensics},
                   {"forensics_style", w.forensics_style},
                   {"forensics_threshold", w.forensics_threshold},
                   {"scorer", w.scorer}};
  dj["ml_advice"] = {{"weight", d.correlation.advice.weight},
                     {"score_floor", d.correlation.advice.score_floor},
                     {"band", d.correlation.advice.band}};
  dj["trust"] = {{"initial", d.trust.initial},
                 {"true_positive_delta", d.trust.true_positive_delta},
                 {"false_positive_delta", d.trust.false_positive_delta},
                 {"decay", d.trust.decay},
                 {"lo", d.trust.lo},
                 {"hi", d.trust.hi}};
  dj["scorer"] = {{"learning_rate", d.scorer.learning_rate},
                  {"warmup_epochs", d.scorer.warmup_epochs},
                  {"l2", d.scorer.l2}};
  dj["forest"] = {{"subsample", d.forest.subsample}, {"trees", d.forest.trees}, {"seed", d.forest.seed}};
  dj["tom"] = {{"threshold", d.tom.threshold},
               {"weight", d.tom.weight},
               {"specificity_sensitive", d.specificity.sensitive},
               {"specificity_external", d.specificity.external},
               {"specificity_login", d.specificity.login}};
  dj["peer"] = {{"z_min", d.peer.z_min},
                {"epsilon", d.peer.epsilon},
                {"weight_per_z", d.peer.weight_per_z},
                {"weight_cap", d.peer.weight_cap}};
  dj["regularity"] = {{"cv_min", d.regularity.cv_min},
                      {"factor", d.regularity.factor},
                      {"min_period", d.regularity.min_period},
                      {"lookback", d.regularity.lookback}};
  dj["analyzer"] = {{"tau_ai", d.analyzer.tau_ai},
                    {"heuristic_slope", d.analyzer.heuristic_slope},
                    {"heuristic_offset", d.analyzer.heuristic_offset}};
  dj["policy"]["deny_domains"] = d.policy.deny_domains;
  for (const auto& [res, roles] : d.policy.restricted_resources)
    for (Role r : roles) dj["policy"]["restricted_resources"][res].push_back(std::string(to_string(r)));
  for (const auto& [r, cap] : d.policy.external_export_cap)
    dj["policy"]["external_export_cap"][std::string(to_string(r))] = cap;

  const auto& f = c.forensics;
  j["forensics"] = {{"model_path", f.model_path},
                    {"corpus_path", f.corpus_path},
                    {"corpus_seed", f.corpus_seed},
                    {"corpus_ham", f.corpus_ham},
                    {"corpus_spam", f.corpus_spam},
                    {"keywords_sensitive", f.keywords_sensitive},
                    {"keywords_urgent", f.keywords_urgent},
                    {"train",
                     {{"vocabulary_cap", f.train.vocabulary_cap},
                      {"test_fraction", f.train.test_fraction},
                      {"seed", f.train.seed},
                      {"min_words", f.train.min_words},
                      {"multinomial_alpha", f.train.multinomial_alpha},
                      {"linear_learning_rate", f.train.linear_learning_rate},
                      {"linear_l2", f.train.linear_l2},
                      {"linear_epochs", f.train.linear_epochs}}}};
  j["plan_library"] = c.plan_library;
  j["output_dir"] = c.output_dir;
  j["seeds"] = c.seeds;
  j["sweep_thetas"] = c.sweep_thetas;
  return j.dump(2) + "\n";
}

}  // namespace sentinel
