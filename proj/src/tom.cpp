#include "sentinel/tom.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>

#include "sentinel/error.hpp"

namespace sentinel::tom {

namespace {

using json = nlohmann::json;

constexpr std::string_view kBundledLibrary =
#include "plan_library.inc"
    ;

bool context_matches(ActionPattern::Context want, LoginContext have) {
  switch (want) {
    case ActionPattern::Context::any:
      return true;
    case ActionPattern::Context::normal:
      return have == LoginContext::normal;
    case ActionPattern::Context::after_hours:
      return have == LoginContext::after_hours;
    case ActionPattern::Context::new_location:
      return have == LoginContext::new_location;
    case ActionPattern::Context::unusual:
      return have != LoginContext::normal;
  }
  return false;
}

template <typename E>
E parse_enum(const json& j, std::string_view what) {
  if (!j.is_string()) throw ParseError("plan library: " + std::string(what) + " must be a string");
  auto v = enum_from_string<E>(j.get<std::string>());
  if (!v) throw ParseError("plan library: unknown " + std::string(what) + " '" + j.get<std::string>() + "'");
  return *v;
}

ActionPattern parse_pattern(const json& j, const std::string& name) {
  if (!j.is_object()) throw ParseError("plan library: pattern '" + name + "' must be an object");
  ActionPattern p;
  for (const auto& [key, value] : j.items()) {
    if (key == "kinds") {
      for (const auto& k : value) p.kinds.push_back(parse_enum<ActionKind>(k, "kind"));
    } else if (key == "sensitivity") {
      p.sensitivity = parse_enum<Sensitivity>(value, "sensitivity");
    } else if (key == "destination") {
      p.destination = parse_enum<Destination>(value, "destination");
    } else if (key == "resources") {
      for (const auto& r : value) p.resources.push_back(r.get<std::string>());
    } else if (key == "domains") {
      for (const auto& d : value) p.domains.push_back(d.get<std::string>());
    } else if (key == "recipient") {
      p.recipient = parse_enum<RecipientScope>(value, "recipient");
    } else if (key == "context") {
      static const std::map<std::string, ActionPattern::Context> contexts{
          {"any", ActionPattern::Context::any},
          {"normal", ActionPattern::Context::normal},
          {"after_hours", ActionPattern::Context::after_hours},
          {"new_location", ActionPattern::Context::new_location},
          {"unusual", ActionPattern::Context::unusual}};
      auto it = contexts.find(value.get<std::string>());
      if (it == contexts.end()) throw ParseError("plan library: unknown context '" + value.get<std::string>() + "'");
      p.context = it->second;
    } else if (key == "min_volume") {
      p.min_volume = value.get<std::int64_t>();
    } else if (key == "max_volume") {
      p.max_volume = value.get<std::int64_t>();
    } else {
      throw ParseError("plan library: pattern '" + name + "' has unknown field '" + key + "'");
    }
  }
  return p;
}

bool is_login_pattern(const ActionPattern& p) {
  return p.kinds.size() == 1 && p.kinds.front() == ActionKind::login;
}

bool is_export_pattern(const ActionPattern& p) {
  return p.kinds.size() == 1 && p.kinds.front() == ActionKind::file_export;
}

}  // namespace

bool ActionPattern::matches(const Event& e) const {
  if (!kinds.empty() && std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) return false;
  if (sensitivity || !resources.empty()) {
    const auto* a = e.as_access();
    if (!a) return false;
    if (sensitivity && a->sensitivity != *sensitivity) return false;
    if (!resources.empty() && std::find(resources.begin(), resources.end(), a->resource) == resources.end())
      return false;
  }
  if (destination || min_volume || max_volume) {
    const auto* x = e.as_export();
    if (!x) return false;
    if (destination && x->destination != *destination) return false;
    if (min_volume && x->volume < *min_volume) return false;
    if (max_volume && x->volume >= *max_volume) return false;
  }
  if (recipient || !domains.empty()) {
    const auto* m = e.as_email();
    if (!m) return false;
    if (recipient && m->scope != *recipient) return false;
    if (!domains.empty() && std::find(domains.begin(), domains.end(), m->domain) == domains.end()) return false;
  }
  if (context != Context::any) {
    const auto* l = e.as_login();
    if (!l || !context_matches(context, l->context)) return false;
  }
  return true;
}

double specificity(const ActionPattern& p, const SpecificityWeights& w) {
  double s = 1.0;
  if (p.sensitivity == Sensitivity::sensitive) s *= w.sensitive;
  if (p.destination == Destination::external || p.recipient == RecipientScope::external) s *= w.external;
  if (is_login_pattern(p)) s *= w.login;
  return s;
}

const PlanLibrary& PlanLibrary::defaults() {
  static const PlanLibrary library = from_json(kBundledLibrary);
  return library;
}

PlanLibrary PlanLibrary::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("plan library: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("patterns") || !doc.contains("plans"))
    throw ParseError("plan library: expected an object with 'patterns' and 'plans'");

  std::map<std::string, ActionPattern> patterns;
  for (const auto& [name, body] : doc["patterns"].items()) patterns[name] = parse_pattern(body, name);

  PlanLibrary lib;
  for (const auto& plan : doc["plans"]) {
    PlanTemplate t;
    t.id = plan.at("id").get<std::string>();
    if (plan.contains("scenario")) t.scenario = parse_enum<Scenario>(plan["scenario"], "scenario");
    for (const auto& step : plan.at("steps")) {
      auto it = patterns.find(step.get<std::string>());
      if (it == patterns.end())
        throw ParseError("plan library: plan '" + t.id + "' uses undefined pattern '" + step.get<std::string>() + "'");
      t.steps.push_back(it->second);
    }
    if (t.steps.empty()) throw ParseError("plan library: plan '" + t.id + "' has no steps");
    lib.templates.push_back(std::move(t));
  }
  lib.validate();
  return lib;
}

const PlanTemplate* PlanLibrary::find(std::string_view id) const {
  for (const auto& t : templates)
    if (t.id == id) return &t;
  return nullptr;
}

void PlanLibrary::validate() const {
  for (Scenario s : kAllScenarios) {
    auto n = std::count_if(templates.begin(), templates.end(), [s](const PlanTemplate& t) { return t.scenario == s; });
    if (n != 1)
      throw ParseError("plan library: scenario '" + std::string(to_string(s)) + "' needs exactly one plan, found " +
                       std::to_string(n));
  }
  for (const auto& t : templates) {
    if (!t.malicious()) continue;
    bool shared = std::any_of(templates.begin(), templates.end(), [&t](const PlanTemplate& b) {
      return !b.malicious() && b.steps.front() == t.steps.front();
    });
    if (!shared) throw ParseError("plan library: plan '" + t.id + "' has no benign plan with the same first step");
  }
}

std::vector<IntentHypothesis> abduce(std::span<const Event> window, const PlanLibrary& library,
                                     const SpecificityWeights& weights) {
  std::vector<IntentHypothesis> out;
  if (window.empty()) return out;
  for (const auto& t : library.templates) {
    std::size_t k = 0;
    for (const auto& e : window) {
      if (k == t.steps.size()) break;
      if (t.steps[k].matches(e)) ++k;
    }
    if (k == 0) continue;
    double matched = 0.0, total = 0.0;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      double s = specificity(t.steps[i], weights);
      total += s;
      if (i < k) matched += s;
    }
    IntentHypothesis h;
    h.actor_id = window.front().actor_id;
    h.plan = t.id;
    h.scenario = t.scenario;
    h.completion = static_cast<double>(k) / static_cast<double>(t.steps.size());
    h.confidence = matched / total;
    h.matched_steps = k;
    out.push_back(std::move(h));
  }
  return out;
}

IntentHypothesis check_contradiction(IntentHypothesis h, const ActorContext& context, const PlanLibrary& library) {
  if (!h.malicious()) return h;
  const PlanTemplate* plan = library.find(h.plan);
  if (!plan) throw StateError("hypothesis refers to unknown plan '" + h.plan + "'");
  std::span<const ActionPattern> matched(plan->steps.data(), h.matched_steps);

  if (context.compliance_approval &&
      std::any_of(matched.begin(), matched.end(), [](const ActionPattern& p) { return is_export_pattern(p); })) {
    h.contradicted = true;
    return h;
  }
  for (const auto& other : context.window_hypotheses) {
    if (other.malicious() || other.matched_steps < h.matched_steps) continue;
    const PlanTemplate* benign = library.find(other.plan);
    if (!benign) continue;
    bool covers = std::all_of(matched.begin(), matched.end(), [benign](const ActionPattern& p) {
      return std::find(benign->steps.begin(), benign->steps.end(), p) != benign->steps.end();
    });
    if (covers) {
      h.contradicted = true;
      return h;
    }
  }
  return h;
}

std::optional<Evidence> tom_evidence(std::span<const IntentHypothesis> hypotheses, const TomParams& params, Step step) {
  const IntentHypothesis* best = nullptr;
  for (const auto& h : hypotheses) {
    if (!h.malicious() || h.contradicted || h.confidence <= params.threshold) continue;
    if (!best || h.confidence > best->confidence) best = &h;
  }
  if (!best) return std::nullopt;
  return Evidence{EvidenceKind::tom_intent, params.weight * best->confidence, step,
                  best->plan + " confidence " + std::to_string(best->confidence).substr(0, 4)};
}

}  // namespace sentinel::tom
