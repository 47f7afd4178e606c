#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/events.hpp"

namespace sentinel::tom {

/// Abstract action pattern; unset fields match anything.
struct ActionPattern {
  std::vector<ActionKind> kinds;  // empty: any kind
  std::optional<Sensitivity> sensitivity;
  std::vector<std::string> resources;  // accessed resource; empty: any
  std::optional<Destination> destination;
  std::optional<RecipientScope> recipient;
  std::vector<std::string> domains;  // email recipient domain; empty: any
  /// Login context requirement; `unusual` accepts after_hours or new_location.
  enum class Context { any, normal, after_hours, new_location, unusual } context = Context::any;
  std::optional<std::int64_t> min_volume;
  std::optional<std::int64_t> max_volume;  // exclusive

  bool matches(const Event& e) const;
  bool operator==(const ActionPattern&) const = default;
};

struct SpecificityWeights {
  double sensitive = 2.0;
  double external = 2.0;
  double login = 0.5;
};

double specificity(const ActionPattern& p, const SpecificityWeights& w);

struct PlanTemplate {
  std::string id;
  std::optional<Scenario> scenario;  // set for malicious plans only
  std::vector<ActionPattern> steps;

  bool malicious() const { return scenario.has_value(); }
};

struct PlanLibrary {
  std::vector<PlanTemplate> templates;

  /// Bundled library (same content as data/plan_library.json).
  static const PlanLibrary& defaults();
  /// Throws ParseError on malformed documents and invariant violations.
  static PlanLibrary from_json(std::string_view text);

  const PlanTemplate* find(std::string_view id) const;
  /// Exactly one malicious plan per scenario; each malicious plan's first
  /// step is shared by at least one benign plan. Throws ParseError.
  void validate() const;
};

struct IntentHypothesis {
  ActorId actor_id;
  std::string plan;
  std::optional<Scenario> scenario;
  double completion = 0.0;
  double confidence = 0.0;
  bool contradicted = false;
  std::size_t matched_steps = 0;

  bool malicious() const { return scenario.has_value(); }
  bool operator==(const IntentHypothesis&) const = default;
};

/// Longest matched prefix of each template as a subsequence of the window.
/// completion = matched / length; confidence = specificity-weighted share
/// of the template matched. Zero-completion plans are omitted.
std::vector<IntentHypothesis> abduce(std::span<const Event> window, const PlanLibrary& library,
                                     const SpecificityWeights& weights = {});

/// What contradiction checking knows about the actor.
struct ActorContext {
  bool compliance_approval = false;
  /// Hypotheses from the same window (benign ones are the competitors).
  std::span<const IntentHypothesis> window_hypotheses;
};

/// Marks a malicious hypothesis contradicted when a benign template that
/// contains every pattern the hypothesis matched has matched at least as
/// many window events, or when an approved actor's matched steps include
/// an export. Benign hypotheses are returned unchanged.
IntentHypothesis check_contradiction(IntentHypothesis h, const ActorContext& context, const PlanLibrary& library);

struct TomParams {
  double threshold = 0.75;  // evidence only strictly above this confidence
  double weight = 3.0;     // evidence weight per unit confidence
};

/// Strongest non-contradicted malicious hypothesis as tom_intent evidence.
std::optional<Evidence> tom_evidence(std::span<const IntentHypothesis> hypotheses, const TomParams& params, Step step);

}  // namespace sentinel::tom
