#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sentinel/anomaly.hpp"
#include "sentinel/events.hpp"
#include "sentinel/forensics.hpp"
#include "sentinel/siem.hpp"
#include "sentinel/tom.hpp"

namespace sentinel::siem {

struct RegularityParams {
  double cv_min = 0.25;
  double factor = 0.5;
  double min_period = 3.0;
  Step lookback = 80;
};

struct DetectionConfig {
  Variant variant = Variant::eg_siem;
  double theta_base = 4.0;
  double theta_slope = 2.0;
  double early_fraction = 0.6;
  Step warmup_steps = 60;
  Step window = 20;
  Step chain_window = 10;
  std::size_t excess_kinds = 5;

  double ewma_alpha = 0.05;
  std::array<double, kMetricCount> ewma_epsilon{1.0, 1.0e4, 1.0};
  std::int64_t large_export_volume = 3000;

  CorrelationParams correlation;
  TrustParams trust;
  ScorerParams scorer;
  anomaly::ForestParams forest;
  bool enhanced_anomaly = false;
  double enhanced_regular_cv = 1.0;
  tom::TomParams tom;
  tom::SpecificityWeights specificity;
  PeerParams peer;
  RegularityParams regularity;
  PolicyRules policy;
  forensics::AnalyzerConfig analyzer;

  /// Analyst feedback on confirmed alerts after warm-up (needs truth).
  bool feedback = true;
  /// Keep known insiders out of warm-up training data (needs truth).
  bool exclude_insiders_from_training = true;

  /// Throws ConfigError on out-of-range settings.
  void validate() const;
};

struct DetectionInputs {
  std::span<const Event> events;
  std::span<const ActorInfo> actors;
  std::span<const GroundTruth> truth;  // may be empty
  const forensics::PretrainedModel* model = nullptr;
  const tom::PlanLibrary* library = nullptr;  // defaults when null
};

/// One correlation pass, for audits and debugging.
struct PassRecord {
  const LayerOutputs* outputs;
  const Correlation* correlation;
  Thresholds thresholds;
  const GateDecision* decision;
  double trust;
};

using PassObserver = std::function<void(const PassRecord&)>;

struct DetectionResult {
  std::vector<Alert> alerts;  // ordered by step, then actor id
  anomaly::RoleAnomalyModel anomaly_model;
  OnlineScorer scorer;
  std::map<ActorId, double> final_trust;
};

/// Replays an event log through the layered SIEM. Throws ConfigError when
/// the variant needs a pre-trained model and none is given, StateError on
/// events from actors missing in the roster.
DetectionResult detect(const DetectionConfig& config, const DetectionInputs& inputs, const PassObserver& observer = {});

}  // namespace sentinel::siem
