#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sentinel/engine.hpp"
#include "sentinel/events.hpp"
#include "sentinel/simkit.hpp"

namespace sentinel::evalkit {

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

/// An actor counts as detected when it has a confirmed alert at or after
/// `testing_start`; for insiders the alert must also come at or after
/// their first malicious step. Insiders alerted only earlier count as a
/// false positive as well as a miss.
struct ActorMetrics {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ActorId> false_positive_actors;
};

ActorMetrics actor_metrics(std::span<const Alert> alerts, std::span<const GroundTruth> truth, Step testing_start);

/// Alert-level precision per tier; an alert is a true positive when its
/// actor is malicious. Empty tiers have precision 0.
struct AlertMetrics {
  int early = 0;
  int early_true = 0;
  int confirmed = 0;
  int confirmed_true = 0;
  double early_precision = 0.0;
  double confirmed_precision = 0.0;
  int confirmed_false() const { return confirmed - confirmed_true; }
};

AlertMetrics alert_metrics(std::span<const Alert> alerts, std::span<const GroundTruth> truth, Step testing_start);

/// Steps from an insider's first malicious action to its first confirmed
/// alert, over detected insiders (optionally one scenario only).
struct TtdStats {
  int detected = 0;
  double average = 0.0;
  double maximum = 0.0;
  std::map<ActorId, Step> per_actor;
};

TtdStats time_to_detect(std::span<const Alert> alerts, std::span<const GroundTruth> truth, Step testing_start,
                        std::optional<Scenario> scenario = std::nullopt);

struct RunReport {
  siem::Variant variant = siem::Variant::lsc;
  std::uint64_t seed = 0;
  double theta_base = 4.0;
  ActorMetrics actors;
  AlertMetrics alerts;
  TtdStats ttd;
  std::map<Scenario, TtdStats> ttd_by_scenario;
  int tom_assisted = 0;  // confirmed alerts carrying ToM evidence
};

RunReport evaluate(std::span<const Alert> alerts, std::span<const GroundTruth> truth, Step testing_start);

/// Means over runs sharing variant and theta_base.
struct Summary {
  siem::Variant variant = siem::Variant::lsc;
  double theta_base = 4.0;
  int runs = 0;
  double actor_precision = 0.0;
  double actor_recall = 0.0;
  double actor_f1 = 0.0;
  double confirmed_alerts = 0.0;
  double confirmed_precision = 0.0;
  double confirmed_false = 0.0;
  double early_alerts = 0.0;
  double early_precision = 0.0;
  double false_positive_actors = 0.0;
  double ttd_average = 0.0;  // mean over runs with at least one detection
  double ttd_maximum = 0.0;
  double tom_assisted = 0.0;
  std::map<Scenario, double> ttd_by_scenario;
};

std::vector<Summary> summarize(std::span<const RunReport> runs);

struct ExperimentOptions {
  std::vector<siem::Variant> variants{siem::kAllVariants.begin(), siem::kAllVariants.end()};
  std::vector<std::uint64_t> seeds;
  bool sweep = false;
  std::vector<double> sweep_thetas{3, 4, 5, 6, 7};
  siem::Variant sweep_variant = siem::Variant::lsc;
};

struct ExperimentResult {
  std::vector<RunReport> runs;
  std::vector<RunReport> sweep_runs;
};

/// One seeded run: simulate, then detect with `variant` at `theta_base`.
RunReport run_once(const simkit::SimConfig& sim, siem::DetectionConfig detection, siem::Variant variant,
                   std::uint64_t seed, double theta_base, const forensics::PretrainedModel* model,
                   const tom::PlanLibrary* library);

/// Every variant on every seed (one simulation per seed), plus the optional
/// threshold sweep.
ExperimentResult run_experiment(const simkit::SimConfig& sim, const siem::DetectionConfig& detection,
                                const ExperimentOptions& options, const forensics::PretrainedModel* model,
                                const tom::PlanLibrary* library);

/// Columns: row (run | mean), variant, seed (empty on mean rows),
/// theta_base, runs, actor_precision, actor_recall, actor_f1, fp_actors,
/// confirmed_alerts, confirmed_precision, confirmed_fp, early_alerts,
/// early_precision, ttd_avg, ttd_max, tom_assisted, then ttd_<scenario> for
/// every scenario. Each (variant, theta_base) group lists its run rows in
/// input order followed by its mean row.
void write_aggregate_csv(std::ostream& out, std::span<const RunReport> runs);

/// Pretty-printed with `indent` spaces; indent < 0 gives one line. Ends
/// with a newline.
std::string report_to_json(const RunReport& report, int indent = 2);

}  // namespace sentinel::evalkit
