#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sentinel/anomaly.hpp"
#include "sentinel/events.hpp"
#include "sentinel/tom.hpp"

namespace sentinel::siem {

enum class Variant { lsc, ce_siem, eg_siem, eg_siem_pt };
std::string_view to_string(Variant v);
/// Accepts lsc, ce, eg, eg-pt and the upper-case names (LSC, CE_SIEM, ...).
std::optional<Variant> parse_variant(std::string_view name);
inline constexpr std::array kAllVariants{Variant::lsc, Variant::ce_siem, Variant::eg_siem, Variant::eg_siem_pt};

struct Layers {
  bool tom = false;
  bool forensics = false;
  bool pretrained_forensics = false;
  bool contradiction = false;
  bool regularity = false;
  bool peer_normalization = false;
  bool gating = false;
  bool compliance_override = false;
  bool operator==(const Layers&) const = default;
};

/// Layer set implied by a variant. Each variant strictly adds to the
/// previous one.
Layers layers_for(Variant v);

// ---- policy ---------------------------------------------------------------

struct PolicyRules {
  std::set<std::string> deny_domains{"rival-corp.com", "filedrop.io"};
  std::map<std::string, std::set<Role>> restricted_resources{{"srv-admin-01", {Role::admin}},
                                                             {"srv-payroll-db", {Role::admin, Role::power_user}},
                                                             {"srv-research-vault", {Role::developer}}};
  std::map<Role, std::int64_t> external_export_cap{
      {Role::staff, 2000}, {Role::developer, 3000}, {Role::admin, 3000}, {Role::power_user, 8000}};
};

/// Deterministic rule check for one event; nullopt when no rule fires.
std::optional<Evidence> policy_check(const Event& e, Role role, const PolicyRules& rules, double weight = 2.0);

// ---- baselines ------------------------------------------------------------

struct EwmaState {
  double mean = 0.0;
  double variance = 0.0;
  bool initialized = false;
  bool operator==(const EwmaState&) const = default;
};

struct EwmaResult {
  EwmaState state;
  double deviation = 0.0;  // (x - mean) / sqrt(variance + eps), against the prior state
};

/// mean' = mean + a (x - mean); var' = (1-a) var + a (x - mean)^2 (using the
/// prior mean). The first observation seeds the mean with zero variance.
EwmaResult ewma_update(const EwmaState& state, double x, double alpha, double eps);

/// Multiplier for a baseline weight: `factor` when the event steps form a
/// regular series (at least 3 events, coefficient of variation of the
/// inter-event gaps below cv_min, mean gap at least min_period), else 1.
double regularity_suppression(std::span<const Step> event_steps, double cv_min = 0.25, double factor = 0.5,
                              double min_period = 3.0);

struct PeerParams {
  double z_min = 2.5;
  double epsilon = 200.0;  // floor on the MAD
  double weight_per_z = 0.5;
  double weight_cap = 2.0;
};

/// Robust z = (x - median) / max(MAD, eps) against same-role peers;
/// evidence when z >= z_min.
std::optional<Evidence> peer_normalize(double actor_value, std::span<const double> peers, const PeerParams& params,
                                       Step step);

// ---- trust and thresholds ---------------------------------------------------

struct TrustParams {
  double initial = 0.7;
  double true_positive_delta = -0.15;
  double false_positive_delta = 0.05;
  double decay = 0.01;
  double lo = 0.10;
  double hi = 0.95;
};

enum class TrustOutcome { true_positive, false_positive, decay_tick };

/// Feedback moves trust by the outcome delta; a decay tick moves it toward
/// the initial value by at most `decay`. Result is clamped to [lo, hi].
double update_trust(double trust, TrustOutcome outcome, const TrustParams& params = {});

struct Thresholds {
  double early = 0.0;
  double confirm = 0.0;
};

/// confirm = base + slope (trust - 0.5); early = early_fraction * confirm.
Thresholds thresholds(double trust, double base = 4.0, double slope = 2.0, double early_fraction = 0.6);

// ---- online scorer ----------------------------------------------------------

/// Anchor features, all in [0, 1].
enum class Anchor {
  recent_email,
  after_hours_login,
  large_export,
  sensitive_access,
  external_destination,
  staging_export,
  forensics_flag,
  tom_intent,
};
inline constexpr int kAnchorCount = 8;
using AnchorFeatures = Eigen::Matrix<double, kAnchorCount, 1>;

struct ScorerParams {
  double learning_rate = 0.1;
  int warmup_epochs = 20;
  double l2 = 1e-3;
};

/// Logistic scorer over the anchors. Anchor weights are kept non-negative
/// so the score never decreases when an anchor grows.
class OnlineScorer {
 public:
  OnlineScorer();
  explicit OnlineScorer(const ScorerParams& params);

  bool warmed_up() const { return warmed_up_; }
  double probability(const AnchorFeatures& x) const;
  const AnchorFeatures& weights() const { return weights_; }
  double bias() const { return bias_; }

  /// Batch logistic training on warm-up vectors.
  OnlineScorer warmup(std::span<const AnchorFeatures> batch, std::span<const int> labels) const;
  /// One SGD step. Throws StateError before warmup.
  OnlineScorer update(const AnchorFeatures& x, int label) const;

 private:
  void step(const AnchorFeatures& x, int label, double lr);

  ScorerParams params_;
  AnchorFeatures weights_;
  double bias_ = -4.0;
  bool warmed_up_ = false;
};

// ---- correlation and gating -------------------------------------------------

enum class Metric { logins, export_volume, queries };
inline constexpr int kMetricCount = 3;
std::string_view to_string(Metric m);

struct EvidenceWeights {
  double policy = 2.0;            // per violating event in the window
  std::size_t policy_max_items = 3;  // most recent violations counted
  double baseline_per_deviation = 1.0;
  double baseline_cap = 3.0;
  double deviation_min = 2.5;  // upward deviations only
  double after_hours = 1.0;
  double staging = 1.5;
  double forensics = 2.0;
  double forensics_style = 1.0;  // extra weight from authorship drift (pre-trained analyzer only)
  double forensics_threshold = 0.7;
  double scorer = 2.0;  // times (p - 0.5)+
};

/// Everything the layers observed for one actor in one correlation pass.
/// Filled for every variant; correlate() selects by variant.
struct LayerOutputs {
  ActorId actor_id;
  Step step = 0;
  std::vector<Evidence> policy;
  std::array<double, kMetricCount> deviation{};
  std::array<double, kMetricCount> regularity{1.0, 1.0, 1.0};
  bool after_hours_login = false;
  int staging_exports = 0;
  double staging_regularity = 1.0;
  std::optional<double> scorer_probability;
  std::optional<Evidence> tom_raw;        // before contradiction checks
  std::optional<Evidence> tom_validated;  // after contradiction checks
  double max_phishing = 0.0;
  double max_authorship = 0.0;
  std::optional<Evidence> peer;
  std::optional<double> anomaly_score;
};

struct CorrelationParams {
  EvidenceWeights weights;
  anomaly::AdviceParams advice;
};

struct Correlation {
  double risk = 0.0;
  std::vector<Evidence> evidence;
  bool tom_contributed = false;
};

/// Sums weighted evidence for the enabled layers, applies the variant's
/// suppressions, then ML advice against theta_confirm.
Correlation correlate(const LayerOutputs& in, const Layers& layers, const CorrelationParams& params,
                      double theta_confirm);

enum class Gate { tight_exfiltration_chain, staging_activity, login_context, excess_evidence };
std::string_view to_string(Gate g);

/// Gates satisfied by an actor's window (events in log order):
/// sensitive access, external export, external email within chain_window;
/// two staging exports then an external export; an unusual login then an
/// external export; at least excess_kinds distinct evidence kinds.
std::vector<Gate> evaluate_gates(std::span<const Event> window, const std::vector<Evidence>& evidence, Step chain_window,
                                 std::size_t excess_kinds = 5);

struct GateDecision {
  std::optional<AlertTier> tier;
  std::vector<Gate> satisfied;
  bool suppressed_by_compliance = false;
};

/// Gates covered by an export approval.
inline const std::set<Gate> kApprovalScope{Gate::tight_exfiltration_chain, Gate::staging_activity,
                                           Gate::login_context, Gate::excess_evidence};

/// Escalation decision. Without gating, risk >= confirm suffices. With
/// gating, confirmation also needs two distinct evidence kinds and one
/// gate; an approved actor whose satisfied gates are all covered by the
/// approval is not confirmed. Anything else at or above `early` is early.
GateDecision gate_confirm(double risk, const std::vector<Evidence>& evidence, const Thresholds& th, const Layers& layers,
                          const std::vector<Gate>& gates, bool compliance_approval);

}  // namespace sentinel::siem
