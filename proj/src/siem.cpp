#include "sentinel/siem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentinel/error.hpp"

namespace sentinel::siem {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string fixed2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::lsc:
      return "LSC";
    case Variant::ce_siem:
      return "CE_SIEM";
    case Variant::eg_siem:
      return "EG_SIEM";
    case Variant::eg_siem_pt:
      return "EG_SIEM_PT";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "lsc" || name == "LSC") return Variant::lsc;
  if (name == "ce" || name == "CE_SIEM") return Variant::ce_siem;
  if (name == "eg" || name == "EG_SIEM") return Variant::eg_siem;
  if (name == "eg-pt" || name == "EG_SIEM_PT") return Variant::eg_siem_pt;
  return std::nullopt;
}

Layers layers_for(Variant v) {
  Layers l;
  if (v == Variant::lsc) return l;
  l.tom = l.forensics = true;
  if (v == Variant::ce_siem) return l;
  l.contradiction = l.regularity = l.peer_normalization = l.gating = l.compliance_override = true;
  if (v == Variant::eg_siem) return l;
  l.pretrained_forensics = true;
  return l;
}

std::optional<Evidence> policy_check(const Event& e, Role role, const PolicyRules& rules, double weight) {
  if (const auto* a = e.as_access()) {
    auto it = rules.restricted_resources.find(a->resource);
    if (it != rules.restricted_resources.end() && !it->second.contains(role))
      return Evidence{EvidenceKind::policy_violation, weight, e.step, "restricted resource " + a->resource};
  } else if (const auto* x = e.as_export()) {
    auto cap = rules.external_export_cap.find(role);
    if (x->destination == Destination::external && cap != rules.external_export_cap.end() && x->volume > cap->second)
      return Evidence{EvidenceKind::policy_violation, weight, e.step,
                      "external export " + std::to_string(x->volume) + " over cap " + std::to_string(cap->second)};
  } else if (const auto* m = e.as_email()) {
    if (m->scope == RecipientScope::external && rules.deny_domains.contains(m->domain))
      return Evidence{EvidenceKind::policy_violation, weight, e.step, "email to deny-listed domain " + m->domain};
  }
  return std::nullopt;
}

EwmaResult ewma_update(const EwmaState& state, double x, double alpha, double eps) {
  if (!state.initialized) return {EwmaState{x, 0.0, true}, 0.0};
  EwmaResult r;
  double diff = x - state.mean;
  r.deviation = diff / std::sqrt(state.variance + eps);
  r.state.mean = state.mean + alpha * diff;
  r.state.variance = (1.0 - alpha) * state.variance + alpha * diff * diff;
  r.state.initialized = true;
  return r;
}

double regularity_suppression(std::span<const Step> event_steps, double cv_min, double factor, double min_period) {
  std::vector<Step> steps(event_steps.begin(), event_steps.end());
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  if (steps.size() < 3) return 1.0;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < steps.size(); ++i) gaps.push_back(static_cast<double>(steps[i] - steps[i - 1]));
  double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
  double var = 0.0;
  for (double g : gaps) var += (g - mean) * (g - mean);
  var /= static_cast<double>(gaps.size());
  double cv = std::sqrt(var) / mean;
  return (cv < cv_min && mean >= min_period) ? factor : 1.0;
}

std::optional<Evidence> peer_normalize(double actor_value, std::span<const double> peers, const PeerParams& params,
                                       Step step) {
  if (peers.empty()) return std::nullopt;
  std::vector<double> v(peers.begin(), peers.end());
  double med = median(v);
  for (double& x : v) x = std::abs(x - med);
  double mad = median(v);
  double z = (actor_value - med) / std::max(mad, params.epsilon);
  if (z < params.z_min) return std::nullopt;
  return Evidence{EvidenceKind::peer_export_outlier, std::min(params.weight_per_z * z, params.weight_cap), step,
                  "peer z " + fixed2(z)};
}

double update_trust(double trust, TrustOutcome outcome, const TrustParams& p) {
  switch (outcome) {
    case TrustOutcome::true_positive:
      trust += p.true_positive_delta;
      break;
    case TrustOutcome::false_positive:
      trust += p.false_positive_delta;
      break;
    case TrustOutcome::decay_tick:
      if (std::abs(trust - p.initial) <= p.decay)
        trust = p.initial;
      else
        trust += trust > p.initial ? -p.decay : p.decay;
      break;
  }
  return std::clamp(trust, p.lo, p.hi);
}

Thresholds thresholds(double trust, double base, double slope, double early_fraction) {
  double confirm = base + slope * (trust - 0.5);
  return {early_fraction * confirm, confirm};
}

OnlineScorer::OnlineScorer() : OnlineScorer(ScorerParams{}) {}

OnlineScorer::OnlineScorer(const ScorerParams& params) : params_(params) {
  weights_ << 0.5, 1.0, 1.5, 1.0, 1.5, 1.5, 1.5, 2.0;
}

double OnlineScorer::probability(const AnchorFeatures& x) const { return sigmoid(weights_.dot(x) + bias_); }

void OnlineScorer::step(const AnchorFeatures& x, int label, double lr) {
  double err = probability(x) - static_cast<double>(label);
  weights_ -= lr * (err * x + params_.l2 * weights_);
  weights_ = weights_.cwiseMax(0.0);
  bias_ -= lr * err;
}

OnlineScorer OnlineScorer::warmup(std::span<const AnchorFeatures> batch, std::span<const int> labels) const {
  if (batch.size() != labels.size()) throw StateError("scorer warm-up needs one label per vector");
  OnlineScorer s = *this;
  if (!batch.empty()) {
    double n = static_cast<double>(batch.size());
    for (int epoch = 0; epoch < params_.warmup_epochs; ++epoch) {
      AnchorFeatures grad = AnchorFeatures::Zero();
      double grad_b = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        double err = s.probability(batch[i]) - static_cast<double>(labels[i]);
        grad += err * batch[i];
        grad_b += err;
      }
      s.weights_ -= params_.learning_rate * (grad / n + params_.l2 * s.weights_);
      s.weights_ = s.weights_.cwiseMax(0.0);
      s.bias_ -= params_.learning_rate * grad_b / n;
    }
  }
  s.warmed_up_ = true;
  return s;
}

OnlineScorer OnlineScorer::update(const AnchorFeatures& x, int label) const {
  if (!warmed_up_) throw StateError("scorer update before warm-up");
  OnlineScorer s = *this;
  s.step(x, label, params_.learning_rate);
  return s;
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::logins:
      return "logins";
    case Metric::export_volume:
      return "export_volume";
    case Metric::queries:
      return "queries";
  }
  return "?";
}

Correlation correlate(const LayerOutputs& in, const Layers& layers, const CorrelationParams& params,
                      double theta_confirm) {
  const auto& w = params.weights;
  Correlation out;
  auto add = [&out](Evidence e) {
    if (e.weight > 0.0) out.evidence.push_back(std::move(e));
  };

  std::size_t first_policy = in.policy.size() > w.policy_max_items ? in.policy.size() - w.policy_max_items : 0;
  for (std::size_t i = first_policy; i < in.policy.size(); ++i) {
    Evidence e = in.policy[i];
    e.weight = w.policy;
    add(e);
  }

  double export_weight = 0.0;
  for (int m = 0; m < kMetricCount; ++m) {
    double dev = in.deviation[static_cast<std::size_t>(m)];
    if (dev < w.deviation_min) continue;
    double weight = std::min(w.baseline_per_deviation * dev, w.baseline_cap);
    if (layers.regularity) weight *= in.regularity[static_cast<std::size_t>(m)];
    if (static_cast<Metric>(m) == Metric::export_volume && layers.peer_normalization) {
      export_weight = weight;
      continue;
    }
    add({EvidenceKind::baseline_deviation, weight, in.step,
         std::string(to_string(static_cast<Metric>(m))) + " deviation " + fixed2(dev)});
  }
  if (layers.peer_normalization && in.peer) {
    Evidence e = *in.peer;
    e.weight = std::min(e.weight, export_weight);
    add(e);
  }

  if (in.after_hours_login) add({EvidenceKind::after_hours_login, w.after_hours, in.step, "unusual login context"});
  if (in.staging_exports >= 2) {
    double weight = w.staging;
    if (layers.regularity) weight *= in.staging_regularity;
    add({EvidenceKind::staging_pattern, weight, in.step, std::to_string(in.staging_exports) + " staging exports"});
  }

  if (in.scorer_probability) {
    double p = *in.scorer_probability;
    add({EvidenceKind::ml_anomaly, w.scorer * std::max(0.0, p - 0.5), in.step, "scorer p " + fixed2(p)});
  }

  if (layers.tom) {
    const auto& tom = layers.contradiction ? in.tom_validated : in.tom_raw;
    if (tom && tom->weight > 0.0) {
      add(*tom);
      out.tom_contributed = true;
    }
  }

  if (layers.forensics && in.max_phishing >= w.forensics_threshold) {
    double weight = w.forensics;
    if (layers.pretrained_forensics) weight += w.forensics_style * in.max_authorship;
    add({EvidenceKind::forensics_flag, weight, in.step, "phishing p " + fixed2(in.max_phishing)});
  }

  out.risk = total_weight(out.evidence);
  if (in.anomaly_score) {
    double adjusted = anomaly::ml_advice(*in.anomaly_score, out.risk, theta_confirm, params.advice);
    if (adjusted > out.risk) {
      out.evidence.push_back(
          {EvidenceKind::ml_anomaly, adjusted - out.risk, in.step, "isolation score " + fixed2(*in.anomaly_score)});
      out.risk = adjusted;
    }
  }
  return out;
}

std::string_view to_string(Gate g) {
  switch (g) {
    case Gate::tight_exfiltration_chain:
      return "tight_exfiltration_chain";
    case Gate::staging_activity:
      return "staging_activity";
    case Gate::login_context:
      return "login_context";
    case Gate::excess_evidence:
      return "excess_evidence";
  }
  return "?";
}

std::vector<Gate> evaluate_gates(std::span<const Event> window, const std::vector<Evidence>& evidence, Step chain_window,
                                 std::size_t excess_kinds) {
  std::optional<Step> last_access, chain_start;
  bool chain = false, staging = false, login = false, unusual_seen = false;
  int staged = 0;
  for (const auto& e : window) {
    if (e.is_sensitive_access()) last_access = e.step;
    if (e.is_unusual_login()) unusual_seen = true;
    if (e.is_external_export()) {
      if (unusual_seen) login = true;
      if (last_access) chain_start = std::max(chain_start.value_or(*last_access), *last_access);
      if (staged >= 2) staging = true;
    }
    if (e.is_staging_export()) ++staged;
    if (e.is_external_email() && chain_start && e.step - *chain_start <= chain_window) chain = true;
  }
  std::vector<Gate> gates;
  if (chain) gates.push_back(Gate::tight_exfiltration_chain);
  if (staging) gates.push_back(Gate::staging_activity);
  if (login) gates.push_back(Gate::login_context);
  if (distinct_kinds(evidence) >= excess_kinds) gates.push_back(Gate::excess_evidence);
  return gates;
}

GateDecision gate_confirm(double risk, const std::vector<Evidence>& evidence, const Thresholds& th, const Layers& layers,
                          const std::vector<Gate>& gates, bool compliance_approval) {
  GateDecision d;
  bool confirm = risk >= th.confirm;
  if (layers.gating) d.satisfied = gates;
  if (confirm && layers.gating) {
    confirm = distinct_kinds(evidence) >= 2 && !gates.empty();
    if (confirm && layers.compliance_override && compliance_approval &&
        std::all_of(gates.begin(), gates.end(), [](Gate g) { return kApprovalScope.contains(g); })) {
      confirm = false;
      d.suppressed_by_compliance = true;
    }
  }
  if (confirm)
    d.tier = AlertTier::confirmed;
  else if (risk >= th.early)
    d.tier = AlertTier::early;
  return d;
}

}  // namespace sentinel::siem
