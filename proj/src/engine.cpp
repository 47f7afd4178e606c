#include "sentinel/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "sentinel/error.hpp"

namespace sentinel::siem {

namespace {

struct ActorTrack {
  const ActorInfo* info = nullptr;
  bool insider = false;
  std::deque<Event> window;
  std::deque<std::pair<Step, forensics::EmailFeatures>> emails;
  std::deque<std::pair<Step, Destination>> export_history;
  std::array<EwmaState, kMetricCount> ewma{};
  std::array<double, kMetricCount> deviation{};
  double trust = 0.7;
  std::vector<int> warmup_counts;
  bool regular = true;
};

std::array<double, kMetricCount> window_metrics(const std::deque<Event>& window) {
  std::array<double, kMetricCount> m{};
  for (const auto& e : window) {
    if (e.kind == ActionKind::login) m[static_cast<std::size_t>(Metric::logins)] += 1;
    if (e.kind == ActionKind::db_query) m[static_cast<std::size_t>(Metric::queries)] += 1;
    if (const auto* x = e.as_export()) m[static_cast<std::size_t>(Metric::export_volume)] += static_cast<double>(x->volume);
  }
  return m;
}

double window_export_volume(const std::deque<Event>& window) {
  return window_metrics(window)[static_cast<std::size_t>(Metric::export_volume)];
}

double max_tom_confidence(const std::vector<tom::IntentHypothesis>& hs) {
  double best = 0.0;
  for (const auto& h : hs)
    if (h.malicious() && !h.contradicted) best = std::max(best, h.confidence);
  return best;
}

}  // namespace

void DetectionConfig::validate() const {
  if (window < 1) throw ConfigError("window must be at least 1");
  if (chain_window < 0) throw ConfigError("chain_window must be non-negative");
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be non-negative");
  if (ewma_alpha <= 0.0 || ewma_alpha > 1.0) throw ConfigError("ewma_alpha must lie in (0, 1]");
  if (early_fraction <= 0.0 || early_fraction > 1.0) throw ConfigError("early_fraction must lie in (0, 1]");
  if (trust.lo > trust.hi || trust.initial < trust.lo || trust.initial > trust.hi)
    throw ConfigError("trust bounds must satisfy lo <= initial <= hi");
  if (forest.trees == 0 || forest.subsample < 2) throw ConfigError("forest needs trees >= 1 and subsample >= 2");
  if (correlation.advice.band <= 0.0 || correlation.advice.band > 1.0) throw ConfigError("advice band must lie in (0, 1]");
  for (double e : ewma_epsilon)
    if (e <= 0.0) throw ConfigError("ewma epsilon must be positive");
}

DetectionResult detect(const DetectionConfig& config, const DetectionInputs& inputs, const PassObserver& observer) {
  config.validate();
  const Layers layers = layers_for(config.variant);
  if (layers.pretrained_forensics && (!inputs.model || !inputs.model->loaded()))
    throw ConfigError(std::string(to_string(config.variant)) + " needs a pre-trained forensics model");
  const tom::PlanLibrary& library = inputs.library ? *inputs.library : tom::PlanLibrary::defaults();

  std::map<ActorId, ActorTrack> tracks;
  for (const auto& a : inputs.actors) {
    auto& t = tracks[a.actor_id];
    t.info = &a;
    t.trust = config.trust.initial;
  }
  std::map<ActorId, bool> truth;
  for (const auto& g : inputs.truth) truth[g.actor_id] = g.malicious;
  if (config.exclude_insiders_from_training)
    for (auto& [id, t] : tracks) t.insider = truth.contains(id) && truth[id];
  const bool feedback = config.feedback && !inputs.truth.empty();

  std::optional<forensics::EmailMonitor> monitor;
  if (layers.forensics)
    monitor.emplace(layers.pretrained_forensics ? inputs.model : nullptr, config.analyzer);

  DetectionResult result;
  result.scorer = OnlineScorer(config.scorer);
  std::vector<anomaly::TrainingSample> forest_rows;
  std::vector<AnchorFeatures> scorer_rows;
  std::vector<int> scorer_labels;
  bool trained = false;

  Step last_step = inputs.events.empty() ? -1 : inputs.events.back().step;
  Step horizon = std::max(last_step + 1, config.warmup_steps + 1);
  std::size_t cursor = 0;
  std::vector<ActorId> active;

  for (Step t = 0; t < horizon; ++t) {
    active.clear();
    for (; cursor < inputs.events.size() && inputs.events[cursor].step == t; ++cursor) {
      const Event& e = inputs.events[cursor];
      auto it = tracks.find(e.actor_id);
      if (it == tracks.end()) throw StateError("event from unknown actor '" + e.actor_id + "'");
      auto& tr = it->second;
      tr.window.push_back(e);
      if (const auto* x = e.as_export()) tr.export_history.emplace_back(t, x->destination);
      if (const auto* m = e.as_email(); m && monitor) tr.emails.emplace_back(t, monitor->observe(e.actor_id, m->body));
      if (active.empty() || active.back() != e.actor_id) active.push_back(e.actor_id);
    }
    if (cursor < inputs.events.size() && inputs.events[cursor].step < t)
      throw StateError("event log is not ordered by step");
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());

    // windows, baselines and trust decay for every actor
    std::map<Role, std::vector<std::pair<ActorId, double>>> peer_volumes;
    for (auto& [id, tr] : tracks) {
      while (!tr.window.empty() && tr.window.front().step <= t - config.window) tr.window.pop_front();
      while (!tr.emails.empty() && tr.emails.front().first <= t - config.window) tr.emails.pop_front();
      while (!tr.export_history.empty() && tr.export_history.front().first <= t - config.regularity.lookback)
        tr.export_history.pop_front();
      auto metrics = window_metrics(tr.window);
      for (std::size_t m = 0; m < kMetricCount; ++m) {
        auto r = ewma_update(tr.ewma[m], metrics[m], config.ewma_alpha, config.ewma_epsilon[m]);
        tr.ewma[m] = r.state;
        tr.deviation[m] = r.deviation;
      }
      tr.trust = update_trust(tr.trust, TrustOutcome::decay_tick, config.trust);
      peer_volumes[tr.info->role].emplace_back(id, metrics[static_cast<std::size_t>(Metric::export_volume)]);
      if (t < config.warmup_steps) {
        int n = 0;
        for (auto it = tr.window.rbegin(); it != tr.window.rend() && it->step == t; ++it) ++n;
        tr.warmup_counts.push_back(n);
      }
    }

    // warm-up rows for the isolation forest
    if (t < config.warmup_steps && t >= config.window - 1) {
      for (auto& [id, tr] : tracks) {
        if (tr.insider) continue;
        std::vector<Event> w(tr.window.begin(), tr.window.end());
        auto bv = anomaly::behavior_vector(w, t, static_cast<int>(config.window));
        forest_rows.push_back({id, tr.info->role, true, bv.to_vector(config.enhanced_anomaly)});
      }
    }

    if (t == config.warmup_steps && !trained) {
      trained = true;
      for (auto& [id, tr] : tracks) {
        const auto& c = tr.warmup_counts;
        if (c.empty()) continue;
        double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
        double var = 0.0;
        for (int x : c) var += (x - mean) * (x - mean);
        var /= static_cast<double>(c.size());
        tr.regular = mean > 0 && std::sqrt(var) / mean < config.enhanced_regular_cv;
      }
      for (auto& row : forest_rows) row.regular = tracks[row.actor_id].regular;
      if (!forest_rows.empty())
        result.anomaly_model = anomaly::RoleAnomalyModel::fit(forest_rows, {}, config.forest, config.enhanced_anomaly);
      result.scorer = result.scorer.warmup(scorer_rows, scorer_labels);
    }

    for (const auto& id : active) {
      auto& tr = tracks[id];
      const ActorInfo& info = *tr.info;
      std::vector<Event> window(tr.window.begin(), tr.window.end());

      LayerOutputs out;
      out.actor_id = id;
      out.step = t;
      for (const auto& e : window)
        if (auto ev = policy_check(e, info.role, config.policy, config.correlation.weights.policy))
          out.policy.push_back(*ev);
      out.deviation = tr.deviation;

      std::vector<Step> login_steps, query_steps;
      for (const auto& e : window) {
        if (e.kind == ActionKind::login) login_steps.push_back(e.step);
        if (e.kind == ActionKind::db_query) query_steps.push_back(e.step);
        if (e.is_unusual_login()) out.after_hours_login = true;
        if (e.is_staging_export()) ++out.staging_exports;
      }
      const auto& rp = config.regularity;
      out.regularity[static_cast<std::size_t>(Metric::logins)] =
          regularity_suppression(login_steps, rp.cv_min, rp.factor, rp.min_period);
      out.regularity[static_cast<std::size_t>(Metric::queries)] =
          regularity_suppression(query_steps, rp.cv_min, rp.factor, rp.min_period);
      {
        const ExportPayload* largest = nullptr;
        for (const auto& e : window)
          if (const auto* x = e.as_export(); x && (!largest || x->volume > largest->volume)) largest = x;
        std::vector<Step> staged;
        for (const auto& [s, d] : tr.export_history)
          if (d == Destination::staging) staged.push_back(s);
        out.staging_regularity = regularity_suppression(staged, rp.cv_min, rp.factor, rp.min_period);
        if (largest) {
          std::vector<Step> steps;
          for (const auto& [s, d] : tr.export_history)
            if (d == largest->destination) steps.push_back(s);
          out.regularity[static_cast<std::size_t>(Metric::export_volume)] =
              regularity_suppression(steps, rp.cv_min, rp.factor, rp.min_period);
        }
      }

      for (const auto& [s, f] : tr.emails) {
        out.max_phishing = std::max(out.max_phishing, f.phishing_prob);
        out.max_authorship = std::max(out.max_authorship, f.authorship_inconsistency);
      }

      double tom_raw_conf = 0.0, tom_valid_conf = 0.0;
      if (layers.tom) {
        auto hyps = tom::abduce(window, library, config.specificity);
        out.tom_raw = tom::tom_evidence(hyps, config.tom, t);
        tom_raw_conf = max_tom_confidence(hyps);
        std::vector<tom::IntentHypothesis> checked;
        tom::ActorContext ctx{info.compliance_approval, hyps};
        for (const auto& h : hyps) checked.push_back(tom::check_contradiction(h, ctx, library));
        out.tom_validated = tom::tom_evidence(checked, config.tom, t);
        tom_valid_conf = max_tom_confidence(checked);
      }

      {
        double actor_volume = window_export_volume(tr.window);
        std::vector<double> peers;
        for (const auto& [pid, v] : peer_volumes[info.role])
          if (pid != id) peers.push_back(v);
        out.peer = peer_normalize(actor_volume, peers, config.peer, t);
      }

      AnchorFeatures anchors = AnchorFeatures::Zero();
      {
        double sensitive = 0, staging = 0;
        for (const auto& e : window) {
          if (e.is_external_email()) anchors[static_cast<int>(Anchor::recent_email)] = 1;
          if (e.is_unusual_login()) anchors[static_cast<int>(Anchor::after_hours_login)] = 1;
          if (const auto* x = e.as_export(); x && x->volume >= config.large_export_volume)
            anchors[static_cast<int>(Anchor::large_export)] = 1;
          if (e.is_sensitive_access()) ++sensitive;
          if (e.is_external_export()) anchors[static_cast<int>(Anchor::external_destination)] = 1;
          if (e.is_staging_export()) ++staging;
        }
        anchors[static_cast<int>(Anchor::sensitive_access)] = std::min(sensitive / 3.0, 1.0);
        anchors[static_cast<int>(Anchor::staging_export)] = std::min(staging / 2.0, 1.0);
        anchors[static_cast<int>(Anchor::forensics_flag)] =
            layers.forensics && out.max_phishing >= config.correlation.weights.forensics_threshold ? 1 : 0;
        bool live = t >= config.warmup_steps && layers.contradiction;
        anchors[static_cast<int>(Anchor::tom_intent)] = live ? tom_valid_conf : tom_raw_conf;
      }

      if (t < config.warmup_steps) {
        if (!tr.insider) {
          scorer_rows.push_back(anchors);
          scorer_labels.push_back(0);
        }
      } else {
        out.scorer_probability = result.scorer.probability(anchors);
        auto bv = anomaly::behavior_vector(window, t, static_cast<int>(config.window));
        out.anomaly_score = result.anomaly_model.score(info.role, tr.regular, bv.to_vector(config.enhanced_anomaly));
      }

      Thresholds th = thresholds(tr.trust, config.theta_base, config.theta_slope, config.early_fraction);
      Correlation corr = correlate(out, layers, config.correlation, th.confirm);
      auto gates = layers.gating ? evaluate_gates(window, corr.evidence, config.chain_window, config.excess_kinds) : std::vector<Gate>{};
      GateDecision decision = gate_confirm(corr.risk, corr.evidence, th, layers, gates, info.compliance_approval);
      if (observer) observer(PassRecord{&out, &corr, th, &decision, tr.trust});

      if (!decision.tier) continue;
      result.alerts.push_back(Alert{*decision.tier, id, t, corr.risk, corr.evidence, corr.tom_contributed});
      if (*decision.tier == AlertTier::confirmed && feedback && t >= config.warmup_steps) {
        bool malicious = truth.contains(id) && truth[id];
        tr.trust = update_trust(tr.trust, malicious ? TrustOutcome::true_positive : TrustOutcome::false_positive,
                                config.trust);
        result.scorer = result.scorer.update(anchors, malicious ? 1 : 0);
      }
    }
  }
  for (const auto& [id, tr] : tracks) result.final_trust[id] = tr.trust;
  return result;
}

}  // namespace sentinel::siem
