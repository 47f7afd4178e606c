#include "sentinel/evalkit.hpp"

#include <algorithm>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <set>

namespace sentinel::evalkit {

namespace {

using TruthIndex = std::map<ActorId, const GroundTruth*>;

TruthIndex index(std::span<const GroundTruth> truth) {
  TruthIndex m;
  for (const auto& g : truth) m[g.actor_id] = &g;
  return m;
}

bool counts_for_insider(const GroundTruth& g, Step step) {
  return g.first_malicious_step && step >= *g.first_malicious_step;
}

double ratio(int num, int den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

double f1_score(double precision, double recall) {
  double s = precision + recall;
  return s <= 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

ActorMetrics actor_metrics(std::span<const Alert> alerts, std::span<const GroundTruth> truth, Step testing_start) {
  auto idx = index(truth);
  std::set<ActorId> alerted, caught;
  for (const auto& a : alerts) {
    if (a.tier != AlertTier::confirmed || a.step < testing_start) continue;
    auto it = idx.find(a.actor_id);
    if (it == idx.end()) continue;
    alerted.insert(a.actor_id);
    if (it->second->malicious && counts_for_insider(*it->second, a.step)) caught.insert(a.actor_id);
  }
  ActorMetrics m;
  for (const auto& g : truth) {
    bool flagged = alerted.contains(g.actor_id);
    if (g.malicious) {
      if (caught.contains(g.actor_id)) {
        ++m.true_positives;
      } else {
        ++m.false_negatives;
        if (flagged) {
          ++m.false_positives;
          m.false_positive_actors.push_back(g.actor_id);
        }
      }
    } else if (flagged) {
      ++m.false_positives;
      m.false_positive_actors.push_back(g.actor_id);
    }
  }
  m.precision = ratio(m.true_positives, m.true_positives + m.false_positives);
  m.recall = ratio(m.true_positives, m.true_positives + m.false_negatives);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

AlertMetrics alert_metrics(std::span<const Alert> alerts, std::span<const GroundTruth> truth, Step testing_start) {
  auto idx = index(truth);
  AlertMetrics m;
  for (const auto& a : alerts) {
    if (a.step < testing_start) continue;
    auto it = idx.find(a.actor_id);
    bool malicious = it != idx.end() && it->second->malicious;
    if (a.tier == AlertTier::confirmed) {
      ++m.confirmed;
      m.confirmed_true += malicious;
    } else {
      ++m.early;
      m.early_true += malicious;
    }
  }
  m.early_precision = ratio(m.early_true, m.early);
  m.confirmed_precision = ratio(m.confirmed_true, m.confirmed);
  return m;
}

TtdStats time_to_detect(std::span<const Alert> alerts, std::span<const GroundTruth> truth, Step testing_start,
                        std::optional<Scenario> scenario) {
  auto idx = index(truth);
  TtdStats s;
  for (const auto& a : alerts) {
    if (a.tier != AlertTier::confirmed || a.step < testing_start || s.per_actor.contains(a.actor_id)) continue;
    auto it = idx.find(a.actor_id);
    if (it == idx.end() || !it->second->malicious || !counts_for_insider(*it->second, a.step)) continue;
    if (scenario && it->second->scenario != scenario) continue;
    s.per_actor[a.actor_id] = a.step - *it->second->first_malicious_step;
  }
  s.detected = static_cast<int>(s.per_actor.size());
  for (const auto& [_, d] : s.per_actor) {
    s.average += static_cast<double>(d);
    s.maximum = std::max(s.maximum, static_cast<double>(d));
  }
  if (s.detected > 0) s.average /= s.detected;
  return s;
}

RunReport evaluate(std::span<const Alert> alerts, std::span<const GroundTruth> truth, Step testing_start) {
  RunReport r;
  r.actors = actor_metrics(alerts, truth, testing_start);
  r.alerts = alert_metrics(alerts, truth, testing_start);
  r.ttd = time_to_detect(alerts, truth, testing_start);
  for (Scenario s : kAllScenarios) r.ttd_by_scenario[s] = time_to_detect(alerts, truth, testing_start, s);
  for (const auto& a : alerts)
    if (a.tier == AlertTier::confirmed && a.step >= testing_start && a.tom_assisted) ++r.tom_assisted;
  return r;
}

std::vector<Summary> summarize(std::span<const RunReport> runs) {
  std::vector<Summary> out;
  std::map<std::pair<siem::Variant, double>, std::vector<const RunReport*>> groups;
  std::vector<std::pair<siem::Variant, double>> order;
  for (const auto& r : runs) {
    auto key = std::make_pair(r.variant, r.theta_base);
    if (!groups.contains(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    const auto& g = groups[key];
    Summary s;
    s.variant = key.first;
    s.theta_base = key.second;
    s.runs = static_cast<int>(g.size());
    int ttd_runs = 0;
    std::map<Scenario, int> scenario_runs;
    for (const auto* r : g) {
      s.actor_precision += r->actors.precision;
      s.actor_recall += r->actors.recall;
      s.actor_f1 += r->actors.f1;
      s.confirmed_alerts += r->alerts.confirmed;
      s.confirmed_precision += r->alerts.confirmed_precision;
      s.confirmed_false += r->alerts.confirmed_false();
      s.early_alerts += r->alerts.early;
      s.early_precision += r->alerts.early_precision;
      s.false_positive_actors += r->actors.false_positives;
      s.tom_assisted += r->tom_assisted;
      if (r->ttd.detected > 0) {
        ++ttd_runs;
        s.ttd_average += r->ttd.average;
        s.ttd_maximum += r->ttd.maximum;
      }
      for (const auto& [sc, t] : r->ttd_by_scenario) {
        if (t.detected == 0) continue;
        ++scenario_runs[sc];
        s.ttd_by_scenario[sc] += t.average;
      }
    }
    double n = s.runs;
    for (double* f : {&s.actor_precision, &s.actor_recall, &s.actor_f1, &s.confirmed_alerts, &s.confirmed_precision,
                      &s.confirmed_false, &s.early_alerts, &s.early_precision, &s.false_positive_actors,
                      &s.tom_assisted})
      *f /= n;
    if (ttd_runs > 0) {
      s.ttd_average /= ttd_runs;
      s.ttd_maximum /= ttd_runs;
    }
    for (auto& [sc, v] : s.ttd_by_scenario) v /= scenario_runs[sc];
    out.push_back(s);
  }
  return out;
}

RunReport run_once(const simkit::SimConfig& sim, siem::DetectionConfig detection, siem::Variant variant,
                   std::uint64_t seed, double theta_base, const forensics::PretrainedModel* model,
                   const tom::PlanLibrary* library) {
  simkit::SimConfig cfg = sim;
  cfg.seed = seed;
  auto log = simkit::run_simulation(cfg);
  detection.variant = variant;
  detection.theta_base = theta_base;
  detection.warmup_steps = cfg.warmup_steps;
  auto det = siem::detect(detection, {log.events, log.actors, log.truth, model, library});
  RunReport r = evaluate(det.alerts, log.truth, cfg.warmup_steps);
  r.variant = variant;
  r.seed = seed;
  r.theta_base = theta_base;
  return r;
}

ExperimentResult run_experiment(const simkit::SimConfig& sim, const siem::DetectionConfig& detection,
                                const ExperimentOptions& options, const forensics::PretrainedModel* model,
                                const tom::PlanLibrary* library) {
  ExperimentResult result;
  for (auto seed : options.seeds) {
    simkit::SimConfig cfg = sim;
    cfg.seed = seed;
    auto log = simkit::run_simulation(cfg);
    auto run = [&](siem::Variant v, double theta) {
      siem::DetectionConfig d = detection;
      d.variant = v;
      d.theta_base = theta;
      d.warmup_steps = cfg.warmup_steps;
      auto det = siem::detect(d, {log.events, log.actors, log.truth, model, library});
      RunReport r = evaluate(det.alerts, log.truth, cfg.warmup_steps);
      r.variant = v;
      r.seed = seed;
      r.theta_base = theta;
      return r;
    };
    for (auto v : options.variants) result.runs.push_back(run(v, detection.theta_base));
    if (options.sweep)
      for (double theta : options.sweep_thetas) result.sweep_runs.push_back(run(options.sweep_variant, theta));
  }
  return result;
}

void write_aggregate_csv(std::ostream& out, std::span<const RunReport> runs) {
  out << "row,variant,seed,theta_base,runs,actor_precision,actor_recall,actor_f1,fp_actors,confirmed_alerts,"
         "confirmed_precision,confirmed_fp,early_alerts,early_precision,ttd_avg,ttd_max,tom_assisted";
  for (Scenario s : kAllScenarios) out << ",ttd_" << to_string(s);
  out << '\n' << std::fixed << std::setprecision(4);
  for (const auto& s : summarize(runs)) {
    for (const auto& r : runs) {
      if (r.variant != s.variant || r.theta_base != s.theta_base) continue;
      out << "run," << siem::to_string(r.variant) << ',' << r.seed << ',' << r.theta_base << ",1,"
          << r.actors.precision << ',' << r.actors.recall << ',' << r.actors.f1 << ','
          << static_cast<double>(r.actors.false_positives) << ',' << static_cast<double>(r.alerts.confirmed) << ','
          << r.alerts.confirmed_precision << ',' << static_cast<double>(r.alerts.confirmed_false()) << ','
          << static_cast<double>(r.alerts.early) << ',' << r.alerts.early_precision << ',' << r.ttd.average << ','
          << r.ttd.maximum << ',' << static_cast<double>(r.tom_assisted);
      for (Scenario sc : kAllScenarios) {
        auto it = r.ttd_by_scenario.find(sc);
        out << ',' << (it == r.ttd_by_scenario.end() ? 0.0 : it->second.average);
      }
      out << '\n';
    }
    out << "mean," << siem::to_string(s.variant) << ",," << s.theta_base << ',' << s.runs << ','
        << s.actor_precision << ',' << s.actor_recall << ',' << s.actor_f1 << ',' << s.false_positive_actors << ','
        << s.confirmed_alerts << ',' << s.confirmed_precision << ',' << s.confirmed_false << ',' << s.early_alerts
        << ',' << s.early_precision << ',' << s.ttd_average << ',' << s.ttd_maximum << ',' << s.tom_assisted;
    for (Scenario sc : kAllScenarios) {
      auto it = s.ttd_by_scenario.find(sc);
      out << ',' << (it == s.ttd_by_scenario.end() ? 0.0 : it->second);
    }
    out << '\n';
  }
}

std::string report_to_json(const RunReport& r, int indent) {
  nlohmann::ordered_json j;
  j["variant"] = siem::to_string(r.variant);
  j["seed"] = r.seed;
  j["theta_base"] = r.theta_base;
  j["actors"] = {{"true_positives", r.actors.true_positives},
                 {"false_positives", r.actors.false_positives},
                 {"false_negatives", r.actors.false_negatives},
                 {"precision", r.actors.precision},
                 {"recall", r.actors.recall},
                 {"f1", r.actors.f1},
                 {"false_positive_actors", r.actors.false_positive_actors}};
  j["alerts"] = {{"early", r.alerts.early},
                 {"early_true", r.alerts.early_true},
                 {"early_precision", r.alerts.early_precision},
                 {"confirmed", r.alerts.confirmed},
                 {"confirmed_true", r.alerts.confirmed_true},
                 {"confirmed_precision", r.alerts.confirmed_precision}};
  auto ttd = [](const TtdStats& t) {
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (const auto& [id, steps] : t.per_actor) per[id] = steps;
    return nlohmann::ordered_json{{"detected", t.detected}, {"average", t.average}, {"maximum", t.maximum},
                                  {"per_actor", per}};
  };
  j["ttd"] = ttd(r.ttd);
  nlohmann::ordered_json by = nlohmann::ordered_json::object();
  for (const auto& [sc, t] : r.ttd_by_scenario) by[std::string(to_string(sc))] = ttd(t);
  j["ttd_by_scenario"] = by;
  j["tom_assisted"] = r.tom_assisted;
  return j.dump(indent) + "\n";
}

}  // namespace sentinel::evalkit
