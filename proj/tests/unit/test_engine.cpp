#include <doctest.h>

#include <set>
#include <tuple>
#include <vector>

#include "sentinel/config.hpp"
#include "sentinel/engine.hpp"
#include "sentinel/error.hpp"
#include "sentinel/simkit.hpp"

using namespace sentinel;
using namespace sentinel::siem;

namespace {

const simkit::SimulationResult& world() {
  static const simkit::SimulationResult sim = [] {
    simkit::SimConfig c;
    c.seed = 2;
    return simkit::run_simulation(c);
  }();
  return sim;
}

const forensics::PretrainedModel& model() {
  static const forensics::PretrainedModel m = prepare_model(ForensicsSettings{});
  return m;
}

DetectionResult run(Variant v, bool feedback = true, const PassObserver& obs = {}) {
  DetectionConfig c;
  c.variant = v;
  c.feedback = feedback;
  const auto& w = world();
  DetectionInputs in{w.events, w.actors, w.truth, v == Variant::eg_siem_pt ? &model() : nullptr, nullptr};
  return detect(c, in, obs);
}

std::set<std::pair<ActorId, Step>> confirmed(const DetectionResult& r) {
  std::set<std::pair<ActorId, Step>> out;
  for (const auto& a : r.alerts)
    if (a.tier == AlertTier::confirmed) out.insert({a.actor_id, a.step});
  return out;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("detection is deterministic and ordered") {
    for (auto v : {Variant::lsc, Variant::eg_siem}) {
      auto a = run(v), b = run(v);
      CHECK(a.alerts == b.alerts);
      CHECK(a.final_trust == b.final_trust);
      for (std::size_t i = 1; i < a.alerts.size(); ++i)
        REQUIRE(std::tie(a.alerts[i - 1].step, a.alerts[i - 1].actor_id) <=
                std::tie(a.alerts[i].step, a.alerts[i].actor_id));
    }
  }

  TEST_CASE("every gated confirmation has two kinds and a gate") {
    for (auto v : {Variant::eg_siem, Variant::eg_siem_pt}) {
      int audited = 0;
      auto r = run(v, true, [&](const PassRecord& p) {
        if (p.decision->tier != AlertTier::confirmed) return;
        ++audited;
        CHECK(distinct_kinds(p.correlation->evidence) >= 2);
        CHECK_FALSE(p.decision->satisfied.empty());
        CHECK(p.correlation->risk >= p.thresholds.confirm);
      });
      CHECK(audited > 0);
      for (const auto& a : r.alerts)
        if (a.tier == AlertTier::confirmed) CHECK(distinct_kinds(a.evidence) >= 2);
    }
  }

  TEST_CASE("gated confirmations are a subset of CE confirmations without feedback") {
    auto ce = confirmed(run(Variant::ce_siem, false));
    auto eg = confirmed(run(Variant::eg_siem, false));
    CHECK_FALSE(eg.empty());
    CHECK(eg.size() < ce.size());
    for (const auto& k : eg) CHECK(ce.contains(k));
  }

  TEST_CASE("benign actors rarely get ToM evidence") {
    std::set<ActorId> malicious;
    for (const auto& g : world().truth)
      if (g.malicious) malicious.insert(g.actor_id);
    int passes = 0, tom = 0;
    run(Variant::ce_siem, true, [&](const PassRecord& p) {
      if (malicious.contains(p.outputs->actor_id)) return;
      ++passes;
      if (p.correlation->tom_contributed) ++tom;
    });
    REQUIRE(passes > 0);
    CHECK(static_cast<double>(tom) < 0.05 * passes);
  }

  TEST_CASE("insiders stay out of the anomaly training data") {
    auto r = run(Variant::eg_siem);
    for (const auto& g : world().truth) {
      if (!g.malicious) continue;
      for (auto role : kAllRoles)
        for (bool regular : {false, true}) CHECK_FALSE(r.anomaly_model.training_actors(role, regular).contains(g.actor_id));
    }
  }

  TEST_CASE("trust stays within bounds") {
    for (const auto& [_, t] : run(Variant::ce_siem).final_trust) {
      CHECK(t >= 0.10);
      CHECK(t <= 0.95);
    }
  }

  TEST_CASE("errors") {
    DetectionConfig c;
    c.variant = Variant::eg_siem_pt;
    const auto& w = world();
    CHECK_THROWS_AS(detect(c, {w.events, w.actors, w.truth, nullptr, nullptr}), ConfigError);

    c.variant = Variant::lsc;
    std::vector<Event> stray{Event::login(0, "nobody", LoginContext::normal)};
    CHECK_THROWS_AS(detect(c, {stray, w.actors, {}, nullptr, nullptr}), StateError);

    c.window = 0;
    CHECK_THROWS_AS(detect(c, {w.events, w.actors, {}, nullptr, nullptr}), ConfigError);
    c.window = 20;
    c.ewma_alpha = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.ewma_alpha = 0.05;
    c.trust.initial = 0.99;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("empty log produces no alerts") {
    DetectionConfig c;
    c.variant = Variant::eg_siem;
    auto r = detect(c, {{}, world().actors, {}, nullptr, nullptr});
    CHECK(r.alerts.empty());
  }
}
