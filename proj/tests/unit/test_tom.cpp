#include <doctest.h>

#include <algorithm>
#include <vector>

#include "sentinel/error.hpp"
#include "sentinel/event_io.hpp"
#include "sentinel/rng.hpp"
#include "sentinel/tom.hpp"

using namespace sentinel;
using namespace sentinel::tom;

namespace {

Event sensitive(Step t) { return Event::access(t, "x", ActionKind::db_query, "hr-db", Sensitivity::sensitive); }
Event large_out(Step t) { return Event::export_(t, "x", 5000, "hr-db", Destination::external); }
Event staged(Step t) { return Event::export_(t, "x", 2000, "backup-store", Destination::staging); }
Event personal_mail(Step t) { return Event::email(t, "x", RecipientScope::external, "gmail.com", "hi."); }

const IntentHypothesis* find(const std::vector<IntentHypothesis>& hs, std::string_view plan) {
  for (const auto& h : hs)
    if (h.plan == plan) return &h;
  return nullptr;
}

Event random_event(Rng& rng, Step t) {
  switch (rng.uniform_int(0, 5)) {
    case 0:
      return Event::login(t, "x", static_cast<LoginContext>(rng.uniform_int(0, 2)));
    case 1:
      return Event::access(t, "x", ActionKind::file_access, rng.bernoulli(0.3) ? "srv-admin-01" : "wiki",
                           static_cast<Sensitivity>(rng.uniform_int(0, 1)));
    case 2:
      return Event::export_(t, "x", rng.uniform_int(100, 9000), "r", static_cast<Destination>(rng.uniform_int(0, 2)));
    case 3:
      return Event::email(t, "x", static_cast<RecipientScope>(rng.uniform_int(0, 1)),
                          rng.bernoulli(0.5) ? "gmail.com" : "partner-a.com", "x.");
    default:
      return sensitive(t);
  }
}

}  // namespace

TEST_SUITE("tom") {
  TEST_CASE("bundled library equals the data file") {
    auto text = read_file(std::string(SENTINEL_DATA_DIR) + "/plan_library.json");
    auto lib = PlanLibrary::from_json(text);
    const auto& def = PlanLibrary::defaults();
    REQUIRE(lib.templates.size() == def.templates.size());
    for (std::size_t i = 0; i < lib.templates.size(); ++i) {
      CHECK(lib.templates[i].id == def.templates[i].id);
      CHECK(lib.templates[i].scenario == def.templates[i].scenario);
      CHECK(lib.templates[i].steps == def.templates[i].steps);
    }
  }

  TEST_CASE("library validation") {
    CHECK_THROWS_AS(PlanLibrary::from_json("[]"), ParseError);
    CHECK_THROWS_AS(PlanLibrary::from_json(R"({"patterns":{"a":{"colour":"red"}},"plans":[]})"), ParseError);
    CHECK_THROWS_AS(PlanLibrary::from_json(R"({"patterns":{"a":{}},"plans":[{"id":"p","steps":["b"]}]})"), ParseError);
    // scenarios missing
    CHECK_THROWS_AS(PlanLibrary::from_json(R"({"patterns":{"a":{}},"plans":[{"id":"p","steps":["a"]}]})"), ParseError);
    PlanLibrary lib = PlanLibrary::defaults();
    lib.templates.push_back(lib.templates.front());
    CHECK_THROWS_AS(lib.validate(), ParseError);
  }

  TEST_CASE("empty window explains nothing") { CHECK(abduce({}, PlanLibrary::defaults()).empty()); }

  TEST_CASE("full exfiltration chain completes the plan") {
    std::vector<Event> w{sensitive(1), large_out(2), large_out(3), personal_mail(4)};
    auto hs = abduce(w, PlanLibrary::defaults());
    const auto* h = find(hs, "exfiltration");
    REQUIRE(h);
    CHECK(h->completion == 1.0);
    CHECK(h->confidence == 1.0);
    CHECK(h->matched_steps == 4);
    CHECK(h->scenario == Scenario::exfiltration);
  }

  TEST_CASE("two staging exports partially match staging exfiltration only") {
    std::vector<Event> w{staged(1), staged(2)};
    auto hs = abduce(w, PlanLibrary::defaults());
    const auto* st = find(hs, "staging_exfiltration");
    REQUIRE(st);
    // steps: staging x3 (specificity 1 each), large external export (2)
    CHECK(st->completion == doctest::Approx(0.5));
    CHECK(st->confidence == doctest::Approx(2.0 / 5.0));
    const auto* ex = find(hs, "exfiltration");
    double ex_completion = ex ? ex->completion : 0.0;
    CHECK(st->completion > ex_completion);
    CHECK(st->completion < 1.0);
  }

  TEST_CASE("approved actor's staging hypothesis is contradicted") {
    std::vector<Event> w{staged(1), staged(2), staged(3)};
    auto hs = abduce(w, PlanLibrary::defaults());
    auto h = *find(hs, "staging_exfiltration");
    auto approved = check_contradiction(h, {true, hs}, PlanLibrary::defaults());
    CHECK(approved.contradicted);
  }

  TEST_CASE("full exfiltration chain without benign competitor stands") {
    std::vector<Event> w{sensitive(1), large_out(2), large_out(3), personal_mail(4)};
    auto hs = abduce(w, PlanLibrary::defaults());
    auto h = check_contradiction(*find(hs, "exfiltration"), {false, hs}, PlanLibrary::defaults());
    CHECK_FALSE(h.contradicted);
  }

  TEST_CASE("scheduled backups outmatch the staging hypothesis") {
    std::vector<Event> w{staged(1), staged(9), staged(17), staged(25)};
    auto hs = abduce(w, PlanLibrary::defaults());
    const auto* backup = find(hs, "scheduled_backup");
    const auto* st = find(hs, "staging_exfiltration");
    REQUIRE(backup);
    REQUIRE(st);
    // backup: 4 of 5 staging steps; staging plan: 3 of 4 (the export is missing)
    CHECK(backup->completion == doctest::Approx(0.8));
    CHECK(st->completion == doctest::Approx(0.75));
    CHECK(check_contradiction(*st, {false, hs}, PlanLibrary::defaults()).contradicted);
  }

  TEST_CASE("benign hypotheses pass through contradiction unchanged") {
    std::vector<Event> w{staged(1), staged(2)};
    auto hs = abduce(w, PlanLibrary::defaults());
    auto b = *find(hs, "scheduled_backup");
    CHECK(check_contradiction(b, {true, hs}, PlanLibrary::defaults()) == b);
  }

  TEST_CASE("tom evidence rules") {
    TomParams p{0.5, 3.0};
    IntentHypothesis h{"x", "exfiltration", Scenario::exfiltration, 0.9, 0.9, false, 3};
    auto e = tom_evidence(std::vector{h}, p, 7);
    REQUIRE(e);
    CHECK(e->weight == doctest::Approx(3.0 * 0.9));
    CHECK(e->kind == EvidenceKind::tom_intent);
    CHECK(e->step == 7);

    h.contradicted = true;
    CHECK_FALSE(tom_evidence(std::vector{h}, p, 7));
    h.contradicted = false;
    h.confidence = 0.0;
    CHECK_FALSE(tom_evidence(std::vector{h}, p, 7));
    h.confidence = 0.5;
    CHECK_FALSE(tom_evidence(std::vector{h}, p, 7));  // strictly above the threshold
    IntentHypothesis benign{"x", "scheduled_backup", std::nullopt, 1.0, 1.0, false, 5};
    CHECK_FALSE(tom_evidence(std::vector{benign}, p, 7));
  }

  TEST_CASE("contradicted hypotheses never produce evidence") {
    Rng rng(21);
    const auto& lib = PlanLibrary::defaults();
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<IntentHypothesis> hs;
      auto n = rng.uniform_int(0, 6);
      for (std::int64_t i = 0; i < n; ++i) {
        const auto& t = lib.templates[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(lib.templates.size()) - 1))];
        IntentHypothesis h{"x", t.id, t.scenario, rng.uniform(), rng.uniform(), rng.bernoulli(0.5), 1};
        hs.push_back(h);
      }
      auto e = tom_evidence(hs, TomParams{0.3, 2.0}, 0);
      double best_open = -1.0;
      for (const auto& h : hs)
        if (h.malicious() && !h.contradicted && h.confidence > 0.3) best_open = std::max(best_open, h.confidence);
      if (best_open < 0) {
        REQUIRE_FALSE(e);
      } else {
        REQUIRE(e);
        REQUIRE(e->weight == doctest::Approx(2.0 * best_open));
      }
    }
  }

  TEST_CASE("appending an event never lowers any plan's completion") {
    Rng rng(8);
    const auto& lib = PlanLibrary::defaults();
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<Event> w;
      auto n = rng.uniform_int(1, 12);
      for (std::int64_t i = 0; i < n; ++i) w.push_back(random_event(rng, i));
      auto before = abduce(w, lib);
      w.push_back(random_event(rng, n));
      auto after = abduce(w, lib);
      for (const auto& h : before) {
        const auto* a = find(after, h.plan);
        REQUIRE(a);
        REQUIRE(a->completion >= h.completion);
        REQUIRE(a->confidence >= h.confidence);
      }
    }
  }

  TEST_CASE("pattern matching details") {
    ActionPattern p;
    p.kinds = {ActionKind::file_export};
    p.destination = Destination::external;
    p.min_volume = 3000;
    CHECK(p.matches(large_out(1)));
    CHECK_FALSE(p.matches(Event::export_(1, "x", 2999, "r", Destination::external)));
    CHECK_FALSE(p.matches(staged(1)));
    ActionPattern login;
    login.kinds = {ActionKind::login};
    login.context = ActionPattern::Context::unusual;
    CHECK(login.matches(Event::login(0, "x", LoginContext::after_hours)));
    CHECK(login.matches(Event::login(0, "x", LoginContext::new_location)));
    CHECK_FALSE(login.matches(Event::login(0, "x", LoginContext::normal)));
    CHECK(specificity(login, {}) == doctest::Approx(0.5));
    CHECK(specificity(p, {}) == doctest::Approx(2.0));
  }
}
