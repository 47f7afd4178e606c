// Acceptance checks. `sentinel_acceptance N` runs criterion N; without an
// argument every criterion runs. One PASS/FAIL line per criterion.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sentinel/anomaly.hpp"
#include "sentinel/config.hpp"
#include "sentinel/engine.hpp"
#include "sentinel/evalkit.hpp"
#include "sentinel/forensics.hpp"
#include "sentinel/rng.hpp"
#include "sentinel/siem.hpp"
#include "sentinel/simkit.hpp"

using namespace sentinel;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const AppConfig& defaults() {
  static const AppConfig c;
  return c;
}

const forensics::PretrainedModel& model() {
  static const forensics::PretrainedModel m = prepare_model(defaults().forensics);
  return m;
}

const tom::PlanLibrary& library() {
  static const tom::PlanLibrary l = load_plan_library(defaults().plan_library);
  return l;
}

evalkit::ExperimentResult experiment(bool sweep) {
  evalkit::ExperimentOptions o;
  o.seeds = defaults().seeds;
  o.sweep = sweep;
  o.sweep_thetas = defaults().sweep_thetas;
  return evalkit::run_experiment(defaults().simulation, defaults().detection, o, &model(), &library());
}

const evalkit::Summary& find(const std::vector<evalkit::Summary>& s, siem::Variant v) {
  for (const auto& x : s)
    if (x.variant == v) return x;
  std::fprintf(stderr, "missing variant summary\n");
  std::exit(2);
}

// ---------------------------------------------------------------------------

Verdict criterion_1() {
  Verdict v;
  struct Row {
    const char* name;
    double p, r, f1;
  };
  for (auto row : {Row{"LSC", 0.369, 0.888, 0.521}, Row{"CE_SIEM", 0.633, 1.000, 0.774},
                   Row{"EG_SIEM", 0.975, 0.875, 0.922}, Row{"EG_SIEM_PT", 1.000, 0.875, 0.933}}) {
    double f = evalkit::f1_score(row.p, row.r);
    bool ok = std::abs(f - row.f1) <= 0.001;
    v.require(ok, std::string(row.name) + fmt(" F1 %.5f vs %.3f", f, row.f1));
    if (ok) v.note(std::string(row.name) + fmt(" %.5f", f));
  }
  return v;
}

Verdict criterion_2() {
  Verdict v;
  double prev = -INFINITY;
  int exact = 0;
  bool increasing = true;
  for (int i = 0; i < 100; ++i) {
    double t = 0.10 + (0.95 - 0.10) * i / 99.0;
    auto th = siem::thresholds(t, 4.0, 2.0, 0.6);
    double confirm = 4.0 + 2.0 * (t - 0.5);
    if (th.confirm == confirm && th.early == 0.6 * confirm) ++exact;
    if (!(th.confirm > prev)) increasing = false;
    prev = th.confirm;
  }
  v.require(exact == 100, std::to_string(exact) + "/100 grid points exact");
  v.require(increasing, "confirm threshold strictly increasing");
  if (v.pass) v.note("100/100 exact, strictly increasing");
  return v;
}

Verdict criterion_3() {
  Verdict v;
  Rng rng(2024);
  siem::TrustParams p;
  double lo = 1.0, hi = 0.0;
  for (int s = 0; s < 10000; ++s) {
    double t = p.initial;
    auto len = rng.uniform_int(1, 200);
    for (std::int64_t i = 0; i < len; ++i) {
      t = siem::update_trust(t, static_cast<siem::TrustOutcome>(rng.uniform_int(0, 2)), p);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  v.require(lo >= 0.10 && hi <= 0.95, fmt("trust range [%.4f, %.4f]", lo, hi));
  for (double start : {p.lo, p.hi}) {
    double t = start;
    for (int i = 0; i < 1000; ++i) t = siem::update_trust(t, siem::TrustOutcome::decay_tick, p);
    v.require(std::abs(t - 0.7) <= 1e-6, fmt("decay from %.2f ends at %.9f", start, t));
  }
  if (v.pass) v.note(fmt("10000 sequences within [%.2f, %.2f]; decay reaches 0.7 from both bounds", lo, hi));
  return v;
}

Verdict criterion_4() {
  Verdict v;
  Rng rng(4);
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    double a = rng.uniform(0.01, 0.99);
    auto n = static_cast<std::size_t>(rng.uniform_int(1, 300));
    std::vector<double> xs(n);
    for (double& x : xs) x = rng.normal(rng.uniform(-50, 50), rng.uniform(0.1, 20));
    siem::EwmaState st;
    std::vector<double> prior_means;
    for (double x : xs) {
      prior_means.push_back(st.mean);
      st = siem::ewma_update(st, x, a, 1e-6).state;
    }
    // mean_n = (1-a)^(n-1) x_0 + sum_k a (1-a)^(n-1-k) x_k
    // var_n  = sum_{k>=1} a (1-a)^(n-1-k) (x_k - mean_{k-1})^2
    long double mean = std::pow(1.0L - a, static_cast<long double>(n - 1)) * xs[0], var = 0.0L;
    for (std::size_t k = 1; k < n; ++k) {
      long double w = a * std::pow(1.0L - a, static_cast<long double>(n - 1 - k));
      mean += w * xs[k];
      long double d = xs[k] - prior_means[k];
      var += w * d * d;
    }
    double em = std::abs(st.mean - static_cast<double>(mean)) / std::max(1.0, std::abs(static_cast<double>(mean)));
    double ev = std::abs(st.variance - static_cast<double>(var)) / std::max(1.0, static_cast<double>(var));
    worst = std::max({worst, em, ev});
  }
  v.require(worst <= 1e-9, fmt("max relative error %.3e", worst));
  if (v.pass) v.note(fmt("1000 streams, max relative error %.3e", worst));
  return v;
}

// Reference 1-D tree for criterion 5: same draw order as the library,
// explicit leaf intervals, path lengths by scanning every leaf.
struct RefNode {
  bool leaf = true;
  double split = 0.0;
  std::size_t size = 0;
  int depth = 0;
  double lo = -INFINITY, hi = INFINITY;
  std::unique_ptr<RefNode> left, right;
};

std::unique_ptr<RefNode> ref_build(const std::vector<double>& pts, Rng& rng, int depth, int limit, double lo,
                                   double hi) {
  auto n = std::make_unique<RefNode>();
  n->depth = depth;
  n->lo = lo;
  n->hi = hi;
  n->size = pts.size();
  auto [mn, mx] = std::minmax_element(pts.begin(), pts.end());
  if (depth >= limit || pts.size() <= 1 || *mn == *mx) return n;
  rng.uniform_int(0, 0);
  double split = rng.uniform(*mn, *mx);
  std::vector<double> l, r;
  for (double p : pts) (p < split ? l : r).push_back(p);
  n->leaf = false;
  n->split = split;
  n->left = ref_build(l, rng, depth + 1, limit, lo, std::min(hi, split));
  n->right = ref_build(r, rng, depth + 1, limit, std::max(lo, split), hi);
  return n;
}

void flatten(const RefNode& n, std::vector<anomaly::IsoTree::Node>& out) {
  auto id = out.size();
  out.emplace_back();
  if (n.leaf) {
    out[id].size = n.size;
    return;
  }
  int l = static_cast<int>(out.size());
  flatten(*n.left, out);
  int r = static_cast<int>(out.size());
  flatten(*n.right, out);
  out[id].feature = 0;
  out[id].split = n.split;
  out[id].left = l;
  out[id].right = r;
}

double c_ref(std::size_t n) {
  if (n <= 1) return 0.0;
  long double h = 0;
  for (std::size_t i = 1; i < n; ++i) h += 1.0L / static_cast<long double>(i);
  return static_cast<double>(2.0L * h - 2.0L * static_cast<long double>(n - 1) / static_cast<long double>(n));
}

double enumerated_path(const RefNode& root, double x) {
  std::vector<const RefNode*> stack{&root}, leaves;
  while (!stack.empty()) {
    const RefNode* n = stack.back();
    stack.pop_back();
    if (n->leaf)
      leaves.push_back(n);
    else {
      stack.push_back(n->left.get());
      stack.push_back(n->right.get());
    }
  }
  for (const auto* l : leaves)
    if (x >= l->lo && x < l->hi) return l->depth + c_ref(l->size);
  return NAN;
}

Verdict criterion_5() {
  Verdict v;
  Rng data_rng(55);
  int fixtures = 0, structural = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    std::vector<double> data;
    auto n = data_rng.uniform_int(1, 12);
    for (std::int64_t i = 0; i < n; ++i) data.push_back(std::round(data_rng.uniform(-10, 10) * 4) / 4);
    anomaly::ForestParams p{static_cast<std::size_t>(data_rng.uniform_int(1, 4)), 9, seed};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), 1);
    for (std::size_t i = 0; i < data.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = data[i];
    auto forest = anomaly::IsolationForest::fit(m, p);

    std::size_t psi = std::min(p.subsample, data.size());
    int limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(psi, 2)))));
    Rng rng(p.seed);
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::unique_ptr<RefNode>> refs;
    for (std::size_t t = 0; t < p.trees; ++t) {
      for (std::size_t i = 0; i < psi; ++i) {
        auto j = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(idx.size()) - 1));
        std::swap(idx[i], idx[j]);
      }
      std::vector<double> sample;
      for (std::size_t i = 0; i < psi; ++i) sample.push_back(data[idx[i]]);
      refs.push_back(ref_build(sample, rng, 0, limit, -INFINITY, INFINITY));
    }
    ++fixtures;
    bool same = forest.trees().size() == refs.size();
    for (std::size_t t = 0; same && t < refs.size(); ++t) {
      std::vector<anomaly::IsoTree::Node> flat;
      flatten(*refs[t], flat);
      same = forest.trees()[t].nodes == flat;
    }
    structural += same;
    for (double x = -12.0; x <= 12.0; x += 0.125) {
      double sum = 0.0;
      for (const auto& r : refs) sum += enumerated_path(*r, x);
      double expect = sum / static_cast<double>(refs.size());
      double got = forest.mean_path_length(Eigen::VectorXd::Constant(1, x));
      worst = std::max(worst, std::isnan(expect) ? INFINITY : std::abs(got - expect));
    }
  }
  v.require(structural == fixtures, std::to_string(structural) + "/" + std::to_string(fixtures) + " forests equal the reference");
  v.require(worst <= 1e-12, fmt("max path-length difference %.3e", worst));

  int separated = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 7919);
    Eigen::MatrixXd data(256, 4);
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      for (Eigen::Index j = 0; j < data.cols(); ++j) data(i, j) = 20.0 + 3.0 * rng.normal();
    auto forest = anomaly::IsolationForest::fit(data, {64, 100, seed});
    double max_train = 0.0, max_norm = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      max_train = std::max(max_train, forest.score(data.row(i).transpose()));
      max_norm = std::max(max_norm, data.row(i).norm());
    }
    Eigen::VectorXd outlier = data.colwise().mean().transpose().normalized() * 10.0 * max_norm;
    if (forest.score(outlier) > max_train) ++separated;
  }
  v.require(separated == 20, std::to_string(separated) + "/20 fixtures with the outlier above every training point");
  if (v.pass)
    v.note(std::to_string(fixtures) + " psi<=4 forests equal the reference, path lengths exact; 20/20 outliers separated");
  return v;
}

Verdict criterion_6() {
  Verdict v;
  auto corpus = forensics::generate_synthetic_corpus(11, 1200, 800);
  auto m = forensics::train_classifier(corpus, {});
  double acc = m.holdout_accuracy.at(m.selected_family);
  v.require(corpus.size() == 2000, "corpus has 2000 messages");
  v.require(acc >= 0.97, fmt("hold-out accuracy %.4f", acc));
  v.note(std::string("selected ") + std::string(forensics::to_string(m.selected_family)) + fmt(" accuracy %.4f", acc) +
         " on " + std::to_string(m.test_size) + " held-out messages");

  Rng rng(66);
  const char* words[] = {"prize", "meeting", "wire", "report", "click", "lunch", "invoice", "urgent"};
  int agree = 0, trials = 500;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    auto n_docs = rng.uniform_int(2, 5);
    std::vector<std::vector<std::string>> docs;
    std::vector<bool> spam;
    for (std::int64_t d = 0; d < n_docs; ++d) {
      std::vector<std::string> doc;
      for (std::int64_t i = 0, len = rng.uniform_int(1, 6); i < len; ++i) doc.push_back(words[rng.uniform_int(0, 7)]);
      docs.push_back(doc);
      spam.push_back(d == 0 ? true : d == 1 ? false : rng.bernoulli(0.5));
    }
    std::vector<std::string> query;
    for (std::int64_t i = 0, len = rng.uniform_int(0, 6); i < len; ++i) query.push_back(words[rng.uniform_int(0, 7)]);
    double alpha = 1.0;
    // brute-force Bayes: priors times per-token smoothed likelihoods
    std::map<std::string, double> cs, ch;
    std::set<std::string> vocab;
    double ts = 0, th = 0, ns = 0, nh = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      (spam[d] ? ns : nh) += 1;
      for (const auto& t : docs[d]) {
        vocab.insert(t);
        (spam[d] ? cs : ch)[t] += 1;
        (spam[d] ? ts : th) += 1;
      }
    }
    long double ps = ns / (ns + nh), ph = nh / (ns + nh);
    double V = static_cast<double>(vocab.size());
    for (const auto& t : query) {
      if (!vocab.contains(t)) continue;
      ps *= (cs[t] + alpha) / (ts + alpha * V);
      ph *= (ch[t] + alpha) / (th + alpha * V);
    }
    double oracle = static_cast<double>(ps / (ps + ph));
    forensics::PretrainedModel mm;
    mm.vocabulary = forensics::build_vocabulary(docs, 1000);
    mm.multinomial = forensics::fit_multinomial(docs, spam, mm.vocabulary, alpha);
    double got = mm.probability(forensics::ClassifierFamily::multinomial, {query});
    worst = std::max(worst, std::abs(got - oracle));
    if ((got > 0.5) == (oracle > 0.5) && (got < 0.5) == (oracle < 0.5)) ++agree;
  }
  v.require(agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " oracle decisions agree");
  v.require(worst <= 1e-12, fmt("max posterior difference %.3e", worst));
  v.note(std::to_string(trials) + fmt(" small corpora, max posterior difference %.1e", worst));
  return v;
}

Verdict criterion_7() {
  Verdict v;
  auto res = experiment(false);
  auto s = evalkit::summarize(res.runs);
  const auto &lsc = find(s, siem::Variant::lsc), &ce = find(s, siem::Variant::ce_siem),
             &eg = find(s, siem::Variant::eg_siem);
  v.require(ce.actor_recall >= lsc.actor_recall, fmt("(a) recall CE %.3f vs LSC %.3f", ce.actor_recall, lsc.actor_recall));
  v.require(eg.confirmed_precision >= 0.95, fmt("(b) EG alert precision %.3f", eg.confirmed_precision));
  v.require(eg.confirmed_precision >= ce.confirmed_precision && ce.confirmed_precision >= lsc.confirmed_precision,
            fmt("(b) alert precision EG %.3f, CE %.3f, LSC %.3f", eg.confirmed_precision, ce.confirmed_precision,
                lsc.confirmed_precision));
  v.require(eg.confirmed_false <= 1.0 && eg.confirmed_false < ce.confirmed_false,
            fmt("(c) FP/run EG %.2f vs CE %.2f", eg.confirmed_false, ce.confirmed_false));
  v.require(eg.actor_f1 > ce.actor_f1 && ce.actor_f1 > lsc.actor_f1,
            fmt("(d) F1 EG %.3f, CE %.3f, LSC %.3f", eg.actor_f1, ce.actor_f1, lsc.actor_f1));
  v.require(eg.confirmed_alerts < ce.confirmed_alerts,
            fmt("(e) confirmed volume EG %.1f vs CE %.1f", eg.confirmed_alerts, ce.confirmed_alerts));
  if (v.pass) {
    v.note(fmt("recall LSC %.3f CE %.3f", lsc.actor_recall, ce.actor_recall));
    v.note(fmt("alertP LSC %.3f CE %.3f EG %.3f", lsc.confirmed_precision, ce.confirmed_precision,
               eg.confirmed_precision));
    v.note(fmt("FP/run CE %.2f EG %.2f", ce.confirmed_false, eg.confirmed_false));
    v.note(fmt("F1 LSC %.3f CE %.3f EG %.3f", lsc.actor_f1, ce.actor_f1, eg.actor_f1));
    v.note(fmt("alerts CE %.1f EG %.1f", ce.confirmed_alerts, eg.confirmed_alerts));
  }
  return v;
}

Verdict criterion_8() {
  Verdict v;
  evalkit::ExperimentOptions o;
  o.seeds = defaults().seeds;
  o.variants.clear();
  o.sweep = true;
  o.sweep_thetas = {3, 4, 5, 6, 7};
  auto res = evalkit::run_experiment(defaults().simulation, defaults().detection, o, &model(), &library());
  auto s = evalkit::summarize(res.sweep_runs);
  if (s.size() != 5) {
    v.require(false, "sweep produced " + std::to_string(s.size()) + " thresholds");
    return v;
  }
  std::string table;
  for (std::size_t i = 0; i < s.size(); ++i) {
    table += fmt("theta %.0f ", s[i].theta_base) +
             fmt("P %.3f R %.3f TTD %.1f", s[i].actor_precision, s[i].actor_recall, s[i].ttd_average) +
             (i + 1 < s.size() ? ", " : "");
    if (i == 0) continue;
    v.require(s[i].actor_precision >= s[i - 1].actor_precision - 0.02,
              fmt("precision falls at theta %.0f", s[i].theta_base));
    v.require(s[i].actor_recall <= s[i - 1].actor_recall + 0.02, fmt("recall rises at theta %.0f", s[i].theta_base));
    v.require(s[i].ttd_average >= s[i - 1].ttd_average, fmt("TTD falls at theta %.0f", s[i].theta_base));
  }
  v.note(table);
  return v;
}

Verdict criterion_9() {
  Verdict v;
  int audited = 0, bad = 0;
  std::size_t eg_total = 0, outside = 0;
  for (auto seed : defaults().seeds) {
    simkit::SimConfig sim = defaults().simulation;
    sim.seed = seed;
    auto log = simkit::run_simulation(sim);
    siem::DetectionInputs in{log.events, log.actors, log.truth, &model(), &library()};
    for (auto variant : {siem::Variant::eg_siem, siem::Variant::eg_siem_pt}) {
      siem::DetectionConfig d = defaults().detection;
      d.variant = variant;
      auto r = siem::detect(d, in, [&](const siem::PassRecord& p) {
        if (p.decision->tier != AlertTier::confirmed) return;
        ++audited;
        if (distinct_kinds(p.correlation->evidence) < 2 || p.decision->satisfied.empty()) ++bad;
      });
      for (const auto& a : r.alerts)
        if (a.tier == AlertTier::confirmed && distinct_kinds(a.evidence) < 2) ++bad;
    }
    auto confirmed = [&](siem::Variant variant) {
      siem::DetectionConfig d = defaults().detection;
      d.variant = variant;
      d.feedback = false;
      std::set<std::pair<ActorId, Step>> out;
      for (const auto& a : siem::detect(d, in).alerts)
        if (a.tier == AlertTier::confirmed) out.insert({a.actor_id, a.step});
      return out;
    };
    auto ce = confirmed(siem::Variant::ce_siem), eg = confirmed(siem::Variant::eg_siem);
    eg_total += eg.size();
    for (const auto& k : eg) outside += !ce.contains(k);
  }
  v.require(audited > 0 && bad == 0, std::to_string(bad) + " of " + std::to_string(audited) + " confirmations lack kinds or gates");
  v.require(outside == 0, std::to_string(outside) + " EG confirmations missing from CE");
  if (v.pass)
    v.note(std::to_string(audited) + " gated confirmations audited; " + std::to_string(eg_total) +
           " EG confirmations all in CE (matched theta, feedback off)");
  return v;
}

Verdict criterion_10() {
  Verdict v;
  auto render = [] {
    auto res = experiment(true);
    std::ostringstream csv, sweep;
    evalkit::write_aggregate_csv(csv, res.runs);
    evalkit::write_aggregate_csv(sweep, res.sweep_runs);
    std::string jsonl;
    for (const auto& r : res.runs) jsonl += evalkit::report_to_json(r, -1);
    return std::vector<std::string>{csv.str(), sweep.str(), jsonl};
  };
  auto a = render(), b = render();
  v.require(a == b, "outputs differ between runs");
  if (v.pass)
    v.note("results.csv (" + std::to_string(a[0].size()) + " B), sweep.csv (" + std::to_string(a[1].size()) +
           " B), runs.jsonl (" + std::to_string(a[2].size()) + " B) identical");
  return v;
}

Verdict criterion_11() {
  Verdict v;
  evalkit::ExperimentOptions o;
  o.seeds = defaults().seeds;
  o.variants = {siem::Variant::eg_siem, siem::Variant::eg_siem_pt};
  auto res = evalkit::run_experiment(defaults().simulation, defaults().detection, o, &model(), &library());
  auto s = evalkit::summarize(res.runs);
  const auto &eg = find(s, siem::Variant::eg_siem), &pt = find(s, siem::Variant::eg_siem_pt);
  auto leak = [](const evalkit::Summary& x) {
    auto it = x.ttd_by_scenario.find(Scenario::email_leakage);
    return it == x.ttd_by_scenario.end() ? NAN : it->second;
  };
  double te = leak(eg), tp = leak(pt);
  v.require(!std::isnan(te) && !std::isnan(tp), "email-leakage insiders detected by both variants");
  v.require(tp <= te, fmt("email-leakage TTD EG_PT %.2f vs EG %.2f", tp, te));
  v.require(pt.confirmed_false <= eg.confirmed_false,
            fmt("FP/run EG_PT %.2f vs EG %.2f", pt.confirmed_false, eg.confirmed_false));
  if (v.pass)
    v.note(fmt("email-leakage TTD EG_PT %.2f <= EG %.2f", tp, te) +
           fmt("; FP/run EG_PT %.2f <= EG %.2f", pt.confirmed_false, eg.confirmed_false));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                      criterion_5, criterion_6, criterion_7, criterion_8,
                                                      criterion_9, criterion_10, criterion_11};
  std::vector<int> which;
  if (argc > 1) {
    int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [1-%zu]\n", argv[0], criteria.size());
      return 2;
    }
    which.push_back(n);
  } else {
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) which.push_back(i);
  }
  bool all = true;
  for (int n : which) {
    Verdict v = criteria[static_cast<std::size_t>(n - 1)]();
    std::printf("criterion %d: %s  %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
