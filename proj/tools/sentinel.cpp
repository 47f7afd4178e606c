#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "sentinel/config.hpp"
#include "sentinel/engine.hpp"
#include "sentinel/error.hpp"
#include "sentinel/evalkit.hpp"
#include "sentinel/event_io.hpp"
#include "sentinel/forensics.hpp"
#include "sentinel/simkit.hpp"

namespace fs = std::filesystem;
using namespace sentinel;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::optional<int> runs;
  bool sweep = false;
  std::string out;
  std::string variants;

  std::string corpus, model, input, sender, events, truth;
  std::size_t ham = 1200, spam = 800;
};

AppConfig resolve_config(const Options& o) {
  std::string path = o.config;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  AppConfig c = path.empty() ? AppConfig{} : load_config(path);
  if (!o.variant.empty()) {
    auto v = siem::parse_variant(o.variant);
    if (!v) throw ConfigError("unknown variant '" + o.variant + "' (expected lsc, ce, eg or eg-pt)");
    c.detection.variant = *v;
  }
  if (o.seed) c.simulation.seed = *o.seed;
  if (o.runs) {
    if (*o.runs < 1) throw ConfigError("--runs must be at least 1");
    c.seeds.clear();
    std::uint64_t first = o.seed.value_or(1);
    for (int i = 0; i < *o.runs; ++i) c.seeds.push_back(first + static_cast<std::uint64_t>(i));
  } else if (o.seed) {
    c.seeds = {*o.seed};
  }
  if (!o.out.empty()) c.output_dir = o.out;
  return c;
}

fs::path ensure_dir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

int cmd_simulate(const Options& o) {
  AppConfig c = resolve_config(o);
  auto result = simkit::run_simulation(c.simulation);
  auto dir = ensure_dir(c.output_dir);
  write_file((dir / "events.jsonl").string(), serialize_event_log(result.events));
  write_file((dir / "truth.json").string(), serialize_truth({result.actors, result.truth}));
  int insiders = 0;
  for (const auto& g : result.truth) insiders += g.malicious;
  std::cout << "simulated " << result.events.size() << " events for " << result.actors.size() << " actors ("
            << insiders << " insiders) over " << c.simulation.total_steps << " steps -> " << dir.string() << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  AppConfig c = resolve_config(o);
  if (!o.corpus.empty()) c.forensics.corpus_path = o.corpus;
  c.forensics.model_path.clear();
  auto model = prepare_model(c.forensics);
  std::string out = o.model.empty() ? (fs::path(c.output_dir) / "model.json").string() : o.model;
  if (auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_file(out, forensics::save_model(model));
  std::cout << "trained on " << model.train_size << " messages, held out " << model.test_size << "\n";
  for (const auto& [family, acc] : model.holdout_accuracy)
    std::cout << "  " << (family == forensics::ClassifierFamily::multinomial ? "multinomial" : "linear")
              << " holdout accuracy " << std::fixed << std::setprecision(4) << acc << "\n";
  std::cout << "selected "
            << (model.selected_family == forensics::ClassifierFamily::multinomial ? "multinomial" : "linear")
            << ", model written to " << out << "\n";
  return 0;
}

int cmd_score(const Options& o) {
  AppConfig c = resolve_config(o);
  if (!o.model.empty()) c.forensics.model_path = o.model;
  auto model = prepare_model(c.forensics);
  forensics::EmailMonitor monitor(&model, c.detection.analyzer);
  std::istringstream in(read_file(o.input));
  std::string line;
  std::cout << "phishing_prob,urgency_hits,style_anomaly,authorship_inconsistency,ai_likeness\n"
            << std::fixed << std::setprecision(4);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = monitor.observe(o.sender, line);
    std::cout << f.phishing_prob << ',' << f.urgency_hits << ',' << f.style_anomaly << ','
              << f.authorship_inconsistency << ',' << f.ai_likeness << '\n';
  }
  return 0;
}

int cmd_gen_corpus(const Options& o) {
  AppConfig c = resolve_config(o);
  auto corpus = forensics::generate_synthetic_corpus(o.seed.value_or(c.forensics.corpus_seed), o.ham, o.spam);
  std::string out = o.corpus.empty() ? (fs::path(c.output_dir) / "corpus.jsonl").string() : o.corpus;
  if (auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_file(out, forensics::serialize_corpus_jsonl(corpus));
  std::cout << "wrote " << corpus.size() << " messages to " << out << "\n";
  return 0;
}

int cmd_detect(const Options& o) {
  AppConfig c = resolve_config(o);
  auto events = parse_event_log(read_file(o.events));
  auto truth = parse_truth(read_file(o.truth));
  std::optional<forensics::PretrainedModel> model;
  if (siem::layers_for(c.detection.variant).pretrained_forensics) {
    std::string path = !o.model.empty()                ? o.model
                       : !c.forensics.model_path.empty() ? c.forensics.model_path
                                                         : (fs::path(c.output_dir) / "model.json").string();
    if (!fs::exists(path))
      throw ConfigError("EG_SIEM_PT needs a trained model; no model file at '" + path +
                        "' (run 'sentinel forensics train' or pass --model)");
    model = forensics::load_model(read_file(path));
  }
  auto library = load_plan_library(c.plan_library);
  auto result = siem::detect(c.detection, {events, truth.actors, truth.truth, model ? &*model : nullptr, &library});
  auto dir = ensure_dir(c.output_dir);
  write_file((dir / "alerts.jsonl").string(), serialize_alerts(result.alerts));
  auto report = evalkit::evaluate(result.alerts, truth.truth, c.detection.warmup_steps);
  report.variant = c.detection.variant;
  report.theta_base = c.detection.theta_base;
  write_file((dir / "report.json").string(), evalkit::report_to_json(report));
  std::cout << siem::to_string(c.detection.variant) << ": " << result.alerts.size() << " alerts ("
            << report.alerts.confirmed << " confirmed in testing), actor P=" << std::fixed << std::setprecision(3)
            << report.actors.precision << " R=" << report.actors.recall << " F1=" << report.actors.f1
            << " -> " << (dir / "alerts.jsonl").string() << "\n";
  return 0;
}

int cmd_experiment(const Options& o) {
  AppConfig c = resolve_config(o);
  auto model = prepare_model(c.forensics);
  auto library = load_plan_library(c.plan_library);
  evalkit::ExperimentOptions opts;
  if (!o.variants.empty()) {
    opts.variants.clear();
    std::istringstream list(o.variants);
    std::string name;
    while (std::getline(list, name, ',')) {
      auto v = siem::parse_variant(name);
      if (!v) throw ConfigError("unknown variant '" + name + "' in --variants");
      opts.variants.push_back(*v);
    }
  }
  opts.seeds = c.seeds;
  opts.sweep = o.sweep;
  opts.sweep_thetas = c.sweep_thetas;
  auto result = evalkit::run_experiment(c.simulation, c.detection, opts, &model, &library);
  auto dir = ensure_dir(c.output_dir);
  auto summary = evalkit::summarize(result.runs);
  {
    std::ostringstream csv;
    evalkit::write_aggregate_csv(csv, result.runs);
    write_file((dir / "results.csv").string(), csv.str());
    std::string lines;
    for (const auto& r : result.runs) lines += evalkit::report_to_json(r, -1);
    write_file((dir / "runs.jsonl").string(), lines);
  }
  std::cout << std::fixed << std::setprecision(3);
  std::cout << "variant      P      R      F1     FP/run  alerts  alertP  TTD\n";
  for (const auto& s : summary)
    std::cout << std::left << std::setw(11) << siem::to_string(s.variant) << std::right << std::setw(7)
              << s.actor_precision << std::setw(7) << s.actor_recall << std::setw(7) << s.actor_f1 << std::setw(8)
              << s.false_positive_actors << std::setw(8) << std::setprecision(1) << s.confirmed_alerts
              << std::setprecision(3) << std::setw(8) << s.confirmed_precision << std::setw(7)
              << std::setprecision(1) << s.ttd_average << std::setprecision(3) << "\n";
  if (o.sweep) {
    auto sweep = evalkit::summarize(result.sweep_runs);
    std::ostringstream csv;
    evalkit::write_aggregate_csv(csv, result.sweep_runs);
    write_file((dir / "sweep.csv").string(), csv.str());
    std::cout << "theta  P      R      TTD\n";
    for (const auto& s : sweep)
      std::cout << std::setprecision(1) << s.theta_base << "    " << std::setprecision(3) << s.actor_precision << "  "
                << s.actor_recall << "  " << std::setprecision(1) << s.ttd_average << "\n";
  }
  std::cout << "results written to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent insider-threat simulator and layered SIEM"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&o](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "JSON config (default: $SENTINEL_CONFIG)");
    cmd->add_option("--seed", o.seed, "Simulation seed");
    cmd->add_option("--variant", o.variant, "lsc | ce | eg | eg-pt");
    cmd->add_option("--out", o.out, "Output directory");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate an event log and ground truth");
  add_common(simulate);

  auto* foren = app.add_subcommand("forensics", "Email forensics utilities");
  foren->require_subcommand(1);
  auto* train = foren->add_subcommand("train", "Train the phishing classifier");
  add_common(train);
  train->add_option("--corpus", o.corpus, "Labelled corpus (CSV or JSONL); synthetic when omitted");
  train->add_option("--model", o.model, "Where to write the model");
  auto* score = foren->add_subcommand("score", "Score email bodies, one per line");
  add_common(score);
  score->add_option("--model", o.model, "Trained model; trains on the synthetic corpus when omitted");
  score->add_option("--input", o.input, "Text file, one body per line")->required();
  score->add_option("--sender", o.sender, "Sender id for style profiling")->default_val("anonymous");
  auto* gen = foren->add_subcommand("gen-corpus", "Write the synthetic labelled corpus");
  add_common(gen);
  gen->add_option("--corpus", o.corpus, "Output path");
  gen->add_option("--ham", o.ham, "Ham messages")->default_val(1200);
  gen->add_option("--spam", o.spam, "Spam messages")->default_val(800);

  auto* det = app.add_subcommand("detect", "Run one SIEM variant over an event log");
  add_common(det);
  det->add_option("--events", o.events, "Event log (JSONL)")->required();
  det->add_option("--truth", o.truth, "Roster and ground truth (JSON)")->required();
  det->add_option("--model", o.model, "Trained forensics model for eg-pt (default: <out>/model.json)");

  auto* exp = app.add_subcommand("experiment", "Seeded comparison of all variants");
  add_common(exp);
  exp->add_option("--runs", o.runs, "Number of seeds (consecutive from --seed, default 1)");
  exp->add_option("--variants", o.variants, "Comma-separated subset, e.g. lsc,eg (default: all four)");
  exp->add_flag("--sweep", o.sweep, "Also sweep theta_base for LSC");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*train) return cmd_train(o);
    if (*score) return cmd_score(o);
    if (*gen) return cmd_gen_corpus(o);
    if (*det) return cmd_detect(o);
    if (*exp) return cmd_experiment(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
