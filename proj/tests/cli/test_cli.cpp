#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sentinel/event_io.hpp"

namespace fs = std::filesystem;
using namespace sentinel;

namespace {

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("sentinel_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Outcome sentinel_cli(const std::string& args) {
  auto log = scratch() / "last_output.txt";
  std::string cmd = std::string("'") + SENTINEL_CLI + "' " + args + " > '" + log.string() + "' 2>&1";
  int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.output = read_file(log.string());
  return o;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path write_config(const std::string& name, const std::string& json) {
  auto p = scratch() / name;
  std::ofstream(p) << json;
  return p;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("simulate writes a log and ground truth") {
  auto out = scratch() / "sim";
  auto r = sentinel_cli("simulate --seed 4 --out " + q(out));
  REQUIRE(r.code == 0);
  auto events = parse_event_log(slurp(out / "events.jsonl"));
  CHECK_FALSE(events.empty());
  auto truth = parse_truth(slurp(out / "truth.json"));
  CHECK(truth.actors.size() == truth.truth.size());
}

TEST_CASE("same seed, same bytes") {
  auto a = scratch() / "same_a", b = scratch() / "same_b", c = scratch() / "same_c";
  REQUIRE(sentinel_cli("simulate --seed 9 --out " + q(a)).code == 0);
  REQUIRE(sentinel_cli("simulate --seed 9 --out " + q(b)).code == 0);
  REQUIRE(sentinel_cli("simulate --seed 10 --out " + q(c)).code == 0);
  CHECK(slurp(a / "events.jsonl") == slurp(b / "events.jsonl"));
  CHECK(slurp(a / "truth.json") == slurp(b / "truth.json"));
  CHECK(slurp(a / "events.jsonl") != slurp(c / "events.jsonl"));
}

TEST_CASE("config errors name the key and exit 2") {
  auto cfg = write_config("bad.json", R"({"simulation": {"totl_steps": 100}})");
  auto r = sentinel_cli("simulate --config " + q(cfg) + " --out " + q(scratch() / "bad"));
  CHECK(r.code == 2);
  CHECK(r.output.find("simulation.totl_steps") != std::string::npos);

  ::setenv("SENTINEL_CONFIG", cfg.c_str(), 1);
  auto env = sentinel_cli("simulate --out " + q(scratch() / "bad_env"));
  ::unsetenv("SENTINEL_CONFIG");
  CHECK(env.code == 2);
  CHECK(env.output.find("simulation.totl_steps") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(sentinel_cli("").code == 1);
  CHECK(sentinel_cli("frobnicate").code == 1);
  CHECK(sentinel_cli("simulate --seed notanumber").code == 1);
  CHECK(sentinel_cli("detect --out " + q(scratch() / "x")).code == 1);
  CHECK(sentinel_cli("--help").code == 0);
}

TEST_CASE("unknown variant is a runtime error") {
  auto r = sentinel_cli("simulate --variant xyz --out " + q(scratch() / "v"));
  CHECK(r.code == 2);
  CHECK(r.output.find("xyz") != std::string::npos);
}

TEST_CASE("benign-only log gives LSC no confirmed alerts") {
  // routine roles only: no admin backups, power users or injected policy slips
  auto cfg = write_config("benign.json", R"({"simulation": {
      "benign_population": {"staff": 14, "developer": 10, "admin": 0}, "power_users": 0, "compliance_approvals": 0,
      "restricted_access_mistake_prob": 0, "deny_domain_mistake_prob": 0, "scenario_assignment":
      {"exfiltration": 0, "stealth": 0, "takeover": 0, "staging_exfiltration": 0, "email_leakage": 0}}})");
  auto sim = scratch() / "benign";
  REQUIRE(sentinel_cli("simulate --seed 2 --config " + q(cfg) + " --out " + q(sim)).code == 0);
  auto truth = parse_truth(slurp(sim / "truth.json"));
  CHECK(std::none_of(truth.truth.begin(), truth.truth.end(), [](const GroundTruth& g) { return g.malicious; }));
  auto det = scratch() / "benign_det";
  auto r = sentinel_cli("detect --variant lsc --config " + q(cfg) + " --events " + q(sim / "events.jsonl") +
                        " --truth " + q(sim / "truth.json") + " --out " + q(det));
  REQUIRE(r.code == 0);
  auto alerts = parse_alerts(slurp(det / "alerts.jsonl"));
  // alerts before the 60-step warm-up are not scored
  CHECK(std::none_of(alerts.begin(), alerts.end(),
                     [](const Alert& a) { return a.tier == AlertTier::confirmed && a.step >= 60; }));
  CHECK(slurp(det / "report.json").find("\"confirmed\": 0,") != std::string::npos);
}

TEST_CASE("detect is repeatable and the pre-trained variant needs a model") {
  auto sim = scratch() / "det_sim";
  REQUIRE(sentinel_cli("simulate --seed 5 --out " + q(sim)).code == 0);
  std::string io = " --events " + q(sim / "events.jsonl") + " --truth " + q(sim / "truth.json");
  auto a = scratch() / "det_a", b = scratch() / "det_b";
  REQUIRE(sentinel_cli("detect --variant eg" + io + " --out " + q(a)).code == 0);
  REQUIRE(sentinel_cli("detect --variant eg" + io + " --out " + q(b)).code == 0);
  CHECK(slurp(a / "alerts.jsonl") == slurp(b / "alerts.jsonl"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK_FALSE(parse_alerts(slurp(a / "alerts.jsonl")).empty());

  auto missing = scratch() / "no_model_here";
  auto r = sentinel_cli("detect --variant eg-pt" + io + " --out " + q(missing));
  CHECK(r.code == 2);
  CHECK(r.output.find((missing / "model.json").string()) != std::string::npos);

  auto model = scratch() / "model.json";
  REQUIRE(sentinel_cli("forensics train --model " + q(model)).code == 0);
  auto pt = sentinel_cli("detect --variant eg-pt --model " + q(model) + io + " --out " + q(scratch() / "det_pt"));
  CHECK(pt.code == 0);
  CHECK(slurp(scratch() / "det_pt" / "report.json").find("EG_SIEM_PT") != std::string::npos);
}

TEST_CASE("forensics score and corpus generation") {
  auto corpus = scratch() / "corpus.jsonl";
  auto r = sentinel_cli("forensics gen-corpus --ham 20 --spam 10 --corpus " + q(corpus));
  REQUIRE(r.code == 0);
  CHECK(lines(slurp(corpus)).size() == 30);
  auto input = scratch() / "bodies.txt";
  std::ofstream(input) << "Please review the attached quarterly report before the meeting.\n"
                          "URGENT verify your password now or your account will be suspended!\n";
  auto s = sentinel_cli("forensics score --input " + q(input));
  REQUIRE(s.code == 0);
  auto rows = lines(s.output);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("phishing_prob,", 0) == 0);
}

TEST_CASE("experiment writes run and mean rows") {
  auto out = scratch() / "exp";
  auto r = sentinel_cli("experiment --runs 2 --variants lsc,eg --out " + q(out));
  REQUIRE(r.code == 0);
  auto rows = lines(slurp(out / "results.csv"));
  REQUIRE(rows.size() == 1 + 4 + 2);
  CHECK(std::count_if(rows.begin(), rows.end(), [](const std::string& l) { return l.rfind("run,", 0) == 0; }) == 4);
  CHECK(std::count_if(rows.begin(), rows.end(), [](const std::string& l) { return l.rfind("mean,", 0) == 0; }) == 2);
  CHECK(lines(slurp(out / "runs.jsonl")).size() == 4);
  CHECK(sentinel_cli("experiment --runs 1 --variants lsc,zz --out " + q(out)).code == 2);
}

TEST_CASE("experiment output is byte-stable and the sweep covers five thresholds") {
  auto a = scratch() / "sweep_a", b = scratch() / "sweep_b";
  REQUIRE(sentinel_cli("experiment --runs 1 --seed 3 --variants lsc --sweep --out " + q(a)).code == 0);
  REQUIRE(sentinel_cli("experiment --runs 1 --seed 3 --variants lsc --sweep --out " + q(b)).code == 0);
  for (const char* f : {"results.csv", "runs.jsonl", "sweep.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  auto rows = lines(slurp(a / "sweep.csv"));
  REQUIRE(rows.size() == 1 + 5 * 2);
  std::vector<std::string> thetas;
  for (const auto& l : rows)
    if (l.rfind("mean,", 0) == 0) thetas.push_back(l.substr(0, l.find(',', l.find(",,") + 2)));
  CHECK(thetas == std::vector<std::string>{"mean,LSC,,3.0000", "mean,LSC,,4.0000", "mean,LSC,,5.0000",
                                           "mean,LSC,,6.0000", "mean,LSC,,7.0000"});
  auto header = rows[0];
  CHECK(header.find("actor_f1") != std::string::npos);
  CHECK(lines(slurp(a / "results.csv"))[0] == header);
}
