#include "sentinel/event_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sentinel/error.hpp"

namespace sentinel {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json payload_to_json(const Event& e) {
  ordered_json p = ordered_json::object();
  std::visit(
      [&p](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LoginPayload>) {
          p["context"] = to_string(v.context);
        } else if constexpr (std::is_same_v<T, AccessPayload>) {
          p["resource"] = v.resource;
          p["sensitivity"] = to_string(v.sensitivity);
        } else if constexpr (std::is_same_v<T, ExportPayload>) {
          p["volume"] = v.volume;
          p["resource"] = v.resource;
          p["destination"] = to_string(v.destination);
        } else {
          p["recipient"] = to_string(v.scope);
          p["domain"] = v.domain;
          p["body"] = v.body;
        }
      },
      e.payload);
  return p;
}

template <typename E>
E enum_field(const ordered_json& obj, const char* key, std::string_view what) {
  const auto& name = obj.at(key).get_ref<const std::string&>();
  auto value = enum_from_string<E>(name);
  if (!value) throw ParseError("unknown " + std::string(what) + " '" + name + "'");
  return *value;
}

Payload payload_from_json(ActionKind kind, const ordered_json& p) {
  switch (kind) {
    case ActionKind::login:
      return LoginPayload{enum_field<LoginContext>(p, "context", "login context")};
    case ActionKind::db_query:
    case ActionKind::file_access:
      return AccessPayload{p.at("resource").get<std::string>(),
                           enum_field<Sensitivity>(p, "sensitivity", "sensitivity")};
    case ActionKind::file_export:
      return ExportPayload{p.at("volume").get<std::int64_t>(), p.at("resource").get<std::string>(),
                           enum_field<Destination>(p, "destination", "destination")};
    case ActionKind::email_send:
      return EmailPayload{enum_field<RecipientScope>(p, "recipient", "recipient scope"),
                          p.at("domain").get<std::string>(), p.at("body").get<std::string>()};
  }
  throw ParseError("unreachable payload kind");
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) fn(line, line_no);
    pos = end + 1;
  }
}

ordered_json evidence_to_json(const Evidence& e) {
  ordered_json j;
  j["kind"] = to_string(e.kind);
  j["weight"] = e.weight;
  j["step"] = e.step;
  j["detail"] = e.detail;
  return j;
}

}  // namespace

std::string serialize_event_log(std::span<const Event> events) {
  std::string out;
  for (const auto& e : events) {
    ordered_json j;
    j["step"] = e.step;
    j["actor_id"] = e.actor_id;
    j["kind"] = to_string(e.kind);
    j["payload"] = payload_to_json(e);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Event> parse_event_log(std::string_view text) {
  std::vector<Event> events;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const std::string where = "line " + std::to_string(line_no) + ": ";
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where + "malformed JSON (" + ex.what() + ")");
    }
    try {
      Event e;
      e.step = j.at("step").get<Step>();
      if (e.step < 0) throw ParseError("negative step");
      e.actor_id = j.at("actor_id").get<std::string>();
      const auto& kind_name = j.at("kind").get_ref<const std::string&>();
      auto kind = enum_from_string<ActionKind>(kind_name);
      if (!kind) throw ParseError("unknown kind '" + kind_name + "'");
      e.kind = *kind;
      e.payload = payload_from_json(e.kind, j.at("payload"));
      if (!events.empty() && e.step < events.back().step)
        throw ParseError("step " + std::to_string(e.step) + " precedes previous step " +
                         std::to_string(events.back().step) + " (log must be step-ordered)");
      events.push_back(std::move(e));
    } catch (const ParseError& ex) {
      throw ParseError(where + ex.what());
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where + "bad field (" + ex.what() + ")");
    }
  });
  return events;
}

std::string serialize_alerts(std::span<const Alert> alerts) {
  std::string out;
  for (const auto& a : alerts) {
    ordered_json j;
    j["tier"] = to_string(a.tier);
    j["actor_id"] = a.actor_id;
    j["step"] = a.step;
    j["score"] = a.score;
    auto ev = ordered_json::array();
    for (const auto& e : a.evidence) ev.push_back(evidence_to_json(e));
    j["evidence"] = std::move(ev);
    j["tom_assisted"] = a.tom_assisted;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Alert> parse_alerts(std::string_view text) {
  std::vector<Alert> alerts;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    try {
      auto j = ordered_json::parse(line);
      Alert a;
      a.tier = enum_field<AlertTier>(j, "tier", "alert tier");
      a.actor_id = j.at("actor_id").get<std::string>();
      a.step = j.at("step").get<Step>();
      a.score = j.at("score").get<double>();
      for (const auto& ev : j.at("evidence")) {
        a.evidence.push_back(Evidence{enum_field<EvidenceKind>(ev, "kind", "evidence kind"),
                                      ev.at("weight").get<double>(), ev.at("step").get<Step>(),
                                      ev.at("detail").get<std::string>()});
      }
      a.tom_assisted = j.at("tom_assisted").get<bool>();
      alerts.push_back(std::move(a));
    } catch (const ParseError& ex) {
      throw ParseError("line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError("line " + std::to_string(line_no) + ": " + ex.what());
    }
  });
  return alerts;
}

std::string serialize_truth(const TruthFile& file) {
  ordered_json j;
  auto actors = ordered_json::array();
  for (const auto& a : file.actors) {
    ordered_json o;
    o["actor_id"] = a.actor_id;
    o["role"] = to_string(a.role);
    o["compliance_approval"] = a.compliance_approval;
    actors.push_back(std::move(o));
  }
  auto truth = ordered_json::array();
  for (const auto& t : file.truth) {
    ordered_json o;
    o["actor_id"] = t.actor_id;
    o["malicious"] = t.malicious;
    o["scenario"] = t.scenario ? ordered_json(to_string(*t.scenario)) : ordered_json(nullptr);
    o["first_malicious_step"] = t.first_malicious_step ? ordered_json(*t.first_malicious_step) : ordered_json(nullptr);
    truth.push_back(std::move(o));
  }
  j["actors"] = std::move(actors);
  j["truth"] = std::move(truth);
  return j.dump(2) + "\n";
}

TruthFile parse_truth(std::string_view text) {
  TruthFile file;
  try {
    auto j = ordered_json::parse(text);
    for (const auto& o : j.at("actors")) {
      file.actors.push_back(ActorInfo{o.at("actor_id").get<std::string>(), enum_field<Role>(o, "role", "role"),
                                      o.at("compliance_approval").get<bool>()});
    }
    for (const auto& o : j.at("truth")) {
      GroundTruth t;
      t.actor_id = o.at("actor_id").get<std::string>();
      t.malicious = o.at("malicious").get<bool>();
      if (!o.at("scenario").is_null()) t.scenario = enum_field<Scenario>(o, "scenario", "scenario");
      if (!o.at("first_malicious_step").is_null()) t.first_malicious_step = o.at("first_malicious_step").get<Step>();
      if (t.malicious != t.scenario.has_value())
        throw ParseError("actor " + t.actor_id + ": scenario must be present iff malicious");
      file.truth.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("truth file: ") + ex.what());
  }
  return file;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace sentinel
