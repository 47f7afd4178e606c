#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/events.hpp"

namespace sentinel {

/// One JSON object per line with fixed field order
/// (step, actor_id, kind, payload). Identical input gives identical bytes.
std::string serialize_event_log(std::span<const Event> events);

/// Inverse of serialize_event_log. Throws ParseError naming the 1-based
/// line for malformed JSON, unknown kinds or enum values, payload/kind
/// mismatch, and steps that go backwards.
std::vector<Event> parse_event_log(std::string_view text);

std::string serialize_alerts(std::span<const Alert> alerts);
std::vector<Alert> parse_alerts(std::string_view text);

/// Ground-truth sidecar: {"actors": [...roster...], "truth": [...]}.
struct TruthFile {
  std::vector<ActorInfo> actors;
  std::vector<GroundTruth> truth;

  bool operator==(const TruthFile&) const = default;
};

std::string serialize_truth(const TruthFile& file);
TruthFile parse_truth(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace sentinel
