#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/forensics.hpp"

namespace sentinel::forensics {

namespace {

template <std::size_t N>
const std::string& pick(Rng& rng, const std::array<std::string, N>& xs) {
  return xs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(N) - 1))];
}

const std::array<std::string, 20> kSubjects{
    "the team",         "our group",      "the vendor",        "marketing",        "the project board",
    "finance",          "the regional office", "sales operations", "the design group", "our partners",
    "the steering committee", "engineering", "the support desk", "legal",           "the client",
    "procurement",      "the planning group", "human resources", "the analytics team", "facilities"};
const std::array<std::string, 20> kVerbs{
    "reviewed", "scheduled", "updated",  "shared",   "discussed", "approved",   "prepared",
    "circulated", "revised", "summarized", "confirmed", "drafted", "presented", "completed",
    "organized", "outlined", "documented", "compared", "forwarded", "tracked"};
const std::array<std::string, 20> kObjects{
    "the quarterly plan",   "the draft proposal",   "the meeting notes",     "the budget summary",
    "the release timeline", "the staffing forecast", "the training schedule", "the travel itinerary",
    "the agenda for thursday", "the slide deck",    "the status report",     "the migration checklist",
    "the holiday calendar", "the onboarding guide", "the customer feedback", "the product roadmap",
    "the workshop outline", "the hiring plan",      "the office move",       "the vendor contract"};
const std::array<std::string, 20> kTails{
    "for next week",         "with the client",          "before the offsite",
    "during the review",     "in the shared folder",     "after lunch",
    "for the regional meeting", "with everyone on the thread", "by end of day",
    "as we agreed on monday", "so we can plan the next phase", "and added a few comments",
    "together with the updated figures", "for your convenience", "when you have a moment",
    "to keep everyone aligned", "from the last session", "at the weekly sync",
    "for the upcoming quarter", "based on the earlier discussion"};
const std::array<std::string, 5> kConnectors{"and", "also", "then", "meanwhile", "additionally"};

const std::array<std::string, 12> kHamSubjects{
    "weekly sync",   "project update", "meeting notes",  "budget review", "travel plans",  "schedule change",
    "draft attached", "team lunch",    "quarterly plan", "follow up",     "roadmap notes", "onboarding"};
const std::array<std::string, 10> kSpamSubjects{
    "action required", "account notice", "invoice overdue", "security alert", "you won",
    "urgent request",  "payment pending", "verify now",     "document shared", "final notice"};

/// Ham sentences that legitimately contain keyword-list terms.
const std::array<std::string, 6> kHamKeywordSentences{
    "the invoice from the caterer has been paid in full",
    "please verify the room booking for friday afternoon",
    "the final agenda for the offsite is in the shared folder",
    "the confidential draft stays within the steering committee for now",
    "our records show the training budget was approved last month",
    "the warning light in the lab was fixed by facilities"};

std::vector<std::string> category_sentences(SuspiciousCategory c) {
  switch (c) {
    case SuspiciousCategory::credential:
      return {"your mailbox password expires today",
              "verify your credentials immediately to avoid suspension",
              "click the secure link below to keep your account active",
              "unusual sign in activity was detected on your profile",
              "failure to verify will result in your access being suspended",
              "this is your final notice from the helpdesk"};
    case SuspiciousCategory::invoice:
      return {"please find the overdue invoice attached for immediate payment",
              "the payment is overdue and must be settled urgently",
              "wire the outstanding balance to the updated banking details",
              "click here to download invoice 48213",
              "late fees apply if the invoice remains unpaid",
              "our accounts team expects the transfer today"};
    case SuspiciousCategory::attachment:
      return {"open the attached document to review the urgent update",
              "the attached file contains your secure message",
              "enable macros to view the protected attachment",
              "download the attachment immediately before it expires",
              "the scanned copy is waiting in the portal",
              "use your network login to open the archive"};
    case SuspiciousCategory::spoofing:
      return {"this is the ceo and i need a favor urgently",
              "wire 25000 to our new supplier immediately",
              "keep this request between us until the deal closes",
              "i am in a meeting so reply by email only asap",
              "do not call me just get it done today",
              "send me the confirmation once the transfer is out"};
    case SuspiciousCategory::survey:
      return {"complete our short survey to claim your prize",
              "you have been selected as this month's winner",
              "click now to receive your limited gift card",
              "the offer expires in 24 hours",
              "only a few questions stand between you and the reward",
              "enter your details on the next page to collect"};
    case SuspiciousCategory::security_alert:
      return {"security alert your account has been locked",
              "we detected unusual activity and suspended your access",
              "verify your identity immediately using the link below",
              "failure to act will permanently lock the account",
              "our system flagged a login from an unknown device",
              "restore access by confirming your details"};
    case SuspiciousCategory::info_request:
      return {"please send the employee ssn list urgently",
              "we need the payroll figures for verification immediately",
              "reply with the customer banking details asap",
              "the auditor requires the internal files today",
              "attach the full staff directory in your reply",
              "send everything you have on the account holders"};
    case SuspiciousCategory::leak:
      return {"here are the files we talked about",
              "sending the documents you asked for to my personal address",
              "keep this between us and delete it after you download",
              "attached are the payroll exports from the internal share",
              "the customer_list is in the zip with the other exports",
              "i copied the project archive before they change the access",
              "you will find the pricing sheets and contracts inside",
              "use the same password as last time to open it"};
  }
  return {};
}

constexpr std::array kCategories{SuspiciousCategory::credential,     SuspiciousCategory::invoice,
                                 SuspiciousCategory::attachment,     SuspiciousCategory::spoofing,
                                 SuspiciousCategory::survey,         SuspiciousCategory::security_alert,
                                 SuspiciousCategory::info_request,   SuspiciousCategory::leak};

std::string sentence_case(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s + ".";
}

void append_words(std::vector<std::string>& out, const std::string& phrase) {
  std::size_t pos = 0;
  while (pos < phrase.size()) {
    auto end = phrase.find(' ', pos);
    if (end == std::string::npos) end = phrase.size();
    if (end > pos) out.push_back(phrase.substr(pos, end - pos));
    pos = end + 1;
  }
}

int sample_length(Rng& rng, double mean, double sd) {
  const double v = rng.normal(mean, sd);
  return static_cast<int>(std::clamp(std::lround(v), 4L, 40L));
}

}  // namespace

std::string business_sentence(Rng& rng, int length) {
  length = std::max(length, 1);
  std::vector<std::string> words;
  while (static_cast<int>(words.size()) < length) {
    if (!words.empty()) words.push_back(pick(rng, kConnectors));
    append_words(words, pick(rng, kSubjects));
    append_words(words, pick(rng, kVerbs));
    append_words(words, pick(rng, kObjects));
    append_words(words, pick(rng, kTails));
  }
  words.resize(static_cast<std::size_t>(length));
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return sentence_case(s);
}

std::string suspicious_body(Rng& rng, SuspiciousCategory category) {
  auto pool = category_sentences(category);
  std::vector<std::string> chosen;
  const auto n = static_cast<std::size_t>(rng.uniform_int(4, 6));
  for (std::size_t i = 0; i < n && !pool.empty(); ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
    chosen.push_back(pool[j]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
  }
  if (rng.bernoulli(0.3)) {
    std::string filler = business_sentence(rng, static_cast<int>(rng.uniform_int(6, 10)));
    filler.pop_back();
    filler[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(filler[0])));
    chosen.insert(chosen.begin() + static_cast<std::ptrdiff_t>(rng.uniform_int(0, static_cast<std::int64_t>(chosen.size()))),
                  filler);
  }
  std::string body;
  for (const auto& s : chosen) {
    if (!body.empty()) body += ' ';
    body += sentence_case(s);
  }
  if (KeywordLists::defaults().urgent_hits(tokenize(body)) == 0) body += " Please respond urgently.";
  return body;
}

std::vector<LabeledEmail> generate_synthetic_corpus(std::uint64_t seed, std::size_t n_ham, std::size_t n_spam) {
  if (n_ham == 0 || n_spam == 0) throw ConfigError("synthetic corpus needs n_ham >= 1 and n_spam >= 1");
  Rng rng(seed);
  std::vector<LabeledEmail> corpus;
  corpus.reserve(n_ham + n_spam);
  auto date = [&rng] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "2001-%02d-%02d", static_cast<int>(rng.uniform_int(1, 12)),
                  static_cast<int>(rng.uniform_int(1, 28)));
    return std::string(buf);
  };
  StyleBaseline base;
  for (std::size_t i = 0; i < n_ham; ++i) {
    LabeledEmail e;
    e.subject = pick(rng, kHamSubjects);
    const auto sentences = rng.uniform_int(3, 6);
    for (std::int64_t s = 0; s < sentences; ++s) {
      if (!e.message.empty()) e.message += ' ';
      e.message += business_sentence(rng, sample_length(rng, base.mean_sentence_length, base.sentence_length_sd));
    }
    if (rng.bernoulli(0.15)) e.message += ' ' + sentence_case(pick(rng, kHamKeywordSentences));
    e.spam = false;
    e.date = date();
    corpus.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < n_spam; ++i) {
    LabeledEmail e;
    e.subject = pick(rng, kSpamSubjects);
    e.message = suspicious_body(rng, kCategories[i % kCategories.size()]);
    e.spam = true;
    e.date = date();
    corpus.push_back(std::move(e));
  }
  for (std::size_t i = corpus.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(corpus[i - 1], corpus[j]);
  }
  return corpus;
}

// ------------------------------------------------------------------ I/O --

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_label(const std::string& raw) {
  const auto v = lower(raw);
  if (v == "spam" || v == "1") return true;
  if (v == "ham" || v == "0") return false;
  throw ParseError("unknown label '" + raw + "' (expected spam or ham)");
}

/// RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<LabeledEmail> parse_corpus(std::string_view text) {
  std::vector<LabeledEmail> corpus;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return corpus;
  if (text[first] == '{') {
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      auto line = text.substr(pos, end - pos);
      pos = end + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        auto j = nlohmann::json::parse(line);
        LabeledEmail e;
        e.subject = j.value("subject", "");
        e.message = j.at("message").get<std::string>();
        e.spam = parse_label(j.at("label").get<std::string>());
        e.date = j.value("date", "");
        corpus.push_back(std::move(e));
      } catch (const nlohmann::json::exception& ex) {
        throw ParseError("corpus line " + std::to_string(line_no) + ": " + ex.what());
      } catch (const ParseError& ex) {
        throw ParseError("corpus line " + std::to_string(line_no) + ": " + ex.what());
      }
    }
    return corpus;
  }

  const auto rows = parse_csv(text);
  if (rows.empty()) return corpus;
  int subject = -1, message = -1, label = -1, date = -1;
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    const auto h = lower(rows[0][i]);
    const int idx = static_cast<int>(i);
    if (h == "subject") subject = idx;
    else if (h == "message" || h == "body") message = idx;
    else if (h == "label" || h == "spam/ham" || h == "spam_ham") label = idx;
    else if (h == "date") date = idx;
  }
  if (message < 0 || label < 0) throw ParseError("corpus CSV header needs message and label columns");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto get = [&](int idx) { return idx >= 0 && static_cast<std::size_t>(idx) < row.size() ? row[static_cast<std::size_t>(idx)] : std::string(); };
    if (static_cast<std::size_t>(std::max(message, label)) >= row.size())
      throw ParseError("corpus CSV record " + std::to_string(r) + " has too few fields");
    try {
      corpus.push_back(LabeledEmail{get(subject), get(message), parse_label(get(label)), get(date)});
    } catch (const ParseError& ex) {
      throw ParseError("corpus CSV record " + std::to_string(r) + ": " + ex.what());
    }
  }
  return corpus;
}

std::string serialize_corpus_jsonl(std::span<const LabeledEmail> corpus) {
  std::string out;
  for (const auto& e : corpus) {
    nlohmann::ordered_json j;
    j["subject"] = e.subject;
    j["message"] = e.message;
    j["label"] = e.spam ? "spam" : "ham";
    j["date"] = e.date;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace sentinel::forensics
