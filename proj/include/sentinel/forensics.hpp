#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "sentinel/events.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::forensics {

using Sentence = std::vector<std::string>;

/// Rule-based splitter: sentences end at '.', '!' or '?'; tokens are maximal
/// runs of ASCII alphanumerics (plus '_' and any non-ASCII byte), lowercased.
/// Empty sentences are dropped.
std::vector<Sentence> tokenize(std::string_view text);

/// Sentence-length / vocabulary statistics of one body.
struct TextStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  double mean_sentence_length = 0.0;
  double sentence_length_variance = 0.0;  // population variance
  double lexical_richness = 0.0;          // type-token ratio
};

TextStats text_stats(const std::vector<Sentence>& sentences);

struct KeywordLists {
  std::set<std::string> sensitive;
  std::set<std::string> urgent;

  /// Built-in lists; identical to data/keywords_{sensitive,urgent}.txt.
  static const KeywordLists& defaults();
  /// One lowercase keyword per line, '#' comments allowed.
  static KeywordLists load(const std::string& sensitive_path, const std::string& urgent_path);

  std::size_t urgent_hits(const std::vector<Sentence>& sentences) const;
  std::size_t sensitive_hits(const std::vector<Sentence>& sentences) const;
  /// Matches against either list.
  std::size_t total_hits(const std::vector<Sentence>& sentences) const;

  bool operator==(const KeywordLists&) const = default;
};

/// Dictionary/pattern entity tagger: resource identifiers (letters mixed
/// with digits), organisation suffixes and currency-like amounts.
std::size_t count_entities(const std::vector<Sentence>& sentences);

struct StyleBaseline {
  double mean_sentence_length = 14.60;
  double lexical_richness = 0.633;
  double sentence_length_sd = 4.0;
  double lexical_richness_sd = 0.08;

  bool operator==(const StyleBaseline&) const = default;
};

/// Rolling per-actor style statistics over the last `capacity` emails.
class StyleProfile {
public:
  static constexpr std::size_t kMinimumEmails = 5;

  explicit StyleProfile(ActorId actor = {}, std::size_t capacity = 20)
      : actor_id_(std::move(actor)), capacity_(capacity) {}

  const ActorId& actor_id() const { return actor_id_; }
  std::size_t email_count() const { return email_count_; }
  std::size_t capacity() const { return capacity_; }
  bool provisional() const { return email_count_ < kMinimumEmails; }

  double mean_sentence_length() const;
  double sentence_length_variance() const;
  double mean_lexical_richness() const;
  double lexical_richness_variance() const;

  /// Records one email's statistics; used by update_profile.
  void push(const TextStats& stats);

private:
  ActorId actor_id_;
  std::size_t capacity_;
  std::size_t email_count_ = 0;
  std::deque<TextStats> recent_;
};

StyleProfile update_profile(StyleProfile profile, std::string_view body);

struct EmailFeatures {
  double phishing_prob = 0.0;
  std::size_t urgency_hits = 0;
  double style_anomaly = 0.0;
  double authorship_inconsistency = 0.0;
  double ai_likeness = 0.0;

  bool operator==(const EmailFeatures&) const = default;
};

enum class ClassifierFamily { multinomial, linear };
std::string_view to_string(ClassifierFamily f);

struct Vocabulary {
  std::vector<std::string> terms;
  std::vector<double> idf;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return terms.size(); }
  void rebuild_index();
};

/// Multinomial likelihood model with additive smoothing over term counts.
struct MultinomialParams {
  double alpha = 1.0;
  double log_prior_spam = 0.0;
  double log_prior_ham = 0.0;
  std::vector<double> log_likelihood_spam;
  std::vector<double> log_likelihood_ham;
};

/// L2-regularised logistic model over l2-normalised TF-IDF rows plus the
/// keyword/entity features (log1p of urgent, sensitive and entity counts).
struct LinearParams {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

struct PretrainedModel {
  static constexpr int kFormatVersion = 1;

  Vocabulary vocabulary;
  MultinomialParams multinomial;
  LinearParams linear;
  ClassifierFamily selected_family = ClassifierFamily::multinomial;
  StyleBaseline baseline;
  std::map<ClassifierFamily, double> holdout_accuracy;
  std::size_t train_size = 0;
  std::size_t test_size = 0;

  bool loaded() const { return !vocabulary.terms.empty(); }
  /// Spam/phishing probability under the selected family.
  double phishing_probability(const std::vector<Sentence>& sentences) const;
  double probability(ClassifierFamily family, const std::vector<Sentence>& sentences) const;

  bool operator==(const PretrainedModel& other) const;
};

struct LabeledEmail {
  std::string subject;
  std::string message;
  bool spam = false;
  std::string date;

  bool operator==(const LabeledEmail&) const = default;
};

struct TrainConfig {
  std::size_t vocabulary_cap = 8000;
  double test_fraction = 0.15;
  std::uint64_t seed = 7;
  /// Messages with fewer words are dropped before the split.
  std::size_t min_words = 30;
  double multinomial_alpha = 1.0;
  double linear_learning_rate = 0.5;
  double linear_l2 = 1e-4;
  int linear_epochs = 300;
};

PretrainedModel train_classifier(std::span<const LabeledEmail> corpus, const TrainConfig& config = {});

// Building blocks of train_classifier, exposed for oracle tests.

/// Top-`cap` terms by document frequency (ties by term), stored sorted,
/// with smoothed idf = ln((1+N)/(1+df)) + 1.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, std::size_t cap);
MultinomialParams fit_multinomial(const std::vector<std::vector<std::string>>& docs, const std::vector<bool>& spam,
                                  const Vocabulary& vocab, double alpha);
LinearParams fit_linear(const std::vector<std::vector<Sentence>>& docs, const std::vector<bool>& spam,
                        const Vocabulary& vocab, const TrainConfig& config);

/// Analyst-labelled bodies appended to the training corpus before retraining.
PretrainedModel retrain_with_feedback(std::span<const LabeledEmail> corpus, std::span<const LabeledEmail> feedback,
                                      const TrainConfig& config = {});

std::string save_model(const PretrainedModel& model);
/// Throws ParseError for truncated/corrupt payloads and unsupported versions.
PretrainedModel load_model(std::string_view text);

struct AnalyzerConfig {
  /// ai_likeness = exp(-var(sentence lengths) / tau_ai).
  double tau_ai = 8.0;
  /// Keyword-only phishing estimate used when no model is loaded:
  /// sigmoid(slope * keyword_hits - offset).
  double heuristic_slope = 1.2;
  double heuristic_offset = 4.2;
  double authorship_floor_length = 1.0;
  double authorship_floor_richness = 0.03;
  KeywordLists keywords = KeywordLists::defaults();
};

/// Full pipeline with a trained model. Throws StateError if the model is
/// not loaded. Empty bodies yield all-zero features.
EmailFeatures analyze_email(std::string_view body, const StyleProfile& profile, const PretrainedModel& model,
                            const AnalyzerConfig& config = {});

/// Same feature vector without a trained model: keyword-driven phishing
/// estimate and the given (default) style baseline.
EmailFeatures analyze_email_heuristic(std::string_view body, const StyleProfile& profile,
                                      const StyleBaseline& baseline = {}, const AnalyzerConfig& config = {});

/// Per-actor wrapper used by the SIEM: owns style profiles and routes to
/// the model or the heuristic.
class EmailMonitor {
public:
  EmailMonitor(const PretrainedModel* model, AnalyzerConfig config);

  /// Scores the body against the sender's current profile, then folds the
  /// body into that profile.
  EmailFeatures observe(const ActorId& sender, std::string_view body);
  bool uses_model() const { return model_ != nullptr; }

private:
  const PretrainedModel* model_;
  AnalyzerConfig config_;
  std::map<ActorId, StyleProfile> profiles_;
};

// ---------------------------------------------------------------- corpora --

enum class SuspiciousCategory { credential, invoice, attachment, spoofing, survey, security_alert, info_request, leak };

/// One business-prose sentence with exactly `length` tokens and no keywords.
std::string business_sentence(Rng& rng, int length);
/// A suspicious message (≥1 urgent keyword) of the given category.
std::string suspicious_body(Rng& rng, SuspiciousCategory category);

/// Template ham/spam corpus, deterministic per seed, spam spread over all
/// suspicious categories. Throws ConfigError when either count is zero.
std::vector<LabeledEmail> generate_synthetic_corpus(std::uint64_t seed, std::size_t n_ham, std::size_t n_spam);

/// Accepts CSV (header with subject, message, label|spam/ham, date; any
/// column order, case-insensitive) or JSONL with the same field names.
std::vector<LabeledEmail> parse_corpus(std::string_view text);
std::string serialize_corpus_jsonl(std::span<const LabeledEmail> corpus);

}  // namespace sentinel::forensics
