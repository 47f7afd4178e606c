#include "sentinel/forensics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Sparse>
#include <json.hpp>

#include "sentinel/error.hpp"

namespace sentinel::forensics {

namespace {

bool is_token_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }
bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::set<std::string> parse_word_list(std::string_view text) {
  std::set<std::string> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
               line.end());
    std::transform(line.begin(), line.end(), line.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!line.empty()) words.insert(line);
  }
  return words;
}

std::size_t count_in(const std::set<std::string>& words, const std::vector<Sentence>& sentences) {
  std::size_t hits = 0;
  for (const auto& s : sentences)
    for (const auto& t : s) hits += words.count(t);
  return hits;
}

std::vector<std::string> flatten(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

std::vector<Sentence> tokenize(std::string_view text) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) current.push_back(std::move(token));
    token.clear();
  };
  auto flush_sentence = [&] {
    flush_token();
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      token.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (is_sentence_end(ch)) {
      flush_sentence();
    } else {
      flush_token();
    }
  }
  flush_sentence();
  return sentences;
}

TextStats text_stats(const std::vector<Sentence>& sentences) {
  TextStats st;
  st.sentences = sentences.size();
  if (sentences.empty()) return st;
  std::set<std::string_view> types;
  for (const auto& s : sentences) {
    st.tokens += s.size();
    for (const auto& t : s) types.insert(t);
  }
  const double n = static_cast<double>(st.sentences);
  st.mean_sentence_length = static_cast<double>(st.tokens) / n;
  double ss = 0.0;
  for (const auto& s : sentences) {
    const double d = static_cast<double>(s.size()) - st.mean_sentence_length;
    ss += d * d;
  }
  st.sentence_length_variance = ss / n;
  st.lexical_richness = static_cast<double>(types.size()) / static_cast<double>(st.tokens);
  return st;
}

// ------------------------------------------------------------- keywords --

const KeywordLists& KeywordLists::defaults() {
  static const KeywordLists lists{
      {"confidential", "proprietary", "payroll", "salary", "salaries", "ssn", "password", "passwords",
       "credentials", "patient", "records", "merger", "acquisition", "restricted", "classified", "secret",
       "banking", "routing", "customer_list", "source_code"},
      {"urgent", "urgently", "immediately", "asap", "verify", "verification", "suspended", "suspend", "expire",
       "expires", "expired", "overdue", "final", "warning", "click", "limited", "prize", "winner", "wire",
       "unusual", "locked"},
  };
  return lists;
}

KeywordLists KeywordLists::load(const std::string& sensitive_path, const std::string& urgent_path) {
  auto read = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open keyword list '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  return KeywordLists{parse_word_list(read(sensitive_path)), parse_word_list(read(urgent_path))};
}

std::size_t KeywordLists::urgent_hits(const std::vector<Sentence>& s) const { return count_in(urgent, s); }
std::size_t KeywordLists::sensitive_hits(const std::vector<Sentence>& s) const { return count_in(sensitive, s); }
std::size_t KeywordLists::total_hits(const std::vector<Sentence>& s) const {
  return urgent_hits(s) + sensitive_hits(s);
}

std::size_t count_entities(const std::vector<Sentence>& sentences) {
  static const std::set<std::string> org_suffixes{"inc", "corp", "llc", "ltd", "plc", "gmbh", "bank"};
  std::size_t n = 0;
  for (const auto& s : sentences) {
    for (const auto& t : s) {
      const bool has_digit = std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
      const bool has_alpha = std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isalpha(c); });
      if ((has_digit && has_alpha) || org_suffixes.count(t) || (has_digit && !has_alpha && t.size() >= 3)) ++n;
    }
  }
  return n;
}

// -------------------------------------------------------------- profile --

double StyleProfile::mean_sentence_length() const {
  if (recent_.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : recent_) s += r.mean_sentence_length;
  return s / static_cast<double>(recent_.size());
}

double StyleProfile::sentence_length_variance() const {
  if (recent_.empty()) return 0.0;
  const double m = mean_sentence_length();
  double s = 0.0;
  for (const auto& r : recent_) s += (r.mean_sentence_length - m) * (r.mean_sentence_length - m);
  return s / static_cast<double>(recent_.size());
}

double StyleProfile::mean_lexical_richness() const {
  if (recent_.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : recent_) s += r.lexical_richness;
  return s / static_cast<double>(recent_.size());
}

double StyleProfile::lexical_richness_variance() const {
  if (recent_.empty()) return 0.0;
  const double m = mean_lexical_richness();
  double s = 0.0;
  for (const auto& r : recent_) s += (r.lexical_richness - m) * (r.lexical_richness - m);
  return s / static_cast<double>(recent_.size());
}

void StyleProfile::push(const TextStats& stats) {
  ++email_count_;
  recent_.push_back(stats);
  while (recent_.size() > capacity_) recent_.pop_front();
}

StyleProfile update_profile(StyleProfile profile, std::string_view body) {
  profile.push(text_stats(tokenize(body)));
  return profile;
}

// ------------------------------------------------------------ features --

std::string_view to_string(ClassifierFamily f) {
  return f == ClassifierFamily::multinomial ? "multinomial" : "linear";
}

void Vocabulary::rebuild_index() {
  index.clear();
  for (std::size_t i = 0; i < terms.size(); ++i) index.emplace(terms[i], i);
}

namespace {

constexpr std::size_t kExtraFeatures = 3;

struct DocCounts {
  std::vector<std::pair<std::size_t, double>> counts;  // vocab index -> count
};

DocCounts count_terms(const Vocabulary& vocab, const std::vector<std::string>& tokens) {
  std::map<std::size_t, double> m;
  for (const auto& t : tokens)
    if (auto it = vocab.index.find(t); it != vocab.index.end()) m[it->second] += 1.0;
  return DocCounts{{m.begin(), m.end()}};
}

/// TF-IDF (l2-normalised) followed by the keyword/entity features.
std::vector<std::pair<std::size_t, double>> linear_row(const Vocabulary& vocab,
                                                       const std::vector<Sentence>& sentences) {
  const auto tokens = flatten(sentences);
  auto row = count_terms(vocab, tokens).counts;
  double norm = 0.0;
  for (auto& [i, v] : row) {
    v *= vocab.idf[i];
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm > 0)
    for (auto& [i, v] : row) v /= norm;
  const auto& kw = KeywordLists::defaults();
  const std::size_t base = vocab.size();
  row.emplace_back(base, std::log1p(static_cast<double>(kw.urgent_hits(sentences))));
  row.emplace_back(base + 1, std::log1p(static_cast<double>(kw.sensitive_hits(sentences))));
  row.emplace_back(base + 2, std::log1p(static_cast<double>(count_entities(sentences))));
  return row;
}

double multinomial_probability(const MultinomialParams& nb, const Vocabulary& vocab,
                               const std::vector<std::string>& tokens) {
  double ls = nb.log_prior_spam;
  double lh = nb.log_prior_ham;
  for (const auto& [i, c] : count_terms(vocab, tokens).counts) {
    ls += c * nb.log_likelihood_spam[i];
    lh += c * nb.log_likelihood_ham[i];
  }
  return sigmoid(ls - lh);
}

double linear_probability(const LinearParams& lr, const Vocabulary& vocab, const std::vector<Sentence>& sentences) {
  double z = lr.bias;
  for (const auto& [i, v] : linear_row(vocab, sentences)) z += lr.weights[static_cast<Eigen::Index>(i)] * v;
  return sigmoid(z);
}

}  // namespace

double PretrainedModel::probability(ClassifierFamily family, const std::vector<Sentence>& sentences) const {
  if (family == ClassifierFamily::multinomial)
    return multinomial_probability(multinomial, vocabulary, flatten(sentences));
  return linear_probability(linear, vocabulary, sentences);
}

double PretrainedModel::phishing_probability(const std::vector<Sentence>& sentences) const {
  return probability(selected_family, sentences);
}

bool PretrainedModel::operator==(const PretrainedModel& o) const {
  return vocabulary.terms == o.vocabulary.terms && vocabulary.idf == o.vocabulary.idf &&
         multinomial.alpha == o.multinomial.alpha && multinomial.log_prior_spam == o.multinomial.log_prior_spam &&
         multinomial.log_prior_ham == o.multinomial.log_prior_ham &&
         multinomial.log_likelihood_spam == o.multinomial.log_likelihood_spam &&
         multinomial.log_likelihood_ham == o.multinomial.log_likelihood_ham && linear.bias == o.linear.bias &&
         linear.weights.size() == o.linear.weights.size() && linear.weights == o.linear.weights &&
         selected_family == o.selected_family && baseline == o.baseline && holdout_accuracy == o.holdout_accuracy &&
         train_size == o.train_size && test_size == o.test_size;
}

// ------------------------------------------------------------ training --

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, std::size_t cap) {
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    std::set<std::string_view> seen(d.begin(), d.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > cap) ranked.resize(cap);
  std::sort(ranked.begin(), ranked.end());
  Vocabulary v;
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, f] : ranked) {
    v.terms.push_back(term);
    v.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(f))) + 1.0);
  }
  v.rebuild_index();
  return v;
}

MultinomialParams fit_multinomial(const std::vector<std::vector<std::string>>& docs, const std::vector<bool>& spam,
                                  const Vocabulary& vocab, double alpha) {
  const std::size_t V = vocab.size();
  std::vector<double> cs(V, 0.0), ch(V, 0.0);
  double ns = 0, nh = 0, ts = 0, th = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto& target = spam[d] ? cs : ch;
    (spam[d] ? ns : nh) += 1.0;
    for (const auto& [i, c] : count_terms(vocab, docs[d]).counts) {
      target[i] += c;
      (spam[d] ? ts : th) += c;
    }
  }
  MultinomialParams p;
  p.alpha = alpha;
  p.log_prior_spam = std::log(ns / (ns + nh));
  p.log_prior_ham = std::log(nh / (ns + nh));
  p.log_likelihood_spam.resize(V);
  p.log_likelihood_ham.resize(V);
  const double dv = alpha * static_cast<double>(V);
  for (std::size_t i = 0; i < V; ++i) {
    p.log_likelihood_spam[i] = std::log((cs[i] + alpha) / (ts + dv));
    p.log_likelihood_ham[i] = std::log((ch[i] + alpha) / (th + dv));
  }
  return p;
}

LinearParams fit_linear(const std::vector<std::vector<Sentence>>& docs, const std::vector<bool>& spam,
                        const Vocabulary& vocab, const TrainConfig& config) {
  using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  const auto n = static_cast<Eigen::Index>(docs.size());
  const auto dim = static_cast<Eigen::Index>(vocab.size() + kExtraFeatures);
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index r = 0; r < n; ++r)
    for (const auto& [i, v] : linear_row(vocab, docs[static_cast<std::size_t>(r)]))
      trips.emplace_back(r, static_cast<Eigen::Index>(i), v);
  SpMat X(n, dim);
  X.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) y[r] = spam[static_cast<std::size_t>(r)] ? 1.0 : 0.0;

  LinearParams lr;
  lr.weights = Eigen::VectorXd::Zero(dim);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < config.linear_epochs; ++epoch) {
    Eigen::VectorXd z = (X * lr.weights).array() + lr.bias;
    Eigen::VectorXd resid = z.unaryExpr([](double v) { return sigmoid(v); }) - y;
    Eigen::VectorXd grad = inv_n * (X.transpose() * resid) + config.linear_l2 * lr.weights;
    lr.weights -= config.linear_learning_rate * grad;
    lr.bias -= config.linear_learning_rate * inv_n * resid.sum();
  }
  return lr;
}

namespace {

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool ws = std::isspace(static_cast<unsigned char>(c));
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(v[i - 1], v[j]);
  }
}

StyleBaseline estimate_baseline(const std::vector<std::vector<Sentence>>& ham_docs) {
  StyleBaseline b;
  std::size_t tokens = 0, sentences = 0;
  std::vector<double> lens, rich;
  for (const auto& d : ham_docs) {
    const auto st = text_stats(d);
    if (st.tokens == 0) continue;
    tokens += st.tokens;
    sentences += st.sentences;
    lens.push_back(st.mean_sentence_length);
    rich.push_back(st.lexical_richness);
  }
  if (lens.empty()) return b;
  auto sd = [](const std::vector<double>& xs) {
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
  };
  b.mean_sentence_length = static_cast<double>(tokens) / static_cast<double>(sentences);
  b.lexical_richness = std::accumulate(rich.begin(), rich.end(), 0.0) / static_cast<double>(rich.size());
  b.sentence_length_sd = std::max(sd(lens), 0.5);
  b.lexical_richness_sd = std::max(sd(rich), 0.01);
  return b;
}

}  // namespace

PretrainedModel train_classifier(std::span<const LabeledEmail> corpus, const TrainConfig& config) {
  if (corpus.empty()) throw Error("training corpus is empty");
  std::vector<std::size_t> spam_idx, ham_idx;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (word_count(corpus[i].message) < config.min_words) continue;
    (corpus[i].spam ? spam_idx : ham_idx).push_back(i);
  }
  if (spam_idx.empty() || ham_idx.empty())
    throw Error("training corpus needs both spam and ham messages of at least " + std::to_string(config.min_words) +
                " words");

  Rng rng(config.seed);
  shuffle(spam_idx, rng);
  shuffle(ham_idx, rng);
  std::vector<std::size_t> train, test;
  for (auto* cls : {&spam_idx, &ham_idx}) {
    std::size_t n_test = static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(cls->size())));
    if (config.test_fraction > 0 && n_test == 0 && cls->size() >= 2) n_test = 1;
    n_test = std::min(n_test, cls->size() - 1);
    test.insert(test.end(), cls->begin(), cls->begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), cls->begin() + static_cast<std::ptrdiff_t>(n_test), cls->end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  std::vector<std::vector<Sentence>> train_sent;
  std::vector<std::vector<std::string>> train_tokens;
  std::vector<bool> train_y;
  std::vector<std::vector<Sentence>> ham_docs;
  for (auto i : train) {
    train_sent.push_back(tokenize(corpus[i].message));
    train_tokens.push_back(flatten(train_sent.back()));
    train_y.push_back(corpus[i].spam);
  }
  for (auto i : ham_idx) ham_docs.push_back(tokenize(corpus[i].message));

  PretrainedModel model;
  model.vocabulary = build_vocabulary(train_tokens, config.vocabulary_cap);
  model.multinomial = fit_multinomial(train_tokens, train_y, model.vocabulary, config.multinomial_alpha);
  model.linear = fit_linear(train_sent, train_y, model.vocabulary, config);
  model.baseline = estimate_baseline(ham_docs);
  model.train_size = train.size();
  model.test_size = test.size();

  for (auto family : {ClassifierFamily::multinomial, ClassifierFamily::linear}) {
    std::size_t correct = 0;
    for (auto i : test) {
      const bool predicted = model.probability(family, tokenize(corpus[i].message)) >= 0.5;
      correct += predicted == corpus[i].spam;
    }
    model.holdout_accuracy[family] = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  }
  // Ties keep the earlier family.
  model.selected_family = model.holdout_accuracy[ClassifierFamily::linear] >
                                  model.holdout_accuracy[ClassifierFamily::multinomial]
                              ? ClassifierFamily::linear
                              : ClassifierFamily::multinomial;
  return model;
}

PretrainedModel retrain_with_feedback(std::span<const LabeledEmail> corpus, std::span<const LabeledEmail> feedback,
                                      const TrainConfig& config) {
  std::vector<LabeledEmail> merged(corpus.begin(), corpus.end());
  merged.insert(merged.end(), feedback.begin(), feedback.end());
  return train_classifier(merged, config);
}

// --------------------------------------------------------- serialization --

namespace {
constexpr const char* kModelFormat = "sentinel-forensics-model";
}

std::string save_model(const PretrainedModel& m) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = PretrainedModel::kFormatVersion;
  j["selected_family"] = to_string(m.selected_family);
  nlohmann::ordered_json acc = nlohmann::ordered_json::object();
  for (const auto& [f, a] : m.holdout_accuracy) acc[std::string(to_string(f))] = a;
  j["holdout_accuracy"] = acc;
  j["train_size"] = m.train_size;
  j["test_size"] = m.test_size;
  j["baseline"] = {{"mean_sentence_length", m.baseline.mean_sentence_length},
                   {"lexical_richness", m.baseline.lexical_richness},
                   {"sentence_length_sd", m.baseline.sentence_length_sd},
                   {"lexical_richness_sd", m.baseline.lexical_richness_sd}};
  j["vocabulary"] = m.vocabulary.terms;
  j["idf"] = m.vocabulary.idf;
  j["multinomial"] = {{"alpha", m.multinomial.alpha},
                      {"log_prior_spam", m.multinomial.log_prior_spam},
                      {"log_prior_ham", m.multinomial.log_prior_ham},
                      {"log_likelihood_spam", m.multinomial.log_likelihood_spam},
                      {"log_likelihood_ham", m.multinomial.log_likelihood_ham}};
  std::vector<double> w(m.linear.weights.data(), m.linear.weights.data() + m.linear.weights.size());
  j["linear"] = {{"bias", m.linear.bias}, {"weights", w}};
  return j.dump() + "\n";
}

PretrainedModel load_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("model file is corrupt or truncated: ") + ex.what());
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw ParseError("not a forensics model file");
    const int version = j.at("version").get<int>();
    if (version != PretrainedModel::kFormatVersion)
      throw ParseError("unsupported model version " + std::to_string(version) + " (supported: " +
                       std::to_string(PretrainedModel::kFormatVersion) + ")");
    PretrainedModel m;
    const auto family = j.at("selected_family").get<std::string>();
    if (family == "multinomial")
      m.selected_family = ClassifierFamily::multinomial;
    else if (family == "linear")
      m.selected_family = ClassifierFamily::linear;
    else
      throw ParseError("unknown classifier family '" + family + "'");
    for (const auto& [k, v] : j.at("holdout_accuracy").items())
      m.holdout_accuracy[k == "linear" ? ClassifierFamily::linear : ClassifierFamily::multinomial] = v.get<double>();
    m.train_size = j.at("train_size").get<std::size_t>();
    m.test_size = j.at("test_size").get<std::size_t>();
    const auto& b = j.at("baseline");
    m.baseline = StyleBaseline{b.at("mean_sentence_length").get<double>(), b.at("lexical_richness").get<double>(),
                               b.at("sentence_length_sd").get<double>(), b.at("lexical_richness_sd").get<double>()};
    m.vocabulary.terms = j.at("vocabulary").get<std::vector<std::string>>();
    m.vocabulary.idf = j.at("idf").get<std::vector<double>>();
    m.vocabulary.rebuild_index();
    const auto& nb = j.at("multinomial");
    m.multinomial.alpha = nb.at("alpha").get<double>();
    m.multinomial.log_prior_spam = nb.at("log_prior_spam").get<double>();
    m.multinomial.log_prior_ham = nb.at("log_prior_ham").get<double>();
    m.multinomial.log_likelihood_spam = nb.at("log_likelihood_spam").get<std::vector<double>>();
    m.multinomial.log_likelihood_ham = nb.at("log_likelihood_ham").get<std::vector<double>>();
    const auto& lr = j.at("linear");
    m.linear.bias = lr.at("bias").get<double>();
    const auto w = lr.at("weights").get<std::vector<double>>();
    m.linear.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));

    const auto V = m.vocabulary.size();
    if (m.vocabulary.idf.size() != V || m.multinomial.log_likelihood_spam.size() != V ||
        m.multinomial.log_likelihood_ham.size() != V || w.size() != V + kExtraFeatures)
      throw ParseError("model arrays have inconsistent dimensions");
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("model file is missing fields: ") + ex.what());
  }
}

// ------------------------------------------------------------ analysis --

namespace {

EmailFeatures style_features(const std::vector<Sentence>& sentences, const StyleProfile& profile,
                             const StyleBaseline& baseline, const AnalyzerConfig& config) {
  EmailFeatures f;
  const auto st = text_stats(sentences);
  const double z_len = std::abs(st.mean_sentence_length - baseline.mean_sentence_length) / baseline.sentence_length_sd;
  const double z_rich = std::abs(st.lexical_richness - baseline.lexical_richness) / baseline.lexical_richness_sd;
  f.style_anomaly = std::sqrt(0.5 * (z_len * z_len + z_rich * z_rich));
  if (!profile.provisional()) {
    const double sl = std::sqrt(profile.sentence_length_variance()) + config.authorship_floor_length;
    const double sr = std::sqrt(profile.lexical_richness_variance()) + config.authorship_floor_richness;
    const double dl = (st.mean_sentence_length - profile.mean_sentence_length()) / sl;
    const double dr = (st.lexical_richness - profile.mean_lexical_richness()) / sr;
    f.authorship_inconsistency = 1.0 - std::exp(-0.5 * std::sqrt(0.5 * (dl * dl + dr * dr)));
  }
  f.ai_likeness = std::exp(-st.sentence_length_variance / config.tau_ai);
  f.urgency_hits = config.keywords.total_hits(sentences);
  return f;
}

}  // namespace

EmailFeatures analyze_email(std::string_view body, const StyleProfile& profile, const PretrainedModel& model,
                            const AnalyzerConfig& config) {
  if (!model.loaded()) throw StateError("forensics model is not loaded");
  const auto sentences = tokenize(body);
  if (sentences.empty()) return {};
  auto f = style_features(sentences, profile, model.baseline, config);
  f.phishing_prob = model.phishing_probability(sentences);
  return f;
}

EmailFeatures analyze_email_heuristic(std::string_view body, const StyleProfile& profile,
                                      const StyleBaseline& baseline, const AnalyzerConfig& config) {
  const auto sentences = tokenize(body);
  if (sentences.empty()) return {};
  auto f = style_features(sentences, profile, baseline, config);
  f.phishing_prob =
      sigmoid(config.heuristic_slope * static_cast<double>(f.urgency_hits) - config.heuristic_offset);
  return f;
}

EmailMonitor::EmailMonitor(const PretrainedModel* model, AnalyzerConfig config)
    : model_(model), config_(std::move(config)) {
  if (model_ && !model_->loaded()) throw StateError("forensics model is not loaded");
}

EmailFeatures EmailMonitor::observe(const ActorId& sender, std::string_view body) {
  auto [it, inserted] = profiles_.try_emplace(sender, StyleProfile(sender));
  auto features = model_ ? analyze_email(body, it->second, *model_, config_)
                         : analyze_email_heuristic(body, it->second, StyleBaseline{}, config_);
  it->second = update_profile(std::move(it->second), body);
  return features;
}

}  // namespace sentinel::forensics
