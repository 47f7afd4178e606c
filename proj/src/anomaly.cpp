#include "sentinel/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <nlohmann/json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::anomaly {

namespace {

constexpr int kForestFormat = 1;

struct TreeBuilder {
  const Eigen::MatrixXd& data;
  Rng& rng;
  int depth_limit;
  IsoTree tree;

  int build(std::vector<Eigen::Index> rows, int depth) {
    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::vector<int> candidates;
    std::vector<std::pair<double, double>> ranges(static_cast<std::size_t>(data.cols()));
    for (Eigen::Index f = 0; f < data.cols(); ++f) {
      double lo = data(rows.front(), f), hi = lo;
      for (auto r : rows) {
        lo = std::min(lo, data(r, f));
        hi = std::max(hi, data(r, f));
      }
      ranges[static_cast<std::size_t>(f)] = {lo, hi};
      if (hi > lo) candidates.push_back(static_cast<int>(f));
    }
    if (depth >= depth_limit || rows.size() <= 1 || candidates.empty()) {
      tree.nodes[static_cast<std::size_t>(id)].size = rows.size();
      return id;
    }
    int f = candidates[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
    auto [lo, hi] = ranges[static_cast<std::size_t>(f)];
    double split = rng.uniform(lo, hi);
    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (data(r, f) < split ? left : right).push_back(r);
    int l = build(std::move(left), depth + 1);
    int rr = build(std::move(right), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = f;
    node.split = split;
    node.left = l;
    node.right = rr;
    return id;
  }
};

}  // namespace

Eigen::VectorXd BehaviorVector::to_vector(bool enhanced) const {
  Eigen::VectorXd v(enhanced ? kEnhancedDims : kBaseDims);
  v << logins, after_hours_logins, db_queries, sensitive_accesses, exports, export_volume, external_emails;
  if (enhanced) v.tail(3) << burstiness, after_hours_fraction, velocity;
  return v;
}

BehaviorVector behavior_vector(std::span<const Event> window, Step now, int width) {
  BehaviorVector b;
  std::map<Step, int> per_step;
  for (const auto& e : window) {
    if (e.step > now || e.step <= now - width) continue;
    ++per_step[e.step];
    switch (e.kind) {
      case ActionKind::login:
        ++b.logins;
        if (e.as_login()->context == LoginContext::after_hours) ++b.after_hours_logins;
        break;
      case ActionKind::db_query:
        ++b.db_queries;
        break;
      case ActionKind::file_access:
        break;
      case ActionKind::file_export:
        ++b.exports;
        b.export_volume += static_cast<double>(e.as_export()->volume);
        break;
      case ActionKind::email_send:
        if (e.is_external_email()) ++b.external_emails;
        break;
    }
    if (e.is_sensitive_access()) ++b.sensitive_accesses;
  }
  double total = 0.0, peak = 0.0;
  for (const auto& [_, n] : per_step) {
    total += n;
    peak = std::max(peak, static_cast<double>(n));
  }
  if (total > 0) b.burstiness = peak / (total / static_cast<double>(width));
  if (b.logins > 0) b.after_hours_fraction = b.after_hours_logins / b.logins;
  b.velocity = total / static_cast<double>(width);
  return b;
}

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  double harmonic = 0.0;
  for (std::size_t i = 1; i < n; ++i) harmonic += 1.0 / static_cast<double>(i);
  double nd = static_cast<double>(n);
  return 2.0 * harmonic - 2.0 * (nd - 1.0) / nd;
}

double IsoTree::path_length(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  int id = 0, depth = 0;
  while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    id = x(n.feature) < n.split ? n.left : n.right;
    ++depth;
  }
  return depth + average_path_length(nodes[static_cast<std::size_t>(id)].size);
}

IsolationForest IsolationForest::fit(const Eigen::MatrixXd& rows, const ForestParams& params) {
  if (rows.rows() == 0 || rows.cols() == 0) throw ConfigError("isolation forest needs a non-empty matrix");
  if (params.trees == 0 || params.subsample == 0) throw ConfigError("isolation forest needs trees and subsample > 0");
  IsolationForest forest;
  forest.dims_ = static_cast<int>(rows.cols());
  forest.sample_size_ = std::min<std::size_t>(params.subsample, static_cast<std::size_t>(rows.rows()));
  int limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(forest.sample_size_, 2)))));
  Rng rng(params.seed);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(rows.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  for (std::size_t t = 0; t < params.trees; ++t) {
    // partial Fisher-Yates: the first sample_size entries form the subsample
    for (std::size_t i = 0; i < forest.sample_size_; ++i) {
      auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                        static_cast<std::int64_t>(all.size()) - 1));
      std::swap(all[i], all[j]);
    }
    std::vector<Eigen::Index> sample(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(forest.sample_size_));
    TreeBuilder b{rows, rng, limit, {}};
    b.build(std::move(sample), 0);
    forest.trees_.push_back(std::move(b.tree));
  }
  return forest;
}

double IsolationForest::mean_path_length(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!trained()) throw StateError("isolation forest is not trained");
  if (x.size() != dims_) throw StateError("feature vector has " + std::to_string(x.size()) + " dims, forest expects " +
                                          std::to_string(dims_));
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.path_length(x);
  return sum / static_cast<double>(trees_.size());
}

double IsolationForest::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double h = mean_path_length(x);
  double c = average_path_length(sample_size_);
  if (c <= 0.0) return 0.5;
  return std::pow(2.0, -h / c);
}

std::string IsolationForest::to_json() const {
  nlohmann::json j;
  j["format"] = "sentinel-isolation-forest";
  j["version"] = kForestFormat;
  j["sample_size"] = sample_size_;
  j["dims"] = dims_;
  auto& trees = j["trees"] = nlohmann::json::array();
  for (const auto& t : trees_) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.split, n.left, n.right, n.size});
    trees.push_back(nodes);
  }
  return j.dump();
}

IsolationForest IsolationForest::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("isolation forest: ") + e.what());
  }
  if (j.value("format", "") != "sentinel-isolation-forest") throw ParseError("isolation forest: wrong format tag");
  if (j.value("version", 0) != kForestFormat)
    throw ParseError("isolation forest: unsupported version " + std::to_string(j.value("version", 0)));
  IsolationForest f;
  f.sample_size_ = j.at("sample_size").get<std::size_t>();
  f.dims_ = j.at("dims").get<int>();
  for (const auto& t : j.at("trees")) {
    IsoTree tree;
    for (const auto& n : t)
      tree.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(),
                            n[4].get<std::size_t>()});
    f.trees_.push_back(std::move(tree));
  }
  return f;
}

double ml_advice(double anomaly_score, double risk, double theta_confirm, const AdviceParams& params) {
  if (risk < params.band * theta_confirm || risk >= theta_confirm) return risk;
  double nudge = std::max(0.0, params.weight * (anomaly_score - params.score_floor));
  return risk + std::min(nudge, (1.0 - params.band) * theta_confirm);
}

RoleAnomalyModel RoleAnomalyModel::fit(std::span<const TrainingSample> samples, const std::set<ActorId>& excluded,
                                       const ForestParams& params, bool split_by_regularity) {
  RoleAnomalyModel model;
  model.enhanced_ = split_by_regularity;
  std::map<Key, std::vector<const TrainingSample*>> groups;
  for (const auto& s : samples) {
    if (excluded.contains(s.actor_id)) continue;
    groups[{s.role, split_by_regularity ? s.regular : true}].push_back(&s);
  }
  for (const auto& [key, rows] : groups) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.front()->features.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m.row(static_cast<Eigen::Index>(i)) = rows[i]->features.transpose();
      model.members_[key].insert(rows[i]->actor_id);
    }
    ForestParams p = params;
    p.seed = Rng::substream(params.seed, std::string(to_string(key.role)) + (key.regular ? "/regular" : "/irregular"))
                 .next();
    model.forests_.emplace(key, IsolationForest::fit(m, p));
  }
  return model;
}

const IsolationForest* RoleAnomalyModel::forest_for(Role role, bool regular) const {
  if (!enhanced_) regular = true;
  if (auto it = forests_.find({role, regular}); it != forests_.end()) return &it->second;
  if (auto it = forests_.find({role, !regular}); it != forests_.end()) return &it->second;
  return nullptr;
}

std::optional<double> RoleAnomalyModel::score(Role role, bool regular, const Eigen::VectorXd& x) const {
  const auto* f = forest_for(role, regular);
  if (!f) return std::nullopt;
  return f->score(x);
}

const std::set<ActorId>& RoleAnomalyModel::training_actors(Role role, bool regular) const {
  static const std::set<ActorId> none;
  if (!enhanced_) regular = true;
  auto it = members_.find({role, regular});
  return it == members_.end() ? none : it->second;
}

}  // namespace sentinel::anomaly
