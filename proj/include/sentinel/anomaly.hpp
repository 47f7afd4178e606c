#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sentinel/events.hpp"

namespace sentinel::anomaly {

/// Window aggregates for one actor. The enhanced form appends burstiness,
/// after-hours login fraction and event velocity.
struct BehaviorVector {
  double logins = 0;
  double after_hours_logins = 0;
  double db_queries = 0;
  double sensitive_accesses = 0;
  double exports = 0;
  double export_volume = 0;
  double external_emails = 0;
  double burstiness = 0;
  double after_hours_fraction = 0;
  double velocity = 0;

  static constexpr int kBaseDims = 7;
  static constexpr int kEnhancedDims = 10;

  Eigen::VectorXd to_vector(bool enhanced) const;
};

/// Aggregates `window` (one actor's events in [now - width + 1, now]).
BehaviorVector behavior_vector(std::span<const Event> window, Step now, int width);

/// Average unsuccessful-search path length in a BST of n points.
double average_path_length(std::size_t n);

struct IsoTree {
  struct Node {
    int feature = -1;  // -1 for leaves
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::size_t size = 0;  // training points reaching a leaf
    bool operator==(const Node&) const = default;
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  /// Depth of the leaf reached plus c(leaf size).
  double path_length(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  bool operator==(const IsoTree&) const = default;
};

struct ForestParams {
  std::size_t subsample = 64;
  std::size_t trees = 50;
  std::uint64_t seed = 1;
};

/// Isolation forest over rows of a data matrix. Subsamples are drawn
/// without replacement; splits pick a uniformly random non-constant
/// feature and a uniform split value in that feature's node range.
class IsolationForest {
 public:
  IsolationForest() = default;

  /// Throws ConfigError on an empty matrix or zero trees.
  static IsolationForest fit(const Eigen::MatrixXd& rows, const ForestParams& params);

  bool trained() const { return !trees_.empty(); }
  std::size_t sample_size() const { return sample_size_; }
  const std::vector<IsoTree>& trees() const { return trees_; }

  double mean_path_length(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// 2^(-E[h(x)] / c(psi)) in (0, 1]. Throws StateError when untrained.
  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  std::string to_json() const;
  static IsolationForest from_json(const std::string& text);
  bool operator==(const IsolationForest&) const = default;

 private:
  std::vector<IsoTree> trees_;
  std::size_t sample_size_ = 0;
  int dims_ = 0;
};

struct AdviceParams {
  double weight = 4.0;
  double score_floor = 0.55;
  double band = 0.8;
};

/// ML advice: nudges risk inside [band * theta, theta) by at most
/// (1 - band) * theta; outside the band risk is returned unchanged.
double ml_advice(double anomaly_score, double risk, double theta_confirm, const AdviceParams& params = {});

struct TrainingSample {
  ActorId actor_id;
  Role role = Role::staff;
  bool regular = true;
  Eigen::VectorXd features;
};

/// One forest per role, or per (role, regularity) in enhanced mode. Actors
/// in `excluded` never contribute training rows.
class RoleAnomalyModel {
 public:
  RoleAnomalyModel() = default;

  static RoleAnomalyModel fit(std::span<const TrainingSample> samples, const std::set<ActorId>& excluded,
                              const ForestParams& params, bool split_by_regularity);

  bool enhanced() const { return enhanced_; }
  /// nullopt when no forest covers the role.
  std::optional<double> score(Role role, bool regular, const Eigen::VectorXd& x) const;
  const std::set<ActorId>& training_actors(Role role, bool regular) const;

 private:
  struct Key {
    Role role;
    bool regular;
    auto operator<=>(const Key&) const = default;
  };
  const IsolationForest* forest_for(Role role, bool regular) const;

  bool enhanced_ = false;
  std::map<Key, IsolationForest> forests_;
  std::map<Key, std::set<ActorId>> members_;
};

}  // namespace sentinel::anomaly
