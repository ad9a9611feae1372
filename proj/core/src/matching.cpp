#include "firstreply/matching.hpp"

#include <algorithm>
#include <cmath>

#include "firstreply/errors.hpp"
#include "firstreply/rng.hpp"

namespace firstreply {

double mahalanobis(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const Eigen::MatrixXd& cov_inv) {
  if (x.size() != y.size() || cov_inv.rows() != x.size() || cov_inv.cols() != x.size()) {
    throw DataError("mahalanobis: dimension mismatch");
  }
  Eigen::VectorXd d = x - y;
  double q = d.dot(cov_inv * d);
  return std::sqrt(std::max(0.0, q));
}

std::vector<MatchFeature> features_for_kind(PostKind kind) {
  if (kind == PostKind::submission) {
    // nest_level is constant zero for submissions and would make the
    // covariance singular
    return {MatchFeature::account_age, MatchFeature::valence, MatchFeature::word_count};
  }
  return {MatchFeature::account_age, MatchFeature::nest_level, MatchFeature::valence,
          MatchFeature::word_count};
}

const char* to_string(MatchFeature f) {
  switch (f) {
    case MatchFeature::account_age: return "account_age";
    case MatchFeature::nest_level: return "nest_level";
    case MatchFeature::valence: return "valence";
    case MatchFeature::word_count: return "word_count";
  }
  return "?";
}

namespace {

double feature_value(const FirstPostEvent& ev, MatchFeature f) {
  switch (f) {
    case MatchFeature::account_age: return static_cast<double>(ev.account_age.value());
    case MatchFeature::nest_level: return static_cast<double>(ev.nest_level);
    case MatchFeature::valence: return ev.valence;
    case MatchFeature::word_count: return static_cast<double>(ev.word_count);
  }
  return 0.0;
}

Eigen::MatrixXd feature_matrix(const std::vector<FirstPostEvent>& events,
                               const std::vector<size_t>& idx,
                               const std::vector<MatchFeature>& features) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()),
                    static_cast<Eigen::Index>(features.size()));
  for (size_t r = 0; r < idx.size(); ++r) {
    for (size_t c = 0; c < features.size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          feature_value(events[idx[r]], features[c]);
    }
  }
  return m;
}

// Sample covariance with ridge 1e-6 * trace/d, shared by user- and
// community-level matching.
Eigen::MatrixXd ridged_covariance(const Eigen::MatrixXd& pooled) {
  const auto n = pooled.rows();
  const auto d = pooled.cols();
  Eigen::RowVectorXd mean = pooled.colwise().mean();
  Eigen::MatrixXd centered = pooled.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  double ridge = 1e-6 * cov.trace() / static_cast<double>(d);
  cov.diagonal().array() += ridge;
  return cov;
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& cov, const char* context) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw ConvergenceError(std::string(context) + ": covariance singular after ridge");
  }
  Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
  return llt.solve(identity);
}

}  // namespace

MatchingPool build_matching_pool(const std::vector<FirstPostEvent>& events, PostKind kind) {
  MatchingPool pool;
  for (const auto& ev : events) {
    if (ev.kind != kind) continue;
    if (!ev.has_all_covariates()) {
      ++pool.excluded_missing_covariates;
      continue;
    }
    (ev.treated ? pool.treated : pool.control).push_back(ev);
  }
  return pool;
}

MatchedPairs match_users(const std::vector<FirstPostEvent>& treated,
                         const std::vector<FirstPostEvent>& control,
                         const std::vector<MatchFeature>& features,
                         int64_t pool_cap, uint64_t seed) {
  if (treated.size() < 2 || control.size() < 2) {
    throw DataError("match_users: need at least 2 events in each arm (treated=" +
                    std::to_string(treated.size()) +
                    ", control=" + std::to_string(control.size()) + ")");
  }
  if (pool_cap < 2) throw DataError("match_users: pool_cap too small");

  Rng treated_rng = Rng::keyed(seed, "match-subsample-treated");
  Rng control_rng = Rng::keyed(seed, "match-subsample-control");
  std::vector<size_t> treated_idx =
      sample_indices(treated_rng, treated.size(), static_cast<size_t>(pool_cap));
  std::vector<size_t> control_idx =
      sample_indices(control_rng, control.size(), static_cast<size_t>(pool_cap));

  Eigen::MatrixXd t_feat = feature_matrix(treated, treated_idx, features);
  Eigen::MatrixXd c_feat = feature_matrix(control, control_idx, features);
  Eigen::MatrixXd pooled(t_feat.rows() + c_feat.rows(), t_feat.cols());
  pooled << t_feat, c_feat;

  MatchedPairs result;
  result.covariance = ridged_covariance(pooled);
  for (MatchFeature f : features) result.features.emplace_back(to_string(f));
  result.treated_pool_size = treated_idx.size();
  result.control_pool_size = control_idx.size();
  Eigen::MatrixXd cov_inv = invert_spd(result.covariance, "match_users");

  std::vector<size_t> order(treated_idx.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng order_rng = Rng::keyed(seed, "match-treated-order");
  order_rng.shuffle(order);

  std::vector<bool> control_used(control_idx.size(), false);
  size_t controls_left = control_idx.size();

  for (size_t oi : order) {
    if (controls_left == 0) {
      result.unmatched_treated.push_back(treated_idx[oi]);
      continue;
    }
    Eigen::VectorXd x = t_feat.row(static_cast<Eigen::Index>(oi));
    double best_dist = 0.0;
    size_t best = SIZE_MAX;
    for (size_t ci = 0; ci < control_idx.size(); ++ci) {
      if (control_used[ci]) continue;
      Eigen::VectorXd y = c_feat.row(static_cast<Eigen::Index>(ci));
      double dist = mahalanobis(x, y, cov_inv);
      if (best == SIZE_MAX || dist < best_dist ||
          (dist == best_dist &&
           control[control_idx[ci]].user < control[control_idx[best]].user)) {
        best_dist = dist;
        best = ci;
      }
    }
    control_used[best] = true;
    --controls_left;
    result.pairs.push_back({treated_idx[oi], control_idx[best], best_dist});
  }
  std::sort(result.unmatched_treated.begin(), result.unmatched_treated.end());
  return result;
}

std::vector<CommunityPair> match_communities(std::vector<CommunityProfile> hateful,
                                             std::vector<CommunityProfile> candidates) {
  if (hateful.empty()) throw DataError("match_communities: no hateful communities");
  if (candidates.size() < hateful.size()) {
    throw DataError("match_communities: fewer candidate communities (" +
                    std::to_string(candidates.size()) + ") than hateful ones (" +
                    std::to_string(hateful.size()) + ")");
  }

  auto profile_features = [](const CommunityProfile& p) {
    Eigen::VectorXd v(2);
    v << std::log10(static_cast<double>(p.size)),
        std::log10(1.0 + static_cast<double>(p.p90_return));
    return v;
  };

  Eigen::MatrixXd pooled(hateful.size() + candidates.size(), 2);
  for (size_t i = 0; i < hateful.size(); ++i) {
    pooled.row(static_cast<Eigen::Index>(i)) = profile_features(hateful[i]).transpose();
  }
  for (size_t i = 0; i < candidates.size(); ++i) {
    pooled.row(static_cast<Eigen::Index>(hateful.size() + i)) =
        profile_features(candidates[i]).transpose();
  }
  Eigen::MatrixXd cov = ridged_covariance(pooled);
  Eigen::MatrixXd cov_inv = invert_spd(cov, "match_communities");

  std::sort(hateful.begin(), hateful.end(), [](const auto& a, const auto& b) {
    if (a.size != b.size) return a.size > b.size;  // biggest first
    return a.community < b.community;
  });

  std::vector<bool> used(candidates.size(), false);
  std::vector<CommunityPair> pairs;
  for (const auto& h : hateful) {
    Eigen::VectorXd x = profile_features(h);
    double best_dist = 0.0;
    size_t best = SIZE_MAX;
    for (size_t ci = 0; ci < candidates.size(); ++ci) {
      if (used[ci]) continue;
      double dist = mahalanobis(x, profile_features(candidates[ci]), cov_inv);
      if (best == SIZE_MAX || dist < best_dist ||
          (dist == best_dist && candidates[ci].community < candidates[best].community)) {
        best_dist = dist;
        best = ci;
      }
    }
    used[best] = true;
    pairs.push_back({h.community, candidates[best].community, best_dist});
  }
  return pairs;
}

}  // namespace firstreply
