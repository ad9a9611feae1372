#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "firstreply/events.hpp"
#include "firstreply/mixed_model.hpp"

namespace firstreply {

// Counterfactual scenarios for reply content. `default_scenario` keeps reply
// features as observed; `nicer` zeroes attack and toxicity and clamps
// negative sentiment to zero.
enum class Scenario { default_scenario, nicer };
const char* to_string(Scenario scenario);

struct ReplyFeatureVector {
  double sentiment = 0.0;
  double toxicity = 0.0;
  double attack = 0.0;
};

ReplyFeatureVector counterfactual_transform(const ReplyFeatureVector& reply);
ReplyFeatureVector apply_scenario(const ReplyFeatureVector& reply, Scenario scenario);

// Per-event engagement probability under a scenario. Untreated events ignore
// reply features entirely, so their probability is scenario-invariant.
double engagement_probability(const EngagementModel& model, const FirstPostEvent& event,
                              Scenario scenario);

// The kind-specific models one community's simulation needs.
struct KindModels {
  const EngagementModel* comment = nullptr;
  const EngagementModel* submission = nullptr;
  const EngagementModel& for_kind(PostKind kind) const;
};

struct GrowthPoint {
  Seconds timestamp = 0;
  int64_t cumulative = 0;
};

struct GrowthCurve {
  std::string community;
  Scenario scenario = Scenario::default_scenario;
  std::vector<GrowthPoint> points;  // one per event, counts non-decreasing
  uint64_t seed = 0;
  int64_t final_count() const { return points.empty() ? 0 : points.back().cumulative; }
};

// Bernoulli growth simulation over one community's events (sorted by first
// post time, ties by user). The per-user uniform comes from a counter-based
// draw keyed by (seed, community, user), so the same draw is reused across
// scenarios: with shared uniforms, pointwise probability dominance becomes
// pathwise dominance of the curves.
GrowthCurve simulate_growth(const KindModels& models, std::vector<FirstPostEvent> events,
                            Scenario scenario, uint64_t seed);

// 100 * (final_nicer - final_default) / final_default; nullopt when the
// default scenario produced no engaged users.
std::optional<double> percent_increase(const GrowthCurve& default_curve,
                                       const GrowthCurve& nicer_curve);

}  // namespace firstreply
