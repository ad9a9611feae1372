#include "firstreply/simulate.hpp"

#include <algorithm>

#include "firstreply/errors.hpp"
#include "firstreply/rng.hpp"

namespace firstreply {

const char* to_string(Scenario scenario) {
  return scenario == Scenario::nicer ? "nicer" : "default";
}

ReplyFeatureVector counterfactual_transform(const ReplyFeatureVector& reply) {
  return {std::max(reply.sentiment, 0.0), 0.0, 0.0};
}

ReplyFeatureVector apply_scenario(const ReplyFeatureVector& reply, Scenario scenario) {
  return scenario == Scenario::nicer ? counterfactual_transform(reply) : reply;
}

double engagement_probability(const EngagementModel& model, const FirstPostEvent& event,
                              Scenario scenario) {
  if (!event.treated || !event.first_reply) {
    return predict_engagement(model, event.community, false, 0.0, 0.0, 0.0);
  }
  ReplyFeatureVector reply{event.first_reply->sentiment, event.first_reply->toxicity,
                           event.first_reply->attack};
  reply = apply_scenario(reply, scenario);
  return predict_engagement(model, event.community, true, reply.sentiment, reply.toxicity,
                            reply.attack);
}

const EngagementModel& KindModels::for_kind(PostKind kind) const {
  const EngagementModel* model = kind == PostKind::comment ? comment : submission;
  if (!model) {
    throw DataError(std::string("simulate: no fitted model for kind ") + to_string(kind));
  }
  return *model;
}

GrowthCurve simulate_growth(const KindModels& models, std::vector<FirstPostEvent> events,
                            Scenario scenario, uint64_t seed) {
  std::sort(events.begin(), events.end(), [](const FirstPostEvent& a, const FirstPostEvent& b) {
    if (a.first_post_time != b.first_post_time) return a.first_post_time < b.first_post_time;
    return a.user < b.user;
  });

  GrowthCurve curve;
  curve.scenario = scenario;
  curve.seed = seed;
  if (!events.empty()) curve.community = events.front().community;

  int64_t count = 0;
  curve.points.reserve(events.size());
  for (const auto& ev : events) {
    double p = engagement_probability(models.for_kind(ev.kind), ev, scenario);
    double u = keyed_uniform(seed, ev.community, ev.user);
    if (u < p) ++count;
    curve.points.push_back({ev.first_post_time, count});
  }
  return curve;
}

std::optional<double> percent_increase(const GrowthCurve& default_curve,
                                       const GrowthCurve& nicer_curve) {
  if (default_curve.community != nicer_curve.community ||
      default_curve.seed != nicer_curve.seed) {
    throw DataError("percent_increase: curves must share community and seed");
  }
  double base = static_cast<double>(default_curve.final_count());
  if (base == 0.0) return std::nullopt;
  return 100.0 * (static_cast<double>(nicer_curve.final_count()) - base) / base;
}

}  // namespace firstreply
