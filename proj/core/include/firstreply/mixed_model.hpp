#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "firstreply/events.hpp"

namespace firstreply {

enum class CommunityType { hateful, non_hateful };
const char* to_string(CommunityType type);

// Fixed-effect columns of the engagement model. Interaction columns are zero
// for untreated events.
inline constexpr int kEngagementCols = 5;
extern const char* const kEngagementColumnNames[kEngagementCols];

// Design rows grouped contiguously by community, canonically sorted by
// (community, user). `offsets` has one entry per group plus a final sentinel.
struct EngagementDesign {
  Eigen::MatrixXd X;  // n x 5: [1, reply, reply*sentiment, reply*toxicity, reply*attack]
  Eigen::VectorXd y;  // engaged
  std::vector<std::string> group_names;
  std::vector<Eigen::Index> offsets;

  Eigen::Index rows() const { return X.rows(); }
  size_t groups() const { return group_names.size(); }
};

struct DesignOptions {
  bool threshold_mode = false;  // replace toxicity/attack with 1[score >= cutoff]
  double threshold = 0.7;
};

EngagementDesign build_engagement_design(std::vector<FirstPostEvent> events,
                                         const DesignOptions& options = {});

// Random-intercept-per-community logistic regression fitted by maximizing the
// Laplace-approximate marginal likelihood: inner penalized Newton for the
// coefficients and modes at fixed sigma^2, outer golden-section search on
// log sigma^2 over [-10, 5].
struct EngagementModel {
  PostKind kind = PostKind::comment;
  CommunityType community_type = CommunityType::non_hateful;
  Eigen::VectorXd beta;               // 5 fixed effects
  Eigen::VectorXd se;                 // Wald, from the penalized information
  double sigma2 = 0.0;                // random-intercept variance
  std::map<std::string, double> u;    // fitted intercept per community
  bool converged = false;
  double loglik = 0.0;                // Laplace objective at the optimum
  size_t iterations = 0;
};

struct MixedFitOptions {
  std::optional<double> pin_sigma2;  // fix the variance (0 = plain logistic)
  size_t max_iterations = 200;
  double tol = 1e-6;                 // parameter-change convergence
  double separation_limit = 15.0;    // |beta| beyond this flags separation
  int golden_section_iterations = 48;
};

// Throws ConvergenceError on separation (naming the offending column),
// on constant non-intercept columns, and when sigma^2 is free but fewer than
// 2 communities are present.
EngagementModel fit_mixed_logistic(const EngagementDesign& design,
                                   const MixedFitOptions& options = {});

// The objective the fit maximizes, exposed for gradient checks: group modes
// are re-profiled internally for the given (beta, sigma2).
double laplace_marginal_loglik(const EngagementDesign& design, const Eigen::VectorXd& beta,
                               double sigma2);

// Per-event engagement probability under a fitted model. Throws DataError for
// a community absent from the fit.
double predict_engagement(const EngagementModel& model, const std::string& community,
                          bool treated, double sentiment, double toxicity, double attack);

// Variance inflation factors for each column of `predictors` (no intercept
// column; one is added internally). Perfectly collinear columns report +inf.
std::vector<double> vif(const Eigen::MatrixXd& predictors);

}  // namespace firstreply
