#pragma once

#include <map>
#include <string>
#include <vector>

namespace firstreply {

using WordCounts = std::map<std::string, int64_t>;

// Sparse additive model of how a target corpus deviates from a background
// corpus: log p_w ∝ m_w + eta_w with an L1 penalty on eta. Large positive
// eta marks words characteristic of the target.
struct SageModel {
  std::vector<std::string> vocabulary;  // sorted ascending
  std::vector<double> m;                // background log-probabilities
  std::vector<double> eta;              // sparse deviations
  double lambda = 0.0;
};

struct SageFitDiagnostics {
  std::vector<double> objective_trace;  // one value per iteration, non-increasing
  size_t iterations = 0;
  bool converged = false;
};

// Penalized objective: -c'(m+eta) + C*log(sum_w exp(m_w+eta_w)) + lambda*|eta|_1
// with c the target counts and C their total.
double sage_objective(const std::vector<double>& m, const std::vector<double>& eta,
                      const std::vector<double>& target_counts, double lambda);

// Proximal-gradient fit with soft-thresholding and backtracking line search.
// The vocabulary is the target count keys (callers apply the min-count floor
// before building the maps). Background frequencies get add-0.1 smoothing.
// Converged when the objective decrease stays below 1e-8 for 3 consecutive
// iterations.
SageModel fit_sage(const WordCounts& target_counts, const WordCounts& background_counts,
                   double lambda, SageFitDiagnostics* diagnostics = nullptr);

// Words with positive deviation, sorted by eta descending (ties alphabetical),
// at most k of them.
std::vector<std::string> top_distinctive_words(const SageModel& model, int k);

// Tokenizes bodies and accumulates counts, dropping words below min_count.
WordCounts count_vocabulary(const std::vector<std::string>& bodies, int64_t min_count);

}  // namespace firstreply
