#include "firstreply/sage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "firstreply/errors.hpp"
#include "firstreply/text.hpp"

namespace firstreply {

namespace {

double log_sum_exp(const std::vector<double>& m, const std::vector<double>& eta) {
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < m.size(); ++i) mx = std::max(mx, m[i] + eta[i]);
  double s = 0.0;
  for (size_t i = 0; i < m.size(); ++i) s += std::exp(m[i] + eta[i] - mx);
  return mx + std::log(s);
}

void softmax(const std::vector<double>& m, const std::vector<double>& eta,
             std::vector<double>& out) {
  double lse = log_sum_exp(m, eta);
  out.resize(m.size());
  for (size_t i = 0; i < m.size(); ++i) out[i] = std::exp(m[i] + eta[i] - lse);
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

double sage_objective(const std::vector<double>& m, const std::vector<double>& eta,
                      const std::vector<double>& target_counts, double lambda) {
  double total = std::accumulate(target_counts.begin(), target_counts.end(), 0.0);
  double lin = 0.0, l1 = 0.0;
  for (size_t i = 0; i < m.size(); ++i) {
    lin += target_counts[i] * (m[i] + eta[i]);
    l1 += std::abs(eta[i]);
  }
  return -lin + total * log_sum_exp(m, eta) + lambda * l1;
}

SageModel fit_sage(const WordCounts& target_counts, const WordCounts& background_counts,
                   double lambda, SageFitDiagnostics* diagnostics) {
  if (lambda < 0.0) throw DataError("fit_sage: lambda must be nonnegative");
  if (target_counts.empty()) throw DataError("fit_sage: empty target corpus");
  if (background_counts.empty()) throw DataError("fit_sage: empty background corpus");

  SageModel model;
  model.lambda = lambda;
  model.vocabulary.reserve(target_counts.size());
  for (const auto& [word, count] : target_counts) {
    if (count <= 0) continue;
    model.vocabulary.push_back(word);
  }
  if (model.vocabulary.empty()) throw DataError("fit_sage: empty target corpus");
  // std::map iterates in sorted order, so the vocabulary is already ascending.

  const size_t n = model.vocabulary.size();
  std::vector<double> counts(n);
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    counts[i] = static_cast<double>(target_counts.at(model.vocabulary[i]));
    total += counts[i];
  }

  // Background log-probabilities with add-0.1 smoothing over the vocabulary.
  model.m.resize(n);
  double bg_total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    auto it = background_counts.find(model.vocabulary[i]);
    double c = (it != background_counts.end() ? static_cast<double>(it->second) : 0.0) + 0.1;
    model.m[i] = c;
    bg_total += c;
  }
  for (size_t i = 0; i < n; ++i) model.m[i] = std::log(model.m[i] / bg_total);

  model.eta.assign(n, 0.0);

  std::vector<double> grad(n), probs(n), trial(n);
  double objective = sage_objective(model.m, model.eta, counts, lambda);
  if (!std::isfinite(objective)) {
    throw ConvergenceError("fit_sage: non-finite objective at initialization");
  }
  if (diagnostics) {
    diagnostics->objective_trace.clear();
    diagnostics->objective_trace.push_back(objective);
    diagnostics->converged = false;
    diagnostics->iterations = 0;
  }

  double step = 1.0 / total;
  int small_decreases = 0;
  const size_t max_iterations = 100000;
  size_t iter = 0;
  for (; iter < max_iterations; ++iter) {
    softmax(model.m, model.eta, probs);
    double smooth = objective;  // smooth part + l1; recompute smooth alone below
    double l1 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      grad[i] = -counts[i] + total * probs[i];
      l1 += std::abs(model.eta[i]);
    }
    smooth = objective - lambda * l1;

    // Backtracking on the quadratic majorization of the smooth part.
    double next_objective = objective;
    for (;;) {
      double quad = 0.0, lin = 0.0;
      for (size_t i = 0; i < n; ++i) {
        trial[i] = soft_threshold(model.eta[i] - step * grad[i], step * lambda);
        double d = trial[i] - model.eta[i];
        lin += grad[i] * d;
        quad += d * d;
      }
      double trial_objective = sage_objective(model.m, trial, counts, lambda);
      if (!std::isfinite(trial_objective)) {
        throw ConvergenceError("fit_sage: non-finite objective during line search");
      }
      double trial_smooth = trial_objective;
      for (size_t i = 0; i < n; ++i) trial_smooth -= lambda * std::abs(trial[i]);
      if (trial_smooth <= smooth + lin + quad / (2.0 * step) + 1e-12 * std::abs(smooth)) {
        next_objective = trial_objective;
        break;
      }
      step *= 0.5;
      if (step < 1e-300) throw ConvergenceError("fit_sage: line search failed");
    }

    double decrease = objective - next_objective;
    if (next_objective <= objective) {
      model.eta.swap(trial);
      objective = next_objective;
    }
    if (diagnostics) diagnostics->objective_trace.push_back(objective);

    small_decreases = (decrease < 1e-8) ? small_decreases + 1 : 0;
    if (small_decreases >= 3) {
      ++iter;
      if (diagnostics) diagnostics->converged = true;
      break;
    }
    step *= 1.5;  // cautious growth so the step can recover after backtracks
  }
  if (diagnostics) diagnostics->iterations = iter;
  return model;
}

std::vector<std::string> top_distinctive_words(const SageModel& model, int k) {
  if (k < 1) throw DataError("top_distinctive_words: k must be >= 1");
  std::vector<size_t> order;
  for (size_t i = 0; i < model.eta.size(); ++i) {
    if (model.eta[i] > 0.0) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (model.eta[a] != model.eta[b]) return model.eta[a] > model.eta[b];
    return model.vocabulary[a] < model.vocabulary[b];
  });
  if (order.size() > static_cast<size_t>(k)) order.resize(static_cast<size_t>(k));
  std::vector<std::string> words;
  words.reserve(order.size());
  for (size_t i : order) words.push_back(model.vocabulary[i]);
  return words;
}

WordCounts count_vocabulary(const std::vector<std::string>& bodies, int64_t min_count) {
  WordCounts counts;
  for (const auto& body : bodies) {
    for (const auto& token : vocab_tokens(body)) counts[token] += 1;
  }
  for (auto it = counts.begin(); it != counts.end();) {
    if (it->second < min_count) it = counts.erase(it);
    else ++it;
  }
  return counts;
}

}  // namespace firstreply
