#include "firstreply/rank_tests.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "firstreply/errors.hpp"

namespace firstreply {

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<double> midranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
  WilcoxonResult result;
  std::vector<double> magnitudes;
  std::vector<bool> positive;
  for (double d : diffs) {
    if (d == 0.0) continue;
    magnitudes.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  result.n = static_cast<int>(magnitudes.size());
  if (result.n == 0) {
    result.degenerate = true;
    result.p_exact = 1.0;
    result.p_normal = kNaN;
    return result;
  }

  std::vector<double> ranks = midranks(magnitudes);
  for (size_t i = 0; i < ranks.size(); ++i) {
    (positive[i] ? result.w_plus : result.w_minus) += ranks[i];
  }
  result.t_statistic = std::min(result.w_plus, result.w_minus);

  // Exact two-sided p for n <= 25: distribution of W+ over all 2^n equally
  // likely sign assignments. Midranks are multiples of 1/2, so doubling makes
  // every rank an integer and the dynamic program is exact (counts stay well
  // below 2^53).
  if (result.n <= 25) {
    std::vector<int64_t> doubled(ranks.size());
    int64_t total_doubled = 0;
    for (size_t i = 0; i < ranks.size(); ++i) {
      doubled[i] = static_cast<int64_t>(std::llround(2.0 * ranks[i]));
      total_doubled += doubled[i];
    }
    std::vector<double> count(static_cast<size_t>(total_doubled) + 1, 0.0);
    count[0] = 1.0;
    int64_t reach = 0;
    for (int64_t r : doubled) {
      for (int64_t s = reach; s >= 0; --s) {
        if (count[static_cast<size_t>(s)] > 0.0) {
          count[static_cast<size_t>(s + r)] += count[static_cast<size_t>(s)];
        }
      }
      reach += r;
    }
    double denom = std::ldexp(1.0, result.n);  // 2^n
    int64_t w_doubled = static_cast<int64_t>(std::llround(2.0 * result.w_plus));
    double below = 0.0, above = 0.0;
    for (int64_t s = 0; s <= total_doubled; ++s) {
      if (s <= w_doubled) below += count[static_cast<size_t>(s)];
      if (s >= w_doubled) above += count[static_cast<size_t>(s)];
    }
    result.p_exact = std::min(1.0, 2.0 * std::min(below, above) / denom);
  } else {
    result.p_exact = kNaN;
  }

  // Normal approximation with continuity correction. Var(W+) = sum(r^2)/4
  // absorbs the tie correction exactly.
  double mu = 0.0, var = 0.0;
  for (double r : ranks) {
    mu += r / 2.0;
    var += r * r / 4.0;
  }
  if (var <= 0.0) {
    result.p_normal = kNaN;
  } else {
    double delta = result.w_plus - mu;
    double cc = delta > 0.0 ? -0.5 : (delta < 0.0 ? 0.5 : 0.0);
    double z = (delta + cc) / std::sqrt(var);
    result.p_normal = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
  }
  return result;
}

TestResult WilcoxonResult::to_test_result() const {
  TestResult tr;
  tr.statistic = t_statistic;
  tr.n = n;
  if (degenerate) {
    tr.p_value = 1.0;
    tr.method = "wilcoxon-signed-rank (degenerate: all differences zero)";
  } else if (n <= 25) {
    tr.p_value = p_exact;
    tr.method = "wilcoxon-signed-rank (exact)";
  } else {
    tr.p_value = p_normal;
    tr.method = "wilcoxon-signed-rank (normal approximation)";
  }
  return tr;
}

TestResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("spearman: length mismatch");
  const size_t n = x.size();
  if (n < 3) throw DataError("spearman: need at least 3 observations");

  std::vector<double> rx = midranks(x);
  std::vector<double> ry = midranks(y);

  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw DataError("spearman: correlation undefined for constant input");
  }
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);

  TestResult tr;
  tr.statistic = r;
  tr.n = static_cast<int>(n);
  tr.method = "spearman (t approximation)";
  double df = static_cast<double>(n) - 2.0;
  if (std::abs(r) >= 1.0) {
    tr.p_value = 0.0;
  } else {
    double t = r * std::sqrt(df / (1.0 - r * r));
    boost::math::students_t dist(df);
    tr.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return tr;
}

}  // namespace firstreply
