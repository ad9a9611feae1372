#pragma once

#include <string>
#include <vector>

namespace firstreply {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int n = 0;
  std::string method;
};

struct WilcoxonResult {
  double t_statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  int n = 0;                // nonzero differences
  double p_exact = 0.0;     // NaN when n > 25
  double p_normal = 0.0;    // NaN when degenerate
  bool degenerate = false;  // all differences zero

  // Policy p-value: exact by sign-distribution for n <= 25, normal
  // approximation with continuity and tie correction above.
  TestResult to_test_result() const;
};

// Paired signed-rank test. Zero differences are dropped; tied magnitudes get
// midranks. The exact two-sided p enumerates the sign distribution
// (dynamic program over doubled ranks, identical to full enumeration).
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs);

// Midranks (average rank for ties), 1-based.
std::vector<double> midranks(const std::vector<double>& values);

// Spearman rank correlation: Pearson correlation of midranks, p from the
// t-approximation with n-2 degrees of freedom. Throws DataError for constant
// input or n < 3.
TestResult spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace firstreply
