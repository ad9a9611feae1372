#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace firstreply {

// Deterministic random primitives used across the pipeline. Two constraints
// drive the design:
//   * outputs must be byte-identical across runs and worker-thread counts,
//     so nothing here depends on std::random_device or distribution
//     implementations that the standard leaves unspecified;
//   * the simulator needs counter-based draws keyed by entity so the same
//     uniform is reused across counterfactual scenarios (common random
//     numbers) regardless of evaluation order.

uint64_t splitmix64(uint64_t& state);

// FNV-1a, used to fold strings into RNG keys.
uint64_t fnv1a(std::string_view s);

// Stateless keyed draw: uniform in [0,1) determined entirely by the key parts.
double keyed_uniform(uint64_t seed, std::string_view part1, std::string_view part2);
double keyed_uniform(uint64_t seed, std::string_view part1, std::string_view part2,
                     uint64_t counter);

// Sequential generator for synthesis and subsampling.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {
    // decorrelate trivially related seeds
    next_u64();
    next_u64();
  }
  static Rng keyed(uint64_t seed, std::string_view scope) {
    return Rng(seed ^ fnv1a(scope));
  }

  uint64_t next_u64() { return splitmix64(state_); }
  double next_uniform();                    // [0,1)
  uint64_t next_below(uint64_t bound);      // [0,bound), unbiased
  double next_normal();                     // standard normal (Box-Muller, no cache)
  double next_gamma(double shape);          // shape > 0, scale 1 (Marsaglia-Tsang)
  double next_beta(double a, double b);
  // normal(mean,sd) truncated to [lo,hi] by rejection
  double next_truncated_normal(double mean, double sd, double lo, double hi);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

// Deterministic subsample of k indices out of n (Fisher-Yates prefix),
// returned in ascending order.
std::vector<size_t> sample_indices(Rng& rng, size_t n, size_t k);

}  // namespace firstreply
