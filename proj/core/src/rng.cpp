#include "firstreply/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace firstreply {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {
double u64_to_unit(uint64_t x) {
  // top 53 bits -> [0,1)
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

uint64_t mix3(uint64_t a, uint64_t b, uint64_t c) {
  uint64_t s = a;
  s ^= splitmix64(b);
  s ^= splitmix64(c);
  return splitmix64(s);
}
}  // namespace

double keyed_uniform(uint64_t seed, std::string_view part1, std::string_view part2) {
  return keyed_uniform(seed, part1, part2, 0);
}

double keyed_uniform(uint64_t seed, std::string_view part1, std::string_view part2,
                     uint64_t counter) {
  uint64_t h1 = fnv1a(part1);
  uint64_t h2 = fnv1a(part2) ^ (counter * 0xda942042e4dd58b5ULL);
  return u64_to_unit(mix3(seed, h1, h2));
}

double Rng::next_uniform() { return u64_to_unit(next_u64()); }

uint64_t Rng::next_below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
  // rejection to avoid modulo bias
  uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double Rng::next_normal() {
  // Box-Muller; draw fresh pair every call to keep the stream position
  // independent of call history.
  double u1 = next_uniform();
  double u2 = next_uniform();
  while (u1 <= 0.0) u1 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::next_gamma(double shape) {
  if (shape <= 0.0) throw std::invalid_argument("next_gamma: shape must be positive");
  if (shape < 1.0) {
    // boost to shape+1, then scale back
    double u = next_uniform();
    while (u <= 0.0) u = next_uniform();
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia & Tsang squeeze
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = next_normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = next_uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::next_beta(double a, double b) {
  double x = next_gamma(a);
  double y = next_gamma(b);
  return x / (x + y);
}

double Rng::next_truncated_normal(double mean, double sd, double lo, double hi) {
  if (lo >= hi) throw std::invalid_argument("next_truncated_normal: empty interval");
  for (int i = 0; i < 10000; ++i) {
    double x = mean + sd * next_normal();
    if (x >= lo && x <= hi) return x;
  }
  // window so far from the mean that rejection stalls: fall back to a uniform
  return lo + (hi - lo) * next_uniform();
}

std::vector<size_t> sample_indices(Rng& rng, size_t n, size_t k) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  if (k >= n) return idx;
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(rng.next_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace firstreply
