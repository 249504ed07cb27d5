#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace senticast {

/// Deterministic random stream with named substreams.
///
/// All randomness in a run flows from one root seed; modules derive
/// independent streams via `stream("name")` so that adding draws in one
/// module never perturbs another. Samplers are implemented in-house so
/// that byte-identical artifacts do not depend on the standard library's
/// distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  /// Derives an independent stream keyed by `name`.
  Rng stream(std::string_view name) const;

  uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). Requires n > 0.
  uint64_t uniform_index(uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();
  double normal(double mean, double sigma);
  /// Poisson draw; exact (Knuth) for small rates, normal approximation above.
  int64_t poisson(double lambda);
  /// True with probability p.
  bool bernoulli(double p);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace senticast
