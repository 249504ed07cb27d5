#include "senticast/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace senticast {

namespace {

// splitmix64, Vigna (2015). Public-domain reference constants.
uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
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

}  // namespace

Rng::Rng(uint64_t seed) : seed_(seed), state_(seed) {
  // Warm the state so nearby seeds decorrelate.
  splitmix64(state_);
  splitmix64(state_);
}

Rng Rng::stream(std::string_view name) const {
  uint64_t mix = seed_;
  uint64_t h = fnv1a(name);
  mix ^= h + 0x9e3779b97f4a7c15ULL + (mix << 6) + (mix >> 2);
  return Rng(mix);
}

uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

uint64_t Rng::uniform_index(uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  // Modulo bias is negligible for n << 2^64 and keeps the stream simple.
  return next_u64() % n;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double Rng::normal(double mean, double sigma) { return mean + sigma * normal(); }

int64_t Rng::poisson(double lambda) {
  if (lambda < 0) throw std::invalid_argument("poisson: negative rate");
  if (lambda == 0) return 0;
  if (lambda < 30.0) {
    // Knuth's product-of-uniforms method.
    double limit = std::exp(-lambda);
    double prod = uniform();
    int64_t k = 0;
    while (prod > limit) {
      prod *= uniform();
      ++k;
    }
    return k;
  }
  double v = std::round(lambda + std::sqrt(lambda) * normal());
  return v < 0 ? 0 : int64_t(v);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

}  // namespace senticast
