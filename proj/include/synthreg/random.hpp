#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace synthreg {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Named sub-seed: every stochastic stage and industry draws from its own
// stream derived from the master seed.
inline std::uint64_t sub_seed(std::uint64_t seed, std::string_view tag) {
  return splitmix64(seed ^ splitmix64(fnv1a(tag)));
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  return splitmix64(sub_seed(seed, tag) + splitmix64(index));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Draws one probability vector from Dirichlet(alpha).
inline std::vector<double> draw_dirichlet(std::span<const double> alpha, Rng& rng) {
  std::vector<double> p(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    p[i] = std::gamma_distribution<double>(alpha[i], 1.0)(rng);
    total += p[i];
  }
  if (total <= 0.0) {
    // All gammas underflowed (tiny alphas); fall back to the prior mean.
    double a = 0.0;
    for (double x : alpha) a += x;
    for (std::size_t i = 0; i < alpha.size(); ++i) p[i] = alpha[i] / a;
    return p;
  }
  for (double& x : p) x /= total;
  return p;
}

// Inverse-CDF categorical draw. Returns an index into probs.
inline std::size_t draw_categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  // Round-off: return the last category with positive mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

}  // namespace synthreg
