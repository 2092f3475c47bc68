#pragma once

#include "svi/common.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace svi {

// Deterministic cross-platform randomness.  std::mt19937_64 is fully
// specified by the standard; the transforms below avoid the standard
// distributions, whose output is implementation-defined.

// One round of the splitmix64 output function.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed-splitting rule used everywhere: fold each path component into the
// master seed with one splitmix64 round per component.  Derivations depend
// only on the component values, never on enumeration order, so adding grid
// cells to an experiment leaves other cells' streams untouched.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t c : path) h = splitmix64(h ^ c);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi]; modulo bias is irrelevant at these ranges.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double exponential() { return -std::log1p(-uniform()); }

  // Flat Dirichlet sample: normalized exponentials, strictly positive.
  Vector dirichlet(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = exponential();
    double s = v.sum();
    // An all-zeros draw has probability ~0; guard anyway.
    if (s <= 0.0) return Vector::Constant(n, 1.0 / n);
    return v / s;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace svi
