#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "spin7/forms.hpp"

// Counter-based random streams. Each experiment cell owns a stream keyed by
// (seed, label), so results do not depend on evaluation order or thread
// scheduling.

namespace spin7 {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class Rng {
 public:
  Rng(std::uint64_t seed, const std::string& label)
      : key_(splitmix64(seed ^ fnv1a(label))), ctr_(0) {}

  std::uint64_t next_u64() { return splitmix64(key_ + 0x632be59bd9b4e019ULL * ++ctr_); }

  double uniform() {  // [0, 1)
    return (next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    // Box-Muller; cached second variate.
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  Vec8 gaussian_vec8() {
    Vec8 v;
    for (int i = 0; i < 8; ++i) v[i] = gaussian();
    return v;
  }

  Vec8 unit_vec8() {
    Vec8 v = gaussian_vec8();
    double n = norm(v);
    while (n < 1e-8) {
      v = gaussian_vec8();
      n = norm(v);
    }
    return (1.0 / n) * v;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spin7
