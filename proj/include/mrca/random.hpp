#pragma once

// Seeded generators with a fully specified output sequence. std::mt19937_64 is
// portable but the <random> distributions are not, so the conversions to
// uniform and Gaussian variates are done here.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace mrca {

class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  /// Standard normal variate (Box-Muller, both branches used).
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  std::vector<double> normal_vector(std::size_t n)
  {
    std::vector<double> v(n);
    for (auto& x : v) x = normal();
    return v;
  }

  std::vector<double> uniform_vector(std::size_t n, double lo = 0.0, double hi = 1.0)
  {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace mrca
