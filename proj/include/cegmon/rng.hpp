#ifndef CEGMON_RNG_HPP
#define CEGMON_RNG_HPP

#include "cegmon/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace cegmon {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: draw i of a stream is a hash of (key, i), and
/// child streams derive their key from the parent key and a stream number.
/// Consumers that split off their own stream never shift anyone else's draws.
/// Satisfies UniformRandomBitGenerator, but the helpers below avoid
/// implementation-defined std distributions so output is portable.
class CountedStream {
 public:
  using result_type = std::uint64_t;

  explicit CountedStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  CountedStream split(std::uint64_t stream) const {
    CountedStream child(0);
    child.key_ = splitmix64(key_ ^ splitmix64(stream + 0x2545f4914f6cdd1dULL));
    return child;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  std::uint64_t draws() const { return counter_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's rejection keeps the draw unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
      const std::uint64_t x = (*this)();
      const __uint128_t m = static_cast<__uint128_t>(x) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  double normal() {
    // Box-Muller; one value per call keeps the counter arithmetic simple.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Marsaglia-Tsang gamma variate with unit scale.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  Vector dirichlet(const Vector& alpha) {
    Vector g(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) g[i] = gamma(alpha[i]);
    return g / g.sum();
  }

  /// Index drawn from an unnormalized probability vector.
  template <typename Derived>
  int categorical(const Eigen::MatrixBase<Derived>& p) {
    const double total = p.sum();
    double u = uniform() * total;
    const Eigen::Index last = p.size() - 1;
    for (Eigen::Index k = 0; k < last; ++k) {
      if (u < p(k)) return static_cast<int>(k);
      u -= p(k);
    }
    // Land on the last positive entry so zero-probability levels never appear.
    for (Eigen::Index k = last; k > 0; --k) {
      if (p(k) > 0.0) return static_cast<int>(k);
    }
    return 0;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cegmon

#endif  // CEGMON_RNG_HPP
