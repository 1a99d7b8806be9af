#ifndef KSMZ_RNG_HPP
#define KSMZ_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace ksmz {

/// Derives the seed of a named substream from a master seed. Ensemble member i
/// of domain "tag" always sees the same stream no matter which thread runs it.
std::uint64_t stream_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

/// Deterministic random stream. Gaussian variates use Box-Muller on top of
/// mt19937_64 uniforms so draws do not depend on the standard library's
/// distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Uniform on [a, b).
  double uniform(double a = 0.0, double b = 1.0);

  /// Normal with the given mean and standard deviation.
  double normal(double mean = 0.0, double stddev = 1.0);

  std::uint64_t raw() { return gen_(); }

 private:
  double unit();  // [0, 1)
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ksmz

#endif
