#include "ksmz/rng.hpp"

#include <cmath>
#include <numbers>

namespace ksmz {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}
}  // namespace

std::uint64_t stream_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a(tag)) ^ index);
}

RandomStream::RandomStream(std::uint64_t seed) : gen_(seed) {}

double RandomStream::unit() {
  // 53 uniform bits -> [0, 1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double a, double b) { return a + (b - a) * unit(); }

double RandomStream::normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  const double u1 = 1.0 - unit();  // (0, 1], keeps the log finite
  const double u2 = unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return mean + stddev * r * std::cos(theta);
}

}  // namespace ksmz
