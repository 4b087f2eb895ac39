#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace metric_forge {

using Point = std::vector<double>;

std::string format_point(const Point& p);

// SplitMix64 as a UniformRandomBitGenerator. Cheap to construct, so every
// trial/draw gets its own stream derived from (seed, index) and results do
// not depend on evaluation order.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Independent stream for (seed, index). `salt` separates the purposes a single
// seed is fanned out to.
inline SplitMix64 stream(std::uint64_t seed, std::uint64_t index,
                         std::uint64_t salt = 0) noexcept {
  SplitMix64 mix(seed ^ (salt * 0xd1b54a32d192ed03ULL));
  const std::uint64_t a = mix();
  SplitMix64 mix2(a ^ (index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
  return SplitMix64(mix2());
}

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace metric_forge
