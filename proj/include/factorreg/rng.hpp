#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace factorreg {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: draw n of stream `key` is a pure function of
/// (key, n), so streams are reproducible on every platform and independent
/// of evaluation order. split() derives child streams.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(mix64(key ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return mix64(key_ ^ mix64(++counter_ * 0x9e3779b97f4a7c15ULL));
  }

  /// Independent child stream labelled by `index`.
  CounterRng split(std::uint64_t index) const noexcept {
    return CounterRng(key_ ^ mix64(index + 0xd1b54a32d192ed03ULL));
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) noexcept;

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Seed of replicate `index` under `master`.
constexpr std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index ^ 0x243f6a8885a308d3ULL));
}

}  // namespace factorreg
