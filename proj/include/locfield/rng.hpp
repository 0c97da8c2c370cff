#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace locfield {

/// Counter-based generator: draw i of a stream with key k is
///   bits(i) = mix64(k + (i + 1) * 0x9E3779B97F4A7C15)
/// where mix64 is the SplitMix64 finalizer. Uniforms take the top 53 bits,
/// u = (bits >> 11) + 0.5) / 2^53, so u lies strictly inside (0, 1); normals
/// are the inverse normal CDF of u. Every draw is a pure function of (key, i).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Key for a named sub-stream of a user seed: mix64(seed + (stream + 1) * 0xD1B54A32D192ED03).
  static CounterRng derive(std::uint64_t seed, std::uint64_t stream);

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t bits(std::uint64_t counter) const;
  [[nodiscard]] double uniform(std::uint64_t counter) const;
  [[nodiscard]] double normal(std::uint64_t counter) const;
  [[nodiscard]] Eigen::VectorXd normals(Eigen::Index n, std::uint64_t offset = 0) const;

 private:
  std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t x);

/// Stream identifiers used by the simulators.
inline constexpr std::uint64_t kLocationStream = 1;
inline constexpr std::uint64_t kFieldStream = 2;

}  // namespace locfield
