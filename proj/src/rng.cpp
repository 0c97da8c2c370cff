#include "locfield/rng.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace locfield {

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng CounterRng::derive(std::uint64_t seed, std::uint64_t stream) {
  return CounterRng(mix64(seed + (stream + 1) * 0xD1B54A32D192ED03ULL));
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return mix64(key_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  // Phi^{-1}(u) = -sqrt(2) erfc^{-1}(2u)
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * uniform(counter));
}

Eigen::VectorXd CounterRng::normals(Eigen::Index n, std::uint64_t offset) const {
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = normal(offset + static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace locfield
