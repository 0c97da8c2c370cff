#include "locfield/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace locfield {

Location make_location(std::initializer_list<double> coords) {
  Location loc(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) loc(i++) = c;
  return loc;
}

double distance(const Location& a, const Location& b) { return (a - b).norm(); }

void validate_locations(const std::vector<Location>& locations) {
  if (locations.empty()) throw ConfigError("empty dataset");
  const auto dim = locations.front().size();
  if (dim < 1 || dim > 2) throw ConfigError("dimension must be 1 or 2");
  for (const auto& loc : locations) {
    if (loc.size() != dim) throw ConfigError("mixed location dimensions");
    if (!loc.allFinite()) throw ConfigError("non-finite location coordinate");
  }
  std::vector<std::size_t> idx(locations.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto lex_less = [&](std::size_t a, std::size_t b) {
    const auto& la = locations[a];
    const auto& lb = locations[b];
    for (Eigen::Index d = 0; d < dim; ++d) {
      if (la(d) != lb(d)) return la(d) < lb(d);
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), lex_less);
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (locations[idx[i]] == locations[idx[i - 1]]) {
      throw ConfigError("duplicate location at rows " + std::to_string(idx[i - 1]) + " and " +
                        std::to_string(idx[i]));
    }
  }
}

Dataset::Dataset(std::vector<Location> locations, Eigen::VectorXd responses)
    : locations_(std::move(locations)), responses_(std::move(responses)) {
  validate_locations(locations_);
  if (static_cast<std::size_t>(responses_.size()) != locations_.size()) {
    throw ConfigError("responses and locations differ in length");
  }
  if (!responses_.allFinite()) throw ConfigError("non-finite response");
  dim_ = static_cast<int>(locations_.front().size());
}

Dataset Dataset::with_responses(Eigen::VectorXd responses) const {
  if (static_cast<std::size_t>(responses.size()) != locations_.size()) {
    throw ConfigError("responses and locations differ in length");
  }
  Dataset out = *this;
  out.responses_ = std::move(responses);
  return out;
}

NeighborOrdering order_neighbors(const std::vector<Location>& locations, const Location& t) {
  if (locations.empty()) throw ConfigError("empty dataset");
  const std::size_t n = locations.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (locations[i].size() != t.size()) throw ConfigError("target dimension mismatch");
    d[i] = distance(locations[i], t);
  }
  NeighborOrdering out;
  out.target = t;
  out.perm.resize(n);
  std::iota(out.perm.begin(), out.perm.end(), 0);
  std::stable_sort(out.perm.begin(), out.perm.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  out.dists.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.dists[i] = d[out.perm[i]];
  return out;
}

NeighborOrdering order_neighbors(const Dataset& data, const Location& t) {
  return order_neighbors(data.locations(), t);
}

std::size_t WeightVector::effective_size() const {
  for (Eigen::Index k = w.size(); k > 0; --k) {
    if (w(k - 1) != 0.0) return static_cast<std::size_t>(k);
  }
  return 0;
}

WeightVector telescope_weights(const Eigen::VectorXd& w) {
  if (w.size() == 0 || !w.allFinite()) throw NumericalError("degenerate weights");
  const double total = w.sum();
  if (!(total > 0.0)) throw NumericalError("degenerate weights");
  WeightVector out;
  out.w = w;
  out.sum = total;
  const Eigen::Index n = w.size();
  out.wtilde.resize(n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) out.wtilde(k) = (w(k) - w(k + 1)) / total;
  out.wtilde(n - 1) = w(n - 1) / total;
  return out;
}

Eigen::VectorXd ordered_responses(const Dataset& data, const NeighborOrdering& ordering,
                                  std::size_t count) {
  count = std::min(count, ordering.size());
  Eigen::VectorXd z(static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) z(static_cast<Eigen::Index>(k)) = data.responses()(
      static_cast<Eigen::Index>(ordering.perm[k]));
  return z;
}

std::vector<Location> ordered_locations(const std::vector<Location>& locations,
                                        const NeighborOrdering& ordering, std::size_t count) {
  count = std::min(count, ordering.size());
  std::vector<Location> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(locations[ordering.perm[k]]);
  return out;
}

}  // namespace locfield
