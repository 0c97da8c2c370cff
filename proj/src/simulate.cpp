#include "locfield/simulate.hpp"

#include <Eigen/Cholesky>

#include "locfield/rng.hpp"

namespace locfield {

LocationSpec LocationSpec::even_1d(std::size_t n, double a, double b) {
  LocationSpec s;
  s.kind = Kind::even_1d;
  s.n = n;
  s.box = {make_location({a}), make_location({b})};
  return s;
}

LocationSpec LocationSpec::uniform_2d(std::size_t n, const DomainBox& box) {
  LocationSpec s;
  s.kind = Kind::uniform_2d;
  s.n = n;
  s.box = box;
  return s;
}

LocationSpec LocationSpec::explicit_list(std::vector<Location> points) {
  LocationSpec s;
  s.kind = Kind::explicit_list;
  s.n = points.size();
  s.points = std::move(points);
  return s;
}

std::vector<Location> gen_locations(const LocationSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case LocationSpec::Kind::explicit_list:
      validate_locations(spec.points);
      return spec.points;
    case LocationSpec::Kind::even_1d: {
      if (spec.n < 1) throw ConfigError("need at least one location");
      const double a = spec.box.lo(0);
      const double b = spec.box.hi(0);
      if (!(b > a)) throw ConfigError("degenerate interval");
      std::vector<Location> out;
      out.reserve(spec.n);
      for (std::size_t i = 0; i < spec.n; ++i) {
        const double f = spec.n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(spec.n - 1);
        out.push_back(make_location({a + (b - a) * f}));
      }
      return out;
    }
    case LocationSpec::Kind::uniform_2d: {
      if (spec.n < 1) throw ConfigError("need at least one location");
      if (spec.box.lo.size() != 2 || !((spec.box.hi - spec.box.lo).array() > 0.0).all()) {
        throw ConfigError("degenerate box");
      }
      const auto rng = CounterRng::derive(seed, kLocationStream);
      std::vector<Location> out;
      out.reserve(spec.n);
      for (std::size_t i = 0; i < spec.n; ++i) {
        const double u = rng.uniform(2 * i);
        const double v = rng.uniform(2 * i + 1);
        out.push_back(make_location({spec.box.lo(0) + (spec.box.hi(0) - spec.box.lo(0)) * u,
                                     spec.box.lo(1) + (spec.box.hi(1) - spec.box.lo(1)) * v}));
      }
      validate_locations(out);
      return out;
    }
  }
  throw ConfigError("unknown location spec");
}

FieldSampler::FieldSampler(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance matrix is not numerically positive definite");
  }
  lower_ = llt.matrixL();
}

Eigen::VectorXd FieldSampler::draw(std::uint64_t seed) const {
  const auto eps = CounterRng::derive(seed, kFieldStream).normals(lower_.rows());
  return lower_.triangularView<Eigen::Lower>() * eps;
}

Eigen::VectorXd sample_field(const NonstatModel& m, const std::vector<Location>& locs,
                             std::uint64_t seed, double nugget) {
  return FieldSampler(cov_matrix(m, locs, nugget)).draw(seed);
}

Eigen::VectorXd sample_variance_modulated(const LocalParamFunction& sigma,
                                          const MaternParams& w,
                                          const std::vector<Location>& locs, std::uint64_t seed) {
  Eigen::VectorXd z = FieldSampler(matern_matrix(w, locs)).draw(seed);
  for (std::size_t j = 0; j < locs.size(); ++j) {
    const double s = sigma(locs[j]);
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("sigma(t) must be positive");
    z(static_cast<Eigen::Index>(j)) *= s;
  }
  return z;
}

}  // namespace locfield
