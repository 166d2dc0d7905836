#pragma once

// Weighted point clouds in R^d.

#include <cmath>
#include <cstddef>
#include <vector>

#include "dgmlab/error.hpp"

namespace dgmlab {

class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;

  // points is row-major count x d; weights are normalized to sum to 1.
  EmpiricalMeasure(std::size_t d, std::vector<double> points, std::vector<double> weights)
      : d_(d), points_(std::move(points)), weights_(std::move(weights)) {
    require(d_ >= 1, "EmpiricalMeasure: dimension must be >= 1");
    require(points_.size() == weights_.size() * d_, "EmpiricalMeasure: shape mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      require(std::isfinite(weights_[i]) && weights_[i] >= 0.0, "EmpiricalMeasure: bad weight");
      total += weights_[i];
    }
    for (double x : points_) require(std::isfinite(x), "EmpiricalMeasure: non-finite point");
    require(total > 0.0, "EmpiricalMeasure: zero total weight");
    for (auto& w : weights_) w /= total;
  }

  // Uniform weights 1/count.
  static EmpiricalMeasure uniform(std::size_t d, std::vector<double> points) {
    require(d >= 1 && !points.empty() && points.size() % d == 0, "EmpiricalMeasure::uniform: bad shape");
    const std::size_t count = points.size() / d;
    return {d, std::move(points), std::vector<double>(count, 1.0 / static_cast<double>(count))};
  }

  std::size_t dim() const { return d_; }
  std::size_t size() const { return weights_.size(); }
  const double* point(std::size_t i) const { return points_.data() + i * d_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  double total_weight() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

  // Sum_i w_i phi(x_i) for a scalar function of the point.
  template <typename Fn>
  double integrate(Fn&& phi) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += weights_[i] * phi(point(i));
    return s;
  }

 private:
  std::size_t d_ = 1;
  std::vector<double> points_;
  std::vector<double> weights_;
};

}  // namespace dgmlab
