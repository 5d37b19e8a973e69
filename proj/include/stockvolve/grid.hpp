#pragma once

#include <cstddef>
#include <vector>

#include "stockvolve/error.hpp"

namespace stockvolve {

// Uniform price discretization [p_min, p_max] with n_points nodes.
class PriceGrid {
 public:
  static constexpr std::size_t kMinPoints = 16;

  PriceGrid(double p_min, double p_max, std::size_t n_points)
      : p_min_(p_min), p_max_(p_max), n_points_(n_points) {
    require(p_min >= 0.0, ErrorCode::InvalidParameters, "grid p_min must be >= 0");
    require(p_min < p_max, ErrorCode::InvalidParameters, "grid requires p_min < p_max");
    require(n_points >= kMinPoints, ErrorCode::InvalidParameters, "grid needs at least 16 points");
  }

  double p_min() const { return p_min_; }
  double p_max() const { return p_max_; }
  std::size_t size() const { return n_points_; }
  double spacing() const { return (p_max_ - p_min_) / static_cast<double>(n_points_ - 1); }

  double operator[](std::size_t i) const {
    return i + 1 == n_points_ ? p_max_ : p_min_ + static_cast<double>(i) * spacing();
  }

  std::vector<double> points() const {
    std::vector<double> p(n_points_);
    for (std::size_t i = 0; i < n_points_; ++i) p[i] = (*this)[i];
    return p;
  }

  bool operator==(const PriceGrid&) const = default;

 private:
  double p_min_;
  double p_max_;
  std::size_t n_points_;
};

}  // namespace stockvolve
