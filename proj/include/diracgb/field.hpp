#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "diracgb/dirac.hpp"
#include "diracgb/types.hpp"

namespace dgb {

/// One axis of a tensor grid. Closed axes include both endpoints; periodic
/// axes exclude `max`. A closed axis with count == 1 and min == max pins the
/// coordinate (used for x3 = 0 slices).
struct Axis {
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;
  bool periodic = false;

  double spacing() const;
  double coord(std::size_t i) const;
  bool pinned() const { return count == 1; }
  void validate() const;
};

/// Row-major tensor grid (last axis fastest).
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<Axis> axes);

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return size_; }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(int k) const { return axes_[static_cast<std::size_t>(k)]; }
  std::size_t stride(int k) const { return strides_[static_cast<std::size_t>(k)]; }

  std::size_t flat(const std::vector<std::size_t>& idx) const;
  std::vector<std::size_t> multi(std::size_t flat) const;
  VecD point(std::size_t flat) const;

  /// Product of the spacings of the non-pinned axes.
  double cell_volume() const;

  bool same_as(const Grid& other, double tol = 1e-12) const;
  std::string describe() const;

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Uniform closed grid over the box [lo, hi]^d with n points per axis.
Grid box_grid(int d, double lo, double hi, std::size_t n);

/// Spinor values on a grid.
struct Field {
  Grid grid;
  std::vector<Spinor> values;
  double t = 0.0;
  double epsilon = 0.0;

  Field() = default;
  Field(Grid g, double t_, double eps) : grid(std::move(g)), values(grid.size(), Spinor::Zero()), t(t_), epsilon(eps) {}

  double max_abs() const;
};

struct ObservableFields {
  std::vector<double> density;
  std::vector<Vec3> current;
};

ObservableFields observables(const Field& f);

}  // namespace dgb
