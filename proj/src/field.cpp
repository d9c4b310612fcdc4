#include "diracgb/field.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dgb {

double Axis::spacing() const {
  if (count == 1) return 0.0;
  return periodic ? (max - min) / static_cast<double>(count) : (max - min) / static_cast<double>(count - 1);
}

double Axis::coord(std::size_t i) const { return min + static_cast<double>(i) * spacing(); }

void Axis::validate() const {
  if (count == 1) {
    if (periodic || min != max) throw std::invalid_argument("pinned axis requires min == max and closed");
    return;
  }
  if (count < 2) throw std::invalid_argument("axis needs at least 2 points");
  if (!(max > min)) throw std::invalid_argument("axis requires max > min");
}

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 6) throw std::invalid_argument("grid dimension must be 1..6");
  for (const auto& a : axes_) a.validate();
  strides_.assign(axes_.size(), 1);
  size_ = 1;
  for (std::size_t k = axes_.size(); k-- > 0;) {
    strides_[k] = size_;
    size_ *= axes_[k].count;
  }
}

std::size_t Grid::flat(const std::vector<std::size_t>& idx) const {
  std::size_t f = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) f += idx[k] * strides_[k];
  return f;
}

std::vector<std::size_t> Grid::multi(std::size_t f) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    idx[k] = f / strides_[k];
    f %= strides_[k];
  }
  return idx;
}

VecD Grid::point(std::size_t f) const {
  // Points beyond three axes are not representable as VecD; phase grids use
  // their own coordinate accessors.
  if (axes_.size() > 3) throw std::logic_error("Grid::point on a grid with more than 3 axes");
  VecD x(dim());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    x[static_cast<Eigen::Index>(k)] = axes_[k].coord(f / strides_[k]);
    f %= strides_[k];
  }
  return x;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes_)
    if (!a.pinned()) v *= a.spacing();
  return v;
}

bool Grid::same_as(const Grid& other, double tol) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const auto& a = axes_[k];
    const auto& b = other.axes_[k];
    if (a.count != b.count || a.periodic != b.periodic) return false;
    if (std::abs(a.min - b.min) > tol || std::abs(a.max - b.max) > tol) return false;
  }
  return true;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    if (k) os << ',';
    os << axes_[k].min << ':' << axes_[k].max << ':' << axes_[k].count;
    if (axes_[k].periodic) os << ":p";
  }
  return os.str();
}

Grid box_grid(int d, double lo, double hi, std::size_t n) {
  std::vector<Axis> axes(static_cast<std::size_t>(d), Axis{lo, hi, n, false});
  return Grid(std::move(axes));
}

double Field::max_abs() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, v.norm());
  return m;
}

ObservableFields observables(const Field& f) {
  ObservableFields out;
  out.density.reserve(f.values.size());
  out.current.reserve(f.values.size());
  for (const auto& v : f.values) {
    const auto o = observables(v);
    out.density.push_back(o.density);
    out.current.push_back(o.current);
  }
  return out;
}

}  // namespace dgb
