#include "nlsaddle/core.hpp"

#include "nlsaddle/operators.hpp"

#include <algorithm>
#include <cmath>

namespace nlsaddle {

Field::Field(FieldKind kind, Grid grid, int comps, std::vector<double> weights)
  : kind_(kind)
  , grid_(grid)
  , comps_(comps)
  , weights_(std::move(weights))
{
  if (grid.nx < 1 || grid.ny < 1 || grid.nz < 1) { throw ShapeError("Field: grid dimensions must be positive"); }
  if (!(grid.h > 0)) { throw ShapeError("Field: spatial step must be positive"); }
  if (comps < 1 || int(weights_.size()) != comps) { throw ShapeError("Field: weights must match component count"); }
  data_.assign(grid.points() * std::size_t(comps), 0.0);
}

Field Field::scalar(Grid grid) { return Field(FieldKind::Scalar, grid, 1, {1.0}); }
Field Field::complex(Grid grid) { return Field(FieldKind::Complex, grid, 2, {1.0, 1.0}); }
Field Field::vector(Grid grid, int m) { return Field(FieldKind::Vector, grid, m, std::vector<double>(std::size_t(m), 1.0)); }

Field Field::sym_tensor(Grid grid, int d)
{
  auto w = sym_tensor_weights(d);
  int const m = int(w.size());
  return Field(FieldKind::SymTensor, grid, m, std::move(w));
}

Field Field::vector_weighted(Grid grid, std::vector<double> weights)
{
  int const m = int(weights.size());
  return Field(FieldKind::Vector, grid, m, std::move(weights));
}

std::vector<double> sym_tensor_weights(int d)
{
  if (d == 2) { return {1.0, 1.0, 2.0}; }
  if (d == 3) { return {1.0, 1.0, 1.0, 2.0, 2.0, 2.0}; }
  throw ShapeError("sym_tensor: only 2×2 and 3×3 tensors are supported");
}

bool Field::same_layout(Field const &o) const
{
  return grid_ == o.grid_ && comps_ == o.comps_ && weights_ == o.weights_;
}

Field Field::zeros_like() const
{
  Field f = *this;
  f.set_zero();
  return f;
}

void Field::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }
void Field::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Field::inner(Field const &o) const
{
  if (!same_layout(o)) { throw ShapeError("Field::inner: layout mismatch"); }
  double s = 0.0;
  std::size_t const np = points();
  if (comps_ == 1) {
    for (std::size_t i = 0; i < data_.size(); ++i) { s += data_[i] * o.data_[i]; }
    return s * weights_[0];
  }
  for (std::size_t p = 0; p < np; ++p) {
    double const *a = &data_[p * comps_];
    double const *b = &o.data_[p * comps_];
    for (int c = 0; c < comps_; ++c) { s += weights_[c] * a[c] * b[c]; }
  }
  return s;
}

double Field::norm() const { return std::sqrt(inner(*this)); }

double Field::point_norm(std::size_t point) const
{
  double const *a = &data_[point * comps_];
  double s = 0.0;
  for (int c = 0; c < comps_; ++c) { s += weights_[c] * a[c] * a[c]; }
  return std::sqrt(s);
}

void Field::axpy(double a, Field const &x)
{
  if (!same_layout(x)) { throw ShapeError("Field::axpy: layout mismatch"); }
  for (std::size_t i = 0; i < data_.size(); ++i) { data_[i] += a * x.data_[i]; }
}

void Field::scale(double a)
{
  for (auto &v : data_) { v *= a; }
}

StackedVector &StackedVector::add(std::string name, Field field)
{
  if (has(name)) { throw ShapeError("StackedVector: duplicate block name '" + name + "'"); }
  blocks_.push_back({std::move(name), std::move(field)});
  return *this;
}

bool StackedVector::has(std::string const &name) const
{
  return std::any_of(blocks_.begin(), blocks_.end(), [&](Block const &b) { return b.name == name; });
}

Field &StackedVector::operator[](std::string const &name)
{
  for (auto &b : blocks_) {
    if (b.name == name) { return b.field; }
  }
  throw ShapeError("StackedVector: no block named '" + name + "'");
}

Field const &StackedVector::operator[](std::string const &name) const
{
  for (auto const &b : blocks_) {
    if (b.name == name) { return b.field; }
  }
  throw ShapeError("StackedVector: no block named '" + name + "'");
}

bool StackedVector::same_structure(StackedVector const &o) const
{
  if (blocks_.size() != o.blocks_.size()) { return false; }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name != o.blocks_[i].name || !blocks_[i].field.same_layout(o.blocks_[i].field)) { return false; }
  }
  return true;
}

void StackedVector::require_same_structure(StackedVector const &o, char const *what) const
{
  if (!same_structure(o)) { throw ShapeError(std::string(what) + ": block structure mismatch"); }
}

StackedVector StackedVector::zeros_like() const
{
  StackedVector z = *this;
  z.set_zero();
  return z;
}

void StackedVector::set_zero()
{
  for (auto &b : blocks_) { b.field.set_zero(); }
}

std::size_t StackedVector::size() const
{
  std::size_t n = 0;
  for (auto const &b : blocks_) { n += b.field.size(); }
  return n;
}

void StackedVector::axpy(double a, StackedVector const &x)
{
  require_same_structure(x, "StackedVector::axpy");
  for (std::size_t i = 0; i < blocks_.size(); ++i) { blocks_[i].field.axpy(a, x.blocks_[i].field); }
}

void StackedVector::scale(double a)
{
  for (auto &b : blocks_) { b.field.scale(a); }
}

void StackedVector::assign_lincomb(double a, StackedVector const &x, double b, StackedVector const &y)
{
  require_same_structure(x, "StackedVector::assign_lincomb");
  require_same_structure(y, "StackedVector::assign_lincomb");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    auto out = blocks_[i].field.data();
    auto xs = x.blocks_[i].field.data();
    auto ys = y.blocks_[i].field.data();
    for (std::size_t k = 0; k < out.size(); ++k) { out[k] = a * xs[k] + b * ys[k]; }
  }
}

double StackedVector::norm() const { return std::sqrt(inner(*this, *this)); }

bool StackedVector::all_finite() const
{
  for (auto const &b : blocks_) {
    for (double v : b.field.data()) {
      if (!std::isfinite(v)) { return false; }
    }
  }
  return true;
}

StackedVector single_block(std::string name, Field field)
{
  StackedVector v;
  v.add(std::move(name), std::move(field));
  return v;
}

double inner(StackedVector const &u, StackedVector const &v)
{
  u.require_same_structure(v, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < u.num_blocks(); ++i) { s += u[i].inner(v[i]); }
  return s;
}

double norm(StackedVector const &u) { return u.norm(); }

StackedVector operator+(StackedVector a, StackedVector const &b)
{
  a.axpy(1.0, b);
  return a;
}

StackedVector operator-(StackedVector a, StackedVector const &b)
{
  a.axpy(-1.0, b);
  return a;
}

StackedVector operator*(double s, StackedVector a)
{
  a.scale(s);
  return a;
}

double weighted_norm_sq(StackedVector const &x, StackedVector const &y, LocalMetric const &metric)
{
  if (!(metric.tau > 0) || !(metric.sigma > 0)) { throw std::invalid_argument("weighted_norm_sq: steps must be positive"); }
  double value = inner(x, x) / metric.tau + inner(y, y) / metric.sigma;
  if (metric.k_lin != nullptr) {
    x.require_same_structure(metric.k_lin->domain(), "weighted_norm_sq (primal vs operator domain)");
    y.require_same_structure(metric.k_lin->range(), "weighted_norm_sq (dual vs operator range)");
    value -= (1.0 + metric.omega) * inner(metric.k_lin->apply(x), y);
  }
  return value;
}

} // namespace nlsaddle
