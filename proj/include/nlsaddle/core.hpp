#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsaddle {

/// Thrown when two fields or stacked vectors do not share a layout.
class ShapeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Regular pixel/voxel grid. 2D grids have nz == 1.
struct Grid
{
  int nx = 1;
  int ny = 1;
  int nz = 1;
  double h = 1.0; // spatial step

  std::size_t points() const { return std::size_t(nx) * ny * nz; }
  int dims() const { return nz > 1 ? 3 : 2; }
  bool operator==(Grid const &o) const { return nx == o.nx && ny == o.ny && nz == o.nz && h == o.h; }

  std::size_t index(int i, int j, int k = 0) const { return (std::size_t(k) * ny + j) * nx + i; }
};

enum class FieldKind
{
  Scalar,    // one real per point
  Complex,   // interleaved (re, im) per point
  Vector,    // m reals per point
  SymTensor, // unique entries of a symmetric matrix, off-diagonals weighted by 2
};

/// A field of `comps` reals per grid point stored point-major (data[p * comps + c]).
///
/// Each component carries an inner-product weight; symmetric tensors store
/// only unique entries and weight the off-diagonals by 2 so that the
/// Euclidean inner product matches the Frobenius product of the full matrix.
class Field
{
public:
  Field() = default;
  Field(FieldKind kind, Grid grid, int comps, std::vector<double> weights);

  static Field scalar(Grid grid);
  static Field complex(Grid grid);
  static Field vector(Grid grid, int m);
  /// Symmetric d×d tensors with storage order (diagonal..., then upper off-diagonals row-wise):
  /// d = 2: (xx, yy, xy); d = 3: (xx, yy, zz, xy, xz, yz).
  static Field sym_tensor(Grid grid, int d);
  /// Vector field with explicit per-component inner-product weights.
  static Field vector_weighted(Grid grid, std::vector<double> weights);

  FieldKind kind() const { return kind_; }
  Grid const &grid() const { return grid_; }
  int comps() const { return comps_; }
  std::span<double const> weights() const { return weights_; }
  std::size_t size() const { return data_.size(); }
  std::size_t points() const { return grid_.points(); }

  std::span<double> data() { return data_; }
  std::span<double const> data() const { return data_; }
  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double &at(std::size_t point, int c) { return data_[point * comps_ + c]; }
  double at(std::size_t point, int c) const { return data_[point * comps_ + c]; }

  bool same_layout(Field const &o) const;
  Field zeros_like() const;
  void set_zero();
  void fill(double v);

  double inner(Field const &o) const;
  double norm() const;
  /// Weighted Euclidean norm of the components at one point.
  double point_norm(std::size_t point) const;

  void axpy(double a, Field const &x); // this += a x
  void scale(double a);

private:
  FieldKind kind_ = FieldKind::Scalar;
  Grid grid_;
  int comps_ = 1;
  std::vector<double> weights_{1.0};
  std::vector<double> data_;
};

/// Component weights of a symmetric d×d tensor in the storage order of Field::sym_tensor.
std::vector<double> sym_tensor_weights(int d);

struct Block
{
  std::string name;
  Field field;
};

/// Ordered list of uniquely named field blocks, e.g. the primal (r, φ, w) or
/// the dual (λ, φ_r, φ_φ, ψ_φ) of a saddle-point problem.
class StackedVector
{
public:
  StackedVector() = default;

  StackedVector &add(std::string name, Field field);

  std::size_t num_blocks() const { return blocks_.size(); }
  std::vector<Block> const &blocks() const { return blocks_; }
  std::vector<Block> &blocks() { return blocks_; }

  bool has(std::string const &name) const;
  Field &operator[](std::string const &name);
  Field const &operator[](std::string const &name) const;
  Field &operator[](std::size_t i) { return blocks_[i].field; }
  Field const &operator[](std::size_t i) const { return blocks_[i].field; }

  bool same_structure(StackedVector const &o) const;
  void require_same_structure(StackedVector const &o, char const *what) const;

  StackedVector zeros_like() const;
  void set_zero();
  std::size_t size() const;

  void axpy(double a, StackedVector const &x);
  void scale(double a);
  /// this = a x + b y, all with the same structure.
  void assign_lincomb(double a, StackedVector const &x, double b, StackedVector const &y);

  double norm() const;
  bool all_finite() const;

private:
  std::vector<Block> blocks_;
};

StackedVector single_block(std::string name, Field field);

/// Σ_blocks ⟨u_b, v_b⟩ with per-component weights.
double inner(StackedVector const &u, StackedVector const &v);
double norm(StackedVector const &u);
StackedVector operator+(StackedVector a, StackedVector const &b);
StackedVector operator-(StackedVector a, StackedVector const &b);
StackedVector operator*(double s, StackedVector a);

class LinearOp;

/// Local metric ⟨u, M u⟩ with M = [[I/τ, −K*], [−ωK, I/σ]] for u = (x, y).
struct LocalMetric
{
  double tau = 1.0;
  double sigma = 1.0;
  LinearOp const *k_lin = nullptr;
  double omega = 1.0;
};

double weighted_norm_sq(StackedVector const &x, StackedVector const &y, LocalMetric const &metric);

} // namespace nlsaddle
