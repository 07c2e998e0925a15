#include "nlsaddle/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nlsaddle {

LinearOp::LinearOp(StackedVector domain, StackedVector range)
  : domain_(std::move(domain))
  , range_(std::move(range))
{
  domain_.set_zero();
  range_.set_zero();
}

StackedVector LinearOp::apply(StackedVector const &x) const
{
  x.require_same_structure(domain_, "LinearOp::apply");
  StackedVector out = range_;
  apply_to(x, out);
  return out;
}

StackedVector LinearOp::adjoint_apply(StackedVector const &y) const
{
  y.require_same_structure(range_, "LinearOp::adjoint_apply");
  StackedVector out = domain_;
  adjoint_to(y, out);
  return out;
}

NonlinearOp::NonlinearOp(StackedVector domain, StackedVector range)
  : domain_(std::move(domain))
  , range_(std::move(range))
{
  domain_.set_zero();
  range_.set_zero();
}

StackedVector NonlinearOp::value(StackedVector const &x) const
{
  x.require_same_structure(domain_, "NonlinearOp::value");
  StackedVector out = range_;
  value_to(x, out);
  return out;
}

StackedVector NonlinearOp::jac_apply(StackedVector const &x, StackedVector const &dx) const
{
  x.require_same_structure(domain_, "NonlinearOp::jac_apply");
  dx.require_same_structure(domain_, "NonlinearOp::jac_apply");
  StackedVector out = range_;
  jac_apply_to(x, dx, out);
  return out;
}

StackedVector NonlinearOp::jac_adjoint_apply(StackedVector const &x, StackedVector const &y) const
{
  x.require_same_structure(domain_, "NonlinearOp::jac_adjoint_apply");
  y.require_same_structure(range_, "NonlinearOp::jac_adjoint_apply");
  StackedVector out = domain_;
  jac_adjoint_to(x, y, out);
  return out;
}

std::unique_ptr<LinearOp> NonlinearOp::frozen_jacobian(StackedVector const &x) const
{
  return std::make_unique<FrozenJacobian>(*this, x);
}

FrozenJacobian::FrozenJacobian(NonlinearOp const &op, StackedVector at)
  : LinearOp(op.domain(), op.range())
  , op_(op)
  , at_(std::move(at))
{
  at_.require_same_structure(op.domain(), "FrozenJacobian");
}

void FrozenJacobian::apply_to(StackedVector const &x, StackedVector &out) const { op_.jac_apply_to(at_, x, out); }
void FrozenJacobian::adjoint_to(StackedVector const &y, StackedVector &out) const { op_.jac_adjoint_to(at_, y, out); }

LinearWrapper::LinearWrapper(std::shared_ptr<LinearOp const> op)
  : NonlinearOp(op->domain(), op->range())
  , op_(std::move(op))
{
}

void LinearWrapper::value_to(StackedVector const &x, StackedVector &out) const { op_->apply_to(x, out); }

void LinearWrapper::jac_apply_to(StackedVector const &, StackedVector const &dx, StackedVector &out) const
{
  op_->apply_to(dx, out);
}

void LinearWrapper::jac_adjoint_to(StackedVector const &, StackedVector const &y, StackedVector &out) const
{
  op_->adjoint_to(y, out);
}

IdentityOp::IdentityOp(StackedVector space)
  : LinearOp(space, space)
{
}

void IdentityOp::apply_to(StackedVector const &x, StackedVector &out) const { out = x; }
void IdentityOp::adjoint_to(StackedVector const &y, StackedVector &out) const { out = y; }

DiagonalOp::DiagonalOp(StackedVector space, StackedVector diagonal)
  : LinearOp(space, space)
  , diag_(std::move(diagonal))
{
  diag_.require_same_structure(domain_, "DiagonalOp");
}

void DiagonalOp::apply_to(StackedVector const &x, StackedVector &out) const
{
  for (std::size_t b = 0; b < x.num_blocks(); ++b) {
    auto xs = x[b].data();
    auto ds = diag_[b].data();
    auto os = out[b].data();
    for (std::size_t i = 0; i < xs.size(); ++i) { os[i] = ds[i] * xs[i]; }
  }
}

void DiagonalOp::adjoint_to(StackedVector const &y, StackedVector &out) const { apply_to(y, out); }

namespace {
StackedVector column_space(int n)
{
  StackedVector v;
  v.add("x", Field::vector(Grid{1, 1, 1, 1.0}, n));
  return v;
}
} // namespace

MatrixOp::MatrixOp(int rows, int cols, std::vector<double> row_major)
  : LinearOp(column_space(cols), column_space(rows))
  , rows_(rows)
  , cols_(cols)
  , a_(std::move(row_major))
{
  if (a_.size() != std::size_t(rows) * cols) { throw ShapeError("MatrixOp: entry count does not match rows × cols"); }
}

void MatrixOp::apply_to(StackedVector const &x, StackedVector &out) const
{
  auto xs = x[0].data();
  auto os = out[0].data();
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int c = 0; c < cols_; ++c) { s += a_[std::size_t(r) * cols_ + c] * xs[c]; }
    os[r] = s;
  }
}

void MatrixOp::adjoint_to(StackedVector const &y, StackedVector &out) const
{
  auto ys = y[0].data();
  auto os = out[0].data();
  for (int c = 0; c < cols_; ++c) {
    double s = 0.0;
    for (int r = 0; r < rows_; ++r) { s += a_[std::size_t(r) * cols_ + c] * ys[r]; }
    os[c] = s;
  }
}

void fill_normal(StackedVector &v, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (auto &b : v.blocks()) {
    for (double &e : b.field.data()) { e = normal(rng); }
  }
}

double adjoint_mismatch(LinearOp const &a, std::uint64_t seed)
{
  StackedVector x = a.domain();
  StackedVector y = a.range();
  fill_normal(x, seed);
  fill_normal(y, seed + 1);
  StackedVector const ax = a.apply(x);
  StackedVector const aty = a.adjoint_apply(y);
  double const scale = ax.norm() * y.norm() + x.norm() * aty.norm();
  return scale > 0 ? std::abs(inner(ax, y) - inner(x, aty)) / scale : 0.0;
}

double jacobian_adjoint_mismatch(NonlinearOp const &k, StackedVector const &x, std::uint64_t seed)
{
  FrozenJacobian const jac(k, x);
  return adjoint_mismatch(jac, seed);
}

double jacobian_fd_mismatch(NonlinearOp const &k, StackedVector const &x, std::uint64_t seed, double eps)
{
  StackedVector d = k.domain();
  fill_normal(d, seed);
  d.scale(1.0 / d.norm());
  StackedVector xp = x, xm = x;
  xp.axpy(eps, d);
  xm.axpy(-eps, d);
  StackedVector fd = k.value(xp) - k.value(xm);
  fd.scale(0.5 / eps);
  StackedVector const jd = k.jac_apply(x, d);
  double const n = jd.norm();
  return n > 0 ? (fd - jd).norm() / n : fd.norm();
}

double op_norm_estimate(LinearOp const &a, PowerIterationState *warm, PowerIterationOptions const &opt)
{
  StackedVector v;
  if (warm != nullptr && warm->vector.same_structure(a.domain()) && warm->vector.norm() > 0) {
    v = warm->vector;
  } else {
    v = a.domain();
    fill_normal(v, 0x5eed);
  }
  double nv = v.norm();
  if (nv == 0.0) { return 0.0; }
  v.scale(1.0 / nv);

  StackedVector av = a.range();
  StackedVector ata = a.domain();
  double best = 0.0;
  for (int it = 0; it < std::max(1, opt.max_iters); ++it) {
    a.apply_to(v, av);
    double const estimate = av.norm(); // √⟨v, A*A v⟩ for unit v
    double const previous = best;
    best = std::max(best, estimate);
    if (estimate == 0.0) { break; }
    a.adjoint_to(av, ata);
    double const n = ata.norm();
    if (n == 0.0) { break; }
    v = ata;
    v.scale(1.0 / n);
    if (it > 0 && best - previous <= opt.rel_tol * best) { break; }
  }
  if (warm != nullptr) { warm->vector = v; }
  return best;
}

StackedVector linearisation_error(NonlinearOp const &k, StackedVector const &xbar, StackedVector const &x, double omega)
{
  xbar.require_same_structure(k.domain(), "linearisation_error");
  x.require_same_structure(k.domain(), "linearisation_error");
  StackedVector x_omega = x;
  x_omega.scale(1.0 + omega);
  x_omega.axpy(-omega, xbar);
  StackedVector step = x_omega - xbar;
  StackedVector d = k.value(xbar);
  d.axpy(1.0, k.jac_apply(xbar, step));
  d.axpy(-1.0, k.value(x_omega));
  return d;
}

} // namespace nlsaddle
