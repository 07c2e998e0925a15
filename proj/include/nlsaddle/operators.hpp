#pragma once

#include "nlsaddle/core.hpp"

#include <cstdint>
#include <memory>

namespace nlsaddle {

/// Linear map between two stacked-vector spaces.
///
/// Implementations must satisfy the adjoint identity
/// ⟨apply(x), y⟩ = ⟨x, adjoint_apply(y)⟩ under the weighted inner products
/// of the block fields.
class LinearOp
{
public:
  LinearOp(StackedVector domain, StackedVector range);
  virtual ~LinearOp() = default;

  StackedVector const &domain() const { return domain_; }
  StackedVector const &range() const { return range_; }

  /// `out` must already have the range structure; it is overwritten.
  virtual void apply_to(StackedVector const &x, StackedVector &out) const = 0;
  virtual void adjoint_to(StackedVector const &y, StackedVector &out) const = 0;

  StackedVector apply(StackedVector const &x) const;
  StackedVector adjoint_apply(StackedVector const &y) const;

protected:
  StackedVector domain_;
  StackedVector range_;
};

/// Twice continuously differentiable operator K with hand-derived Jacobian.
class NonlinearOp
{
public:
  NonlinearOp(StackedVector domain, StackedVector range);
  virtual ~NonlinearOp() = default;

  StackedVector const &domain() const { return domain_; }
  StackedVector const &range() const { return range_; }

  virtual void value_to(StackedVector const &x, StackedVector &out) const = 0;
  /// out = ∇K(x) dx
  virtual void jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const = 0;
  /// out = [∇K(x)]* y
  virtual void jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const = 0;
  virtual bool is_linear() const { return false; }

  StackedVector value(StackedVector const &x) const;
  StackedVector jac_apply(StackedVector const &x, StackedVector const &dx) const;
  StackedVector jac_adjoint_apply(StackedVector const &x, StackedVector const &y) const;

  /// The linear operator dx ↦ ∇K(x) dx with x copied at construction.
  /// Holds a reference to this operator, which must outlive the result.
  std::unique_ptr<LinearOp> frozen_jacobian(StackedVector const &x) const;

protected:
  StackedVector domain_;
  StackedVector range_;
};

class FrozenJacobian final : public LinearOp
{
public:
  FrozenJacobian(NonlinearOp const &op, StackedVector at);
  void apply_to(StackedVector const &x, StackedVector &out) const override;
  void adjoint_to(StackedVector const &y, StackedVector &out) const override;
  StackedVector const &base_point() const { return at_; }

private:
  NonlinearOp const &op_;
  StackedVector at_;
};

/// Views a linear operator as a (trivially) non-linear one: K(x) = A x.
class LinearWrapper final : public NonlinearOp
{
public:
  explicit LinearWrapper(std::shared_ptr<LinearOp const> op);
  void value_to(StackedVector const &x, StackedVector &out) const override;
  void jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const override;
  void jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const override;
  bool is_linear() const override { return true; }
  LinearOp const &linear() const { return *op_; }

private:
  std::shared_ptr<LinearOp const> op_;
};

/// Identity on a given space.
class IdentityOp final : public LinearOp
{
public:
  explicit IdentityOp(StackedVector space);
  void apply_to(StackedVector const &x, StackedVector &out) const override;
  void adjoint_to(StackedVector const &y, StackedVector &out) const override;
};

/// Componentwise scaling: out_b = s_b ⊙ x_b with one multiplier per stored real.
class DiagonalOp final : public LinearOp
{
public:
  DiagonalOp(StackedVector space, StackedVector diagonal);
  void apply_to(StackedVector const &x, StackedVector &out) const override;
  void adjoint_to(StackedVector const &y, StackedVector &out) const override;

private:
  StackedVector diag_;
};

/// Dense matrix acting on a single vector block "x" (rows × cols); used for small test problems.
class MatrixOp final : public LinearOp
{
public:
  MatrixOp(int rows, int cols, std::vector<double> row_major);
  void apply_to(StackedVector const &x, StackedVector &out) const override;
  void adjoint_to(StackedVector const &y, StackedVector &out) const override;

private:
  int rows_, cols_;
  std::vector<double> a_;
};

/// Caller-owned warm-start state for repeated norm estimates.
struct PowerIterationState
{
  StackedVector vector; // empty until the first estimate
};

struct PowerIterationOptions
{
  int max_iters = 50;
  double rel_tol = 1e-4;
};

/// Largest singular value of A by power iteration on A*A; the returned value is
/// the running maximum of √(Rayleigh quotient) and so nondecreasing in the
/// iteration count. Returns 0 for the zero operator.
double op_norm_estimate(LinearOp const &a, PowerIterationState *warm = nullptr, PowerIterationOptions const &opt = {});

/// Overwrites every stored real with an independent standard normal draw.
void fill_normal(StackedVector &v, std::uint64_t seed);

/// |⟨A x, y⟩ − ⟨x, A* y⟩| / (‖A x‖‖y‖ + ‖x‖‖A* y‖) for random x, y.
double adjoint_mismatch(LinearOp const &a, std::uint64_t seed);
/// Same for the Jacobian of K at x.
double jacobian_adjoint_mismatch(NonlinearOp const &k, StackedVector const &x, std::uint64_t seed);
/// ‖(K(x + εd) − K(x − εd))/(2ε) − ∇K(x)d‖ / ‖∇K(x)d‖ for a random unit direction d.
double jacobian_fd_mismatch(NonlinearOp const &k, StackedVector const &x, std::uint64_t seed, double eps = 1e-5);

/// y-block of the linearisation defect K(x̄) + ∇K(x̄)(x_ω − x̄) − K(x_ω), x_ω = x + ω(x − x̄).
StackedVector linearisation_error(NonlinearOp const &k, StackedVector const &xbar, StackedVector const &x, double omega);

} // namespace nlsaddle
