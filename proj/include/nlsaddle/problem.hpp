#pragma once

#include "nlsaddle/operators.hpp"
#include "nlsaddle/prox.hpp"

#include <memory>
#include <string>

namespace nlsaddle {

/// min_x max_y G(x) + ⟨K(x), y⟩ − F*(y) with block-separable F*.
struct SaddleProblem
{
  std::shared_ptr<NonlinearOp const> k;
  std::shared_ptr<Resolvent const> g;
  std::shared_ptr<BlockResolvent const> f_star;
  /// Dual block holding the range of the non-linear forward model (λ); empty when
  /// the problem has no quadratic fidelity block.
  std::string fidelity_block;

  StackedVector primal_zero() const { return k->domain(); }
  StackedVector dual_zero() const { return k->range(); }

  /// Measured data f of the fidelity block, or nullptr.
  Field const *fidelity_data() const;
  /// ‖K(x)_λ − f‖ when a fidelity block is declared, NaN otherwise.
  double data_residual(StackedVector const &x) const;
  double data_residual_from_value(StackedVector const &kx) const;

  /// Primal objective G(x) + F(K(x)), with F the conjugate of F*.
  ExtendedReal primal_objective(StackedVector const &x) const;

  void validate() const;
};

/// Linear saddle problem min_x max_y G(x) + ⟨c + K x, y⟩ − F*(y).
struct LinearProblem
{
  std::shared_ptr<LinearOp const> k;
  std::shared_ptr<Resolvent const> g;
  std::shared_ptr<BlockResolvent const> f_star;
  StackedVector offset; // empty means c = 0

  void validate() const;
};

} // namespace nlsaddle
