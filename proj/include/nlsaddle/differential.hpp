#pragma once

#include "nlsaddle/operators.hpp"

namespace nlsaddle {

// Finite-difference operators on 2D/3D grids, applied channelwise.
//
// Forward differences use a replicate (Neumann) boundary: the difference
// across the last index is 0. Backward differences are defined as the
// negative adjoint of the forward ones, ∂⁻ = −(∂⁺)*, so that the divergence
// and the symmetrised gradient chain consistently in TGV-type cascades.
// Every difference is divided by the grid step h.

/// Layout of a gradient of an input field with C components on a d-dimensional grid:
/// C·d components ordered (channel, direction), weights inherited from the channel.
Field gradient_field(Field const &u);
/// Layout of the symmetrised gradient of a field with C·d components:
/// C·s components, s = d(d+1)/2, each block ordered like Field::sym_tensor.
Field symgrad_field(Field const &w, int channels);

void forward_gradient(Field const &u, Field &out);
/// Adjoint of forward_gradient, i.e. the negative discrete divergence.
void forward_gradient_adjoint(Field const &g, Field &out);

/// E w = (∇⁻w + (∇⁻w)ᵀ)/2 per channel, with backward differences.
void symmetrised_gradient(Field const &w, int channels, Field &out);
void symmetrised_gradient_adjoint(Field const &e, int channels, Field &out);

/// Single-block wrapper: domain {"u"}, range {"grad"}.
class GradientOp final : public LinearOp
{
public:
  explicit GradientOp(Field const &layout);
  void apply_to(StackedVector const &x, StackedVector &out) const override;
  void adjoint_to(StackedVector const &y, StackedVector &out) const override;
};

/// Single-block wrapper: domain {"w"}, range {"sym"}.
class SymGradientOp final : public LinearOp
{
public:
  SymGradientOp(Field const &layout, int channels);
  void apply_to(StackedVector const &x, StackedVector &out) const override;
  void adjoint_to(StackedVector const &y, StackedVector &out) const override;

private:
  int channels_;
};

} // namespace nlsaddle
