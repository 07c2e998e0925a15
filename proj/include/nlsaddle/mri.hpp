#pragma once

#include "nlsaddle/fourier.hpp"
#include "nlsaddle/operators.hpp"

#include <array>
#include <stdexcept>

namespace nlsaddle {

/// Raised when a forward model produces non-finite values (typically unscaled data).
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// T(r, φ) = S𝓕(r·e^{iφ}). Domain {"r", "phi"}, range {"lambda"}.
///
/// Jacobian: ∇T(r, φ)(dr, dφ) = S𝓕((dr + i·r·dφ)·e^{iφ}); the adjoint pulls
/// back v = (S𝓕)*z to dr = Re(v e^{−iφ}), dφ = r·Im(v e^{−iφ}).
class PhaseMagnitudeOp final : public NonlinearOp
{
public:
  PhaseMagnitudeOp(std::shared_ptr<FourierSampler const> sampler, double h);

  FourierSampler const &sampler() const { return *sampler_; }

  using NonlinearOp::value;
  void value(Field const &r, Field const &phi, Field &out) const;
  void jac(Field const &r, Field const &phi, Field const &dr, Field const &dphi, Field &out) const;
  void jac_adjoint(Field const &r, Field const &phi, Field const &z, Field &dr, Field &dphi) const;

  void value_to(StackedVector const &x, StackedVector &out) const override;
  void jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const override;
  void jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const override;

private:
  std::shared_ptr<FourierSampler const> sampler_;
};

using GradientDirection = std::array<double, 3>;

/// Stejskal–Tanner signal model s_j(x) = s0(x)·exp(⟨b_j, v(x) b_j⟩).
/// Domain {"v"} (symmetric 3×3 tensor field), range {"s"} (N components per voxel).
class StejskalTannerOp final : public NonlinearOp
{
public:
  StejskalTannerOp(Field s0, std::vector<GradientDirection> b);

  std::size_t num_gradients() const { return b_.size(); }
  Field const &s0() const { return s0_; }
  std::vector<GradientDirection> const &gradients() const { return b_; }
  /// Layout of the signal field: N unit-weight components per voxel.
  Field signal_field() const;

  using NonlinearOp::value;
  void value(Field const &v, Field &out) const;
  void jac(Field const &v, Field const &dv, Field &out) const;
  void jac_adjoint(Field const &v, Field const &y, Field &dv) const;

  void value_to(StackedVector const &x, StackedVector &out) const override;
  void jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const override;
  void jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const override;

private:
  // q_j(v) = ⟨b_j, v b_j⟩ = Σ_e coeff_[j][e]·v_e over the 6 stored entries.
  double exponent(std::size_t j, double const *v) const;
  double signal(std::size_t point, std::size_t j, double const *v) const;

  Field s0_;
  std::vector<GradientDirection> b_;
  std::vector<std::array<double, 6>> coeff_;
};

} // namespace nlsaddle
