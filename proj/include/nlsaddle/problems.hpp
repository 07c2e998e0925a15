#pragma once

#include "nlsaddle/fourier.hpp"
#include "nlsaddle/mri.hpp"
#include "nlsaddle/problem.hpp"

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace nlsaddle {

/// Parameters of the velocity (phase/magnitude) experiment.
///
/// The regularisation weights are given in units of the grid step: with
/// scale_by_h the grid step is h = 2/n and the effective weights are
/// α_r·h, α_φ·h and β_φ·h²; otherwise h = 1 and the weights are used as is.
struct ExperimentSpec
{
  int n = 64;
  double noise_sigma = 0.2;
  double coverage = 0.15;
  // Variance at the 256 reference grid (std 0.15·128 pixels); the std scales with n/256.
  double mask_variance = (0.15 * 128) * (0.15 * 128);
  double alpha_r = 1.0;
  double alpha_phi = 0.15;
  double beta_phi = 0.20;
  double gamma = 0.0;
  std::uint64_t seed = 1;
  bool scale_by_h = false;
  bool force_dc = true;

  double h() const { return scale_by_h ? 2.0 / n : 1.0; }
  void validate() const;
};

struct VelocityWeights
{
  double alpha_r;
  double alpha_phi;
  double beta_phi;
};

VelocityWeights effective_weights(ExperimentSpec const &spec);

struct VelocityPhantom
{
  Field r;
  Field phi;
};

/// (r, φ) of the phantom at a point of [−1, 1]².
std::pair<double, double> velocity_phantom_at(double x, double y);
/// Ring magnitude r = 1{0.3 < ρ < 0.9} and phase φ = x/ρ (0 at the origin) on
/// [−1, 1]² sampled at pixel centres; the fields carry grid step h.
VelocityPhantom velocity_phantom(int n, double h);
/// Indicator field of the ring 0.3 < ρ < 0.9 on the same pixel centres.
std::vector<std::uint8_t> ring_mask(int n);

/// Gaussian k-space pattern around DC (index 0, wrapped), std √variance·n/256,
/// redrawing collisions until ⌈coverage·n²⌉ coefficients are selected.
SamplingMask gaussian_mask(int n, double coverage, double variance, std::uint64_t seed, bool force_dc = true,
                           std::size_t max_attempts = 0);

/// f = S𝓕(r e^{iφ}) + ν with independent N(0, σ²) real and imaginary parts.
Field kspace_simulate(FourierSampler const &sampler, Field const &r, Field const &phi, double noise_sigma,
                      std::uint64_t seed);

/// K(r, φ, w) = (T(r, φ), ∇r, ∇φ − w, c·E w) with c = β_φ/α_φ.
/// Domain {"r", "phi", "w"}, range {"lambda", "r_grad", "phi_grad", "w_sym"}.
class VelocityOp final : public NonlinearOp
{
public:
  VelocityOp(std::shared_ptr<PhaseMagnitudeOp const> forward, double sym_scale);

  PhaseMagnitudeOp const &forward() const { return *forward_; }
  double sym_scale() const { return c_; }

  void value_to(StackedVector const &x, StackedVector &out) const override;
  void jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const override;
  void jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const override;

private:
  std::shared_ptr<PhaseMagnitudeOp const> forward_;
  double c_;
};

struct VelocityProblem
{
  SaddleProblem problem;
  std::shared_ptr<FourierSampler const> sampler;
  std::shared_ptr<VelocityOp const> op;
  VelocityWeights weights{};
  double h = 1.0;
};

/// ½‖f − T(r, φ)‖² + α_r TV(r) + TGV²_(β_φ, α_φ)(φ) in saddle form with G = 0.
/// Runs the operator self-check unless disabled.
VelocityProblem build_velocity_problem(ExperimentSpec const &spec, Field const &f, SamplingMask const &mask,
                                       bool self_check = true);

/// Modulus and argument of (S𝓕)*f as (r, φ); the argument is 0 where the
/// modulus is below 1e-12.
VelocityPhantom backprojection(FourierSampler const &sampler, Field const &f, double h);
/// Primal start (r, φ, w = 0) from the backprojection.
StackedVector velocity_initial(VelocityProblem const &vp, Field const &f);

/// Linear K(v) = (v, ∇v). Domain {"v"}, range {"lambda", "grad"}.
class TvDenoiseOp final : public LinearOp
{
public:
  explicit TvDenoiseOp(Grid grid);
  void apply_to(StackedVector const &x, StackedVector &out) const override;
  void adjoint_to(StackedVector const &y, StackedVector &out) const override;
};

struct TvProblem
{
  std::shared_ptr<TvDenoiseOp const> op;
  SaddleProblem problem; // K wrapped as a non-linear operator
  LinearProblem linear;
};

/// ½‖f − v‖² + α TV(v) with an optional Huber parameter γ.
TvProblem build_tv_denoising(Field const &f, double alpha, double gamma = 0.0);

/// Synthetic diffusion-tensor experiment.
struct DtiSpec
{
  int nx = 32;
  int ny = 32;
  int nz = 4;
  int num_gradients = 21;
  std::vector<GradientDirection> b; // empty: generated unit directions
  double s0 = 1.0;
  double noise_sigma = 0.11;
  double alpha = 0.03;
  double beta = 0.06;
  double gamma = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::vector<GradientDirection> gradients() const;
};

/// N unit directions spread over the upper hemisphere (spiral points), deterministic.
std::vector<GradientDirection> spiral_directions(int count);

struct DtiPhantom
{
  Field v;  // symmetric 3×3 tensors, eigenvalues in [−3, 0)
  Field s0; // ≡ level
};

/// Smooth tensor field whose principal direction rotates around the volume
/// centre; the seed perturbs the orientation offsets.
DtiPhantom dti_phantom(int nx, int ny, int nz, std::uint64_t seed, double s0_level = 1.0);

/// Noisy signals s_j = s0·exp(⟨b_j, v b_j⟩) + N(0, σ²).
Field dti_simulate(StejskalTannerOp const &op, Field const &v, double noise_sigma, std::uint64_t seed);

/// Log-linear least-squares tensor fit of the signals (signals below
/// floor·s0 are clamped to that floor before taking logarithms).
Field log_linear_fit(Field const &signals, Field const &s0, std::vector<GradientDirection> const &b,
                     double floor = 1e-3);

/// K(v, w) = (T(v), ∇v − w, c·E w) with T the Stejskal–Tanner model.
/// Domain {"v", "w"}, range {"s", "v_grad", "w_sym"}.
class DtiOp final : public NonlinearOp
{
public:
  DtiOp(std::shared_ptr<StejskalTannerOp const> forward, double sym_scale);

  StejskalTannerOp const &forward() const { return *forward_; }

  void value_to(StackedVector const &x, StackedVector &out) const override;
  void jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const override;
  void jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const override;

private:
  std::shared_ptr<StejskalTannerOp const> forward_;
  double c_;
};

struct DtiProblem
{
  SaddleProblem problem;
  std::shared_ptr<DtiOp const> op;
};

/// Σ_j ½‖s_j − T_j(v)‖² + TGV²_(β, α)(v), channelwise over the six tensor entries.
DtiProblem build_dti_problem(DtiSpec const &spec, Field const &signals, Field const &s0, bool self_check = true);

/// Adjoint and finite-difference Jacobian checks at x; throws std::logic_error
/// when a mismatch exceeds the tolerances.
void self_check(NonlinearOp const &k, StackedVector const &x, double adjoint_tol = 1e-10, double jacobian_tol = 1e-5);

} // namespace nlsaddle
