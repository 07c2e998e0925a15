#pragma once

#include "nlsaddle/problem.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace nlsaddle {

enum class Variant
{
  Exact,        // dual update evaluates K(x_ω)
  Linearised,   // K(xⁱ) + ∇K(xⁱ)(x_ω − xⁱ)
  Interpolated, // (1+ω)K(xⁱ⁺¹) − ωK(xⁱ)
};

std::string to_string(Variant v);
Variant parse_variant(std::string const &s);

enum class Status
{
  Converged,
  IterCap,
  Diverged,
};

std::string to_string(Status s);

/// Called after every iteration with the new iterates.
using IterateObserver = std::function<void(int iter, StackedVector const &x, StackedVector const &y)>;

struct SolverConfig
{
  Variant variant = Variant::Exact;
  double omega = 1.0;
  double tau0 = 0.95;
  double sigma0 = 0.95;
  /// Use τ = τ₀/L, σ = σ₀/L with L the running supremum of ‖∇K(xⁱ)‖;
  /// otherwise τ₀, σ₀ are used as the steps directly.
  bool adapt_steps = true;
  double rho = 1e-4; // stop when ‖xⁱ − xⁱ⁺¹‖ < rho
  int max_iters = 100000;
  int telemetry_every = 50;
  int power_steps = 2;        // warm-started power steps per iteration
  int full_estimate_every = 100;
  PowerIterationOptions full_estimate{};
  IterateObserver observer;

  void validate() const;
};

struct IterationRecord
{
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  int iter = 0;
  double step_norm = nan;     // ‖xⁱ − xⁱ⁺¹‖ over the primal blocks
  double weighted_step = nan; // ‖uⁱ⁺¹ − uⁱ‖ in the local metric M_{xⁱ}
  double data_residual = nan; // ‖f − T(xⁱ⁺¹)‖
  double L = nan;
  double tau = nan;
  double sigma = nan;
  double lin_error = nan; // ‖D_{xⁱ}(uⁱ⁺¹)‖, exact variant only
  double wall_ms = 0.0;
};

struct SolveResult
{
  StackedVector x;
  StackedVector y;
  std::vector<IterationRecord> records;
  Status status = Status::IterCap;
  int iterations = 0;
  double L = 0.0;
  double wall_ms = 0.0;
  std::string message;
};

/// Running supremum of the Jacobian norm and the power-iteration warm start.
struct StepSizeState
{
  double L = 0.0;
  PowerIterationState warm;
  int updates = 0;
};

struct StepSizes
{
  double tau;
  double sigma;
};

/// L ← max(L, ‖K_jac‖) (estimated with `steps` warm-started power iterations),
/// then τ = τ₀/L and σ = σ₀/L. Throws if the estimate is zero.
StepSizes step_update(StepSizeState &state, LinearOp const &k_jac, double tau0, double sigma0,
                      PowerIterationOptions const &opt);

/// Non-linear primal–dual hybrid gradient method:
///   xⁱ⁺¹ = (I + τ∂G)⁻¹(xⁱ − τ[∇K(xⁱ)]* yⁱ)
///   x_ω  = xⁱ⁺¹ + ω(xⁱ⁺¹ − xⁱ)
///   yⁱ⁺¹ = (I + σ∂F*)⁻¹(yⁱ + σ·K̃), K̃ chosen by the variant.
SolveResult nl_pdhgm(SaddleProblem const &problem, StackedVector x, StackedVector y, SolverConfig const &config);

} // namespace nlsaddle
