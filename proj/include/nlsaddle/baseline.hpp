#pragma once

#include "nlsaddle/solver.hpp"

namespace nlsaddle {

/// Dynamic primal bound for the pseudo-duality gap.
struct PseudoGapState
{
  double M = 0.0; // 0: initialise from the first iterate
  double growth = 1.5;
  double initial_factor = 10.0;
};

struct GapValue
{
  double value = 0.0;
  bool infeasible_dual = false;
  double M = 0.0;
};

/// Pseudo-duality gap of the linear problem with G replaced by δ_B(0,M) when G = 0:
///   [G_M(x) + F(Kx + c)] + [G_M*(−K*y) + F*(y) − ⟨c, y⟩].
/// M grows (M ← growth·max(M, ‖x‖)) whenever x leaves the ball or the gap is
/// negative. Other G use their own value and conjugate. An infeasible y gives +∞.
GapValue pseudo_gap(StackedVector const &x, StackedVector const &y, LinearProblem const &problem, PseudoGapState &state);

struct LinearPdhgmConfig
{
  double tau = 0.5;
  double sigma = 0.5;
  double omega = 1.0;
  double rho2 = 1e-3;   // stop on pseudo-gap < rho2
  double rho_step = 0.0; // optional stop on ‖xⁱ − xⁱ⁺¹‖ < rho_step (0 disables)
  int max_iters = 100000;
  int gap_every = 10;   // gap evaluated at iteration 0 and every gap_every iterations
  int telemetry_every = 50;
  PseudoGapState gap{};
  IterateObserver observer;
};

struct LinearRecord
{
  int iter = 0;
  double step_norm = 0.0;
  double gap = 0.0;
  double M = 0.0;
  double wall_ms = 0.0;
};

struct LinearSolveResult
{
  StackedVector x;
  StackedVector y;
  std::vector<LinearRecord> records;
  Status status = Status::IterCap;
  int iterations = 0;
  double gap = 0.0;
  bool gap_infeasible = false;
  double wall_ms = 0.0;
};

/// Steps τ = τ₀/‖K‖, σ = σ₀/‖K‖ for a linear operator (full power iteration).
StepSizes linear_steps(LinearOp const &k, double tau0, double sigma0);

/// Standard PDHGM on min_x max_y G(x) + ⟨c + Kx, y⟩ − F*(y).
LinearSolveResult linear_pdhgm(LinearProblem const &problem, StackedVector x, StackedVector y,
                               LinearPdhgmConfig const &config);

struct GNConfig
{
  double rho_outer = 1e-4;
  double rho2 = 1e-3;
  int max_outer = 100;
  int max_inner = 100000;
  bool warm_start = true;
  double tau0 = 0.95;
  double sigma0 = 0.95;
  int gap_every = 10;

  void validate() const;
};

struct GNRecord
{
  int iter = 0;
  int inner_iters = 0;
  double step_norm = 0.0;
  double gap_at_exit = 0.0;
  double wall_ms = 0.0;
  bool inner_converged = false;
};

struct GNResult
{
  StackedVector x;
  StackedVector y;
  std::vector<GNRecord> records;
  Status status = Status::IterCap;
  int outer_iterations = 0;
  long total_inner = 0;
  double wall_ms = 0.0;
};

/// Gauss-Newton: linearise K at xⁱ (K_{xⁱ}, c = K(xⁱ) − K_{xⁱ}xⁱ), solve the
/// convex problem by linear PDHGM to pseudo-gap rho2, repeat until
/// ‖xⁱ − xⁱ⁺¹‖ < rho_outer.
GNResult gauss_newton(SaddleProblem const &problem, StackedVector x, StackedVector y, GNConfig const &config);

} // namespace nlsaddle
