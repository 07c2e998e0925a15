#include "nlsaddle/baseline.hpp"

#include <chrono>
#include <cmath>

namespace nlsaddle {

namespace {
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool is_zero_functional(Resolvent const &g) { return dynamic_cast<ZeroFunctional const *>(&g) != nullptr; }
} // namespace

GapValue pseudo_gap(StackedVector const &x, StackedVector const &y, LinearProblem const &problem, PseudoGapState &state)
{
  LinearOp const &k = *problem.k;
  bool const has_offset = problem.offset.num_blocks() > 0;

  StackedVector kx = k.apply(x);
  if (has_offset) { kx.axpy(1.0, problem.offset); }
  StackedVector kty = k.adjoint_apply(y);
  kty.scale(-1.0);

  ExtendedReal fixed = problem.f_star->conjugate_value(kx);
  fixed += problem.f_star->value(y);
  if (has_offset) { fixed.value -= inner(problem.offset, y); }

  GapValue out;
  if (fixed.infeasible) {
    out.value = std::numeric_limits<double>::infinity();
    out.infeasible_dual = true;
    out.M = state.M;
    return out;
  }

  if (!is_zero_functional(*problem.g)) {
    ExtendedReal v = problem.g->value(x);
    v += problem.g->conjugate_value(kty);
    out.value = fixed.value + v.value;
    out.M = state.M;
    return out;
  }

  double const xn = x.norm();
  double const ktyn = kty.norm();
  if (state.M <= 0.0) { state.M = state.initial_factor * (xn > 0 ? xn : 1.0); }
  if (xn > state.M) { state.M = state.growth * std::max(state.M, xn); }
  double gap = fixed.value + state.M * ktyn;
  for (int grow = 0; gap < 0.0 && ktyn > 0.0 && grow < 64; ++grow) {
    state.M *= state.growth;
    gap = fixed.value + state.M * ktyn;
  }
  out.value = gap;
  out.M = state.M;
  return out;
}

StepSizes linear_steps(LinearOp const &k, double tau0, double sigma0)
{
  double const L = op_norm_estimate(k, nullptr, {});
  if (!(L > 0)) { throw std::domain_error("linear_steps: operator norm estimate is zero"); }
  return {tau0 / L, sigma0 / L};
}

LinearSolveResult linear_pdhgm(LinearProblem const &problem, StackedVector x, StackedVector y,
                               LinearPdhgmConfig const &config)
{
  problem.validate();
  if (!(config.tau > 0) || !(config.sigma > 0)) { throw std::invalid_argument("linear_pdhgm: steps must be positive"); }
  LinearOp const &k = *problem.k;
  x.require_same_structure(k.domain(), "linear_pdhgm initial primal");
  y.require_same_structure(k.range(), "linear_pdhgm initial dual");
  bool const has_offset = problem.offset.num_blocks() > 0;

  auto const start = Clock::now();
  LinearSolveResult result;
  PseudoGapState gap_state = config.gap;
  double const tau = config.tau;
  double const sigma = config.sigma;
  double const omega = config.omega;

  StackedVector x_new = x, x_omega = x, grad = x;
  StackedVector kx = y, arg = y, y_new = y;

  auto finish = [&](Status status, int iters, GapValue const &g) {
    result.status = status;
    result.iterations = iters;
    result.gap = g.value;
    result.gap_infeasible = g.infeasible_dual;
    result.x = std::move(x);
    result.y = std::move(y);
    result.wall_ms = elapsed_ms(start);
    return std::move(result);
  };

  GapValue gap = pseudo_gap(x, y, problem, gap_state);
  if (gap.value < config.rho2) { return finish(Status::Converged, 0, gap); }

  for (int it = 1; it <= config.max_iters; ++it) {
    k.adjoint_to(y, grad);
    x_omega.assign_lincomb(1.0, x, -tau, grad);
    problem.g->resolve(x_omega, tau, x_new);
    x_omega.assign_lincomb(1.0 + omega, x_new, -omega, x);
    k.apply_to(x_omega, kx);
    if (has_offset) { kx.axpy(1.0, problem.offset); }
    arg.assign_lincomb(1.0, y, sigma, kx);
    problem.f_star->resolve(arg, sigma, y_new);

    if (!x_new.all_finite() || !y_new.all_finite()) { return finish(Status::Diverged, it - 1, gap); }

    double const step_norm = (x_new - x).norm();
    std::swap(x, x_new);
    std::swap(y, y_new);
    if (config.observer) { config.observer(it, x, y); }

    bool const check_gap = config.gap_every > 0 && it % config.gap_every == 0;
    if (check_gap) { gap = pseudo_gap(x, y, problem, gap_state); }
    bool const converged = (check_gap && gap.value < config.rho2) || (it > 1 && config.rho_step > 0 && step_norm < config.rho_step);
    if (it == 1 || converged || it % config.telemetry_every == 0 || it == config.max_iters) {
      result.records.push_back({it, step_norm, gap.value, gap_state.M, elapsed_ms(start)});
    }
    if (converged) { return finish(Status::Converged, it, gap); }
  }
  gap = pseudo_gap(x, y, problem, gap_state);
  return finish(Status::IterCap, config.max_iters, gap);
}

void GNConfig::validate() const
{
  if (!(rho_outer > 0) || !(rho2 > 0)) { throw std::invalid_argument("GNConfig: thresholds must be positive"); }
  if (max_outer < 1 || max_inner < 1) { throw std::invalid_argument("GNConfig: iteration caps must be positive"); }
  if (!(tau0 > 0) || !(sigma0 > 0) || !(tau0 * sigma0 < 1)) { throw std::invalid_argument("GNConfig: need tau0·sigma0 < 1"); }
}

GNResult gauss_newton(SaddleProblem const &problem, StackedVector x, StackedVector y, GNConfig const &config)
{
  problem.validate();
  config.validate();
  NonlinearOp const &k = *problem.k;
  auto const start = Clock::now();
  GNResult result;
  result.status = Status::IterCap;

  for (int outer = 1; outer <= config.max_outer; ++outer) {
    auto jac = std::make_shared<FrozenJacobian>(k, x);
    LinearProblem lin{jac, problem.g, problem.f_star, k.value(x)};
    lin.offset.axpy(-1.0, jac->apply(x));

    auto const steps = linear_steps(*jac, config.tau0, config.sigma0);
    LinearPdhgmConfig inner;
    inner.tau = steps.tau;
    inner.sigma = steps.sigma;
    inner.rho2 = config.rho2;
    inner.max_iters = config.max_inner;
    inner.gap_every = config.gap_every;
    inner.telemetry_every = config.max_inner + 1;

    StackedVector y0 = config.warm_start ? y : y.zeros_like();
    auto sol = linear_pdhgm(lin, x, std::move(y0), inner);
    if (sol.status == Status::Diverged || !sol.x.all_finite()) {
      result.status = Status::Diverged;
      break;
    }

    double const step = (sol.x - x).norm();
    result.total_inner += sol.iterations;
    result.records.push_back(
      {outer, sol.iterations, step, sol.gap, elapsed_ms(start), sol.status == Status::Converged});
    result.outer_iterations = outer;
    x = std::move(sol.x);
    y = std::move(sol.y);
    if (step < config.rho_outer) {
      result.status = Status::Converged;
      break;
    }
  }
  result.x = std::move(x);
  result.y = std::move(y);
  result.wall_ms = elapsed_ms(start);
  return result;
}

} // namespace nlsaddle
