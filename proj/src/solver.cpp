#include "nlsaddle/solver.hpp"

#include "nlsaddle/mri.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace nlsaddle {

std::string to_string(Variant v)
{
  switch (v) {
  case Variant::Exact: return "exact";
  case Variant::Linearised: return "linearised";
  case Variant::Interpolated: return "interpolated";
  }
  return "?";
}

Variant parse_variant(std::string const &s)
{
  if (s == "exact" || s == "nl-exact") { return Variant::Exact; }
  if (s == "linearised" || s == "linearized" || s == "nl-linearised") { return Variant::Linearised; }
  if (s == "interpolated" || s == "nl-interp") { return Variant::Interpolated; }
  throw std::invalid_argument("unknown solver variant '" + s + "'");
}

std::string to_string(Status s)
{
  switch (s) {
  case Status::Converged: return "converged";
  case Status::IterCap: return "iter_cap";
  case Status::Diverged: return "diverged";
  }
  return "?";
}

void SolverConfig::validate() const
{
  if (!(tau0 > 0) || !(sigma0 > 0)) { throw std::invalid_argument("SolverConfig: tau0 and sigma0 must be positive"); }
  if (adapt_steps && !(tau0 * sigma0 < 1.0)) { throw std::invalid_argument("SolverConfig: tau0·sigma0 must be < 1"); }
  if (!(omega >= 0.0 && omega <= 1.0)) { throw std::invalid_argument("SolverConfig: omega must lie in [0, 1]"); }
  if (max_iters < 1) { throw std::invalid_argument("SolverConfig: max_iters must be positive"); }
  if (telemetry_every < 1) { throw std::invalid_argument("SolverConfig: telemetry_every must be positive"); }
}

StepSizes step_update(StepSizeState &state, LinearOp const &k_jac, double tau0, double sigma0,
                      PowerIterationOptions const &opt)
{
  double const estimate = op_norm_estimate(k_jac, &state.warm, opt);
  state.L = std::max(state.L, estimate);
  ++state.updates;
  if (!(state.L > 0)) { throw std::domain_error("step_update: Jacobian norm estimate is zero"); }
  return {tau0 / state.L, sigma0 / state.L};
}

namespace {
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}
} // namespace

SolveResult nl_pdhgm(SaddleProblem const &problem, StackedVector x, StackedVector y, SolverConfig const &config)
{
  problem.validate();
  config.validate();
  NonlinearOp const &k = *problem.k;
  x.require_same_structure(k.domain(), "nl_pdhgm initial primal");
  y.require_same_structure(k.range(), "nl_pdhgm initial dual");

  auto const start = Clock::now();
  SolveResult result;
  StepSizeState steps;
  double tau = config.tau0;
  double sigma = config.sigma0;
  double const omega = config.omega;

  StackedVector x_new = x;
  StackedVector x_omega = x;
  StackedVector grad = x;    // [∇K(xⁱ)]* yⁱ
  StackedVector dual_arg = y; // K̃
  StackedVector scratch = y;
  StackedVector k_old = y;  // K(xⁱ) for the interpolated variant
  StackedVector y_new = y;
  bool have_k_old = false;

  auto finish = [&](Status status, int iters, std::string msg) {
    result.status = status;
    result.iterations = iters;
    result.L = steps.L;
    result.x = std::move(x);
    result.y = std::move(y);
    result.message = std::move(msg);
    result.wall_ms = elapsed_ms(start);
    return std::move(result);
  };

  for (int it = 1; it <= config.max_iters; ++it) {
    try {
      FrozenJacobian const jac(k, x);
      if (config.adapt_steps) {
        PowerIterationOptions opt = config.full_estimate;
        bool const full = steps.updates == 0 || (config.full_estimate_every > 0 && (it - 1) % config.full_estimate_every == 0);
        if (!full) {
          opt.max_iters = config.power_steps;
          opt.rel_tol = 0.0;
        }
        auto const s = step_update(steps, jac, config.tau0, config.sigma0, opt);
        tau = s.tau;
        sigma = s.sigma;
      }

      // Primal step.
      k.jac_adjoint_to(x, y, grad);
      x_omega.assign_lincomb(1.0, x, -tau, grad);
      problem.g->resolve(x_omega, tau, x_new);
      x_omega.assign_lincomb(1.0 + omega, x_new, -omega, x);

      // Dual step.
      switch (config.variant) {
      case Variant::Exact: k.value_to(x_omega, dual_arg); break;
      case Variant::Linearised: {
        StackedVector dx = x_omega - x;
        k.jac_apply_to(x, dx, scratch);
        k.value_to(x, dual_arg);
        dual_arg.axpy(1.0, scratch);
        break;
      }
      case Variant::Interpolated: {
        if (!have_k_old) { k.value_to(x, k_old); }
        k.value_to(x_new, scratch);
        dual_arg.assign_lincomb(1.0 + omega, scratch, -omega, k_old);
        k_old = scratch;
        have_k_old = true;
        break;
      }
      }
      scratch.assign_lincomb(1.0, y, sigma, dual_arg);
      problem.f_star->resolve(scratch, sigma, y_new);

      if (!x_new.all_finite() || !y_new.all_finite()) {
        return finish(Status::Diverged, it - 1, "non-finite iterate at iteration " + std::to_string(it));
      }

      StackedVector const dx = x_new - x;
      double const step_norm = dx.norm();
      // The first primal step vanishes whenever y¹ = 0, so it never stops the run.
      bool const converged = it > 1 && step_norm < config.rho;
      bool const last = converged || it == config.max_iters;

      if (it == 1 || last || it % config.telemetry_every == 0) {
        IterationRecord rec;
        rec.iter = it;
        rec.step_norm = step_norm;
        rec.L = config.adapt_steps ? steps.L : IterationRecord::nan;
        rec.tau = tau;
        rec.sigma = sigma;
        StackedVector const dy = y_new - y;
        LocalMetric const metric{tau, sigma, &jac, omega};
        rec.weighted_step = std::sqrt(std::max(0.0, weighted_norm_sq(dx, dy, metric)));
        rec.data_residual = problem.data_residual(x_new);
        if (config.variant == Variant::Exact) { rec.lin_error = linearisation_error(k, x, x_new, omega).norm(); }
        rec.wall_ms = elapsed_ms(start);
        result.records.push_back(rec);
      }

      std::swap(x, x_new);
      std::swap(y, y_new);
      if (config.observer) { config.observer(it, x, y); }
      if (converged) { return finish(Status::Converged, it, "step norm below rho"); }
    } catch (NumericalError const &e) {
      return finish(Status::Diverged, it - 1, e.what());
    }
  }
  return finish(Status::IterCap, config.max_iters, "iteration cap reached");
}

} // namespace nlsaddle
