#pragma once

// One-pixel exponential model K(x) = (eˣ, x) with fidelity data f and a ball of radius α:
// min_x ½(eˣ − f)² + α|x|. For f² > 4α and a positive root, the critical point is
// eˣ = (f + √(f² − 4α))/2 with λ = eˣ − f and φ = α.

#include "nlsaddle/problem.hpp"

#include <cmath>
#include <memory>

namespace toy {

using namespace nlsaddle;

inline Grid pixel() { return Grid{1, 1, 1, 1.0}; }

class ExpOp final : public NonlinearOp
{
public:
  ExpOp()
    : NonlinearOp(single_block("x", Field::scalar(pixel())), range_layout())
  {
  }

  static StackedVector range_layout()
  {
    StackedVector y;
    y.add("lambda", Field::scalar(pixel())).add("phi", Field::scalar(pixel()));
    return y;
  }

  void value_to(StackedVector const &x, StackedVector &out) const override
  {
    out["lambda"][0] = std::exp(x["x"][0]);
    out["phi"][0] = x["x"][0];
  }
  void jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const override
  {
    out["lambda"][0] = std::exp(x["x"][0]) * dx["x"][0];
    out["phi"][0] = dx["x"][0];
  }
  void jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const override
  {
    out["x"][0] = std::exp(x["x"][0]) * y["lambda"][0] + y["phi"][0];
  }
};

struct Toy
{
  SaddleProblem problem;
  double f;
  double alpha;
  StackedVector x_hat;
  StackedVector y_hat;
};

inline Toy make(double f = 3.0, double alpha = 0.5)
{
  Field data = Field::scalar(pixel());
  data[0] = f;
  auto f_star = std::make_shared<BlockResolvent const>(std::vector<BlockResolvent::Entry>{
    {"lambda", std::make_shared<QuadraticFidelityProx const>(data)},
    {"phi", std::make_shared<HuberBallProx const>(HuberBallSpec{alpha, 0.0})},
  });
  Toy t{SaddleProblem{std::make_shared<ExpOp const>(), std::make_shared<ZeroFunctional const>(), f_star, "lambda"},
        f, alpha, {}, {}};
  double const ex = (f + std::sqrt(f * f - 4.0 * alpha)) / 2.0;
  t.x_hat = t.problem.primal_zero();
  t.x_hat["x"][0] = std::log(ex);
  t.y_hat = t.problem.dual_zero();
  t.y_hat["lambda"][0] = ex - f;
  t.y_hat["phi"][0] = alpha;
  return t;
}

} // namespace toy
