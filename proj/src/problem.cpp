#include "nlsaddle/problem.hpp"

#include <cmath>
#include <limits>

namespace nlsaddle {

Field const *SaddleProblem::fidelity_data() const
{
  if (fidelity_block.empty()) { return nullptr; }
  auto const *q = dynamic_cast<QuadraticFidelityProx const *>(&f_star->block(fidelity_block));
  return q != nullptr ? &q->data() : nullptr;
}

double SaddleProblem::data_residual_from_value(StackedVector const &kx) const
{
  Field const *f = fidelity_data();
  if (f == nullptr) { return std::numeric_limits<double>::quiet_NaN(); }
  Field d = kx[fidelity_block];
  d.axpy(-1.0, *f);
  return d.norm();
}

double SaddleProblem::data_residual(StackedVector const &x) const
{
  if (fidelity_data() == nullptr) { return std::numeric_limits<double>::quiet_NaN(); }
  return data_residual_from_value(k->value(x));
}

ExtendedReal SaddleProblem::primal_objective(StackedVector const &x) const
{
  ExtendedReal v = g->value(x);
  v += f_star->conjugate_value(k->value(x));
  return v;
}

void SaddleProblem::validate() const
{
  if (!k || !g || !f_star) { throw std::invalid_argument("SaddleProblem: operator and resolvents are required"); }
  StackedVector const y = k->range();
  if (y.num_blocks() != f_star->entries().size()) { throw ShapeError("SaddleProblem: F* blocks do not match the range of K"); }
  for (std::size_t i = 0; i < y.num_blocks(); ++i) {
    if (y.blocks()[i].name != f_star->entries()[i].first) {
      throw ShapeError("SaddleProblem: F* block '" + f_star->entries()[i].first + "' does not match range block '" +
                       y.blocks()[i].name + "'");
    }
  }
  if (!fidelity_block.empty() && !y.has(fidelity_block)) {
    throw ShapeError("SaddleProblem: fidelity block '" + fidelity_block + "' is not a dual block");
  }
}

void LinearProblem::validate() const
{
  if (!k || !g || !f_star) { throw std::invalid_argument("LinearProblem: operator and resolvents are required"); }
  if (offset.num_blocks() > 0) { offset.require_same_structure(k->range(), "LinearProblem offset"); }
}

} // namespace nlsaddle
