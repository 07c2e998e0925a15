#include "nlsaddle/prox.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nlsaddle {

namespace {
// Relative slack when testing indicator membership of resolvent outputs.
constexpr double kFeasibilitySlack = 1e-10;
} // namespace

double huber_norm(double norm, double gamma)
{
  if (gamma <= 0.0 || norm >= gamma) { return norm - 0.5 * gamma; }
  return norm * norm / (2.0 * gamma);
}

void resolve_ball(StackedVector const &z, double radius, StackedVector &out)
{
  if (!(radius > 0)) { throw std::invalid_argument("resolve_ball: radius must be positive"); }
  double const n = z.norm();
  if (&out != &z) { out = z; }
  if (n > radius) { out.scale(radius / n); }
}

void resolve_huber_ball(Field const &z, double sigma, HuberBallSpec const &spec, Field &out)
{
  if (!z.same_layout(out)) { throw ShapeError("resolve_huber_ball: layout mismatch"); }
  double const shrink = 1.0 / (1.0 + sigma * spec.gamma / spec.alpha);
  int const m = z.comps();
  auto const w = z.weights();
  auto zs = z.data();
  auto os = out.data();
  for (std::size_t p = 0; p < z.points(); ++p) {
    double const *zp = &zs[p * m];
    double *op = &os[p * m];
    double sq = 0.0;
    for (int c = 0; c < m; ++c) { sq += w[c] * zp[c] * zp[c]; }
    double const n = shrink * std::sqrt(sq);
    double const f = n > spec.alpha ? shrink * spec.alpha / n : shrink;
    for (int c = 0; c < m; ++c) { op[c] = f * zp[c]; }
  }
}

void resolve_quadratic_fidelity(Field const &z, double sigma, Field const &f, Field &out)
{
  if (!z.same_layout(f) || !z.same_layout(out)) { throw ShapeError("resolve_quadratic_fidelity: layout mismatch"); }
  double const inv = 1.0 / (1.0 + sigma);
  auto zs = z.data();
  auto fs = f.data();
  auto os = out.data();
  for (std::size_t i = 0; i < zs.size(); ++i) { os[i] = (zs[i] - sigma * fs[i]) * inv; }
}

void ZeroProx::resolve(Field const &z, double, Field &out) const
{
  if (&out != &z) { out = z; }
}

ExtendedReal ZeroProx::value(Field const &) const { return {}; }

ExtendedReal ZeroProx::conjugate_value(Field const &w) const
{
  for (double v : w.data()) {
    if (v != 0.0) { return ExtendedReal::infinite(); }
  }
  return {};
}

HuberBallProx::HuberBallProx(HuberBallSpec spec)
  : spec_(spec)
{
  if (!(spec.alpha > 0)) { throw std::invalid_argument("HuberBallProx: alpha must be positive"); }
  if (!(spec.gamma >= 0)) { throw std::invalid_argument("HuberBallProx: gamma must be nonnegative"); }
}

void HuberBallProx::resolve(Field const &z, double step, Field &out) const { resolve_huber_ball(z, step, spec_, out); }

ExtendedReal HuberBallProx::value(Field const &y) const
{
  double sq = 0.0;
  double const limit = spec_.alpha * (1.0 + kFeasibilitySlack);
  for (std::size_t p = 0; p < y.points(); ++p) {
    double const n = y.point_norm(p);
    if (n > limit) { return ExtendedReal::infinite(); }
    sq += n * n;
  }
  return {spec_.gamma / (2.0 * spec_.alpha) * sq, false};
}

ExtendedReal HuberBallProx::conjugate_value(Field const &w) const
{
  double s = 0.0;
  for (std::size_t p = 0; p < w.points(); ++p) { s += huber_norm(w.point_norm(p), spec_.gamma); }
  return {spec_.alpha * s, false};
}

std::string HuberBallProx::describe() const
{
  std::ostringstream os;
  os << "huber-ball(alpha=" << spec_.alpha << ", gamma=" << spec_.gamma << ")";
  return os.str();
}

QuadraticFidelityProx::QuadraticFidelityProx(Field data)
  : data_(std::move(data))
{
}

void QuadraticFidelityProx::resolve(Field const &z, double step, Field &out) const
{
  resolve_quadratic_fidelity(z, step, data_, out);
}

ExtendedReal QuadraticFidelityProx::value(Field const &y) const
{
  return {0.5 * y.inner(y) + data_.inner(y), false};
}

ExtendedReal QuadraticFidelityProx::conjugate_value(Field const &w) const
{
  Field d = w;
  d.axpy(-1.0, data_);
  return {0.5 * d.inner(d), false};
}

StackedVector Resolvent::resolve(StackedVector const &z, double step) const
{
  StackedVector out = z;
  resolve(z, step, out);
  return out;
}

void ZeroFunctional::resolve(StackedVector const &z, double, StackedVector &out) const
{
  if (&out != &z) { out = z; }
}

ExtendedReal ZeroFunctional::value(StackedVector const &) const { return {}; }

ExtendedReal ZeroFunctional::conjugate_value(StackedVector const &w) const
{
  return w.norm() == 0.0 ? ExtendedReal{} : ExtendedReal::infinite();
}

BallIndicator::BallIndicator(double radius)
  : radius_(radius)
{
  if (!(radius > 0)) { throw std::invalid_argument("BallIndicator: radius must be positive"); }
}

void BallIndicator::resolve(StackedVector const &z, double, StackedVector &out) const { resolve_ball(z, radius_, out); }

ExtendedReal BallIndicator::value(StackedVector const &x) const
{
  return x.norm() <= radius_ * (1.0 + kFeasibilitySlack) ? ExtendedReal{} : ExtendedReal::infinite();
}

ExtendedReal BallIndicator::conjugate_value(StackedVector const &w) const { return {radius_ * w.norm(), false}; }

BlockResolvent::BlockResolvent(std::vector<Entry> blocks)
  : blocks_(std::move(blocks))
{
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (!blocks_[i].second) { throw std::invalid_argument("BlockResolvent: null resolvent for block " + blocks_[i].first); }
    for (std::size_t j = 0; j < i; ++j) {
      if (blocks_[i].first == blocks_[j].first) { throw std::invalid_argument("BlockResolvent: duplicate block " + blocks_[i].first); }
    }
  }
}

FieldProx const &BlockResolvent::block(std::string const &name) const
{
  for (auto const &[n, p] : blocks_) {
    if (n == name) { return *p; }
  }
  throw std::invalid_argument("BlockResolvent: no block named " + name);
}

void BlockResolvent::check(StackedVector const &v) const
{
  if (v.num_blocks() != blocks_.size()) {
    throw ShapeError("BlockResolvent: expected " + std::to_string(blocks_.size()) + " blocks, got " +
                     std::to_string(v.num_blocks()));
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (v.blocks()[i].name != blocks_[i].first) {
      throw ShapeError("BlockResolvent: block " + std::to_string(i) + " is '" + v.blocks()[i].name + "', expected '" +
                       blocks_[i].first + "'");
    }
  }
}

void BlockResolvent::resolve(StackedVector const &z, double step, StackedVector &out) const
{
  check(z);
  if (&out != &z) { out = z; }
  for (std::size_t i = 0; i < blocks_.size(); ++i) { blocks_[i].second->resolve(z[i], step, out[i]); }
}

ExtendedReal BlockResolvent::value(StackedVector const &y) const
{
  check(y);
  ExtendedReal total;
  for (std::size_t i = 0; i < blocks_.size(); ++i) { total += blocks_[i].second->value(y[i]); }
  return total;
}

ExtendedReal BlockResolvent::conjugate_value(StackedVector const &w) const
{
  check(w);
  ExtendedReal total;
  for (std::size_t i = 0; i < blocks_.size(); ++i) { total += blocks_[i].second->conjugate_value(w[i]); }
  return total;
}

} // namespace nlsaddle
