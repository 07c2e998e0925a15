#pragma once

#include "nlsaddle/core.hpp"

#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nlsaddle {

/// Value of a convex functional on ℝ ∪ {+∞}; indicator violations are
/// reported through `infeasible` rather than thrown.
struct ExtendedReal
{
  double value = 0.0;
  bool infeasible = false;

  static ExtendedReal infinite() { return {std::numeric_limits<double>::infinity(), true}; }
  ExtendedReal &operator+=(ExtendedReal const &o)
  {
    value += o.value;
    infeasible = infeasible || o.infeasible;
    return *this;
  }
};

struct HuberBallSpec
{
  double alpha = 1.0; // ball radius
  double gamma = 0.0; // Huber parameter
};

/// Huber-regularised norm |g|_γ: ‖g‖ − γ/2 for ‖g‖ ≥ γ, ‖g‖²/(2γ) below.
double huber_norm(double norm, double gamma);

// Closed-form resolvents. All write into `out`, which may alias `z`.

/// Projection of the whole vector onto the centred ball of radius M.
void resolve_ball(StackedVector const &z, double radius, StackedVector &out);
/// Pointwise proj_{B(0,α)}(z_j / (1 + σγ/α)), the resolvent of δ_B(0,α) + γ/(2α)‖·‖².
void resolve_huber_ball(Field const &z, double sigma, HuberBallSpec const &spec, Field &out);
/// (z − σf)/(1 + σ), the resolvent of ½‖λ‖² + ⟨f, λ⟩.
void resolve_quadratic_fidelity(Field const &z, double sigma, Field const &f, Field &out);

/// Resolvent of a convex functional acting on a single field block.
class FieldProx
{
public:
  virtual ~FieldProx() = default;
  virtual void resolve(Field const &z, double step, Field &out) const = 0;
  /// The functional itself.
  virtual ExtendedReal value(Field const &y) const = 0;
  /// Its convex conjugate.
  virtual ExtendedReal conjugate_value(Field const &w) const = 0;
  virtual std::string describe() const = 0;
};

/// f = 0: identity resolvent, conjugate δ_{0}.
class ZeroProx final : public FieldProx
{
public:
  void resolve(Field const &z, double step, Field &out) const override;
  ExtendedReal value(Field const &y) const override;
  ExtendedReal conjugate_value(Field const &w) const override;
  std::string describe() const override { return "zero"; }
};

/// f(φ) = Σ_j δ_B(0,α)(φ_j) + γ/(2α)‖φ_j‖² over points j; conjugate α·Σ_j |w_j|_γ.
class HuberBallProx final : public FieldProx
{
public:
  explicit HuberBallProx(HuberBallSpec spec);
  HuberBallSpec const &spec() const { return spec_; }
  void resolve(Field const &z, double step, Field &out) const override;
  ExtendedReal value(Field const &y) const override;
  ExtendedReal conjugate_value(Field const &w) const override;
  std::string describe() const override;

private:
  HuberBallSpec spec_;
};

/// f(λ) = ½‖λ‖² + ⟨data, λ⟩; conjugate ½‖w − data‖².
class QuadraticFidelityProx final : public FieldProx
{
public:
  explicit QuadraticFidelityProx(Field data);
  Field const &data() const { return data_; }
  void resolve(Field const &z, double step, Field &out) const override;
  ExtendedReal value(Field const &y) const override;
  ExtendedReal conjugate_value(Field const &w) const override;
  std::string describe() const override { return "quadratic-fidelity"; }

private:
  Field data_;
};

/// Resolvent of a convex functional on a stacked vector.
class Resolvent
{
public:
  virtual ~Resolvent() = default;
  virtual void resolve(StackedVector const &z, double step, StackedVector &out) const = 0;
  virtual ExtendedReal value(StackedVector const &x) const = 0;
  virtual ExtendedReal conjugate_value(StackedVector const &w) const = 0;

  StackedVector resolve(StackedVector const &z, double step) const;
};

/// G = 0.
class ZeroFunctional final : public Resolvent
{
public:
  using Resolvent::resolve;
  void resolve(StackedVector const &z, double step, StackedVector &out) const override;
  ExtendedReal value(StackedVector const &x) const override;
  ExtendedReal conjugate_value(StackedVector const &w) const override;
};

/// G = δ_B(0,M) on the full stacked space; conjugate M‖·‖.
class BallIndicator final : public Resolvent
{
public:
  explicit BallIndicator(double radius);
  double radius() const { return radius_; }
  using Resolvent::resolve;
  void resolve(StackedVector const &z, double step, StackedVector &out) const override;
  ExtendedReal value(StackedVector const &x) const override;
  ExtendedReal conjugate_value(StackedVector const &w) const override;

private:
  double radius_;
};

/// Block-separable functional Σ_b f_b(y_b); each block is resolved independently.
class BlockResolvent final : public Resolvent
{
public:
  using Entry = std::pair<std::string, std::shared_ptr<FieldProx const>>;
  explicit BlockResolvent(std::vector<Entry> blocks);

  std::vector<Entry> const &entries() const { return blocks_; }
  FieldProx const &block(std::string const &name) const;

  using Resolvent::resolve;
  void resolve(StackedVector const &z, double step, StackedVector &out) const override;
  ExtendedReal value(StackedVector const &y) const override;
  ExtendedReal conjugate_value(StackedVector const &w) const override;

private:
  void check(StackedVector const &v) const;
  std::vector<Entry> blocks_;
};

} // namespace nlsaddle
