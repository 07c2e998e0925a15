#include "nlsaddle/mri.hpp"

#include <cmath>
#include <complex>

namespace nlsaddle {

namespace {
void require(bool ok, char const *msg)
{
  if (!ok) { throw ShapeError(msg); }
}

StackedVector phase_magnitude_domain(SamplingMask const &m, double h)
{
  Grid const g{m.nx(), m.ny(), 1, h};
  StackedVector x;
  x.add("r", Field::scalar(g));
  x.add("phi", Field::scalar(g));
  return x;
}
} // namespace

PhaseMagnitudeOp::PhaseMagnitudeOp(std::shared_ptr<FourierSampler const> sampler, double h)
  : NonlinearOp(phase_magnitude_domain(sampler->mask(), h), single_block("lambda", sampler->coefficient_field()))
  , sampler_(std::move(sampler))
{
}

void PhaseMagnitudeOp::value(Field const &r, Field const &phi, Field &out) const
{
  std::size_t const n = sampler_->image_size();
  require(r.size() == n && phi.size() == n, "PhaseMagnitudeOp::value: image size");
  std::vector<std::complex<double>> u(n);
  for (std::size_t p = 0; p < n; ++p) { u[p] = std::polar(1.0, phi[p]) * r[p]; }
  sampler_->forward(u, out.data());
}

void PhaseMagnitudeOp::jac(Field const &r, Field const &phi, Field const &dr, Field const &dphi, Field &out) const
{
  std::size_t const n = sampler_->image_size();
  require(r.size() == n && phi.size() == n && dr.size() == n && dphi.size() == n, "PhaseMagnitudeOp::jac: image size");
  std::vector<std::complex<double>> u(n);
  for (std::size_t p = 0; p < n; ++p) { u[p] = std::complex<double>(dr[p], r[p] * dphi[p]) * std::polar(1.0, phi[p]); }
  sampler_->forward(u, out.data());
}

void PhaseMagnitudeOp::jac_adjoint(Field const &r, Field const &phi, Field const &z, Field &dr, Field &dphi) const
{
  std::size_t const n = sampler_->image_size();
  require(r.size() == n && phi.size() == n && dr.size() == n && dphi.size() == n, "PhaseMagnitudeOp::jac_adjoint: image size");
  std::vector<std::complex<double>> v(n);
  sampler_->adjoint(z.data(), v);
  for (std::size_t p = 0; p < n; ++p) {
    std::complex<double> const rot = v[p] * std::polar(1.0, -phi[p]);
    dr[p] = rot.real();
    dphi[p] = r[p] * rot.imag();
  }
}

void PhaseMagnitudeOp::value_to(StackedVector const &x, StackedVector &out) const { value(x["r"], x["phi"], out[0]); }

void PhaseMagnitudeOp::jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const
{
  jac(x["r"], x["phi"], dx["r"], dx["phi"], out[0]);
}

void PhaseMagnitudeOp::jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const
{
  jac_adjoint(x["r"], x["phi"], y[0], out["r"], out["phi"]);
}

StejskalTannerOp::StejskalTannerOp(Field s0, std::vector<GradientDirection> b)
  : NonlinearOp(single_block("v", Field::sym_tensor(s0.grid(), 3)),
                single_block("s", Field::vector(s0.grid(), int(std::max<std::size_t>(1, b.size())))))
  , s0_(std::move(s0))
  , b_(std::move(b))
{
  require(s0_.comps() == 1, "StejskalTannerOp: s0 must be a scalar field");
  require(!b_.empty(), "StejskalTannerOp: at least one gradient direction is required");
  for (double v : s0_.data()) {
    if (!(v >= 0)) { throw std::invalid_argument("StejskalTannerOp: s0 must be nonnegative"); }
  }
  for (auto const &g : b_) {
    auto const [x, y, z] = g;
    coeff_.push_back({x * x, y * y, z * z, 2 * x * y, 2 * x * z, 2 * y * z});
  }
}

Field StejskalTannerOp::signal_field() const { return Field::vector(s0_.grid(), int(b_.size())); }

double StejskalTannerOp::exponent(std::size_t j, double const *v) const
{
  auto const &c = coeff_[j];
  return c[0] * v[0] + c[1] * v[1] + c[2] * v[2] + c[3] * v[3] + c[4] * v[4] + c[5] * v[5];
}

double StejskalTannerOp::signal(std::size_t point, std::size_t j, double const *v) const
{
  double const s = s0_[point] * std::exp(exponent(j, v));
  if (!std::isfinite(s)) {
    throw NumericalError("Stejskal-Tanner exponent overflow at voxel " + std::to_string(point) +
                         " (tensor data is probably not scaled to the b-values)");
  }
  return s;
}

void StejskalTannerOp::value(Field const &v, Field &out) const
{
  require(v.comps() == 6 && v.points() == s0_.points(), "StejskalTannerOp::value: tensor layout");
  require(out.comps() == int(b_.size()) && out.points() == s0_.points(), "StejskalTannerOp::value: signal layout");
  std::size_t const nj = b_.size();
  for (std::size_t p = 0; p < s0_.points(); ++p) {
    double const *vp = &v.data()[p * 6];
    for (std::size_t j = 0; j < nj; ++j) { out.at(p, int(j)) = signal(p, j, vp); }
  }
}

void StejskalTannerOp::jac(Field const &v, Field const &dv, Field &out) const
{
  require(v.comps() == 6 && dv.comps() == 6 && v.points() == s0_.points() && dv.points() == s0_.points(),
          "StejskalTannerOp::jac: tensor layout");
  require(out.comps() == int(b_.size()) && out.points() == s0_.points(), "StejskalTannerOp::jac: signal layout");
  std::size_t const nj = b_.size();
  for (std::size_t p = 0; p < s0_.points(); ++p) {
    double const *vp = &v.data()[p * 6];
    double const *dp = &dv.data()[p * 6];
    for (std::size_t j = 0; j < nj; ++j) { out.at(p, int(j)) = signal(p, j, vp) * exponent(j, dp); }
  }
}

void StejskalTannerOp::jac_adjoint(Field const &v, Field const &y, Field &dv) const
{
  require(v.comps() == 6 && dv.comps() == 6 && v.points() == s0_.points() && dv.points() == s0_.points(),
          "StejskalTannerOp::jac_adjoint: tensor layout");
  require(y.comps() == int(b_.size()) && y.points() == s0_.points(), "StejskalTannerOp::jac_adjoint: signal layout");
  auto const w = dv.weights();
  std::size_t const nj = b_.size();
  for (std::size_t p = 0; p < s0_.points(); ++p) {
    double const *vp = &v.data()[p * 6];
    double acc[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t j = 0; j < nj; ++j) {
      double const g = signal(p, j, vp) * y.at(p, int(j));
      for (int e = 0; e < 6; ++e) { acc[e] += g * coeff_[j][e]; }
    }
    // Divide by the storage weights so the result is the adjoint under the weighted inner product.
    for (int e = 0; e < 6; ++e) { dv.at(p, e) = acc[e] / w[e]; }
  }
}

void StejskalTannerOp::value_to(StackedVector const &x, StackedVector &out) const { value(x[0], out[0]); }

void StejskalTannerOp::jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const
{
  jac(x[0], dx[0], out[0]);
}

void StejskalTannerOp::jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const
{
  jac_adjoint(x[0], y[0], out[0]);
}

} // namespace nlsaddle
