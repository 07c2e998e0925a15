#include "nlsaddle/differential.hpp"
#include "nlsaddle/fourier.hpp"
#include "nlsaddle/mri.hpp"
#include "nlsaddle/problems.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace nlsaddle;

namespace {

constexpr double kAdjointTol = 1e-10;
constexpr double kJacobianTol = 1e-5;

StackedVector random_point(StackedVector v, std::uint64_t seed, double scale = 1.0, double shift = 0.0)
{
  fill_normal(v, seed);
  for (auto &b : v.blocks()) {
    for (auto &e : b.field.data()) { e = shift + scale * e; }
  }
  return v;
}

std::shared_ptr<FourierSampler const> sampler(int n, double coverage, std::uint64_t seed)
{
  return std::make_shared<FourierSampler const>(gaussian_mask(n, coverage, (0.15 * 128) * (0.15 * 128), seed));
}

void check_nonlinear(NonlinearOp const &k, std::uint64_t seed, double scale = 1.0, double shift = 0.0)
{
  for (std::uint64_t s = seed; s < seed + 3; ++s) {
    auto const x = random_point(k.domain(), s, scale, shift);
    CHECK(jacobian_adjoint_mismatch(k, x, s + 100) <= kAdjointTol);
    CHECK(jacobian_fd_mismatch(k, x, s + 200) <= kJacobianTol);
  }
}

std::shared_ptr<StejskalTannerOp const> stejskal_tanner(Grid g, int count)
{
  Field s0 = Field::scalar(g);
  s0.fill(1.0);
  for (std::size_t p = 0; p < s0.size(); ++p) { s0[p] += 0.1 * double(p % 3); }
  return std::make_shared<StejskalTannerOp const>(s0, spiral_directions(count));
}

} // namespace

TEST_CASE("operator calculus suite")
{
  auto const t0 = std::chrono::steady_clock::now();

  SUBCASE("matrix adjoint")
  {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    std::vector<double> a(5 * 7);
    for (auto &v : a) { v = n01(rng); }
    CHECK(adjoint_mismatch(MatrixOp(5, 7, a), 3) <= kAdjointTol);
  }

  SUBCASE("finite differences")
  {
    for (double h : {1.0, 0.125}) {
      Grid const g2{8, 6, 1, h};
      Grid const g3{5, 4, 3, h};
      CHECK(adjoint_mismatch(GradientOp(Field::scalar(g2)), 1) <= kAdjointTol);
      CHECK(adjoint_mismatch(GradientOp(Field::scalar(g3)), 2) <= kAdjointTol);
      CHECK(adjoint_mismatch(GradientOp(Field::sym_tensor(g3, 3)), 3) <= kAdjointTol);
      CHECK(adjoint_mismatch(SymGradientOp(Field::vector(g2, 2), 1), 4) <= kAdjointTol);
      CHECK(adjoint_mismatch(SymGradientOp(gradient_field(Field::scalar(g3)), 1), 5) <= kAdjointTol);
      CHECK(adjoint_mismatch(SymGradientOp(gradient_field(Field::sym_tensor(g3, 3)), 6), 6) <= kAdjointTol);
      CHECK(adjoint_mismatch(TvDenoiseOp(g2), 7) <= kAdjointTol);
    }
  }

  SUBCASE("fourier sampling")
  {
    CHECK(adjoint_mismatch(FourierSampleOp(sampler(16, 0.3, 1)), 1) <= kAdjointTol);
    CHECK(adjoint_mismatch(FourierSampleOp(std::make_shared<FourierSampler const>(SamplingMask::full(12, 10))), 2) <=
          kAdjointTol);
  }

  SUBCASE("phase magnitude")
  {
    PhaseMagnitudeOp const t(sampler(16, 0.3, 2), 1.0);
    check_nonlinear(t, 10);
  }

  SUBCASE("stejskal tanner")
  {
    auto const st = stejskal_tanner(Grid{4, 4, 2, 1.0}, 6);
    check_nonlinear(*st, 20, 0.3, -0.3);
  }

  SUBCASE("velocity operator")
  {
    auto const t = std::make_shared<PhaseMagnitudeOp const>(sampler(12, 0.3, 3), 1.0);
    check_nonlinear(VelocityOp(t, 0.2 / 0.15), 30);
    auto const th = std::make_shared<PhaseMagnitudeOp const>(sampler(12, 0.3, 3), 2.0 / 12);
    check_nonlinear(VelocityOp(th, 2.0), 40);
  }

  SUBCASE("dti operator")
  {
    check_nonlinear(DtiOp(stejskal_tanner(Grid{4, 4, 2, 1.0}, 6), 2.0), 50, 0.3, -0.2);
  }

  double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 10.0);
}

TEST_CASE("central difference error of the phase magnitude map shrinks quadratically")
{
  PhaseMagnitudeOp const t(sampler(8, 0.5, 4), 1.0);
  auto const x = random_point(t.domain(), 1);
  auto d = random_point(t.domain(), 2);
  d.scale(1.0 / d.norm());
  auto const jd = t.jac_apply(x, d);
  auto err = [&](double h) {
    auto fd = t.value(x + h * d) - t.value(x - h * d);
    fd.scale(1.0 / (2.0 * h));
    return (fd - jd).norm();
  };
  double const e3 = err(1e-3);
  double const e4 = err(1e-4);
  CHECK(e3 / e4 > 50.0);
  CHECK(e3 / e4 < 200.0);
}

TEST_CASE("power iteration against a Jacobi eigen oracle")
{
  GradientOp const grad(Field::scalar(Grid{8, 8, 1, 1.0}));
  double const exact = oracle::spectral_norm(oracle::dense(grad));
  CHECK(exact >= 2.6);
  CHECK(exact <= std::sqrt(8.0));

  PowerIterationOptions opt;
  opt.max_iters = 5000;
  opt.rel_tol = 1e-12;
  double const est = op_norm_estimate(grad, nullptr, opt);
  CHECK(est <= exact * (1.0 + 1e-12));
  CHECK(est == doctest::Approx(exact).epsilon(1e-3));

  // Warm starts keep the estimate monotone.
  PowerIterationState warm;
  PowerIterationOptions two;
  two.max_iters = 2;
  two.rel_tol = 0.0;
  double prev = 0.0;
  for (int i = 0; i < 20; ++i) {
    double const e = op_norm_estimate(grad, &warm, two);
    CHECK(e >= prev * (1.0 - 1e-12));
    prev = e;
  }

  std::vector<double> a{3.0, 1.0, 0.0, 1.0, 2.0, 0.5};
  MatrixOp const m(2, 3, a);
  CHECK(op_norm_estimate(m, nullptr, opt) == doctest::Approx(oracle::spectral_norm(oracle::dense(m))).epsilon(1e-8));
  CHECK(op_norm_estimate(MatrixOp(2, 2, {0.0, 0.0, 0.0, 0.0})) == 0.0);
}

TEST_CASE("unitary DFT matches direct summation and preserves norms")
{
  int const nx = 6, ny = 5;
  FourierSampler const s(SamplingMask::full(nx, ny));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  std::vector<std::complex<double>> u(nx * ny);
  for (auto &v : u) { v = {n01(rng), n01(rng)}; }

  std::vector<double> coeffs(2 * nx * ny);
  s.forward(u, coeffs);
  auto const ref = oracle::dft2(u, nx, ny);
  double diff = 0.0, norm_u = 0.0, norm_c = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    diff = std::max(diff, std::abs(std::complex<double>(coeffs[2 * k], coeffs[2 * k + 1]) - ref[k]));
    norm_u += std::norm(u[k]);
    norm_c += coeffs[2 * k] * coeffs[2 * k] + coeffs[2 * k + 1] * coeffs[2 * k + 1];
  }
  CHECK(diff < 1e-12);
  CHECK(norm_c == doctest::Approx(norm_u).epsilon(1e-13));

  std::vector<std::complex<double>> back(nx * ny);
  s.adjoint(coeffs, back);
  for (std::size_t k = 0; k < u.size(); ++k) { CHECK(std::abs(back[k] - u[k]) < 1e-12); }
}

TEST_CASE("linearisation error")
{
  SUBCASE("vanishes for linear operators")
  {
    LinearWrapper const k(std::make_shared<TvDenoiseOp const>(Grid{6, 6, 1, 1.0}));
    auto const xbar = random_point(k.domain(), 1);
    auto const x = random_point(k.domain(), 2);
    CHECK(linearisation_error(k, xbar, x, 1.0).norm() < 1e-12);
  }
  SUBCASE("is quadratic in the step otherwise")
  {
    PhaseMagnitudeOp const t(sampler(8, 0.5, 5), 1.0);
    auto const xbar = random_point(t.domain(), 3);
    auto const d = random_point(t.domain(), 4);
    double const e1 = linearisation_error(t, xbar, xbar + 1e-2 * d, 1.0).norm();
    double const e2 = linearisation_error(t, xbar, xbar + 5e-3 * d, 1.0).norm();
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("frozen Jacobian reproduces jac_apply bit for bit")
{
  PhaseMagnitudeOp const t(sampler(8, 0.5, 6), 1.0);
  auto const x = random_point(t.domain(), 5);
  auto const dx = random_point(t.domain(), 6);
  auto const y = random_point(t.range(), 7);
  auto const jac = t.frozen_jacobian(x);
  auto const a = jac->apply(dx);
  auto const b = t.jac_apply(x, dx);
  auto const c = jac->adjoint_apply(y);
  auto const d = t.jac_adjoint_apply(x, y);
  for (std::size_t i = 0; i < a[0].size(); ++i) { CHECK(a[0][i] == b[0][i]); }
  for (std::size_t blk = 0; blk < c.num_blocks(); ++blk) {
    for (std::size_t i = 0; i < c[blk].size(); ++i) { CHECK(c[blk][i] == d[blk][i]); }
  }
}

TEST_CASE("stejskal tanner signal matches the closed form")
{
  Grid const g{1, 1, 1, 1.0};
  Field s0 = Field::scalar(g);
  s0[0] = 2.0;
  std::vector<GradientDirection> b{{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, {std::sqrt(0.5), std::sqrt(0.5), 0.0}};
  StejskalTannerOp const st(s0, b);
  Field v = Field::sym_tensor(g, 3);
  // (xx, yy, zz, xy, xz, yz)
  double const e[6] = {-1.0, -0.5, -0.25, 0.1, 0.0, 0.0};
  for (int c = 0; c < 6; ++c) { v[c] = e[c]; }
  Field s = st.signal_field();
  st.value(v, s);
  CHECK(s[0] == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(s[1] == doctest::Approx(2.0 * std::exp(-0.25)));
  CHECK(s[2] == doctest::Approx(2.0 * std::exp(0.5 * (-1.0 - 0.5) + 0.1)));
}
