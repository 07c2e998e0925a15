#include "nlsaddle/core.hpp"
#include "nlsaddle/operators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nlsaddle;

namespace {

StackedVector random_like(StackedVector v, std::uint64_t seed)
{
  fill_normal(v, seed);
  return v;
}

// Expands stored unique entries into the full d×d matrix.
std::vector<std::vector<double>> full_matrix(double const *s, int d)
{
  std::vector<std::vector<double>> m(d, std::vector<double>(d, 0.0));
  for (int a = 0; a < d; ++a) { m[a][a] = s[a]; }
  int e = d;
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b, ++e) { m[a][b] = m[b][a] = s[e]; }
  }
  return m;
}

} // namespace

TEST_CASE("sym tensor inner product is the Frobenius product")
{
  for (int d : {2, 3}) {
    Grid const g{3, 2, 1, 1.0};
    Field a = Field::sym_tensor(g, d);
    Field b = a.zeros_like();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    for (auto &v : a.data()) { v = n01(rng); }
    for (auto &v : b.data()) { v = n01(rng); }

    double frob = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p) {
      auto const ma = full_matrix(&a.data()[p * a.comps()], d);
      auto const mb = full_matrix(&b.data()[p * b.comps()], d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) { frob += ma[i][j] * mb[i][j]; }
      }
    }
    CHECK(a.inner(b) == doctest::Approx(frob).epsilon(1e-14));
    CHECK(a.norm() == doctest::Approx(std::sqrt(a.inner(a))));
  }
}

TEST_CASE("stacked vectors reject duplicate names and mismatched structure")
{
  Grid const g{4, 4, 1, 1.0};
  StackedVector v;
  v.add("r", Field::scalar(g));
  CHECK_THROWS_AS(v.add("r", Field::scalar(g)), std::invalid_argument);
  CHECK_THROWS(v["missing"]);

  StackedVector w;
  w.add("r", Field::vector(g, 2));
  CHECK_FALSE(v.same_structure(w));
  CHECK_THROWS_AS(v.axpy(1.0, w), ShapeError);

  StackedVector u;
  u.add("phi", Field::scalar(g));
  CHECK_THROWS_AS(inner(v, u), ShapeError);

  Field a = Field::scalar(g);
  Field b = Field::scalar(Grid{4, 4, 1, 0.5});
  CHECK_FALSE(a.same_layout(b));
}

TEST_CASE("linear combinations and norms")
{
  Grid const g{5, 3, 1, 1.0};
  StackedVector proto;
  proto.add("a", Field::scalar(g)).add("b", Field::vector(g, 2));
  auto const x = random_like(proto, 1);
  auto const y = random_like(proto, 2);

  StackedVector z = proto.zeros_like();
  z.assign_lincomb(2.0, x, -3.0, y);
  for (std::size_t b = 0; b < z.num_blocks(); ++b) {
    for (std::size_t i = 0; i < z[b].size(); ++i) { CHECK(z[b][i] == doctest::Approx(2.0 * x[b][i] - 3.0 * y[b][i])); }
  }

  auto const s = x + y;
  auto const d = x - y;
  // Parallelogram law.
  CHECK(s.norm() * s.norm() + d.norm() * d.norm() ==
        doctest::Approx(2.0 * (x.norm() * x.norm() + y.norm() * y.norm())).epsilon(1e-13));
  CHECK((2.5 * x).norm() == doctest::Approx(2.5 * x.norm()));
  CHECK(x.all_finite());
  z[0][0] = std::nan("");
  CHECK_FALSE(z.all_finite());
}

TEST_CASE("local metric against a dense oracle")
{
  int const rows = 4, cols = 3;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<double> a(rows * cols);
  for (auto &v : a) { v = n01(rng); }
  MatrixOp const k(rows, cols, a);
  auto const x = random_like(k.domain(), 11);
  auto const y = random_like(k.range(), 12);

  double const tau = 0.3, sigma = 0.7, omega = 1.0;
  double kxy = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) { kxy += y[0][i] * a[i * cols + j] * x[0][j]; }
  }
  double const expected = x.norm() * x.norm() / tau + y.norm() * y.norm() / sigma - (1.0 + omega) * kxy;
  LocalMetric const m{tau, sigma, &k, omega};
  CHECK(weighted_norm_sq(x, y, m) == doctest::Approx(expected).epsilon(1e-13));

  // Positive definite under the step condition τσ‖K‖² < 1.
  double const kn = oracle::spectral_norm(oracle::dense(k));
  LocalMetric const safe{0.9 / kn, 0.9 / kn, &k, 1.0};
  for (std::uint64_t s = 0; s < 20; ++s) {
    CHECK(weighted_norm_sq(random_like(k.domain(), 100 + s), random_like(k.range(), 200 + s), safe) > 0.0);
  }
  CHECK_THROWS(weighted_norm_sq(x, y, LocalMetric{0.0, 1.0, &k, 1.0}));
}
