#include "nlsaddle/cli.hpp"
#include "nlsaddle/evaluate.hpp"
#include "toy.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

using namespace nlsaddle;
namespace fs = std::filesystem;

namespace {

fs::path scratch(std::string const &name)
{
  fs::path const dir = fs::temp_directory_path() / "nlsaddle_test_evaluate";
  fs::create_directories(dir);
  return dir / name;
}

Field binary_image(int n)
{
  Field f = Field::scalar(Grid{n, n, 1, 1.0});
  for (std::size_t p = 0; p < f.size(); ++p) { f[p] = (p * 7) % 3 == 0 ? 1.0 : 0.0; }
  return f;
}

} // namespace

TEST_CASE("psnr")
{
  Field const ref = binary_image(8);
  auto const spec = PsnrSpec::from_reference(ref);
  CHECK(spec.peak == 1.0);

  CHECK(std::isinf(psnr(ref, ref, spec)));
  CHECK(capped(psnr(ref, ref, spec)) == kPsnrCap);

  Field x = ref;
  for (auto &v : x.data()) { v += 0.1; }
  CHECK(psnr(x, ref, spec) == doctest::Approx(20.0).epsilon(1e-12));

  SUBCASE("errors outside the mask are ignored")
  {
    std::vector<std::uint8_t> mask(ref.size(), 0);
    for (std::size_t p = 0; p < 32; ++p) { mask[p] = 1; }
    Field y = ref;
    for (std::size_t p = 32; p < y.size(); ++p) { y[p] += 5.0; }
    y[0] += 0.1;
    PsnrSpec const ms{1.0, mask};
    CHECK(psnr(y, ref, ms) == doctest::Approx(10.0 * std::log10(32.0 / 0.01)));
    CHECK(psnr(y, ref, spec) < psnr(y, ref, ms));
    CHECK_THROWS(psnr(y, ref, PsnrSpec{1.0, std::vector<std::uint8_t>(ref.size(), 0)}));
  }

  SUBCASE("simultaneous permutations leave it unchanged")
  {
    Field y = ref;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (auto &v : y.data()) { v += 0.2 * n01(rng); }
    std::vector<std::size_t> perm(ref.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Field rp = ref, yp = y;
    for (std::size_t p = 0; p < perm.size(); ++p) {
      rp[p] = ref[perm[p]];
      yp[p] = y[perm[p]];
    }
    CHECK(psnr(yp, rp, PsnrSpec::from_reference(rp)) == doctest::Approx(psnr(y, ref, spec)).epsilon(1e-14));
  }

  CHECK_THROWS(PsnrSpec::from_reference(Field::scalar(Grid{4, 4, 1, 1.0})));
}

TEST_CASE("optimality residuals")
{
  auto const t = toy::make();

  SUBCASE("vanish at the closed-form saddle point for every probe")
  {
    for (double probe : {0.1, 1.0, 10.0}) {
      auto const r = optimality_residuals(t.x_hat, t.y_hat, t.problem, probe);
      CHECK(r.primal_stationarity <= 1e-12);
      CHECK(r.data_consistency <= 1e-12);
      CHECK(r.dual_fixed_point <= 1e-12);
    }
  }

  SUBCASE("data consistency matches direct evaluation")
  {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    for (int k = 0; k < 10; ++k) {
      StackedVector x = t.problem.primal_zero();
      StackedVector y = t.problem.dual_zero();
      x[0][0] = n01(rng);
      y["lambda"][0] = n01(rng);
      y["phi"][0] = n01(rng);
      auto const r = optimality_residuals(x, y, t.problem);
      CHECK(r.data_consistency == doctest::Approx(std::abs(std::exp(x[0][0]) - t.f - y["lambda"][0])));
      CHECK(r.primal_stationarity ==
            doctest::Approx(std::abs(std::exp(x[0][0]) * y["lambda"][0] + y["phi"][0])));
    }
  }

  SUBCASE("doubling the fidelity multiplier is detected")
  {
    StackedVector y = t.y_hat;
    y["lambda"].scale(2.0);
    auto const r = optimality_residuals(t.x_hat, y, t.problem);
    CHECK(r.data_consistency > 0.1);
    CHECK(r.dual_fixed_point > 0.0);
  }

  SUBCASE("off-optimum is nonzero for every probe")
  {
    StackedVector y = t.y_hat;
    y["phi"][0] = 0.5 * t.alpha;
    for (double probe : {0.1, 1.0, 10.0}) {
      CHECK(optimality_residuals(t.x_hat, y, t.problem, probe).dual_fixed_point > 1e-6);
    }
  }
}

TEST_CASE("discrepancy sweep")
{
  std::vector<double> const alphas{0.1, 0.2, 0.5, 1.0};
  auto linear_residual = [](double a) { return SweepEntry{a, 10.0 * a, 0.0, 0.0, Status::Converged, 1}; };

  auto const inf = discrepancy_sweep(alphas, linear_residual, std::numeric_limits<double>::infinity());
  CHECK(inf.alpha_hat == 1.0);
  CHECK(inf.qualified);

  auto const mid = discrepancy_sweep(alphas, linear_residual, 3.0);
  CHECK(mid.alpha_hat == 0.2);
  CHECK(mid.entries.size() == alphas.size());

  auto const none = discrepancy_sweep(alphas, linear_residual, 0.5);
  CHECK_FALSE(none.qualified);
  CHECK(none.alpha_hat == 0.1);

  auto const threaded = discrepancy_sweep(alphas, linear_residual, 3.0, 3);
  for (std::size_t i = 0; i < alphas.size(); ++i) { CHECK(threaded.entries[i].residual == mid.entries[i].residual); }

  CHECK_THROWS(discrepancy_sweep({}, linear_residual, 1.0));
  CHECK_THROWS(discrepancy_sweep({1.0, 0.5}, linear_residual, 1.0));
  CHECK_THROWS(discrepancy_sweep(alphas, linear_residual, 0.0));
  CHECK_THROWS_AS(discrepancy_sweep(alphas, [](double a) -> SweepEntry {
                    if (a > 0.3) { throw std::runtime_error("boom"); }
                    return {};
                  }, 1.0, 2),
                  std::runtime_error);
}

TEST_CASE("discrepancy sweep on noiseless velocity data")
{
  RunConfig cfg;
  cfg.experiment.n = 16;
  cfg.experiment.coverage = 0.3;
  cfg.experiment.noise_sigma = 0.0;
  cfg.max_iters = 20000;
  auto const data = make_velocity_data(cfg.experiment);
  auto solve = [&](double a) {
    RunConfig c = cfg;
    c.experiment = with_alpha(cfg.experiment, a);
    auto const rep = solve_velocity(c, data);
    return SweepEntry{a, rep.residual, rep.psnr_r, rep.psnr_phi, rep.status, rep.iterations};
  };
  std::vector<double> const alphas{1e-4, 2e-4};
  auto const a = discrepancy_sweep(alphas, solve, 0.05);
  auto const b = discrepancy_sweep(alphas, solve, 0.05, 2);
  CHECK(a.qualified);
  CHECK(a.alpha_hat == 2e-4);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    CHECK(a.entries[i].residual == b.entries[i].residual);
    CHECK(a.entries[i].psnr_r == b.entries[i].psnr_r);
  }
}

TEST_CASE("noise level")
{
  CHECK(noise_level(50, 0.2) == doctest::Approx(std::sqrt(100.0) * 0.2));
}

TEST_CASE("serialisation round trips")
{
  SUBCASE("pgm16")
  {
    Field f = Field::scalar(Grid{7, 5, 1, 1.0});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 3.0);
    for (auto &v : f.data()) { v = u(rng); }
    auto const p = scratch("field.pgm");
    write_pgm16(f, p);
    CHECK(fs::exists(range_path(p)));
    auto const g = read_pgm16(p);
    auto const [lo, hi] = std::minmax_element(f.data().begin(), f.data().end());
    double const step = (*hi - *lo) / 65535.0;
    for (std::size_t i = 0; i < f.size(); ++i) { CHECK(std::abs(g[i] - f[i]) <= step); }
  }

  SUBCASE("summary")
  {
    Summary const s{{"variant", "nl-exact"}, {"psnr_r", "25.5"}, {"note", "a: b"}};
    write_summary(s, scratch("run.summary"));
    CHECK(read_summary(scratch("run.summary")) == s);
  }

  SUBCASE("pbm")
  {
    auto const m = SamplingMask(11, 3, std::vector<std::uint8_t>{1, 0, 0, 1, 1, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0, 0, 0, 0,
                                                                 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1});
    write_pbm(m, scratch("mask.pbm"));
    CHECK(read_pbm(scratch("mask.pbm")) == m);

    std::ofstream(scratch("ascii.pbm")) << "P1\n# comment\n3 2\n1 0 1\n0 1 0\n";
    auto const a = read_pbm(scratch("ascii.pbm"));
    CHECK(a.count() == 3);
    CHECK(a.selected(2, 0));
    CHECK(a.selected(1, 1));
  }

  SUBCASE("k-space")
  {
    auto const m = SamplingMask(4, 4, std::vector<std::uint8_t>{1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1});
    Field c = Field::complex(Grid{int(m.count()), 1, 1, 1.0});
    for (std::size_t i = 0; i < c.size(); ++i) { c[i] = 0.1 * double(i) - 1.0 / 3.0; }
    write_kspace(c, m, scratch("data.nlsd"));
    CHECK(fs::file_size(scratch("data.nlsd")) == 16 + 16 * 16);
    auto const back = read_kspace(scratch("data.nlsd"), m);
    CHECK(data_hash(back) == data_hash(c));
    CHECK_THROWS_AS(read_kspace(scratch("data.nlsd"), SamplingMask::full(5, 5)), IoError);
  }

  SUBCASE("gradient directions")
  {
    std::vector<GradientDirection> const b{{1.0, 0.0, 0.0}, {0.6, 0.8, 0.0}, {0.0, std::sqrt(0.5), std::sqrt(0.5)}};
    write_bvectors(b, scratch("bvecs.txt"));
    CHECK(read_bvectors(scratch("bvecs.txt")) == b);
  }

  SUBCASE("telemetry rows")
  {
    std::vector<IterationRecord> recs(3);
    for (int i = 0; i < 3; ++i) { recs[i].iter = i + 1; }
    write_telemetry_csv(recs, scratch("telemetry.csv"));
    std::ifstream is(scratch("telemetry.csv"));
    std::string header;
    std::getline(is, header);
    CHECK(header == "iter,step_norm,weighted_step,data_residual,L,lin_error,wall_ms");
    int rows = 0;
    for (std::string line; std::getline(is, line);) { ++rows; }
    CHECK(rows == 3);
  }

  SUBCASE("failures name the file")
  {
    auto const missing = scratch("does_not_exist.pgm");
    try {
      read_pgm16(missing);
      FAIL("expected an IoError");
    } catch (IoError const &e) {
      CHECK(std::string(e.what()).find(missing.string()) != std::string::npos);
    }
    std::ofstream(scratch("bad.nlsd")) << "XXXX";
    CHECK_THROWS_AS(read_kspace(scratch("bad.nlsd"), SamplingMask::full(2, 2)), IoError);
    CHECK_THROWS_AS(write_summary({}, fs::path("/proc/nonexistent/dir/run.summary")), IoError);
  }
}

TEST_CASE("data hash is sensitive to every bit")
{
  Field f = Field::scalar(Grid{3, 3, 1, 1.0});
  auto const h0 = data_hash(f);
  CHECK(h0.size() == 16);
  f[4] = std::nextafter(0.0, 1.0);
  CHECK(data_hash(f) != h0);
}
