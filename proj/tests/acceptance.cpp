// Acceptance gate: one PASS/FAIL line per criterion.
//
// Usage: acceptance [criterion...]   (default: all of 1–10)

#include "nlsaddle/cli.hpp"
#include "nlsaddle/differential.hpp"
#include "prox_oracle.hpp"
#include "toy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

using namespace nlsaddle;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 4)
{
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

struct Verdict
{
  bool pass = false;
  std::string detail;
};

StackedVector random_point(StackedVector v, std::uint64_t seed, double scale = 1.0, double shift = 0.0)
{
  fill_normal(v, seed);
  for (auto &b : v.blocks()) {
    for (auto &e : b.field.data()) { e = shift + scale * e; }
  }
  return v;
}

Field noisy_square(int n, std::uint64_t seed)
{
  Field f = Field::scalar(Grid{n, n, 1, 1.0});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      bool const inside = i >= n / 4 && i < 3 * n / 4 && j >= n / 4 && j < 3 * n / 4;
      f[std::size_t(j) * n + i] = (inside ? 1.0 : 0.0) + noise(rng);
    }
  }
  return f;
}

double median(std::vector<double> v)
{
  if (v.empty()) { return std::numeric_limits<double>::quiet_NaN(); }
  std::sort(v.begin(), v.end());
  std::size_t const m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Runs shared between criteria, computed on first use.
struct VelocityRun
{
  std::string name;
  RunReport report;
  double data_norm = 0.0;
  double tau0 = 0.0, sigma0 = 0.0;
  bool exact = false;
};

class Runs
{
public:
  RunConfig n64_config(SolverKind kind) const
  {
    RunConfig cfg;
    cfg.solver = kind;
    cfg.experiment.n = 64;
    return cfg;
  }

  VelocityData const &n64_data()
  {
    if (!n64_data_) { n64_data_ = make_velocity_data(n64_config(SolverKind::NlExact).experiment); }
    return *n64_data_;
  }

  VelocityRun const &velocity(std::string const &key)
  {
    auto it = velocity_.find(key);
    if (it != velocity_.end()) { return it->second; }
    RunConfig cfg = n64_config(SolverKind::NlExact);
    VelocityData const *data = nullptr;
    if (key == "n64-exact") {
      data = &n64_data();
    } else if (key == "n64-linearised") {
      cfg.solver = SolverKind::NlLinearised;
      data = &n64_data();
    } else if (key == "n64-gn") {
      cfg.solver = SolverKind::GaussNewton;
      data = &n64_data();
    } else if (key == "n256-exact") {
      cfg.experiment.n = 256;
      n256_data_ = make_velocity_data(cfg.experiment);
      data = &*n256_data_;
    } else {
      throw std::logic_error("unknown run " + key);
    }
    std::cerr << "  running " << key << " ..." << std::endl;
    VelocityRun run{key, solve_velocity(cfg, *data), data->f.norm(), cfg.tau0, cfg.sigma0,
                    cfg.solver == SolverKind::NlExact};
    std::cerr << "  " << key << ": " << to_string(run.report.status) << " after " << run.report.iterations
              << " iterations, " << num(run.report.wall_s) << " s" << std::endl;
    return velocity_.emplace(key, std::move(run)).first->second;
  }

  VelocityData const &n256_data() const { return *n256_data_; }

  DtiReport const &dti()
  {
    if (!dti_) {
      std::cerr << "  running dti ..." << std::endl;
      RunConfig cfg;
      dti_ = run_dti_demo(cfg);
    }
    return *dti_;
  }

  std::vector<VelocityRun const *> computed_velocity() const
  {
    std::vector<VelocityRun const *> out;
    for (auto const &[k, v] : velocity_) { out.push_back(&v); }
    return out;
  }
  bool have_dti() const { return dti_.has_value(); }

private:
  std::optional<VelocityData> n64_data_;
  std::optional<VelocityData> n256_data_;
  std::map<std::string, VelocityRun> velocity_;
  std::optional<DtiReport> dti_;
};

Verdict operator_calculus()
{
  auto const t0 = Clock::now();
  double adj = 0.0, fd = 0.0;
  int count = 0;
  auto lin = [&](LinearOp const &a, std::uint64_t seed) {
    adj = std::max(adj, adjoint_mismatch(a, seed));
    ++count;
  };
  auto nonlin = [&](NonlinearOp const &k, std::uint64_t seed, double scale, double shift) {
    for (std::uint64_t s = seed; s < seed + 3; ++s) {
      auto const x = random_point(k.domain(), s, scale, shift);
      adj = std::max(adj, jacobian_adjoint_mismatch(k, x, s + 100));
      fd = std::max(fd, jacobian_fd_mismatch(k, x, s + 200));
    }
    ++count;
  };
  double const variance = ExperimentSpec{}.mask_variance;

  for (double h : {1.0, 2.0 / 16}) {
    lin(GradientOp(Field::scalar(Grid{16, 12, 1, h})), 1);
    lin(GradientOp(Field::scalar(Grid{8, 8, 4, h})), 2);
    lin(GradientOp(Field::sym_tensor(Grid{8, 8, 2, h}, 3)), 3);
    lin(SymGradientOp(Field::vector(Grid{16, 16, 1, h}, 2), 1), 4);
    lin(SymGradientOp(gradient_field(Field::sym_tensor(Grid{8, 8, 2, h}, 3)), 6), 5);
    lin(TvDenoiseOp(Grid{12, 12, 1, h}), 6);
  }
  auto const sampler = std::make_shared<FourierSampler const>(gaussian_mask(16, 0.3, variance, 1));
  lin(FourierSampleOp(sampler), 7);
  auto const t = std::make_shared<PhaseMagnitudeOp const>(sampler, 1.0);
  nonlin(*t, 10, 1.0, 0.0);
  nonlin(VelocityOp(t, 0.2 / 0.15), 20, 1.0, 0.0);
  auto const th = std::make_shared<PhaseMagnitudeOp const>(sampler, 2.0 / 16);
  nonlin(VelocityOp(th, 2.0), 30, 1.0, 0.0);

  auto const ph = dti_phantom(8, 8, 2, 1);
  auto const st = std::make_shared<StejskalTannerOp const>(ph.s0, spiral_directions(12));
  nonlin(*st, 40, 0.3, -0.3);
  nonlin(DtiOp(st, 2.0), 50, 0.3, -0.2);

  double const secs = seconds_since(t0);
  bool const ok = adj <= 1e-10 && fd <= 1e-5 && secs < 10.0;
  return {ok, std::to_string(count) + " operators; max adjoint mismatch " + num(adj) + " (≤ 1e-10), max Jacobian FD mismatch " +
                num(fd) + " (≤ 1e-5), " + num(secs, 3) + " s (< 10 s)"};
}

Verdict prox_suite()
{
  auto const t0 = Clock::now();
  long violations = 0, comparisons = 0, firm = 0;
  double worst = 0.0;
  std::uint64_t seed = 101;
  auto const cases = prox_oracle::all_cases();
  for (auto const &c : cases) {
    auto const r = prox_oracle::beats_candidates(*c.f, c.layout, seed++);
    violations += r.violations;
    comparisons += r.comparisons;
    worst = std::max(worst, r.worst_excess);
    firm += prox_oracle::firm_nonexpansive_violations(*c.f, c.layout, seed++);
  }
  double const secs = seconds_since(t0);
  bool const ok = violations == 0 && firm == 0 && comparisons == long(cases.size()) * 50 * 10000 && secs < 30.0;
  return {ok, std::to_string(cases.size()) + " resolvents × 50 inputs × 10^4 candidates: " + std::to_string(violations) +
                " beaten (worst relative excess " + num(worst) + ", tol 1e-9); " + std::to_string(firm) +
                " firm-nonexpansiveness violations; " + num(secs, 3) + " s (< 30 s)"};
}

Verdict fixed_point()
{
  double worst = 0.0;
  auto first_step = [](auto const &problem, StackedVector const &x, StackedVector const &y, double tau0, double sigma0) {
    double w = 0.0;
    for (Variant v : {Variant::Exact, Variant::Linearised, Variant::Interpolated}) {
      SolverConfig c;
      c.variant = v;
      c.tau0 = tau0;
      c.sigma0 = sigma0;
      c.max_iters = 1;
      w = std::max(w, (nl_pdhgm(problem, x, y, c).x - x).norm());
    }
    auto const gn = gauss_newton(problem, x, y, GNConfig{});
    w = std::max(w, gn.records.empty() ? std::numeric_limits<double>::infinity() : gn.records.front().step_norm);
    return w;
  };

  auto const t = toy::make();
  worst = std::max(worst, first_step(t.problem, t.x_hat, t.y_hat, 0.95, 0.95));

  auto const tv = build_tv_denoising(noisy_square(8, 1), 0.15);
  SolverConfig c;
  c.tau0 = 0.5;
  c.sigma0 = 1.9;
  c.rho = 1e-13;
  c.max_iters = 2000000;
  auto const ref = nl_pdhgm(tv.problem, tv.problem.primal_zero(), tv.problem.dual_zero(), c);
  worst = std::max(worst, first_step(tv.problem, ref.x, ref.y, 0.5, 1.9));
  auto const [tau, sigma] = linear_steps(*tv.op, 0.5, 1.9);
  LinearPdhgmConfig lc;
  lc.tau = tau;
  lc.sigma = sigma;
  lc.max_iters = 1;
  lc.rho2 = -1.0;
  worst = std::max(worst, (linear_pdhgm(tv.linear, ref.x, ref.y, lc).x - ref.x).norm());

  bool const ok = worst <= 1e-8 && ref.status == Status::Converged;
  return {ok, "toy closed form and TV reference (" + std::to_string(ref.iterations) +
                " iterations); largest first step over NL-PDHGM variants, linear PDHGM and Gauss-Newton " + num(worst) +
                " (≤ 1e-8)"};
}

Verdict linear_equivalence()
{
  auto const tv = build_tv_denoising(noisy_square(12, 2), 0.1, 0.01);
  double const tau = 0.3, sigma = 0.35;
  int const iters = 100;
  std::vector<StackedVector> ref_x, ref_y;
  LinearPdhgmConfig lc;
  lc.tau = tau;
  lc.sigma = sigma;
  lc.max_iters = iters;
  lc.rho2 = -1.0;
  lc.gap_every = 0;
  lc.observer = [&](int, StackedVector const &x, StackedVector const &y) {
    ref_x.push_back(x);
    ref_y.push_back(y);
  };
  linear_pdhgm(tv.linear, tv.problem.primal_zero(), tv.problem.dual_zero(), lc);

  double worst = 0.0;
  int compared = 0;
  for (Variant v : {Variant::Exact, Variant::Linearised, Variant::Interpolated}) {
    SolverConfig c;
    c.variant = v;
    c.adapt_steps = false;
    c.tau0 = tau;
    c.sigma0 = sigma;
    c.max_iters = iters;
    c.rho = 0.0;
    c.observer = [&](int it, StackedVector const &x, StackedVector const &y) {
      auto const i = std::size_t(it - 1);
      worst = std::max({worst, (x - ref_x[i]).norm(), (y - ref_y[i]).norm()});
      ++compared;
    };
    nl_pdhgm(tv.problem, tv.problem.primal_zero(), tv.problem.dual_zero(), c);
  }
  bool const ok = compared == 3 * iters && int(ref_x.size()) == iters && worst <= 1e-12;
  return {ok, "3 variants × " + std::to_string(iters) + " iterations vs linear PDHGM: max iterate difference " + num(worst) +
                " (≤ 1e-12)"};
}

Verdict variant_parity(Runs &runs)
{
  auto const &e = runs.velocity("n64-exact");
  auto const &l = runs.velocity("n64-linearised");
  double const ie = e.report.iterations, il = l.report.iterations;
  double const rel_iters = std::abs(ie - il) / ie;
  double const rel_x = (e.report.x - l.report.x).norm() / e.report.x.norm();
  double const secs = e.report.wall_s + l.report.wall_s;
  bool const ok = e.report.status == Status::Converged && l.report.status == Status::Converged && rel_iters <= 0.1 &&
                  rel_x <= 1e-3 && secs < 120.0;
  return {ok, "n=64: exact " + std::to_string(int(ie)) + " vs linearised " + std::to_string(int(il)) +
                " iterations (rel. diff " + num(rel_iters) + " ≤ 0.1); final primal rel. diff " + num(rel_x) +
                " (≤ 1e-3); " + num(secs, 3) + " s (< 120 s)"};
}

Verdict table2(Runs &runs)
{
  auto const &r = runs.velocity("n256-exact");
  RunConfig cfg;
  cfg.experiment.n = 256;
  auto const [bp_r, bp_phi] = backprojection_psnr(cfg, runs.n256_data());
  auto within = [](double v, double centre, double tol) { return std::abs(v - centre) <= tol; };
  int const it = r.report.iterations;
  bool const ok = r.report.status == Status::Converged && within(r.report.psnr_r, 25.5, 1.5) &&
                  within(r.report.psnr_phi, 51.2, 2.5) && within(bp_r, 19.2, 1.5) && within(bp_phi, 41.0, 2.5) &&
                  it >= 8200 / 2 && it <= 8200 * 2;
  return {ok, "n=256: NL-PDHGM PSNR r " + num(r.report.psnr_r) + " (25.5 ± 1.5), φ " + num(r.report.psnr_phi) +
                " (51.2 ± 2.5); backprojection " + num(bp_r) + " (19.2 ± 1.5) / " + num(bp_phi) + " (41.0 ± 2.5); " +
                std::to_string(it) + " iterations (4100–16400); " + num(r.report.wall_s, 4) + " s"};
}

Verdict gauss_newton_comparison(Runs &runs)
{
  auto const &nl = runs.velocity("n64-exact");
  auto const &gn = runs.velocity("n64-gn");
  double const dr = std::abs(gn.report.psnr_r - nl.report.psnr_r);
  double const dphi = std::abs(gn.report.psnr_phi - nl.report.psnr_phi);
  double const ratio = double(gn.report.iterations) / double(nl.report.iterations);
  bool const ok = gn.report.status == Status::Converged && dr <= 1.0 && dphi <= 1.0 && ratio >= 3.0;
  return {ok, "n=64: Gauss-Newton " + std::to_string(gn.report.gn_outer) + " outer / " +
                std::to_string(gn.report.iterations) + " inner vs NL-PDHGM " + std::to_string(nl.report.iterations) +
                " (ratio " + num(ratio, 3) + " ≥ 3); PSNR gap r " + num(dr, 3) + " dB, φ " + num(dphi, 3) +
                " dB (≤ 1 dB); " + num(gn.report.wall_s, 4) + " s"};
}

Verdict optimality(Runs &runs, double rho)
{
  bool ok = true;
  int checked = 0;
  std::string detail;
  auto add = [&](std::string const &name, ResidualReport const &r, double fnorm) {
    bool const pass = r.data_consistency <= 1e-3 * fnorm && r.dual_fixed_point <= 10.0 * rho;
    ok = ok && pass;
    ++checked;
    detail += (detail.empty() ? "" : "; ") + name + " data " + num(r.data_consistency / fnorm) + "·‖f‖, dual " +
              num(r.dual_fixed_point);
  };
  for (auto const *run : runs.computed_velocity()) {
    if (run->report.status == Status::Converged) { add(run->name, run->report.optimality, run->data_norm); }
  }
  if (runs.have_dti() && runs.dti().status == Status::Converged) {
    add("dti", runs.dti().optimality, runs.dti().data_norm);
  }
  ok = ok && checked > 0;
  return {ok, std::to_string(checked) + " converged runs (data ≤ 1e-3·‖f‖, dual ≤ " + num(10 * rho) + "): " + detail};
}

Verdict dti_property(Runs &runs)
{
  auto const &d = runs.dti();
  double const gain = d.psnr_output - d.psnr_input;
  bool const ok = d.psnr_input >= 17.0 && d.psnr_input <= 18.0 && gain >= 2.0 && d.wall_s < 300.0;
  return {ok, "32×32×4 phantom: input PSNR " + num(d.psnr_input) + " dB (17–18), output " + num(d.psnr_output) +
                " dB, gain " + num(gain, 3) + " dB (≥ 2); " + std::to_string(d.iterations) + " iterations, " +
                num(d.wall_s, 3) + " s (< 300 s)"};
}

Verdict telemetry(Runs &runs)
{
  bool ok = true;
  int runs_checked = 0, records = 0;
  std::string detail;
  auto check = [&](std::string const &name, std::vector<IterationRecord> const &recs, double tau0, double sigma0,
                   bool exact, bool converged) {
    double prev = 0.0;
    double worst_ratio = 0.0;
    bool monotone = true;
    for (auto const &r : recs) {
      worst_ratio = std::max(worst_ratio, r.sigma * r.tau * r.L * r.L / (tau0 * sigma0));
      monotone = monotone && r.L >= prev;
      prev = r.L;
    }
    bool pass = monotone && worst_ratio <= 1.0 + 1e-12;
    std::string lin;
    if (exact && converged) {
      std::vector<double> head, tail;
      for (std::size_t i = 0; i < recs.size(); ++i) { (2 * i < recs.size() ? head : tail).push_back(recs[i].lin_error); }
      double const h = median(head), t = median(tail);
      pass = pass && t <= h;
      lin = ", lin_error median head " + num(h) + " / tail " + num(t);
    }
    ok = ok && pass;
    ++runs_checked;
    records += int(recs.size());
    detail += (detail.empty() ? "" : "; ") + name + ": max στL²/(τ₀σ₀) " + num(worst_ratio, 15) +
              (monotone ? ", L nondecreasing" : ", L DECREASES") + lin;
  };
  runs.velocity("n64-exact");
  runs.velocity("n64-linearised");
  for (auto const *run : runs.computed_velocity()) {
    if (run->report.records.empty()) { continue; }
    check(run->name, run->report.records, run->tau0, run->sigma0, run->exact, run->report.status == Status::Converged);
  }
  RunConfig const dcfg;
  check("dti", runs.dti().records, dcfg.tau0, dcfg.sigma0, true, runs.dti().status == Status::Converged);
  return {ok && runs_checked > 0, std::to_string(runs_checked) + " runs, " + std::to_string(records) + " records: " + detail};
}

} // namespace

int main(int argc, char **argv)
{
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) { selected.insert(std::atoi(argv[i])); }
  if (selected.empty()) {
    for (int k = 1; k <= 10; ++k) { selected.insert(k); }
  }

  Runs runs;
  double const rho = RunConfig{}.rho;
  // Criterion 8 and 10 inspect the runs made for the others, so they go last.
  std::vector<std::pair<int, std::function<Verdict()>>> const criteria{
    {1, operator_calculus},
    {2, prox_suite},
    {3, fixed_point},
    {4, linear_equivalence},
    {5, [&] { return variant_parity(runs); }},
    {6, [&] { return table2(runs); }},
    {7, [&] { return gauss_newton_comparison(runs); }},
    {9, [&] { return dti_property(runs); }},
    {10, [&] { return telemetry(runs); }},
    {8, [&] { return optimality(runs, rho); }},
  };

  std::map<int, Verdict> verdicts;
  for (auto const &[id, fn] : criteria) {
    if (!selected.count(id)) { continue; }
    try {
      verdicts[id] = fn();
    } catch (std::exception const &e) {
      verdicts[id] = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (verdicts[id].pass ? "PASS" : "FAIL") << " criterion " << id << ": " << verdicts[id].detail
              << std::endl;
  }
  bool const all = std::all_of(verdicts.begin(), verdicts.end(), [](auto const &v) { return v.second.pass; });
  return all ? 0 : 1;
}
