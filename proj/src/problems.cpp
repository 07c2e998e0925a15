#include "nlsaddle/problems.hpp"

#include "nlsaddle/differential.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

namespace nlsaddle {

namespace {

double centre(int i, int n) { return -1.0 + (i + 0.5) * 2.0 / n; }

bool in_ring(double rho) { return rho > 0.3 && rho < 0.9; }

// g = ∇u − w, e = c·E w.
void tgv_value(Field const &u, Field const &w, double c, Field &g, Field &e)
{
  forward_gradient(u, g);
  g.axpy(-1.0, w);
  symmetrised_gradient(w, u.comps(), e);
  e.scale(c);
}

// du += ∇*p, dw = −p + c·E*q.
void tgv_adjoint(Field const &p, Field const &q, double c, int channels, Field &du, Field &dw)
{
  Field tmp = du.zeros_like();
  forward_gradient_adjoint(p, tmp);
  du.axpy(1.0, tmp);
  symmetrised_gradient_adjoint(q, channels, dw);
  dw.scale(c);
  dw.axpy(-1.0, p);
}

std::shared_ptr<BlockResolvent const> make_f_star(std::string const &fid_name, Field data,
                                                  std::vector<std::pair<std::string, HuberBallSpec>> const &balls)
{
  std::vector<BlockResolvent::Entry> entries;
  entries.emplace_back(fid_name, std::make_shared<QuadraticFidelityProx const>(std::move(data)));
  for (auto const &[name, spec] : balls) { entries.emplace_back(name, std::make_shared<HuberBallProx const>(spec)); }
  return std::make_shared<BlockResolvent const>(std::move(entries));
}

StackedVector random_point(NonlinearOp const &k, double scale, std::uint64_t seed)
{
  StackedVector x = k.domain();
  fill_normal(x, seed);
  x.scale(scale);
  return x;
}

} // namespace

void ExperimentSpec::validate() const
{
  if (n < 8) { throw std::invalid_argument("ExperimentSpec: n must be at least 8"); }
  if (!(coverage > 0.0 && coverage <= 1.0)) { throw std::invalid_argument("ExperimentSpec: coverage must lie in (0, 1]"); }
  if (!(alpha_r > 0) || !(alpha_phi > 0) || !(beta_phi > 0)) {
    throw std::invalid_argument("ExperimentSpec: regularisation weights must be positive");
  }
  if (!(noise_sigma >= 0) || !(gamma >= 0) || !(mask_variance > 0)) {
    throw std::invalid_argument("ExperimentSpec: noise_sigma, gamma must be non-negative and mask_variance positive");
  }
}

VelocityWeights effective_weights(ExperimentSpec const &spec)
{
  double const s = spec.h();
  return {spec.alpha_r * s, spec.alpha_phi * s, spec.beta_phi * s * s};
}

std::pair<double, double> velocity_phantom_at(double x, double y)
{
  double const rho = std::hypot(x, y);
  return {in_ring(rho) ? 1.0 : 0.0, rho > 0.0 ? x / rho : 0.0};
}

VelocityPhantom velocity_phantom(int n, double h)
{
  if (n < 8) { throw std::invalid_argument("velocity_phantom: n must be at least 8"); }
  Grid const g{n, n, 1, h};
  VelocityPhantom ph{Field::scalar(g), Field::scalar(g)};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      auto const [r, phi] = velocity_phantom_at(centre(i, n), centre(j, n));
      std::size_t const p = g.index(i, j);
      ph.r[p] = r;
      ph.phi[p] = phi;
    }
  }
  return ph;
}

std::vector<std::uint8_t> ring_mask(int n)
{
  std::vector<std::uint8_t> m(std::size_t(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) { m[std::size_t(j) * n + i] = in_ring(std::hypot(centre(i, n), centre(j, n))) ? 1 : 0; }
  }
  return m;
}

SamplingMask gaussian_mask(int n, double coverage, double variance, std::uint64_t seed, bool force_dc,
                           std::size_t max_attempts)
{
  std::size_t const total = std::size_t(n) * n;
  auto const target = std::size_t(std::ceil(coverage * double(total) - 1e-9));
  if (n < 1 || target < 1 || target > total) { throw std::invalid_argument("gaussian_mask: need 1 ≤ coverage·n² ≤ n²"); }
  if (!(variance > 0)) { throw std::invalid_argument("gaussian_mask: variance must be positive"); }
  if (max_attempts == 0) { max_attempts = 1000 * total + 1000000; }

  std::vector<std::uint8_t> bits(total, 0);
  std::size_t count = 0;
  if (force_dc) {
    bits[0] = 1;
    count = 1;
  }
  double const sd = std::sqrt(variance) * n / 256.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sd);
  auto wrap = [n](long long k) { return int(((k % n) + n) % n); };
  std::size_t attempts = 0;
  while (count < target) {
    if (++attempts > max_attempts) {
      std::ostringstream os;
      os << "gaussian_mask: only " << count << " of " << target << " coefficients selected after " << max_attempts
         << " draws; increase the variance or lower the coverage";
      throw std::runtime_error(os.str());
    }
    int const i = wrap(std::llround(normal(rng)));
    int const j = wrap(std::llround(normal(rng)));
    auto &b = bits[std::size_t(j) * n + i];
    if (b == 0) {
      b = 1;
      ++count;
    }
  }
  return SamplingMask(n, n, std::move(bits));
}

Field kspace_simulate(FourierSampler const &sampler, Field const &r, Field const &phi, double noise_sigma,
                      std::uint64_t seed)
{
  if (r.size() != sampler.image_size() || phi.size() != sampler.image_size()) {
    throw ShapeError("kspace_simulate: image size does not match the mask");
  }
  if (!(noise_sigma >= 0)) { throw std::invalid_argument("kspace_simulate: noise_sigma must be non-negative"); }
  std::vector<std::complex<double>> u(r.size());
  for (std::size_t p = 0; p < u.size(); ++p) { u[p] = std::polar(1.0, phi[p]) * r[p]; }
  Field f = sampler.coefficient_field();
  sampler.forward(u, f.data());
  if (noise_sigma > 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise_sigma);
    for (double &v : f.data()) { v += normal(rng); }
  }
  return f;
}

namespace {
StackedVector velocity_domain(PhaseMagnitudeOp const &t)
{
  StackedVector x = t.domain();
  x.add("w", gradient_field(x["phi"]));
  return x;
}

StackedVector velocity_range(PhaseMagnitudeOp const &t)
{
  StackedVector const x = t.domain();
  Field const w = gradient_field(x["phi"]);
  StackedVector y = t.range();
  y.add("r_grad", gradient_field(x["r"]));
  y.add("phi_grad", w);
  y.add("w_sym", symgrad_field(w, 1));
  return y;
}
} // namespace

VelocityOp::VelocityOp(std::shared_ptr<PhaseMagnitudeOp const> forward, double sym_scale)
  : NonlinearOp(velocity_domain(*forward), velocity_range(*forward))
  , forward_(std::move(forward))
  , c_(sym_scale)
{
}

void VelocityOp::value_to(StackedVector const &x, StackedVector &out) const
{
  forward_->value(x["r"], x["phi"], out["lambda"]);
  forward_gradient(x["r"], out["r_grad"]);
  tgv_value(x["phi"], x["w"], c_, out["phi_grad"], out["w_sym"]);
}

void VelocityOp::jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const
{
  forward_->jac(x["r"], x["phi"], dx["r"], dx["phi"], out["lambda"]);
  forward_gradient(dx["r"], out["r_grad"]);
  tgv_value(dx["phi"], dx["w"], c_, out["phi_grad"], out["w_sym"]);
}

void VelocityOp::jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const
{
  Field &dr = out["r"];
  Field &dphi = out["phi"];
  forward_->jac_adjoint(x["r"], x["phi"], y["lambda"], dr, dphi);
  Field tmp = dr.zeros_like();
  forward_gradient_adjoint(y["r_grad"], tmp);
  dr.axpy(1.0, tmp);
  tgv_adjoint(y["phi_grad"], y["w_sym"], c_, 1, dphi, out["w"]);
}

void self_check(NonlinearOp const &k, StackedVector const &x, double adjoint_tol, double jacobian_tol)
{
  double const adj = jacobian_adjoint_mismatch(k, x, 0xad1);
  double const jac = jacobian_fd_mismatch(k, x, 0xfd1);
  if (!(adj <= adjoint_tol) || !(jac <= jacobian_tol)) {
    std::ostringstream os;
    os << "operator self-check failed: adjoint mismatch " << adj << " (tol " << adjoint_tol << "), Jacobian mismatch "
       << jac << " (tol " << jacobian_tol << ")";
    throw std::logic_error(os.str());
  }
}

VelocityProblem build_velocity_problem(ExperimentSpec const &spec, Field const &f, SamplingMask const &mask,
                                       bool self_check_op)
{
  spec.validate();
  if (mask.nx() != spec.n || mask.ny() != spec.n) { throw ShapeError("build_velocity_problem: mask size differs from n"); }
  VelocityProblem vp;
  vp.h = spec.h();
  vp.weights = effective_weights(spec);
  vp.sampler = std::make_shared<FourierSampler const>(mask);
  if (!f.same_layout(vp.sampler->coefficient_field())) { throw ShapeError("build_velocity_problem: data layout"); }
  auto t = std::make_shared<PhaseMagnitudeOp const>(vp.sampler, vp.h);
  vp.op = std::make_shared<VelocityOp const>(t, vp.weights.beta_phi / vp.weights.alpha_phi);
  vp.problem.k = vp.op;
  vp.problem.g = std::make_shared<ZeroFunctional const>();
  vp.problem.f_star = make_f_star("lambda", f,
                                  {{"r_grad", {vp.weights.alpha_r, spec.gamma}},
                                   {"phi_grad", {vp.weights.alpha_phi, spec.gamma}},
                                   {"w_sym", {vp.weights.alpha_phi, spec.gamma}}});
  vp.problem.fidelity_block = "lambda";
  vp.problem.validate();
  if (self_check_op) { self_check(*vp.op, random_point(*vp.op, 1.0, spec.seed)); }
  return vp;
}

VelocityPhantom backprojection(FourierSampler const &sampler, Field const &f, double h)
{
  int const n = sampler.mask().nx();
  Grid const g{n, sampler.mask().ny(), 1, h};
  std::vector<std::complex<double>> u(sampler.image_size());
  sampler.adjoint(f.data(), u);
  VelocityPhantom bp{Field::scalar(g), Field::scalar(g)};
  for (std::size_t p = 0; p < u.size(); ++p) {
    double const m = std::abs(u[p]);
    bp.r[p] = m;
    bp.phi[p] = m < 1e-12 ? 0.0 : std::arg(u[p]);
  }
  return bp;
}

StackedVector velocity_initial(VelocityProblem const &vp, Field const &f)
{
  auto bp = backprojection(*vp.sampler, f, vp.h);
  StackedVector x = vp.problem.primal_zero();
  x["r"] = std::move(bp.r);
  x["phi"] = std::move(bp.phi);
  return x;
}

namespace {
StackedVector tv_range(Grid const &g)
{
  StackedVector y;
  y.add("lambda", Field::scalar(g));
  y.add("grad", gradient_field(Field::scalar(g)));
  return y;
}
} // namespace

TvDenoiseOp::TvDenoiseOp(Grid grid)
  : LinearOp(single_block("v", Field::scalar(grid)), tv_range(grid))
{
}

void TvDenoiseOp::apply_to(StackedVector const &x, StackedVector &out) const
{
  out["lambda"] = x["v"];
  forward_gradient(x["v"], out["grad"]);
}

void TvDenoiseOp::adjoint_to(StackedVector const &y, StackedVector &out) const
{
  Field &v = out["v"];
  forward_gradient_adjoint(y["grad"], v);
  v.axpy(1.0, y["lambda"]);
}

TvProblem build_tv_denoising(Field const &f, double alpha, double gamma)
{
  if (!(alpha > 0) || !(gamma >= 0)) { throw std::invalid_argument("build_tv_denoising: need alpha > 0, gamma ≥ 0"); }
  if (f.comps() != 1) { throw ShapeError("build_tv_denoising: data must be a scalar field"); }
  TvProblem tv;
  tv.op = std::make_shared<TvDenoiseOp const>(f.grid());
  Field data = Field::scalar(f.grid());
  std::copy(f.data().begin(), f.data().end(), data.data().begin());
  auto f_star = make_f_star("lambda", data, {{"grad", {alpha, gamma}}});
  auto g = std::make_shared<ZeroFunctional const>();
  tv.problem = SaddleProblem{std::make_shared<LinearWrapper const>(tv.op), g, f_star, "lambda"};
  tv.linear = LinearProblem{tv.op, g, f_star, {}};
  tv.problem.validate();
  return tv;
}

void DtiSpec::validate() const
{
  if (nx < 4 || ny < 4 || nz < 1) { throw std::invalid_argument("DtiSpec: need nx, ny ≥ 4 and nz ≥ 1"); }
  if ((b.empty() ? num_gradients : int(b.size())) < 6) {
    throw std::invalid_argument("DtiSpec: at least 6 gradient directions are needed to identify a tensor");
  }
  if (!(alpha > 0) || !(beta > 0) || !(gamma >= 0) || !(noise_sigma >= 0) || !(s0 > 0)) {
    throw std::invalid_argument("DtiSpec: invalid weights, noise level or s0");
  }
}

std::vector<GradientDirection> DtiSpec::gradients() const { return b.empty() ? spiral_directions(num_gradients) : b; }

std::vector<GradientDirection> spiral_directions(int count)
{
  if (count < 1) { throw std::invalid_argument("spiral_directions: count must be positive"); }
  std::vector<GradientDirection> out;
  double const golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < count; ++j) {
    double const z = 1.0 - (j + 0.5) / count; // upper hemisphere: z ∈ (0, 1)
    double const rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    double const t = golden * j;
    out.push_back({rad * std::cos(t), rad * std::sin(t), z});
  }
  return out;
}

DtiPhantom dti_phantom(int nx, int ny, int nz, std::uint64_t seed, double s0_level)
{
  if (nx < 4 || ny < 4 || nz < 1) { throw std::invalid_argument("dti_phantom: need nx, ny ≥ 4 and nz ≥ 1"); }
  Grid const g{nx, ny, nz, 1.0};
  DtiPhantom ph{Field::sym_tensor(g, 3), Field::scalar(g)};
  ph.s0.fill(s0_level);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double const offset = 2.0 * std::numbers::pi * uni(rng);
  double const tilt_rate = 0.3 + 0.4 * uni(rng);
  double const cx = 0.5 * (nx - 1);
  double const cy = 0.5 * (ny - 1);
  double const radius = 0.42 * std::min(nx, ny);

  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        double const dx = i - cx;
        double const dy = j - cy;
        double const rho = std::hypot(dx, dy);
        bool const inside = rho < radius;
        // Principal direction tangential to circles around the centre, tilted with depth.
        double const theta = std::atan2(dy, dx) + 0.5 * std::numbers::pi + offset * 0.1;
        double const tilt = tilt_rate * (k - 0.5 * (nz - 1)) / std::max(1, nz);
        std::array<double, 3> e1{std::cos(theta) * std::cos(tilt), std::sin(theta) * std::cos(tilt), std::sin(tilt)};
        std::array<double, 3> e2{-std::sin(theta), std::cos(theta), 0.0};
        std::array<double, 3> e3{-std::cos(theta) * std::sin(tilt), -std::sin(theta) * std::sin(tilt), std::cos(tilt)};
        std::array<double, 3> lam = inside ? std::array<double, 3>{-2.5, -0.7, -0.5} : std::array<double, 3>{-1.0, -1.0, -1.0};
        double m[3][3] = {};
        std::array<std::array<double, 3>, 3> const es{e1, e2, e3};
        for (int q = 0; q < 3; ++q) {
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) { m[a][b] += lam[q] * es[q][a] * es[q][b]; }
          }
        }
        std::size_t const p = g.index(i, j, k);
        double const vals[6] = {m[0][0], m[1][1], m[2][2], m[0][1], m[0][2], m[1][2]};
        for (int c = 0; c < 6; ++c) { ph.v.at(p, c) = vals[c]; }
      }
    }
  }
  return ph;
}

Field dti_simulate(StejskalTannerOp const &op, Field const &v, double noise_sigma, std::uint64_t seed)
{
  Field s = op.signal_field();
  op.value(v, s);
  if (noise_sigma > 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise_sigma);
    for (double &e : s.data()) { e += normal(rng); }
  }
  return s;
}

Field log_linear_fit(Field const &signals, Field const &s0, std::vector<GradientDirection> const &b, double floor)
{
  std::size_t const nb = b.size();
  if (nb < 6 || signals.comps() != int(nb) || signals.points() != s0.points()) {
    throw ShapeError("log_linear_fit: need ≥ 6 directions and matching signal layout");
  }
  // Design matrix rows (bx², by², bz², 2bxby, 2bxbz, 2bybz); normal equations solved by Cholesky.
  std::vector<std::array<double, 6>> a(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    auto const &d = b[j];
    a[j] = {d[0] * d[0], d[1] * d[1], d[2] * d[2], 2 * d[0] * d[1], 2 * d[0] * d[2], 2 * d[1] * d[2]};
  }
  double n[6][6] = {};
  for (auto const &row : a) {
    for (int p = 0; p < 6; ++p) {
      for (int q = 0; q < 6; ++q) { n[p][q] += row[p] * row[q]; }
    }
  }
  double l[6][6] = {};
  for (int p = 0; p < 6; ++p) {
    for (int q = 0; q <= p; ++q) {
      double s = n[p][q];
      for (int r = 0; r < q; ++r) { s -= l[p][r] * l[q][r]; }
      if (p == q) {
        if (!(s > 1e-12)) { throw std::invalid_argument("log_linear_fit: gradient directions do not identify a tensor"); }
        l[p][p] = std::sqrt(s);
      } else {
        l[p][q] = s / l[q][q];
      }
    }
  }

  Field v = Field::sym_tensor(s0.grid(), 3);
  for (std::size_t pt = 0; pt < s0.points(); ++pt) {
    double const base = s0[pt];
    double rhs[6] = {};
    for (std::size_t j = 0; j < nb; ++j) {
      double const sj = std::max(signals.at(pt, int(j)), floor * base);
      double const y = base > 0 ? std::log(sj / base) : 0.0;
      for (int p = 0; p < 6; ++p) { rhs[p] += a[j][p] * y; }
    }
    double z[6];
    for (int p = 0; p < 6; ++p) {
      double s = rhs[p];
      for (int r = 0; r < p; ++r) { s -= l[p][r] * z[r]; }
      z[p] = s / l[p][p];
    }
    for (int p = 5; p >= 0; --p) {
      double s = z[p];
      for (int r = p + 1; r < 6; ++r) { s -= l[r][p] * v.at(pt, r); }
      v.at(pt, p) = s / l[p][p];
    }
  }
  return v;
}

namespace {
StackedVector dti_domain(StejskalTannerOp const &t)
{
  StackedVector x = t.domain();
  x.add("w", gradient_field(x["v"]));
  return x;
}

StackedVector dti_range(StejskalTannerOp const &t)
{
  Field const w = gradient_field(t.domain()["v"]);
  StackedVector y = t.range();
  y.add("v_grad", w);
  y.add("w_sym", symgrad_field(w, 6));
  return y;
}
} // namespace

DtiOp::DtiOp(std::shared_ptr<StejskalTannerOp const> forward, double sym_scale)
  : NonlinearOp(dti_domain(*forward), dti_range(*forward))
  , forward_(std::move(forward))
  , c_(sym_scale)
{
}

void DtiOp::value_to(StackedVector const &x, StackedVector &out) const
{
  forward_->value(x["v"], out["s"]);
  tgv_value(x["v"], x["w"], c_, out["v_grad"], out["w_sym"]);
}

void DtiOp::jac_apply_to(StackedVector const &x, StackedVector const &dx, StackedVector &out) const
{
  forward_->jac(x["v"], dx["v"], out["s"]);
  tgv_value(dx["v"], dx["w"], c_, out["v_grad"], out["w_sym"]);
}

void DtiOp::jac_adjoint_to(StackedVector const &x, StackedVector const &y, StackedVector &out) const
{
  forward_->jac_adjoint(x["v"], y["s"], out["v"]);
  tgv_adjoint(y["v_grad"], y["w_sym"], c_, 6, out["v"], out["w"]);
}

DtiProblem build_dti_problem(DtiSpec const &spec, Field const &signals, Field const &s0, bool self_check_op)
{
  spec.validate();
  Grid const g{spec.nx, spec.ny, spec.nz, 1.0};
  if (!(s0.grid() == g) || s0.comps() != 1) { throw ShapeError("build_dti_problem: s0 must be a scalar field on the spec grid"); }
  auto t = std::make_shared<StejskalTannerOp const>(s0, spec.gradients());
  if (!signals.same_layout(t->signal_field())) { throw ShapeError("build_dti_problem: signal layout"); }
  DtiProblem dp;
  dp.op = std::make_shared<DtiOp const>(t, spec.beta / spec.alpha);
  dp.problem.k = dp.op;
  dp.problem.g = std::make_shared<ZeroFunctional const>();
  dp.problem.f_star = make_f_star("s", signals, {{"v_grad", {spec.alpha, spec.gamma}}, {"w_sym", {spec.alpha, spec.gamma}}});
  dp.problem.fidelity_block = "s";
  dp.problem.validate();
  if (self_check_op) { self_check(*dp.op, random_point(*dp.op, 0.3, spec.seed)); }
  return dp;
}

} // namespace nlsaddle
