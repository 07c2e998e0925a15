#include "nlsaddle/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace nlsaddle {

namespace fs = std::filesystem;

std::string to_string(SolverKind s)
{
  switch (s) {
  case SolverKind::NlExact: return "nl-exact";
  case SolverKind::NlLinearised: return "nl-linearised";
  case SolverKind::NlInterpolated: return "nl-interp";
  case SolverKind::GaussNewton: return "gauss-newton";
  }
  return "?";
}

SolverKind parse_solver(std::string const &s)
{
  if (s == "nl-exact") { return SolverKind::NlExact; }
  if (s == "nl-linearised" || s == "nl-linearized") { return SolverKind::NlLinearised; }
  if (s == "nl-interp") { return SolverKind::NlInterpolated; }
  if (s == "gauss-newton") { return SolverKind::GaussNewton; }
  throw ConfigError("unknown solver '" + s + "' (expected nl-exact, nl-linearised, nl-interp or gauss-newton)");
}

namespace {

std::string trim(std::string const &s)
{
  auto const b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) { return ""; }
  auto const e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string const &key, std::string const &v)
{
  T out{};
  auto const [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) { throw ConfigError("invalid value '" + v + "' for " + key); }
  return out;
}

bool parse_bool(std::string const &key, std::string const &v)
{
  if (v == "true" || v == "1" || v == "on" || v == "yes") { return true; }
  if (v == "false" || v == "0" || v == "off" || v == "no") { return false; }
  throw ConfigError("invalid boolean '" + v + "' for " + key);
}

std::string fmt(double v)
{
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt_short(double v)
{
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

struct KeyDef
{
  std::string name;
  std::function<void(RunConfig &, std::string const &)> set;
  std::function<std::string(RunConfig const &)> get;
};

template <class T>
KeyDef number_key(std::string name, std::function<T &(RunConfig &)> ref)
{
  return {name,
          [name, ref](RunConfig &c, std::string const &v) { ref(c) = parse_number<T>(name, v); },
          [ref](RunConfig const &c) {
            T const v = ref(const_cast<RunConfig &>(c));
            if constexpr (std::is_floating_point_v<T>) {
              return fmt(v);
            } else {
              return std::to_string(v);
            }
          }};
}

KeyDef bool_key(std::string name, std::function<bool &(RunConfig &)> ref)
{
  return {name, [name, ref](RunConfig &c, std::string const &v) { ref(c) = parse_bool(name, v); },
          [ref](RunConfig const &c) { return std::string(ref(const_cast<RunConfig &>(c)) ? "true" : "false"); }};
}

KeyDef string_key(std::string name, std::function<std::string &(RunConfig &)> ref)
{
  return {name, [ref](RunConfig &c, std::string const &v) { ref(c) = v; },
          [ref](RunConfig const &c) { return ref(const_cast<RunConfig &>(c)); }};
}

std::vector<KeyDef> const &key_table()
{
  static std::vector<KeyDef> const table = [] {
    std::vector<KeyDef> t;
    t.push_back(number_key<int>("n", [](RunConfig &c) -> int & { return c.experiment.n; }));
    t.push_back(number_key<double>("noise_sigma", [](RunConfig &c) -> double & { return c.experiment.noise_sigma; }));
    t.push_back(number_key<double>("coverage", [](RunConfig &c) -> double & { return c.experiment.coverage; }));
    t.push_back(number_key<double>("mask_variance", [](RunConfig &c) -> double & { return c.experiment.mask_variance; }));
    t.push_back(number_key<double>("alpha_r", [](RunConfig &c) -> double & { return c.experiment.alpha_r; }));
    t.push_back(number_key<double>("alpha_phi", [](RunConfig &c) -> double & { return c.experiment.alpha_phi; }));
    t.push_back(number_key<double>("beta_phi", [](RunConfig &c) -> double & { return c.experiment.beta_phi; }));
    t.push_back(number_key<double>("gamma", [](RunConfig &c) -> double & { return c.experiment.gamma; }));
    t.push_back(KeyDef{"seed",
                       [](RunConfig &c, std::string const &v) {
                         c.experiment.seed = parse_number<std::uint64_t>("seed", v);
                         c.dti.seed = c.experiment.seed;
                       },
                       [](RunConfig const &c) { return std::to_string(c.experiment.seed); }});
    t.push_back(bool_key("scale_by_h", [](RunConfig &c) -> bool & { return c.experiment.scale_by_h; }));
    t.push_back(bool_key("force_dc", [](RunConfig &c) -> bool & { return c.experiment.force_dc; }));
    t.push_back(KeyDef{"solver", [](RunConfig &c, std::string const &v) { c.solver = parse_solver(v); },
                       [](RunConfig const &c) { return to_string(c.solver); }});
    t.push_back(number_key<double>("tau0", [](RunConfig &c) -> double & { return c.tau0; }));
    t.push_back(number_key<double>("sigma0", [](RunConfig &c) -> double & { return c.sigma0; }));
    t.push_back(number_key<double>("omega", [](RunConfig &c) -> double & { return c.omega; }));
    t.push_back(number_key<double>("rho", [](RunConfig &c) -> double & { return c.rho; }));
    t.push_back(number_key<double>("rho2", [](RunConfig &c) -> double & { return c.rho2; }));
    t.push_back(number_key<int>("max_iters", [](RunConfig &c) -> int & { return c.max_iters; }));
    t.push_back(number_key<int>("max_outer", [](RunConfig &c) -> int & { return c.max_outer; }));
    t.push_back(number_key<int>("max_inner", [](RunConfig &c) -> int & { return c.max_inner; }));
    t.push_back(number_key<int>("telemetry_every", [](RunConfig &c) -> int & { return c.telemetry_every; }));
    t.push_back(string_key("out_dir", [](RunConfig &c) -> std::string & { return c.out_dir; }));
    t.push_back(string_key("data", [](RunConfig &c) -> std::string & { return c.data; }));
    t.push_back(string_key("mask", [](RunConfig &c) -> std::string & { return c.mask; }));
    t.push_back(number_key<int>("dti_nx", [](RunConfig &c) -> int & { return c.dti.nx; }));
    t.push_back(number_key<int>("dti_ny", [](RunConfig &c) -> int & { return c.dti.ny; }));
    t.push_back(number_key<int>("dti_nz", [](RunConfig &c) -> int & { return c.dti.nz; }));
    t.push_back(number_key<int>("dti_gradients", [](RunConfig &c) -> int & { return c.dti.num_gradients; }));
    t.push_back(string_key("dti_bvectors", [](RunConfig &c) -> std::string & { return c.bvectors; }));
    t.push_back(number_key<double>("dti_s0", [](RunConfig &c) -> double & { return c.dti.s0; }));
    t.push_back(number_key<double>("dti_noise_sigma", [](RunConfig &c) -> double & { return c.dti.noise_sigma; }));
    t.push_back(number_key<double>("dti_alpha", [](RunConfig &c) -> double & { return c.dti.alpha; }));
    t.push_back(number_key<double>("dti_beta", [](RunConfig &c) -> double & { return c.dti.beta; }));
    t.push_back(number_key<double>("dti_gamma", [](RunConfig &c) -> double & { return c.dti.gamma; }));
    return t;
  }();
  return table;
}

KeyDef const &find_key(std::string const &key)
{
  for (auto const &k : key_table()) {
    if (k.name == key) { return k; }
  }
  throw ConfigError("unknown key '" + key + "'");
}

} // namespace

void RunConfig::set(std::string const &key, std::string const &value) { find_key(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string const &key) const { return find_key(key).get(*this); }

std::vector<std::string> const &RunConfig::keys()
{
  static std::vector<std::string> const names = [] {
    std::vector<std::string> v;
    for (auto const &k : key_table()) { v.push_back(k.name); }
    return v;
  }();
  return names;
}

RunConfig RunConfig::parse(std::string const &text, std::string const &source)
{
  RunConfig cfg;
  std::istringstream is(text);
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    auto const hash = line.find('#');
    if (hash != std::string::npos) { line.resize(hash); }
    line = trim(line);
    if (line.empty()) { continue; }
    auto const eq = line.find('=');
    std::string const where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) { throw ConfigError(where + "expected 'key = value', got '" + line + "'"); }
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (ConfigError const &e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(fs::path const &path)
{
  std::ifstream is(path);
  if (!is) { throw IoError("cannot open config '" + path.string() + "'"); }
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path.string());
}

void RunConfig::apply_overrides(std::vector<std::string> const &overrides)
{
  for (auto const &o : overrides) {
    auto const eq = o.find('=');
    if (eq == std::string::npos) { throw ConfigError("override '" + o + "' is not of the form key=value"); }
    try {
      set(trim(o.substr(0, eq)), o.substr(eq + 1));
    } catch (ConfigError const &e) {
      throw ConfigError("override '" + o + "': " + e.what());
    }
  }
}

std::string RunConfig::serialise() const
{
  std::ostringstream os;
  for (auto const &k : key_table()) { os << k.name << " = " << k.get(*this) << '\n'; }
  return os.str();
}

SolverConfig RunConfig::solver_config() const
{
  SolverConfig s;
  switch (solver) {
  case SolverKind::NlExact: s.variant = Variant::Exact; break;
  case SolverKind::NlLinearised: s.variant = Variant::Linearised; break;
  case SolverKind::NlInterpolated: s.variant = Variant::Interpolated; break;
  case SolverKind::GaussNewton: throw ConfigError("solver_config: gauss-newton is not an NL-PDHGM variant");
  }
  s.tau0 = tau0;
  s.sigma0 = sigma0;
  s.omega = omega;
  s.rho = rho;
  s.max_iters = max_iters;
  s.telemetry_every = telemetry_every;
  return s;
}

GNConfig RunConfig::gn_config() const
{
  GNConfig g;
  g.rho_outer = rho;
  g.rho2 = rho2;
  g.max_outer = max_outer;
  g.max_inner = max_inner;
  g.tau0 = tau0;
  g.sigma0 = sigma0;
  return g;
}

void RunConfig::validate() const
{
  try {
    experiment.validate();
    if (solver == SolverKind::GaussNewton) {
      gn_config().validate();
    } else {
      solver_config().validate();
    }
  } catch (ConfigError const &) {
    throw;
  } catch (std::invalid_argument const &e) {
    throw ConfigError(e.what());
  }
}

VelocityData make_velocity_data(ExperimentSpec const &spec, std::string const &mask_path, std::string const &data_path)
{
  spec.validate();
  VelocityData d;
  d.truth = velocity_phantom(spec.n, spec.h());
  d.mask = mask_path.empty() ? gaussian_mask(spec.n, spec.coverage, spec.mask_variance, spec.seed, spec.force_dc)
                             : read_pbm(mask_path);
  if (d.mask.nx() != spec.n || d.mask.ny() != spec.n) { throw ConfigError("mask size differs from n"); }
  if (data_path.empty()) {
    FourierSampler const sampler(d.mask);
    d.f = kspace_simulate(sampler, d.truth.r, d.truth.phi, spec.noise_sigma, spec.seed + 1);
  } else {
    d.f = read_kspace(data_path, d.mask);
  }
  d.hash = data_hash(d.f);
  return d;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(fs::path const &path, std::string const &text)
{
  if (path.has_parent_path()) { fs::create_directories(path.parent_path()); }
  std::ofstream os(path);
  if (!os) { throw IoError("cannot open '" + path.string() + "' for writing"); }
  os << text;
  if (!os) { throw IoError("write to '" + path.string() + "' failed"); }
}

} // namespace

std::pair<double, double> backprojection_psnr(RunConfig const &cfg, VelocityData const &data)
{
  FourierSampler const sampler(data.mask);
  auto const bp = backprojection(sampler, data.f, cfg.experiment.h());
  double const pr = psnr(bp.r, data.truth.r, PsnrSpec::from_reference(data.truth.r));
  double const pp = psnr(bp.phi, data.truth.phi, PsnrSpec::from_reference(data.truth.phi, ring_mask(cfg.experiment.n)));
  return {pr, pp};
}

RunReport solve_velocity(RunConfig const &cfg, VelocityData const &data, std::optional<fs::path> const &out_dir)
{
  cfg.validate();
  auto const t0 = std::chrono::steady_clock::now();
  VelocityProblem const vp = build_velocity_problem(cfg.experiment, data.f, data.mask);
  StackedVector x0 = velocity_initial(vp, data.f);
  StackedVector y0 = vp.problem.dual_zero();

  RunReport rep;
  if (cfg.solver == SolverKind::GaussNewton) {
    auto r = gauss_newton(vp.problem, std::move(x0), std::move(y0), cfg.gn_config());
    rep.status = r.status;
    rep.x = std::move(r.x);
    rep.y = std::move(r.y);
    rep.iterations = int(r.total_inner);
    rep.gn_outer = r.outer_iterations;
    rep.gn_records = std::move(r.records);
  } else {
    auto r = nl_pdhgm(vp.problem, std::move(x0), std::move(y0), cfg.solver_config());
    rep.status = r.status;
    rep.x = std::move(r.x);
    rep.y = std::move(r.y);
    rep.iterations = r.iterations;
    rep.records = std::move(r.records);
  }
  rep.wall_s = seconds_since(t0);

  auto const spec_r = PsnrSpec::from_reference(data.truth.r);
  auto const spec_phi = PsnrSpec::from_reference(data.truth.phi, ring_mask(cfg.experiment.n));
  rep.psnr_r = psnr(rep.x["r"], data.truth.r, spec_r);
  rep.psnr_phi = psnr(rep.x["phi"], data.truth.phi, spec_phi);
  rep.residual = vp.problem.data_residual(rep.x);
  rep.optimality = optimality_residuals(rep.x, rep.y, vp.problem);

  rep.summary = {{"variant", to_string(cfg.solver)},
                 {"status", to_string(rep.status)},
                 {"iters", std::to_string(rep.iterations)}};
  if (rep.gn_outer >= 0) { rep.summary.emplace_back("gn_outer", std::to_string(rep.gn_outer)); }
  rep.summary.emplace_back("wall_s", fmt_short(rep.wall_s));
  rep.summary.emplace_back("psnr_r", fmt(capped(rep.psnr_r)));
  rep.summary.emplace_back("psnr_phi", fmt(capped(rep.psnr_phi)));
  rep.summary.emplace_back("peak_r", fmt(spec_r.peak));
  rep.summary.emplace_back("peak_phi", fmt(spec_phi.peak));
  rep.summary.emplace_back("residual", fmt(rep.residual));
  rep.summary.emplace_back("data_consistency", fmt(rep.optimality.data_consistency));
  rep.summary.emplace_back("dual_fixed_point", fmt(rep.optimality.dual_fixed_point));
  rep.summary.emplace_back("primal_stationarity", fmt(rep.optimality.primal_stationarity));
  rep.summary.emplace_back("seed", std::to_string(cfg.experiment.seed));
  rep.summary.emplace_back("data_hash", data.hash);

  if (out_dir) {
    fs::create_directories(*out_dir);
    write_text(*out_dir / "config.txt", cfg.serialise());
    write_pbm(data.mask, *out_dir / "mask.pbm");
    write_kspace(data.f, data.mask, *out_dir / "kspace.nlsd");
    if (!rep.records.empty()) { write_telemetry_csv(rep.records, *out_dir / "telemetry.csv"); }
    if (!rep.gn_records.empty()) { write_gn_csv(rep.gn_records, *out_dir / "gn_outer.csv"); }
    write_pgm16(rep.x["r"], *out_dir / "r.pgm");
    write_pgm16(rep.x["phi"], *out_dir / "phi.pgm");
    write_summary(rep.summary, *out_dir / "run.summary");
  }
  return rep;
}

ExperimentSpec with_alpha(ExperimentSpec spec, double alpha)
{
  if (!(alpha > 0)) { throw ConfigError("sweep alpha must be positive"); }
  double const s = alpha / spec.alpha_r;
  spec.alpha_r = alpha;
  spec.alpha_phi *= s;
  spec.beta_phi *= s;
  return spec;
}

namespace {
Field slice_component(Field const &v, int c, int k)
{
  Grid const g = v.grid();
  Field out = Field::scalar(Grid{g.nx, g.ny, 1, g.h});
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) { out[out.grid().index(i, j)] = v.at(g.index(i, j, k), c); }
  }
  return out;
}
} // namespace

DtiReport run_dti_demo(RunConfig const &cfg, std::optional<fs::path> const &out_dir)
{
  if (cfg.solver == SolverKind::GaussNewton) { throw ConfigError("dti-demo runs an NL-PDHGM variant; choose nl-*"); }
  DtiSpec spec = cfg.dti;
  if (!cfg.bvectors.empty()) { spec.b = read_bvectors(cfg.bvectors); }
  spec.validate();
  auto const t0 = std::chrono::steady_clock::now();

  auto const phantom = dti_phantom(spec.nx, spec.ny, spec.nz, spec.seed, spec.s0);
  auto const b = spec.gradients();
  auto const st = std::make_shared<StejskalTannerOp const>(phantom.s0, b);
  Field const signals = dti_simulate(*st, phantom.v, spec.noise_sigma, spec.seed + 1);
  Field const input = log_linear_fit(signals, phantom.s0, b);
  DtiProblem const dp = build_dti_problem(spec, signals, phantom.s0);

  StackedVector x0 = dp.problem.primal_zero();
  x0["v"] = input;
  auto r = nl_pdhgm(dp.problem, std::move(x0), dp.problem.dual_zero(), cfg.solver_config());

  DtiReport rep;
  rep.status = r.status;
  rep.iterations = r.iterations;
  rep.wall_s = seconds_since(t0);
  auto const ps = PsnrSpec::from_reference(phantom.v);
  rep.psnr_input = psnr(input, phantom.v, ps);
  rep.psnr_output = psnr(r.x["v"], phantom.v, ps);
  rep.data_norm = signals.norm();
  rep.optimality = optimality_residuals(r.x, r.y, dp.problem);
  rep.records = std::move(r.records);
  rep.summary = {{"variant", to_string(cfg.solver)},
                 {"status", to_string(rep.status)},
                 {"iters", std::to_string(rep.iterations)},
                 {"wall_s", fmt_short(rep.wall_s)},
                 {"psnr", fmt(capped(rep.psnr_output))},
                 {"psnr_input", fmt(capped(rep.psnr_input))},
                 {"peak", fmt(ps.peak)},
                 {"residual", fmt(dp.problem.data_residual(r.x))},
                 {"data_consistency", fmt(rep.optimality.data_consistency)},
                 {"dual_fixed_point", fmt(rep.optimality.dual_fixed_point)},
                 {"seed", std::to_string(spec.seed)},
                 {"data_hash", data_hash(signals)}};

  if (out_dir) {
    fs::create_directories(*out_dir);
    write_text(*out_dir / "config.txt", cfg.serialise());
    write_bvectors(b, *out_dir / "bvecs.txt");
    write_telemetry_csv(rep.records, *out_dir / "telemetry.csv");
    static char const *const names[6] = {"xx", "yy", "zz", "xy", "xz", "yz"};
    int const k = spec.nz / 2;
    for (int c = 0; c < 6; ++c) {
      std::string const n = names[c];
      write_pgm16(slice_component(phantom.v, c, k), *out_dir / ("truth_" + n + ".pgm"));
      write_pgm16(slice_component(input, c, k), *out_dir / ("input_" + n + ".pgm"));
      write_pgm16(slice_component(r.x["v"], c, k), *out_dir / ("v_" + n + ".pgm"));
    }
    write_summary(rep.summary, *out_dir / "run.summary");
  }
  return rep;
}

int exit_code(Status s)
{
  switch (s) {
  case Status::Converged: return 0;
  case Status::IterCap: return 2;
  case Status::Diverged: return 3;
  }
  return 1;
}

int thread_budget()
{
  char const *env = std::getenv("NLSADDLE_THREADS");
  if (env == nullptr || *env == '\0') { return 1; }
  int n = 0;
  auto const [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), n);
  if (ec != std::errc{} || n < 1) { throw ConfigError("NLSADDLE_THREADS must be a positive integer"); }
  return n;
}

int cmd_phantom(int n, fs::path const &out)
{
  auto const ph = velocity_phantom(n, 2.0 / n);
  write_pgm16(ph.r, out / "r.pgm");
  write_pgm16(ph.phi, out / "phi.pgm");
  std::cout << "wrote " << (out / "r.pgm").string() << " and " << (out / "phi.pgm").string() << '\n';
  return 0;
}

int cmd_mask(RunConfig const &cfg)
{
  cfg.experiment.validate();
  auto const& e = cfg.experiment;
  auto const mask = gaussian_mask(e.n, e.coverage, e.mask_variance, e.seed, e.force_dc);
  fs::path const out = fs::path(cfg.out_dir) / "mask.pbm";
  write_pbm(mask, out);
  std::cout << "wrote " << out.string() << " (" << mask.count() << " coefficients)\n";
  return 0;
}

int cmd_simulate(RunConfig const &cfg)
{
  auto const data = make_velocity_data(cfg.experiment, cfg.mask, {});
  fs::path const out = cfg.out_dir;
  write_pbm(data.mask, out / "mask.pbm");
  write_kspace(data.f, data.mask, out / "kspace.nlsd");
  write_pgm16(data.truth.r, out / "r_true.pgm");
  write_pgm16(data.truth.phi, out / "phi_true.pgm");
  write_text(out / "config.txt", cfg.serialise());
  std::cout << "wrote " << (out / "kspace.nlsd").string() << " (data hash " << data.hash << ")\n";
  return 0;
}

int cmd_solve(RunConfig const &cfg)
{
  auto const data = make_velocity_data(cfg.experiment, cfg.mask, cfg.data);
  auto const rep = solve_velocity(cfg, data, fs::path(cfg.out_dir));
  for (auto const &[k, v] : rep.summary) { std::cout << k << ": " << v << '\n'; }
  return exit_code(rep.status);
}

int cmd_sweep(RunConfig const &cfg, std::vector<double> alphas)
{
  if (alphas.empty()) { throw ConfigError("sweep needs at least one alpha"); }
  std::sort(alphas.begin(), alphas.end());
  auto const data = make_velocity_data(cfg.experiment, cfg.mask, cfg.data);
  double const level = noise_level(data.mask.count(), cfg.experiment.noise_sigma);
  auto const solve = [&](double alpha) {
    RunConfig c = cfg;
    c.experiment = with_alpha(cfg.experiment, alpha);
    auto const rep = solve_velocity(c, data);
    return SweepEntry{alpha, rep.residual, rep.psnr_r, rep.psnr_phi, rep.status, rep.iterations};
  };
  auto const result = discrepancy_sweep(alphas, solve, level > 0 ? level : std::numeric_limits<double>::infinity(),
                                        thread_budget());

  fs::path const out = cfg.out_dir;
  fs::create_directories(out);
  write_text(out / "config.txt", cfg.serialise());
  std::ostringstream csv;
  csv << std::setprecision(17) << "alpha,residual,psnr_r,psnr_phi\n";
  for (auto const &e : result.entries) {
    csv << e.alpha << ',' << e.residual << ',' << capped(e.psnr_r) << ',' << capped(e.psnr_phi) << '\n';
  }
  write_text(out / "sweep.csv", csv.str());
  Summary s{{"variant", to_string(cfg.solver)},
            {"alpha_hat", fmt(result.alpha_hat)},
            {"alpha_qualified", result.qualified ? "true" : "false"},
            {"noise_level", fmt(level)},
            {"seed", std::to_string(cfg.experiment.seed)},
            {"data_hash", data.hash}};
  write_summary(s, out / "run.summary");
  for (auto const &[k, v] : s) { std::cout << k << ": " << v << '\n'; }
  bool const all_converged =
    std::all_of(result.entries.begin(), result.entries.end(), [](auto const &e) { return e.status == Status::Converged; });
  return all_converged ? 0 : 2;
}

int cmd_compare(RunConfig const &cfg)
{
  auto const data = make_velocity_data(cfg.experiment, cfg.mask, cfg.data);
  fs::path const out = cfg.out_dir;
  fs::create_directories(out);
  write_text(out / "config.txt", cfg.serialise());

  auto psnr_cell = [](double r, double phi) { return fmt_short(capped(r)) + "/" + fmt_short(capped(phi)); };
  std::ostringstream csv;
  csv << "# data_hash=" << data.hash << " seed=" << cfg.experiment.seed << " PSNR=r/phi(ring) in dB, Time in s\n";
  csv << "Method,PDHGM iters.,GN iters.,Time,PSNR\n";
  auto const t0 = std::chrono::steady_clock::now();
  auto const [bp_r, bp_phi] = backprojection_psnr(cfg, data);
  csv << "Backprojection,,," << fmt_short(seconds_since(t0)) << ',' << psnr_cell(bp_r, bp_phi) << '\n';

  int worst = 0;
  for (SolverKind kind : {SolverKind::NlExact, SolverKind::NlLinearised, SolverKind::GaussNewton}) {
    RunConfig c = cfg;
    c.solver = kind;
    auto const rep = solve_velocity(c, data, out / to_string(kind));
    csv << to_string(kind) << ',' << rep.iterations << ',' << (rep.gn_outer >= 0 ? std::to_string(rep.gn_outer) : "")
        << ',' << fmt_short(rep.wall_s) << ',' << psnr_cell(rep.psnr_r, rep.psnr_phi) << '\n';
    worst = std::max(worst, exit_code(rep.status));
  }
  write_text(out / "compare.csv", csv.str());
  std::cout << csv.str();
  return worst;
}

int cmd_dti_demo(RunConfig const &cfg)
{
  auto const rep = run_dti_demo(cfg, fs::path(cfg.out_dir));
  for (auto const &[k, v] : rep.summary) { std::cout << k << ": " << v << '\n'; }
  return exit_code(rep.status);
}

} // namespace nlsaddle
