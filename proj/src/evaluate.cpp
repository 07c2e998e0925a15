#include "nlsaddle/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace nlsaddle {

namespace fs = std::filesystem;

PsnrSpec PsnrSpec::from_reference(Field const &ref, std::vector<std::uint8_t> mask)
{
  if (!mask.empty() && mask.size() != ref.points()) { throw ShapeError("PsnrSpec: mask size differs from the field"); }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t p = 0; p < ref.points(); ++p) {
    if (!mask.empty() && mask[p] == 0) { continue; }
    for (int c = 0; c < ref.comps(); ++c) {
      lo = std::min(lo, ref.at(p, c));
      hi = std::max(hi, ref.at(p, c));
    }
  }
  if (!(hi > lo)) { throw std::invalid_argument("PsnrSpec: reference has no dynamic range over the mask"); }
  return {hi - lo, std::move(mask)};
}

double psnr(Field const &x, Field const &ref, PsnrSpec const &spec)
{
  if (!x.same_layout(ref)) { throw ShapeError("psnr: fields differ in layout"); }
  if (!spec.mask.empty() && spec.mask.size() != ref.points()) { throw ShapeError("psnr: mask size differs from the field"); }
  if (!(spec.peak > 0)) { throw std::invalid_argument("psnr: peak must be positive"); }
  double se = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < ref.points(); ++p) {
    if (!spec.mask.empty() && spec.mask[p] == 0) { continue; }
    for (int c = 0; c < ref.comps(); ++c) {
      double const d = x.at(p, c) - ref.at(p, c);
      se += d * d;
      ++count;
    }
  }
  if (count == 0) { throw std::invalid_argument("psnr: empty mask"); }
  double const mse = se / double(count);
  if (mse == 0.0) { return std::numeric_limits<double>::infinity(); }
  return 10.0 * std::log10(spec.peak * spec.peak / mse);
}

double capped(double db) { return std::min(db, kPsnrCap); }

ResidualReport optimality_residuals(StackedVector const &x, StackedVector const &y, SaddleProblem const &problem,
                                    double sigma_probe)
{
  problem.validate();
  if (!(sigma_probe > 0)) { throw std::invalid_argument("optimality_residuals: sigma_probe must be positive"); }
  NonlinearOp const &k = *problem.k;
  ResidualReport rep;

  StackedVector z = x;
  z.axpy(-1.0, k.jac_adjoint_apply(x, y));
  StackedVector px = problem.g->resolve(z, 1.0);
  rep.primal_stationarity = (x - px).norm();

  StackedVector const kx = k.value(x);
  if (Field const *f = problem.fidelity_data()) {
    Field d = kx[problem.fidelity_block];
    d.axpy(-1.0, *f);
    d.axpy(-1.0, y[problem.fidelity_block]);
    rep.data_consistency = d.norm();
  } else {
    rep.data_consistency = std::numeric_limits<double>::quiet_NaN();
  }

  for (auto const &[name, prox] : problem.f_star->entries()) {
    Field arg = y[name];
    arg.axpy(sigma_probe, kx[name]);
    Field res = arg.zeros_like();
    prox->resolve(arg, sigma_probe, res);
    res.axpy(-1.0, y[name]);
    rep.dual_fixed_point = std::max(rep.dual_fixed_point, res.norm());
  }
  return rep;
}

double noise_level(std::size_t m, double sigma) { return std::sqrt(2.0 * double(m)) * sigma; }

SweepResult discrepancy_sweep(std::vector<double> const &alphas, std::function<SweepEntry(double)> const &solve,
                              double level, int threads)
{
  if (alphas.empty()) { throw std::invalid_argument("discrepancy_sweep: empty alpha list"); }
  if (!std::is_sorted(alphas.begin(), alphas.end())) { throw std::invalid_argument("discrepancy_sweep: alphas must be ascending"); }
  if (!(level > 0)) { throw std::invalid_argument("discrepancy_sweep: noise level must be positive"); }

  SweepResult out;
  out.entries.resize(alphas.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < alphas.size(); i = next++) {
      try {
        out.entries[i] = solve(alphas[i]);
        out.entries[i].alpha = alphas[i];
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) { failure = std::current_exception(); }
      }
    }
  };
  int const n_threads = std::clamp(threads, 1, int(alphas.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) { pool.emplace_back(worker); }
  }
  if (failure) { std::rethrow_exception(failure); }

  out.alpha_hat = alphas.front();
  for (auto const &e : out.entries) {
    if (e.residual <= level) {
      out.alpha_hat = e.alpha;
      out.qualified = true;
    }
  }
  return out;
}

namespace {

std::ofstream open_out(fs::path const &path, bool binary = false)
{
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) { throw IoError("cannot open '" + path.string() + "' for writing"); }
  os << std::setprecision(17);
  return os;
}

std::ifstream open_in(fs::path const &path, bool binary = false)
{
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) { throw IoError("cannot open '" + path.string() + "' for reading"); }
  return is;
}

void finish(std::ofstream &os, fs::path const &path)
{
  os.flush();
  if (!os) { throw IoError("write to '" + path.string() + "' failed"); }
}

// Empty for NaN (values not recorded), full precision otherwise.
std::string num(double v)
{
  if (std::isnan(v)) { return ""; }
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Skips whitespace and '#' comments in a netpbm header, then reads an integer.
int pnm_int(std::istream &is, fs::path const &path)
{
  for (;;) {
    int const c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (std::isspace(c)) {
      is.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(is >> v)) { throw IoError("malformed header in '" + path.string() + "'"); }
  return v;
}

void put_u32(std::ostream &os, std::uint32_t v)
{
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<char const *>(b), 4);
}

std::uint32_t get_u32(unsigned char const *b)
{
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void put_f64(std::ostream &os, double v)
{
  auto const bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) { b[i] = static_cast<unsigned char>(bits >> (8 * i)); }
  os.write(reinterpret_cast<char const *>(b), 8);
}

double get_f64(unsigned char const *b)
{
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) { bits |= std::uint64_t(b[i]) << (8 * i); }
  return std::bit_cast<double>(bits);
}

constexpr std::uint32_t kKspaceVersion = 1;

} // namespace

void write_telemetry_csv(std::vector<IterationRecord> const &records, fs::path const &path)
{
  auto os = open_out(path);
  os << "iter,step_norm,weighted_step,data_residual,L,lin_error,wall_ms\n";
  for (auto const &r : records) {
    os << r.iter << ',' << num(r.step_norm) << ',' << num(r.weighted_step) << ',' << num(r.data_residual) << ','
       << num(r.L) << ',' << num(r.lin_error) << ',' << num(r.wall_ms) << '\n';
  }
  finish(os, path);
}

void write_gn_csv(std::vector<GNRecord> const &records, fs::path const &path)
{
  auto os = open_out(path);
  os << "iter,inner_iters,step_norm,gap_at_exit,wall_ms\n";
  for (auto const &r : records) {
    os << r.iter << ',' << r.inner_iters << ',' << num(r.step_norm) << ',' << num(r.gap_at_exit) << ','
       << num(r.wall_ms) << '\n';
  }
  finish(os, path);
}

fs::path range_path(fs::path const &pgm)
{
  fs::path p = pgm;
  p.replace_extension(".range");
  return p;
}

void write_pgm16(Field const &f, fs::path const &path)
{
  if (f.comps() != 1 || f.grid().nz != 1) { throw ShapeError("write_pgm16: need a scalar 2D field"); }
  auto const [lo_it, hi_it] = std::minmax_element(f.data().begin(), f.data().end());
  double const lo = *lo_it;
  double const hi = *hi_it;
  double const span = hi > lo ? hi - lo : 1.0;
  auto os = open_out(path, true);
  os << "P5\n" << f.grid().nx << ' ' << f.grid().ny << "\n65535\n";
  for (double v : f.data()) {
    auto const q = static_cast<std::uint16_t>(std::lround(std::clamp((v - lo) / span, 0.0, 1.0) * 65535.0));
    char const b[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};
    os.write(b, 2);
  }
  finish(os, path);
  auto rs = open_out(range_path(path));
  rs << "min=" << lo << "\nmax=" << hi << '\n';
  finish(rs, range_path(path));
}

Field read_pgm16(fs::path const &path, double h)
{
  auto is = open_in(path, true);
  std::string magic;
  is >> magic;
  if (magic != "P5") { throw IoError("'" + path.string() + "' is not a binary PGM"); }
  int const nx = pnm_int(is, path);
  int const ny = pnm_int(is, path);
  int const maxval = pnm_int(is, path);
  if (nx < 1 || ny < 1 || maxval != 65535) { throw IoError("'" + path.string() + "' is not a 16-bit PGM"); }
  is.get();
  std::vector<unsigned char> raw(std::size_t(nx) * ny * 2);
  if (!is.read(reinterpret_cast<char *>(raw.data()), std::streamsize(raw.size()))) {
    throw IoError("truncated pixel data in '" + path.string() + "'");
  }

  double lo = 0.0, hi = 1.0;
  bool have_lo = false, have_hi = false;
  auto rs = open_in(range_path(path));
  for (std::string line; std::getline(rs, line);) {
    if (line.rfind("min=", 0) == 0) {
      lo = std::stod(line.substr(4));
      have_lo = true;
    } else if (line.rfind("max=", 0) == 0) {
      hi = std::stod(line.substr(4));
      have_hi = true;
    }
  }
  if (!have_lo || !have_hi) { throw IoError("range file '" + range_path(path).string() + "' lacks min= or max="); }

  Field f = Field::scalar(Grid{nx, ny, 1, h});
  double const span = hi > lo ? hi - lo : 1.0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    unsigned const q = (unsigned(raw[2 * p]) << 8) | raw[2 * p + 1];
    f[p] = hi > lo ? lo + span * q / 65535.0 : lo;
  }
  return f;
}

void write_summary(Summary const &summary, fs::path const &path)
{
  auto os = open_out(path);
  for (auto const &[k, v] : summary) { os << k << ": " << v << '\n'; }
  finish(os, path);
}

Summary read_summary(fs::path const &path)
{
  auto is = open_in(path);
  Summary out;
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) { continue; }
    auto const pos = line.find(": ");
    if (pos == std::string::npos) { throw IoError("malformed summary line in '" + path.string() + "': " + line); }
    out.emplace_back(line.substr(0, pos), line.substr(pos + 2));
  }
  return out;
}

void write_pbm(SamplingMask const &mask, fs::path const &path)
{
  auto os = open_out(path, true);
  os << "P4\n" << mask.nx() << ' ' << mask.ny() << '\n';
  std::size_t const row_bytes = (std::size_t(mask.nx()) + 7) / 8;
  std::vector<unsigned char> row(row_bytes);
  for (int j = 0; j < mask.ny(); ++j) {
    std::fill(row.begin(), row.end(), 0);
    for (int i = 0; i < mask.nx(); ++i) {
      if (mask.selected(i, j)) { row[i / 8] |= static_cast<unsigned char>(0x80 >> (i % 8)); }
    }
    os.write(reinterpret_cast<char const *>(row.data()), std::streamsize(row_bytes));
  }
  finish(os, path);
}

SamplingMask read_pbm(fs::path const &path)
{
  auto is = open_in(path, true);
  std::string magic;
  is >> magic;
  if (magic != "P1" && magic != "P4") { throw IoError("'" + path.string() + "' is not a PBM"); }
  int const nx = pnm_int(is, path);
  int const ny = pnm_int(is, path);
  if (nx < 1 || ny < 1) { throw IoError("invalid PBM size in '" + path.string() + "'"); }
  std::vector<std::uint8_t> bits(std::size_t(nx) * ny);
  if (magic == "P4") {
    is.get();
    std::size_t const row_bytes = (std::size_t(nx) + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (int j = 0; j < ny; ++j) {
      if (!is.read(reinterpret_cast<char *>(row.data()), std::streamsize(row_bytes))) {
        throw IoError("truncated PBM data in '" + path.string() + "'");
      }
      for (int i = 0; i < nx; ++i) { bits[std::size_t(j) * nx + i] = (row[i / 8] >> (7 - i % 8)) & 1; }
    }
  } else {
    for (auto &b : bits) {
      char c = 0;
      do {
        if (!is.get(c)) { throw IoError("truncated PBM data in '" + path.string() + "'"); }
      } while (c != '0' && c != '1');
      b = c == '1' ? 1 : 0;
    }
  }
  return SamplingMask(nx, ny, std::move(bits));
}

void write_kspace(Field const &coeffs, SamplingMask const &mask, fs::path const &path)
{
  if (coeffs.size() != 2 * mask.count()) { throw ShapeError("write_kspace: coefficient count differs from the mask"); }
  std::vector<double> grid(std::size_t(mask.nx()) * mask.ny() * 2, 0.0);
  auto const &idx = mask.indices();
  for (std::size_t m = 0; m < idx.size(); ++m) {
    grid[2 * idx[m]] = coeffs[2 * m];
    grid[2 * idx[m] + 1] = coeffs[2 * m + 1];
  }
  auto os = open_out(path, true);
  os.write("NLSD", 4);
  put_u32(os, kKspaceVersion);
  put_u32(os, std::uint32_t(mask.nx()));
  put_u32(os, std::uint32_t(mask.ny()));
  for (double v : grid) { put_f64(os, v); }
  finish(os, path);
}

Field read_kspace(fs::path const &path, SamplingMask const &mask)
{
  auto is = open_in(path, true);
  unsigned char header[16];
  if (!is.read(reinterpret_cast<char *>(header), 16) || std::memcmp(header, "NLSD", 4) != 0) {
    throw IoError("'" + path.string() + "' is not an NLSD k-space file");
  }
  std::uint32_t const version = get_u32(header + 4);
  std::uint32_t const nx = get_u32(header + 8);
  std::uint32_t const ny = get_u32(header + 12);
  if (version != kKspaceVersion) { throw IoError("unsupported NLSD version in '" + path.string() + "'"); }
  if (int(nx) != mask.nx() || int(ny) != mask.ny()) {
    throw IoError("k-space size in '" + path.string() + "' differs from the mask");
  }
  std::vector<unsigned char> raw(std::size_t(nx) * ny * 16);
  if (!is.read(reinterpret_cast<char *>(raw.data()), std::streamsize(raw.size()))) {
    throw IoError("truncated k-space data in '" + path.string() + "'");
  }
  if (mask.count() == 0) { throw IoError("empty sampling mask for '" + path.string() + "'"); }
  Field f = Field::complex(Grid{int(mask.count()), 1, 1, 1.0});
  auto const &idx = mask.indices();
  for (std::size_t m = 0; m < idx.size(); ++m) {
    f[2 * m] = get_f64(raw.data() + 16 * idx[m]);
    f[2 * m + 1] = get_f64(raw.data() + 16 * idx[m] + 8);
  }
  return f;
}

void write_bvectors(std::vector<GradientDirection> const &b, fs::path const &path)
{
  auto os = open_out(path);
  for (auto const &d : b) { os << d[0] << ' ' << d[1] << ' ' << d[2] << '\n'; }
  finish(os, path);
}

std::vector<GradientDirection> read_bvectors(fs::path const &path)
{
  auto is = open_in(path);
  std::vector<GradientDirection> out;
  for (std::string line; std::getline(is, line);) {
    auto const hash = line.find('#');
    if (hash != std::string::npos) { line.resize(hash); }
    std::istringstream ls(line);
    GradientDirection d{};
    if (!(ls >> d[0])) { continue; }
    if (!(ls >> d[1] >> d[2])) { throw IoError("malformed gradient line in '" + path.string() + "': " + line); }
    out.push_back(d);
  }
  return out;
}

std::string data_hash(Field const &f)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : f.data()) {
    auto const bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

} // namespace nlsaddle
