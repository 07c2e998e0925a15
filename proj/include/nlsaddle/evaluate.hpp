#pragma once

#include "nlsaddle/baseline.hpp"
#include "nlsaddle/fourier.hpp"
#include "nlsaddle/mri.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlsaddle {

/// I/O failure; the message always names the file.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct PsnrSpec
{
  double peak = 1.0;
  std::vector<std::uint8_t> mask; // per grid point; empty selects every point

  /// Peak = max − min of the reference over the mask.
  static PsnrSpec from_reference(Field const &ref, std::vector<std::uint8_t> mask = {});
};

/// 10·log₁₀(peak²/MSE) over the masked points (all components); +∞ for identical inputs.
double psnr(Field const &x, Field const &ref, PsnrSpec const &spec);
/// Finite stand-in for +∞ in serialised reports.
inline constexpr double kPsnrCap = 999.0;
double capped(double db);

struct ResidualReport
{
  double primal_stationarity = 0.0; // ‖x − (I + ∂G)⁻¹(x − [∇K(x)]*y)‖, i.e. ‖[∇K(x)]*y‖ for G = 0
  double data_consistency = 0.0;    // ‖K(x)_λ − f − λ‖, NaN without a fidelity block
  double dual_fixed_point = 0.0;    // max_b ‖y_b − (I + σ∂F_b*)⁻¹(y_b + σK(x)_b)‖
};

ResidualReport optimality_residuals(StackedVector const &x, StackedVector const &y, SaddleProblem const &problem,
                                    double sigma_probe = 1.0);

/// √(2m)·σ: root of the expected squared norm of complex Gaussian noise on m coefficients.
double noise_level(std::size_t m, double sigma);

struct SweepEntry
{
  double alpha = 0.0;
  double residual = 0.0;
  double psnr_r = 0.0;
  double psnr_phi = 0.0;
  Status status = Status::IterCap;
  int iterations = 0;
};

struct SweepResult
{
  std::vector<SweepEntry> entries; // in the order of the α list
  double alpha_hat = 0.0;
  bool qualified = false; // false: no α met the level and alpha_hat is the smallest α
};

/// Runs `solve` for each α (ascending) and picks the largest α whose residual
/// is at most noise_level. Up to `threads` runs execute concurrently.
SweepResult discrepancy_sweep(std::vector<double> const &alphas, std::function<SweepEntry(double)> const &solve,
                              double noise_level, int threads = 1);

// Serialisation.

void write_telemetry_csv(std::vector<IterationRecord> const &records, std::filesystem::path const &path);
void write_gn_csv(std::vector<GNRecord> const &records, std::filesystem::path const &path);

/// Binary 16-bit PGM of a scalar 2D field mapped affinely onto [0, 65535], plus
/// a sidecar "<stem>.range" holding "min=…\nmax=…".
void write_pgm16(Field const &f, std::filesystem::path const &path);
/// Reads a PGM-16 and its sidecar back into a scalar field with grid step h.
Field read_pgm16(std::filesystem::path const &path, double h = 1.0);
std::filesystem::path range_path(std::filesystem::path const &pgm);

/// "key: value" lines in the given order.
using Summary = std::vector<std::pair<std::string, std::string>>;
void write_summary(Summary const &summary, std::filesystem::path const &path);
Summary read_summary(std::filesystem::path const &path);

/// Sampling mask as a PBM (writes P4, reads P1 and P4); 1 = sampled.
void write_pbm(SamplingMask const &mask, std::filesystem::path const &path);
SamplingMask read_pbm(std::filesystem::path const &path);

/// k-space data: 16-byte header ("NLSD", uint32 version, uint32 nx, uint32 ny),
/// then nx·ny interleaved little-endian doubles (re, im), zero outside the mask.
void write_kspace(Field const &coeffs, SamplingMask const &mask, std::filesystem::path const &path);
/// Returns the masked coefficients in the order of mask.indices().
Field read_kspace(std::filesystem::path const &path, SamplingMask const &mask);

/// Gradient directions, one "x y z" line each.
void write_bvectors(std::vector<GradientDirection> const &b, std::filesystem::path const &path);
std::vector<GradientDirection> read_bvectors(std::filesystem::path const &path);

/// 64-bit FNV-1a hash of the stored reals, as 16 hex digits.
std::string data_hash(Field const &f);

} // namespace nlsaddle
