#pragma once

#include "nlsaddle/operators.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace nlsaddle {

/// Boolean k-space sampling pattern on an nx × ny grid (row-major, DC at index 0).
class SamplingMask
{
public:
  SamplingMask() = default;
  SamplingMask(int nx, int ny, std::vector<std::uint8_t> selected);
  static SamplingMask full(int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t count() const { return indices_.size(); }
  double coverage() const { return double(count()) / (double(nx_) * ny_); }
  bool selected(int i, int j) const { return bits_[std::size_t(j) * nx_ + i] != 0; }
  std::vector<std::uint8_t> const &bits() const { return bits_; }
  /// Row-major linear indices of the selected coefficients, ascending.
  std::vector<std::size_t> const &indices() const { return indices_; }

  bool operator==(SamplingMask const &o) const { return nx_ == o.nx_ && ny_ == o.ny_ && bits_ == o.bits_; }

private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<std::size_t> indices_;
};

/// S𝓕: unitary 2D DFT (scale 1/√(nx·ny)) followed by selection of the masked
/// coefficients. The adjoint zero-fills and applies the unitary inverse DFT.
/// Complex vectors are interleaved (re, im) pairs; the range is treated as a
/// real Hilbert space with ⟨a, b⟩ = Re Σ a·conj(b).
class FourierSampler
{
public:
  explicit FourierSampler(SamplingMask mask);
  ~FourierSampler();
  FourierSampler(FourierSampler const &) = delete;
  FourierSampler &operator=(FourierSampler const &) = delete;

  SamplingMask const &mask() const { return mask_; }
  std::size_t image_size() const { return std::size_t(mask_.nx()) * mask_.ny(); }

  /// image: nx·ny complex values; coeffs: 2·count reals.
  void forward(std::span<std::complex<double> const> image, std::span<double> coeffs) const;
  void adjoint(std::span<double const> coeffs, std::span<std::complex<double>> image) const;

  /// Field-level forms: image is a complex field on the mask grid, coefficients a
  /// complex field on a (count × 1) grid.
  void forward(Field const &image, Field &coeffs) const;
  void adjoint(Field const &coeffs, Field &image) const;
  Field coefficient_field() const;

private:
  struct Plans;
  SamplingMask mask_;
  std::unique_ptr<Plans> plans_;
};

/// Single-block wrapper: domain {"u"} (complex image), range {"k"} (masked coefficients).
class FourierSampleOp final : public LinearOp
{
public:
  FourierSampleOp(std::shared_ptr<FourierSampler const> sampler, double h = 1.0);
  void apply_to(StackedVector const &x, StackedVector &out) const override;
  void adjoint_to(StackedVector const &y, StackedVector &out) const override;

private:
  std::shared_ptr<FourierSampler const> sampler_;
};

} // namespace nlsaddle
