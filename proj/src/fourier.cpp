#include "nlsaddle/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace nlsaddle {

namespace {
// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex &planner_mutex()
{
  static std::mutex m;
  return m;
}

struct FftwBuffer
{
  explicit FftwBuffer(std::size_t n)
    : ptr(fftw_alloc_complex(n))
  {
    if (ptr == nullptr) { throw std::bad_alloc(); }
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(FftwBuffer const &) = delete;
  FftwBuffer &operator=(FftwBuffer const &) = delete;
  std::complex<double> *data() { return reinterpret_cast<std::complex<double> *>(ptr); }
  fftw_complex *ptr;
};
} // namespace

SamplingMask::SamplingMask(int nx, int ny, std::vector<std::uint8_t> selected)
  : nx_(nx)
  , ny_(ny)
  , bits_(std::move(selected))
{
  if (nx < 1 || ny < 1 || bits_.size() != std::size_t(nx) * ny) { throw ShapeError("SamplingMask: size mismatch"); }
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] != 0) {
      bits_[i] = 1;
      indices_.push_back(i);
    }
  }
}

SamplingMask SamplingMask::full(int nx, int ny) { return SamplingMask(nx, ny, std::vector<std::uint8_t>(std::size_t(nx) * ny, 1)); }

struct FourierSampler::Plans
{
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans()
  {
    std::lock_guard lock(planner_mutex());
    if (forward) { fftw_destroy_plan(forward); }
    if (backward) { fftw_destroy_plan(backward); }
  }
};

FourierSampler::FourierSampler(SamplingMask mask)
  : mask_(std::move(mask))
  , plans_(std::make_unique<Plans>())
{
  if (mask_.count() == 0) { throw ShapeError("FourierSampler: mask selects no coefficients"); }
  FftwBuffer a(image_size()), b(image_size());
  std::lock_guard lock(planner_mutex());
  // Row-major: slowest dimension is ny.
  plans_->forward = fftw_plan_dft_2d(mask_.ny(), mask_.nx(), a.ptr, b.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft_2d(mask_.ny(), mask_.nx(), a.ptr, b.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->backward) { throw std::runtime_error("FourierSampler: FFTW planning failed"); }
}

FourierSampler::~FourierSampler() = default;

void FourierSampler::forward(std::span<std::complex<double> const> image, std::span<double> coeffs) const
{
  std::size_t const n = image_size();
  if (image.size() != n || coeffs.size() != 2 * mask_.count()) { throw ShapeError("FourierSampler::forward: size mismatch"); }
  FftwBuffer in(n), out(n);
  std::copy(image.begin(), image.end(), in.data());
  fftw_execute_dft(plans_->forward, in.ptr, out.ptr);
  double const s = 1.0 / std::sqrt(double(n));
  auto const &idx = mask_.indices();
  std::complex<double> const *o = out.data();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    coeffs[2 * k] = s * o[idx[k]].real();
    coeffs[2 * k + 1] = s * o[idx[k]].imag();
  }
}

void FourierSampler::adjoint(std::span<double const> coeffs, std::span<std::complex<double>> image) const
{
  std::size_t const n = image_size();
  if (image.size() != n || coeffs.size() != 2 * mask_.count()) { throw ShapeError("FourierSampler::adjoint: size mismatch"); }
  FftwBuffer in(n), out(n);
  std::complex<double> *zi = in.data();
  std::fill(zi, zi + n, std::complex<double>(0.0, 0.0));
  auto const &idx = mask_.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) { zi[idx[k]] = {coeffs[2 * k], coeffs[2 * k + 1]}; }
  fftw_execute_dft(plans_->backward, in.ptr, out.ptr);
  double const s = 1.0 / std::sqrt(double(n));
  std::complex<double> const *o = out.data();
  for (std::size_t p = 0; p < n; ++p) { image[p] = s * o[p]; }
}

namespace {
std::span<std::complex<double>> as_complex(Field &f)
{
  return {reinterpret_cast<std::complex<double> *>(f.data().data()), f.points()};
}
std::span<std::complex<double> const> as_complex(Field const &f)
{
  return {reinterpret_cast<std::complex<double> const *>(f.data().data()), f.points()};
}
} // namespace

void FourierSampler::forward(Field const &image, Field &coeffs) const
{
  if (image.comps() != 2 || image.grid().nx != mask_.nx() || image.grid().ny != mask_.ny() || coeffs.comps() != 2) {
    throw ShapeError("FourierSampler::forward: field layout");
  }
  forward(as_complex(image), coeffs.data());
}

void FourierSampler::adjoint(Field const &coeffs, Field &image) const
{
  if (image.comps() != 2 || image.grid().nx != mask_.nx() || image.grid().ny != mask_.ny() || coeffs.comps() != 2) {
    throw ShapeError("FourierSampler::adjoint: field layout");
  }
  adjoint(coeffs.data(), as_complex(image));
}

Field FourierSampler::coefficient_field() const
{
  return Field::complex(Grid{int(mask_.count()), 1, 1, 1.0});
}

FourierSampleOp::FourierSampleOp(std::shared_ptr<FourierSampler const> sampler, double h)
  : LinearOp(single_block("u", Field::complex(Grid{sampler->mask().nx(), sampler->mask().ny(), 1, h})),
             single_block("k", sampler->coefficient_field()))
  , sampler_(std::move(sampler))
{
}

void FourierSampleOp::apply_to(StackedVector const &x, StackedVector &out) const { sampler_->forward(x[0], out[0]); }
void FourierSampleOp::adjoint_to(StackedVector const &y, StackedVector &out) const { sampler_->adjoint(y[0], out[0]); }

} // namespace nlsaddle
