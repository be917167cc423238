#include "fracvar/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace fracvar {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

int padded_length(int cells, double factor) {
  if (cells == 1) return 1;
  int p = static_cast<int>(std::ceil(factor * cells));
  if (p < 2 * cells - 1) p = 2 * cells - 1;
  // Round up to a 2-3-5 smooth length.
  for (;; ++p) {
    int q = p;
    for (int f : {2, 3, 5})
      while (q % f == 0) q /= f;
    if (q == 1) return p;
  }
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

}  // namespace

OffsetTable::OffsetTable(int n_, std::array<int, 2> shape_)
    : n(n_), shape(shape_), data(static_cast<std::size_t>(2 * shape_[0] - 1) * (2 * shape_[1] - 1), 0.0) {}

OffsetTable& OffsetTable::scale(double f) {
  for (auto& v : data) v *= f;
  return *this;
}

FftConvolver::FftConvolver(int n, std::array<int, 2> shape, double padding_factor) : n_(n), shape_(shape) {
  if (padding_factor < 2.0) throw std::invalid_argument("fft padding factor must be at least 2");
  if (n == 1) shape_[1] = 1;
  padded_ = {padded_length(shape_[0], padding_factor), n == 1 ? 1 : padded_length(shape_[1], padding_factor)};
  real_size_ = static_cast<std::size_t>(padded_[0]) * padded_[1];
  spectrum_size_ = static_cast<std::size_t>(padded_[0] / 2 + 1) * padded_[1];
  FftwBuffer in(real_size_ * sizeof(double));
  FftwBuffer out(spectrum_size_ * sizeof(fftw_complex));
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  auto* rin = static_cast<double*>(in.ptr);
  auto* cout = static_cast<fftw_complex*>(out.ptr);
  if (n == 1) {
    plan_fwd_ = fftw_plan_dft_r2c_1d(padded_[0], rin, cout, FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_1d(padded_[0], cout, rin, FFTW_ESTIMATE);
  } else {
    // Row-major [y][x]: x is the contiguous axis.
    plan_fwd_ = fftw_plan_dft_r2c_2d(padded_[1], padded_[0], rin, cout, FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_2d(padded_[1], padded_[0], cout, rin, FFTW_ESTIMATE);
  }
  if (!plan_fwd_ || !plan_inv_) throw std::runtime_error("fftw planning failed");
}

FftConvolver::~FftConvolver() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

Spectrum FftConvolver::kernel_spectrum(const OffsetTable& table) const {
  if (table.shape[0] != shape_[0] || (n_ == 2 && table.shape[1] != shape_[1]))
    throw std::invalid_argument("kernel table does not match convolver shape");
  FftwBuffer in(real_size_ * sizeof(double));
  FftwBuffer out(spectrum_size_ * sizeof(fftw_complex));
  auto* rin = static_cast<double*>(in.ptr);
  std::memset(rin, 0, real_size_ * sizeof(double));
  const int px = padded_[0], py = padded_[1];
  const int hx = shape_[0] - 1, hy = shape_[1] - 1;
  // Convolution kernel K(d) = T(-d).
  for (int dy = -hy; dy <= hy; ++dy) {
    const int iy = ((-dy) % py + py) % py;
    for (int dx = -hx; dx <= hx; ++dx) {
      const int ix = ((-dx) % px + px) % px;
      rin[static_cast<std::size_t>(ix) + static_cast<std::size_t>(px) * iy] = table.at(dx, dy);
    }
  }
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rin, static_cast<fftw_complex*>(out.ptr));
  Spectrum s(spectrum_size_);
  std::memcpy(s.data(), out.ptr, spectrum_size_ * sizeof(fftw_complex));
  return s;
}

Spectrum FftConvolver::forward(const std::vector<double>& field) const {
  if (field.size() != static_cast<std::size_t>(shape_[0]) * shape_[1]) throw std::invalid_argument("field size mismatch");
  FftwBuffer in(real_size_ * sizeof(double));
  FftwBuffer out(spectrum_size_ * sizeof(fftw_complex));
  auto* rin = static_cast<double*>(in.ptr);
  std::memset(rin, 0, real_size_ * sizeof(double));
  for (int j = 0; j < shape_[1]; ++j)
    std::memcpy(rin + static_cast<std::size_t>(padded_[0]) * j, field.data() + static_cast<std::size_t>(shape_[0]) * j,
                sizeof(double) * shape_[0]);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rin, static_cast<fftw_complex*>(out.ptr));
  Spectrum s(spectrum_size_);
  std::memcpy(s.data(), out.ptr, spectrum_size_ * sizeof(fftw_complex));
  return s;
}

std::vector<double> FftConvolver::inverse_padded(const Spectrum& spec) const {
  FftwBuffer in(spectrum_size_ * sizeof(fftw_complex));
  FftwBuffer out(real_size_ * sizeof(double));
  std::memcpy(in.ptr, spec.data(), spectrum_size_ * sizeof(fftw_complex));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_), static_cast<fftw_complex*>(in.ptr), static_cast<double*>(out.ptr));
  const auto* r = static_cast<const double*>(out.ptr);
  return std::vector<double>(r, r + real_size_);
}

std::vector<double> FftConvolver::inverse(const Spectrum& spec) const {
  std::vector<double> out(static_cast<std::size_t>(shape_[0]) * shape_[1], 0.0);
  inverse_add(spec, out, 1.0);
  return out;
}

void FftConvolver::inverse_add(const Spectrum& spec, std::vector<double>& out, double factor) const {
  const std::vector<double> full = inverse_padded(spec);
  const double norm = factor / static_cast<double>(real_size_);
  for (int j = 0; j < shape_[1]; ++j)
    for (int i = 0; i < shape_[0]; ++i)
      out[static_cast<std::size_t>(i) + static_cast<std::size_t>(shape_[0]) * j] +=
          norm * full[static_cast<std::size_t>(i) + static_cast<std::size_t>(padded_[0]) * j];
}

void FftConvolver::multiply_add(Spectrum& acc, const Spectrum& a, const Spectrum& b, double factor) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += factor * a[k] * b[k];
}

Spectrum FftConvolver::multiply(const Spectrum& a, const Spectrum& b, double factor) {
  Spectrum r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = factor * a[k] * b[k];
  return r;
}

std::vector<double> convolve_direct(const OffsetTable& table, const std::vector<double>& field) {
  const int nx = table.shape[0], ny = table.shape[1];
  std::vector<double> out(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int ty = 0; ty < ny; ++ty)
    for (int tx = 0; tx < nx; ++tx) {
      double acc = 0.0;
      for (int sy = 0; sy < ny; ++sy)
        for (int sx = 0; sx < nx; ++sx) {
          const double f = field[static_cast<std::size_t>(sx) + static_cast<std::size_t>(nx) * sy];
          if (f != 0.0) acc += table.at(sx - tx, sy - ty) * f;
        }
      out[static_cast<std::size_t>(tx) + static_cast<std::size_t>(nx) * ty] = acc;
    }
  return out;
}

}  // namespace fracvar
