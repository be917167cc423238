#pragma once

#include <array>
#include <complex>
#include <mutex>
#include <cstddef>
#include <vector>

namespace fracvar {

using Spectrum = std::vector<std::complex<double>>;

// Offset table for a translation-invariant kernel on an n-dimensional grid of the given
// shape: entry (dx, dy) for dx in [-(nx-1), nx-1], dy in [-(ny-1), ny-1], where the offset
// is source-cell index minus target-cell index.
struct OffsetTable {
  int n = 2;
  std::array<int, 2> shape{1, 1};
  std::vector<double> data;

  OffsetTable() = default;
  OffsetTable(int n_, std::array<int, 2> shape_);
  int width() const { return 2 * shape[0] - 1; }
  int height() const { return 2 * shape[1] - 1; }
  double& at(int dx, int dy) { return data[static_cast<std::size_t>(dx + shape[0] - 1) + static_cast<std::size_t>(width()) * (dy + shape[1] - 1)]; }
  double at(int dx, int dy) const { return data[static_cast<std::size_t>(dx + shape[0] - 1) + static_cast<std::size_t>(width()) * (dy + shape[1] - 1)]; }
  OffsetTable& scale(double f);
};

// Linear (non-circular) convolution out(x) = sum_c T(c) f(x + c) through zero-padded
// real FFTs. Plans are created under a global lock; execution is reentrant.
class FftConvolver {
 public:
  FftConvolver(int n, std::array<int, 2> shape, double padding_factor = 2.0);
  ~FftConvolver();
  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;

  int n() const { return n_; }
  std::array<int, 2> shape() const { return shape_; }
  std::array<int, 2> padded() const { return padded_; }
  std::size_t spectrum_size() const { return spectrum_size_; }

  Spectrum kernel_spectrum(const OffsetTable& table) const;
  Spectrum forward(const std::vector<double>& field) const;
  // Inverse transform cropped to the grid, normalization included.
  std::vector<double> inverse(const Spectrum& spec) const;
  void inverse_add(const Spectrum& spec, std::vector<double>& out, double factor = 1.0) const;

  static void multiply_add(Spectrum& acc, const Spectrum& a, const Spectrum& b, double factor = 1.0);
  static Spectrum multiply(const Spectrum& a, const Spectrum& b, double factor = 1.0);

 private:
  std::vector<double> inverse_padded(const Spectrum& spec) const;

  int n_;
  std::array<int, 2> shape_;
  std::array<int, 2> padded_;
  std::size_t real_size_;
  std::size_t spectrum_size_;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

// FFTW planning is not thread safe; every planner call holds this lock.
std::mutex& fftw_planner_mutex();

// Reference O(N^2) evaluation of the same sum, for small grids and tests.
std::vector<double> convolve_direct(const OffsetTable& table, const std::vector<double>& field);

}  // namespace fracvar
