#pragma once

#include "fracvar/fft.hpp"
#include "fracvar/grid.hpp"

#include <array>

// Cell integrals of the Riesz kernels on the unit lattice. A table at spacing h follows by
// homogeneity: potential entries scale by h^alpha, gradient first moments by h^{-s},
// gradient second moments by h^{1-s}.
namespace fracvar::kernels {

// Integral of |z|^{alpha-n} / gamma_alpha over the unit cell centered at c.
double potential_cell(int n, double alpha, const Point& c, int near = 3);

// First and second moments of kappa(z) = |z|^{-n-s-1} over the unit cell centered at c:
// w0 = int z kappa, b[i][j] = int (z - c)_i z_j kappa. The self cell uses the symmetric
// principal value (w0 = 0).
struct GradientCell {
  std::array<double, 2> w0{0.0, 0.0};
  std::array<std::array<double, 2>, 2> b{};
};
GradientCell gradient_cell(int n, double s, const Point& c, int near = 3);

// Tables over all source-minus-target offsets of a grid of the given shape.
// `shift` displaces every cell center (used for sources sitting on faces).
OffsetTable potential_table(int n, std::array<int, 2> shape, double alpha, const Point& shift = {0.0, 0.0}, int near = 3);

struct GradientTables {
  std::array<OffsetTable, 2> w0;
  std::array<std::array<OffsetTable, 2>, 2> b;
};
GradientTables gradient_tables(int n, std::array<int, 2> shape, double s, int near = 3);

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss_legendre(int q);

}  // namespace fracvar::kernels
