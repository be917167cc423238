#include "fracvar/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

using namespace fracvar;

TEST(Grid, BoxLayout) {
  const Grid g = Grid::box(2, 8, -1.0, 1.0);
  EXPECT_EQ(g.size(), 64u);
  EXPECT_DOUBLE_EQ(g.h, 0.25);
  EXPECT_DOUBLE_EQ(g.center(0, 0)[0], -0.875);
  EXPECT_DOUBLE_EQ(g.center(g.index(7, 7))[1], 0.875);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 0.0625);

  const Grid line = Grid::box(1, 10, 0.0, 1.0);
  EXPECT_EQ(line.ny(), 1);
  EXPECT_EQ(line.size(), 10u);
  EXPECT_DOUBLE_EQ(line.face_area(), 1.0);
  EXPECT_THROW(Grid::box(2, 4, 1.0, 1.0), std::invalid_argument);
}

TEST(Grid, LabelSetOrderAndGap) {
  const LabelSet t({0.0, 1.0, 1.25, 3.0});
  EXPECT_DOUBLE_EQ(t.theta(), 0.25);
  EXPECT_DOUBLE_EQ(t.spread(), 3.0);
  EXPECT_THROW(LabelSet({1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(LabelSet({1.0}), std::invalid_argument);
}

TEST(Grid, DiscreteDerivativeOfSquare) {
  // A 4x4 block of ones in an 8x8 grid: 16 faces of unit jump, each of area h.
  const Grid g = Grid::box(2, 8, 0.0, 2.0);
  LabelField u(g, LabelSet({0.0, 1.0}));
  for (int j = 2; j < 6; ++j)
    for (int i = 2; i < 6; ++i) u.index[g.index(i, j)] = 1;
  const FaceMeasure du = discrete_Du(u);
  EXPECT_EQ(du.atoms.size(), 16u);
  EXPECT_NEAR(du.total_variation(), 4.0, 1e-14);
  const auto sum = du.weight_sum();
  EXPECT_NEAR(sum[0], 0.0, 1e-14);
  EXPECT_NEAR(sum[1], 0.0, 1e-14);
}

TEST(Grid, RotationTakesVerticalToNormal) {
  const Point nu{std::cos(0.4), std::sin(0.4)};
  const Rotation r = rotation_to(2, nu);
  const Point e2 = r.apply({0.0, 1.0});
  EXPECT_NEAR(e2[0], nu[0], 1e-15);
  EXPECT_NEAR(e2[1], nu[1], 1e-15);
  const Point back = r.apply_transpose(r.apply({0.3, -0.7}));
  EXPECT_NEAR(back[0], 0.3, 1e-15);
  EXPECT_NEAR(back[1], -0.7, 1e-15);
  EXPECT_THROW(rotation_to(2, {1.0, 1.0}), std::invalid_argument);
}

TEST(Grid, RotatedCubeCountsCells) {
  const Grid g = Grid::box(2, 64, -1.0, 1.0);
  // Axis-aligned cube of side 1 centered at the origin: 32 x 32 centers.
  EXPECT_EQ(rotated_cube_mask({0.0, 0.0}, {0.0, 1.0}, 1.0, g).count(), 1024u);
  // A tilted cube covers the same area up to boundary cells.
  const double c = std::numbers::sqrt2 / 2.0;
  const auto tilted = rotated_cube_mask({0.0, 0.0}, {c, c}, 1.0, g).count();
  EXPECT_NEAR(static_cast<double>(tilted), 1024.0, 4.0 * 32.0 * c);
}

TEST(Grid, HalfspaceDatumSplitsByNormal) {
  const Grid g = Grid::box(2, 4, 0.0, 4.0);
  const LabelField u = halfspace_datum({2.0, 2.0}, {1.0, 0.0}, 1, 0, g, LabelSet({0.0, 1.0}));
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) EXPECT_EQ(u.index[g.index(i, j)], i >= 2 ? 1 : 0);
}

TEST(Grid, LabelFieldRoundTrip) {
  const Grid g = Grid::make(2, {5, 3}, 0.1, {-0.2, 0.4});
  LabelField u(g, LabelSet({-1.0, 0.5, 2.0}));
  for (std::size_t k = 0; k < g.size(); ++k) u.index[k] = static_cast<int>(k % 3);
  std::stringstream ss;
  write_label_field(ss, u);
  const LabelField v = read_label_field(ss);
  EXPECT_TRUE(v.grid.same_layout(g));
  EXPECT_EQ(v.index, u.index);
  EXPECT_EQ(v.labels.values(), u.labels.values());

  std::stringstream bad("fracvar-labels 2\n");
  EXPECT_THROW(read_label_field(bad), std::runtime_error);
}
