#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fracvar {

using Point = std::array<double, 2>;

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }
double norm(const Point& a);

// Uniform Cartesian grid. For n = 1 the second axis has a single cell and is ignored.
// Cell (i, j) has flat index i + nx * j and center origin + (i + 1/2, j + 1/2) h.
struct Grid {
  int n = 2;
  std::array<int, 2> shape{2, 2};
  double h = 1.0;
  Point origin{0.0, 0.0};

  static Grid make(int n, std::array<int, 2> shape, double h, Point origin);
  // Square (n = 2) or interval (n = 1) [lo, hi]^n with `cells` cells per axis.
  static Grid box(int n, int cells, double lo, double hi);

  int nx() const { return shape[0]; }
  int ny() const { return shape[1]; }
  std::size_t size() const { return static_cast<std::size_t>(shape[0]) * shape[1]; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(shape[0]) * j; }
  Point center(int i, int j) const { return {origin[0] + (i + 0.5) * h, origin[1] + (j + 0.5) * h}; }
  Point center(std::size_t k) const { return center(static_cast<int>(k % shape[0]), static_cast<int>(k / shape[0])); }
  double cell_volume() const { return n == 1 ? h : h * h; }
  // h^{n-1}: the area of one face.
  double face_area() const { return n == 1 ? 1.0 : h; }
  bool same_layout(const Grid& o) const;
};

struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }
  double& at(int i, int j) { return values[grid.index(i, j)]; }
  double at(int i, int j) const { return values[grid.index(i, j)]; }
};

// comp[d] holds component d; for n = 1 only comp[0] is used (comp[1] stays zero).
struct VectorField {
  Grid grid;
  std::array<std::vector<double>, 2> comp;

  VectorField() = default;
  explicit VectorField(const Grid& g) : grid(g), comp{std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 0.0)} {}
  double magnitude(std::size_t k) const;
  Point value(std::size_t k) const { return {comp[0][k], comp[1][k]}; }
};

struct FaceAtom {
  Point position;
  int axis = 0;           // face normal is e_axis
  double weight = 0.0;    // signed weight along e_axis
  std::size_t low_cell = 0;
};

struct FaceMeasure {
  Grid grid;
  std::vector<FaceAtom> atoms;

  double total_variation() const;
  std::array<double, 2> weight_sum() const;
};

class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  // Smallest gap c_i - c_{i-1}.
  double theta() const;
  double spread() const { return values_.back() - values_.front(); }

 private:
  std::vector<double> values_;
};

struct LabelField {
  Grid grid;
  LabelSet labels;
  std::vector<int> index;

  LabelField() = default;
  LabelField(const Grid& g, const LabelSet& t, int fill = 0) : grid(g), labels(t), index(g.size(), fill) {}
  double value(std::size_t k) const { return labels[static_cast<std::size_t>(index[k])]; }
  ScalarField to_scalar() const;
  void validate() const;
};

struct DomainMask {
  Grid grid;
  std::vector<std::uint8_t> inside;

  DomainMask() = default;
  explicit DomainMask(const Grid& g, bool fill = false) : grid(g), inside(g.size(), fill ? 1 : 0) {}
  static DomainMask all(const Grid& g) { return DomainMask(g, true); }
  bool contains(std::size_t k) const { return inside[k] != 0; }
  std::size_t count() const;
};

// 2x2 rotation (column-major pair of columns) taking e_n to nu; counterclockwise for n = 2.
struct Rotation {
  Point col0{1.0, 0.0};
  Point col1{0.0, 1.0};
  Point apply(const Point& z) const { return {col0[0] * z[0] + col1[0] * z[1], col0[1] * z[0] + col1[1] * z[1]}; }
  Point apply_transpose(const Point& y) const { return {dot(col0, y), dot(col1, y)}; }
};
Rotation rotation_to(int n, const Point& nu);

// Discrete distributional derivative: one atom per interior face whose cells differ.
FaceMeasure discrete_Du(const LabelField& u);

// c_i where (center - x).nu > 0, c_j otherwise (ties go to c_j).
LabelField halfspace_datum(const Point& x, const Point& nu, int ci, int cj, const Grid& grid, const LabelSet& labels);

// Cells whose centers lie in the open cube x + R^nu (-r/2, r/2)^n.
DomainMask rotated_cube_mask(const Point& x, const Point& nu, double r, const Grid& grid);

// Plain-text serialization: header (n, shape, h, origin, labels) then row-major indices.
void write_label_field(std::ostream& os, const LabelField& u);
LabelField read_label_field(std::istream& is);

}  // namespace fracvar
