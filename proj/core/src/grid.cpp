#include "fracvar/grid.hpp"

#include "fracvar/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fracvar {

double norm(const Point& a) { return std::hypot(a[0], a[1]); }

Grid Grid::make(int n, std::array<int, 2> shape, double h, Point origin) {
  check_dimension(n);
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing must be positive");
  if (shape[0] < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
  if (n == 2 && shape[1] < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
  Grid g;
  g.n = n;
  g.shape = n == 1 ? std::array<int, 2>{shape[0], 1} : shape;
  g.h = h;
  g.origin = n == 1 ? Point{origin[0], 0.0} : origin;
  return g;
}

Grid Grid::box(int n, int cells, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("empty box");
  return make(n, {cells, cells}, (hi - lo) / cells, {lo, lo});
}

bool Grid::same_layout(const Grid& o) const {
  return n == o.n && shape == o.shape && h == o.h && origin == o.origin;
}

double VectorField::magnitude(std::size_t k) const { return std::hypot(comp[0][k], comp[1][k]); }

double FaceMeasure::total_variation() const {
  double tv = 0.0;
  for (const auto& a : atoms) tv += std::abs(a.weight);
  return tv;
}

std::array<double, 2> FaceMeasure::weight_sum() const {
  std::array<double, 2> s{0.0, 0.0};
  for (const auto& a : atoms) s[static_cast<std::size_t>(a.axis)] += a.weight;
  return s;
}

LabelSet::LabelSet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw std::invalid_argument("label set needs at least two labels");
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (!(values_[i] > values_[i - 1])) throw std::invalid_argument("labels must be strictly increasing");
}

double LabelSet::theta() const {
  double t = values_[1] - values_[0];
  for (std::size_t i = 2; i < values_.size(); ++i) t = std::min(t, values_[i] - values_[i - 1]);
  return t;
}

ScalarField LabelField::to_scalar() const {
  ScalarField f(grid);
  for (std::size_t k = 0; k < index.size(); ++k) f[k] = value(k);
  return f;
}

void LabelField::validate() const {
  if (index.size() != grid.size()) throw std::invalid_argument("label count does not match grid");
  for (int l : index)
    if (l < 0 || static_cast<std::size_t>(l) >= labels.size()) throw std::invalid_argument("label index out of range");
}

std::size_t DomainMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

Rotation rotation_to(int n, const Point& nu) {
  const double len = norm(nu);
  if (std::abs(len - 1.0) > 1e-9) throw std::invalid_argument("normal must have unit length");
  Rotation r;
  if (n == 1) {
    r.col0 = {nu[0] >= 0.0 ? 1.0 : -1.0, 0.0};
    r.col1 = {0.0, 1.0};
    return r;
  }
  // Counterclockwise rotation by the angle from e_2 to nu: R e_2 = nu, R e_1 = (nu_y, -nu_x).
  r.col1 = nu;
  r.col0 = {nu[1], -nu[0]};
  return r;
}

FaceMeasure discrete_Du(const LabelField& u) {
  const Grid& g = u.grid;
  FaceMeasure m;
  m.grid = g;
  const double area = g.face_area();
  for (int axis = 0; axis < g.n; ++axis) {
    const int di = axis == 0 ? 1 : 0;
    const int dj = axis == 1 ? 1 : 0;
    for (int j = 0; j + dj < g.ny(); ++j) {
      for (int i = 0; i + di < g.nx(); ++i) {
        const std::size_t p = g.index(i, j);
        const std::size_t q = g.index(i + di, j + dj);
        if (u.index[p] == u.index[q]) continue;
        FaceAtom a;
        a.axis = axis;
        a.low_cell = p;
        a.weight = (u.value(q) - u.value(p)) * area;
        const Point c = g.center(i, j);
        a.position = {c[0] + 0.5 * g.h * di, c[1] + 0.5 * g.h * dj};
        m.atoms.push_back(a);
      }
    }
  }
  return m;
}

LabelField halfspace_datum(const Point& x, const Point& nu, int ci, int cj, const Grid& grid, const LabelSet& labels) {
  if (std::abs(norm(nu) - 1.0) > 1e-9) throw std::invalid_argument("normal must have unit length");
  const int m = static_cast<int>(labels.size());
  if (ci < 0 || ci >= m || cj < 0 || cj >= m) throw std::invalid_argument("label index out of range");
  LabelField u(grid, labels, cj);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point c = grid.center(k);
    const double side = (c[0] - x[0]) * nu[0] + (grid.n == 2 ? (c[1] - x[1]) * nu[1] : 0.0);
    if (side > 0.0) u.index[k] = ci;
  }
  return u;
}

DomainMask rotated_cube_mask(const Point& x, const Point& nu, double r, const Grid& grid) {
  if (!(r > 0.0)) throw std::invalid_argument("cube side must be positive");
  const Rotation rot = rotation_to(grid.n, nu);
  DomainMask mask(grid);
  const double half = 0.5 * r;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point c = grid.center(k);
    const Point z = rot.apply_transpose({c[0] - x[0], grid.n == 2 ? c[1] - x[1] : 0.0});
    const bool in = std::abs(z[0]) < half && (grid.n == 1 || std::abs(z[1]) < half);
    mask.inside[k] = in ? 1 : 0;
  }
  if (mask.count() == 0) throw std::invalid_argument("rotated cube contains no cell centers");
  return mask;
}

void write_label_field(std::ostream& os, const LabelField& u) {
  const Grid& g = u.grid;
  os.precision(17);
  os << "fracvar-labels 1\n";
  os << "n " << g.n << "\n";
  os << "shape " << g.nx() << " " << g.ny() << "\n";
  os << "h " << g.h << "\n";
  os << "origin " << g.origin[0] << " " << g.origin[1] << "\n";
  os << "labels " << u.labels.size();
  for (double c : u.labels.values()) os << " " << c;
  os << "\n";
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) os << (i ? " " : "") << u.index[g.index(i, j)];
    os << "\n";
  }
}

namespace {

void expect_key(std::istream& is, const std::string& key) {
  std::string got;
  if (!(is >> got) || got != key) throw std::runtime_error("label field: expected '" + key + "'");
}

}  // namespace

LabelField read_label_field(std::istream& is) {
  expect_key(is, "fracvar-labels");
  int version = 0;
  is >> version;
  if (version != 1) throw std::runtime_error("label field: unsupported version");
  int n = 0;
  std::array<int, 2> shape{0, 0};
  double h = 0.0;
  Point origin{0.0, 0.0};
  std::size_t m = 0;
  expect_key(is, "n");
  is >> n;
  expect_key(is, "shape");
  is >> shape[0] >> shape[1];
  expect_key(is, "h");
  is >> h;
  expect_key(is, "origin");
  is >> origin[0] >> origin[1];
  expect_key(is, "labels");
  is >> m;
  if (!is || m < 2 || m > 1000000) throw std::runtime_error("label field: bad header");
  std::vector<double> values(m);
  for (auto& v : values) is >> v;
  const Grid g = Grid::make(n, shape, h, origin);
  LabelField u(g, LabelSet(values));
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!(is >> u.index[k])) throw std::runtime_error("label field: truncated body");
  }
  u.validate();
  return u;
}

}  // namespace fracvar
