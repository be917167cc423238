#pragma once

#include "fracvar/grid.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fracvar {

// Interfacial density psi(x, xi): continuous, convex and 1-homogeneous in xi, with
// lambda |xi| <= psi <= Lambda |xi|. Implementations define the value on unit vectors;
// homogeneity is enforced by eval. All provided densities are even in xi.
class Density {
 public:
  virtual ~Density() = default;

  virtual double eval_unit(const Point& x, const Point& nu) const = 0;
  double eval(const Point& x, const Point& xi) const;

  virtual double lambda() const = 0;
  virtual double Lambda() const = 0;
  // Period per axis when psi is periodic in x.
  virtual std::optional<Point> period() const { return std::nullopt; }
  // psi(x, xi) = weight(x) |xi| when true.
  virtual bool isotropic() const { return false; }
  virtual double weight(const Point& x) const;
  virtual bool x_independent() const { return false; }
  virtual std::string describe() const = 0;
};

using DensityPtr = std::shared_ptr<const Density>;

// a |xi|
class HomogeneousDensity final : public Density {
 public:
  explicit HomogeneousDensity(double a = 1.0);
  double eval_unit(const Point&, const Point&) const override { return a_; }
  double lambda() const override { return a_; }
  double Lambda() const override { return a_; }
  bool isotropic() const override { return true; }
  double weight(const Point&) const override { return a_; }
  bool x_independent() const override { return true; }
  std::string describe() const override;

 private:
  double a_;
};

// sqrt(a^2 (R xi)_1^2 + b^2 (R xi)_2^2), R the rotation by -angle.
class EllipseDensity final : public Density {
 public:
  EllipseDensity(double a, double b, double angle = 0.0);
  double eval_unit(const Point& x, const Point& nu) const override;
  double lambda() const override;
  double Lambda() const override;
  bool x_independent() const override { return true; }
  std::string describe() const override;

 private:
  double a_, b_, angle_;
};

// a(x_axis) |xi| with a = low on [phase, phase + period/2) mod period and high elsewhere.
class StepLaminate final : public Density {
 public:
  StepLaminate(double low, double high, double period = 1.0, double phase = 0.0, int axis = 0);
  double eval_unit(const Point& x, const Point&) const override { return weight(x); }
  double lambda() const override { return low_; }
  double Lambda() const override { return high_; }
  std::optional<Point> period() const override;
  bool isotropic() const override { return true; }
  double weight(const Point& x) const override;
  std::string describe() const override;
  double mean() const { return 0.5 * (low_ + high_); }

 private:
  double low_, high_, period_, phase_;
  int axis_;
};

// (mean + amplitude cos(2 pi x_axis / period)) |xi|
class CosineLaminate final : public Density {
 public:
  CosineLaminate(double mean, double amplitude, double period = 1.0, int axis = 0);
  double eval_unit(const Point& x, const Point&) const override { return weight(x); }
  double lambda() const override { return mean_ - amplitude_; }
  double Lambda() const override { return mean_ + amplitude_; }
  std::optional<Point> period() const override;
  bool isotropic() const override { return true; }
  double weight(const Point& x) const override;
  std::string describe() const override;

 private:
  double mean_, amplitude_, period_;
  int axis_;
};

// low on squares with even floor(x/p) + floor(y/p), high on the others.
class Checkerboard final : public Density {
 public:
  Checkerboard(double low, double high, double period = 1.0);
  double eval_unit(const Point& x, const Point&) const override { return weight(x); }
  double lambda() const override { return low_; }
  double Lambda() const override { return high_; }
  std::optional<Point> period() const override;
  bool isotropic() const override { return true; }
  double weight(const Point& x) const override;
  std::string describe() const override;

 private:
  double low_, high_, tile_;
};

// Isotropic weight sampled on a periodic table (row-major, nx * ny values over one period),
// bilinear interpolation.
class TableDensity final : public Density {
 public:
  TableDensity(std::vector<double> values, int nx, int ny, Point period);
  double eval_unit(const Point& x, const Point&) const override { return weight(x); }
  double lambda() const override { return lo_; }
  double Lambda() const override { return hi_; }
  std::optional<Point> period() const override { return period_; }
  bool isotropic() const override { return true; }
  double weight(const Point& x) const override;
  std::string describe() const override;

 private:
  std::vector<double> values_;
  int nx_, ny_;
  Point period_;
  double lo_, hi_;
};

// psi(x / eps, xi): the homogenization family.
class RescaledDensity final : public Density {
 public:
  RescaledDensity(DensityPtr base, double eps);
  double eval_unit(const Point& x, const Point& nu) const override;
  double lambda() const override { return base_->lambda(); }
  double Lambda() const override { return base_->Lambda(); }
  std::optional<Point> period() const override;
  bool isotropic() const override { return base_->isotropic(); }
  double weight(const Point& x) const override;
  bool x_independent() const override { return base_->x_independent(); }
  std::string describe() const override;
  double eps() const { return eps_; }
  const DensityPtr& base() const { return base_; }

 private:
  DensityPtr base_;
  double eps_;
};

struct DensityCheck {
  bool bounds_ok = true;
  bool convex_ok = true;
  double worst_bound_violation = 0.0;
  double worst_convexity_violation = 0.0;
};
// Bounds on a lattice of points and directions, midpoint convexity on direction pairs.
DensityCheck spot_check(const Density& psi, const Point& lo, const Point& hi, int points = 9, int directions = 32);

}  // namespace fracvar
