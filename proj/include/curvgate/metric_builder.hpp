#pragma once

// Connection metrics and warped connection metrics on total-space charts.
// A total chart is a base chart times linear fiber coordinates: q = (x, v).

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "curvgate/bundle.hpp"

namespace curvgate {

enum class WarpingKind { FromRF, Rotational, Custom };
const char* to_string(WarpingKind k);

// Rotationally symmetric fiber metric dr^2 + G(r)^2 dsigma^2 with
// G^2 = 3 r^2 / (3 + C r^2).
struct FiberProfile {
  double C = 0.0;
  double G(double r) const;
  // Largest radius where 3 + C r^2 > 0 (infinity for C >= 0).
  double max_radius() const;
};

// F_p(W, U, V) stored as the fiber matrix F_p(W) with F_p(W,U,V) = U^T F_p(W) V.
struct WarpingFunction {
  WarpingKind kind = WarpingKind::Custom;
  int rank = 0;
  std::function<Mat(const ChartPoint& p, const Vec& w)> matrix;
  // Vertical curvature the fibers have at the zero-section.
  VerticalCurvatureField soul_curvature;
  FiberProfile profile;  // Rotational only

  double operator()(const ChartPoint& p, const Vec& w, const Vec& u, const Vec& v) const {
    return u.dot(matrix(p, w) * v);
  }
};

// F(W,U,V) = <U,V> - 1/3 Rs_F(W,W,U,V).
WarpingFunction warping_from_RF(const VerticalCurvatureField& rf);
// F(W) = (3 I + C W W^T) / (3 + C |W|^2). Throws StructuralError for k < 2.
WarpingFunction warping_rotational(const FiberProfile& profile, int k);
WarpingFunction warping_custom(int rank, std::function<Mat(const ChartPoint&, const Vec&)> matrix,
                               VerticalCurvatureField soul_curvature);

// Residuals of the warping-function properties at one sample.
struct WarpingReport {
  double symmetry = 0.0;      // |F - F^T|
  double min_eigenvalue = 0.0;
  double radial = 0.0;        // |F(W,W,U) - <W,U>|
  double at_zero = 0.0;       // |F(0,U,V) - <U,V>|
  double first_order = 0.0;   // |d/dt F(tW,U,V)| at t = 0
  double mixed = 0.0;         // |d2/dsdt F(tW1+sW2,U,V) - d2/dsdt F(tU+sV,W1,W2)|
};
WarpingReport check_warping(const WarpingFunction& f, const ChartPoint& p, const Vec& w1, const Vec& w2,
                            const Vec& u, const Vec& v, double h = 1e-3);

// -3/2 d2/dsdt F(tW+sW, U, V) at 0, which recovers Rs_F(W,W,U,V).
double recovered_symmetrized(const WarpingFunction& f, const ChartPoint& p, const Vec& w, const Vec& u, const Vec& v,
                             double h = 1e-3);

struct TotalPoint {
  int chart = 0;
  Vec x;  // base coordinates
  Vec v;  // fiber coordinates
  Vec q() const;
};

class TotalMetricField {
 public:
  TotalMetricField(std::shared_ptr<const BundleSpec> bundle, WarpingFunction f, double r_max);

  const BundleSpec& bundle() const { return *bundle_; }
  std::shared_ptr<const BundleSpec> bundle_ptr() const { return bundle_; }
  const WarpingFunction& warping() const { return f_; }
  int base_dim() const { return bundle_->base_dim(); }
  int rank() const { return bundle_->rank; }
  int dim() const { return base_dim() + rank(); }
  double r_max() const { return r_max_; }

  // Throws DomainError outside |v| < r_max.
  Mat metric(int chart, const Vec& q) const;
  Mat metric(const TotalPoint& p) const { return metric(p.chart, p.q()); }
  MetricFn metric_fn(int chart) const;

  TotalPoint split_point(int chart, const Vec& q) const;

  // Columns are the horizontal lifts (d_i, -omega(d_i) v).
  Mat horizontal_basis(const TotalPoint& p) const;
  Vec horizontal_lift(const TotalPoint& p, const Vec& xdot) const;
  Vec vertical(const Vec& u) const;

  // TE = H + V + r at a point: projections are g_E-orthogonal. At v = 0 the
  // radial line is undefined and `radial` is zero; `vertical_proj` then
  // covers the whole fiber.
  struct Splitting {
    Mat horizontal_proj;
    Mat vertical_proj;  // onto V (orthogonal complement of r in the fiber)
    Mat radial_proj;
    Vec radial;         // unit, or zero at v = 0
  };
  Splitting split(const TotalPoint& p) const;

 private:
  std::shared_ptr<const BundleSpec> bundle_;
  WarpingFunction f_;
  double r_max_;
};

// Largest radius <= requested at which F(W) stays positive definite, found by
// bisection along sampled directions; `shrunk` tells whether it fell short.
struct RadiusCheck {
  double r_max = 0.0;
  bool shrunk = false;
};
RadiusCheck validate_r_max(const BundleSpec& b, const WarpingFunction& f, double requested, std::uint64_t seed,
                           int samples = 64);

// Validates the radius (DomainError for a rotational profile that degenerates
// inside it) and returns the metric on the achieved radius.
struct BuiltMetric {
  std::shared_ptr<const TotalMetricField> metric;
  RadiusCheck radius;
};
BuiltMetric build_total_metric(std::shared_ptr<const BundleSpec> b, const WarpingFunction& f, double r_max,
                               std::uint64_t seed = 1);

// Induced metric on the distance sphere |v| = r0. Chart index is
// 2 * base_chart + fiber_chart; fiber charts are stereographic on S^{k-1}.
class SphereBundleMetric {
 public:
  // Throws DomainError unless 0 < r0 < r_max.
  SphereBundleMetric(std::shared_ptr<const TotalMetricField> g, double r0);

  int dim() const { return g_->dim() - 1; }
  int chart_count() const { return 2 * g_->bundle().base->chart_count(); }
  double r0() const { return r0_; }
  const TotalMetricField& total() const { return *g_; }

  // Unit fiber direction for stereographic coordinates s in fiber chart c.
  static Vec sphere_point(int fiber_chart, const Vec& s);
  static Mat sphere_jacobian(int fiber_chart, const Vec& s);

  TotalPoint total_point(int chart, const Vec& y) const;
  // d(total coordinates) / dy.
  Mat inclusion_jacobian(int chart, const Vec& y) const;
  Mat metric(int chart, const Vec& y) const;
  MetricFn metric_fn(int chart) const;

 private:
  std::shared_ptr<const TotalMetricField> g_;
  double r0_;
};

// Length of the fiber circle {x} x {|v| = r0} in a rank-2 bundle.
double fiber_circle_length(const TotalMetricField& g, int chart, const Vec& x, double r0, int nodes = 256);

}  // namespace curvgate
