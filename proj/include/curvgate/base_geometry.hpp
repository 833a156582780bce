#pragma once

// Chart-based Riemannian base manifolds: metric, Christoffel symbols,
// curvature, geodesics with parallel transport, and directional hessians.

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "curvgate/metric_calculus.hpp"
#include "curvgate/stencil.hpp"
#include "curvgate/tensor.hpp"

namespace curvgate {

using Rng = std::mt19937_64;

struct ChartPoint {
  int chart = 0;
  Vec x;
};

struct FdOptions {
  double h = 1e-3;
  bool prefer_analytic = true;
};

class BaseManifold {
 public:
  virtual ~BaseManifold() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int chart_count() const = 0;
  virtual Mat metric(int chart, const Vec& x) const = 0;
  virtual bool in_domain(int chart, const Vec& x) const = 0;

  virtual std::optional<Christoffel> analytic_christoffel(int /*chart*/, const Vec& /*x*/) const {
    return std::nullopt;
  }

  // Coordinates of p in chart `to`; identity when to == p.chart.
  virtual ChartPoint change_chart(const ChartPoint& p, int to) const;
  // d x_to / d x_from at p.
  virtual Mat transition_jacobian(const ChartPoint& p, int to) const;
  // Chart that should be used at p (geodesic integration switches to it).
  virtual int preferred_chart(const ChartPoint& p) const { return p.chart; }
  // Canonical representative (wraps periodic coordinates).
  virtual ChartPoint normalize(const ChartPoint& p) const { return p; }

  // Extrinsic position used for scalar test fields and round-trip checks.
  virtual Vec embed(const ChartPoint& p) const = 0;
  // Random point in the well-conditioned core of a chart.
  virtual ChartPoint random_point(int chart, Rng& rng) const = 0;

  MetricFn metric_fn(int chart) const {
    return [this, chart](const Vec& x) { return metric(chart, x); };
  }
};

// R^n / Z^n with the flat metric and a single periodic chart.
class FlatTorus final : public BaseManifold {
 public:
  explicit FlatTorus(int dim = 2) : dim_(dim) {}
  std::string name() const override { return "flat-torus"; }
  int dim() const override { return dim_; }
  int chart_count() const override { return 1; }
  Mat metric(int chart, const Vec& x) const override;
  bool in_domain(int chart, const Vec& x) const override;
  std::optional<Christoffel> analytic_christoffel(int chart, const Vec& x) const override;
  ChartPoint normalize(const ChartPoint& p) const override;
  Vec embed(const ChartPoint& p) const override;
  ChartPoint random_point(int chart, Rng& rng) const override;

 private:
  int dim_;
};

// Round sphere of the given radius in two stereographic charts. Chart 0 is
// centred on the north pole; chart 1 coordinates are y = R x / |x|^2 with R
// the reflection of the second coordinate, so the transition preserves
// orientation.
class RoundSphere final : public BaseManifold {
 public:
  explicit RoundSphere(int dim = 2, double radius = 1.0) : dim_(dim), radius_(radius) {}
  std::string name() const override;
  int dim() const override { return dim_; }
  int chart_count() const override { return 2; }
  double radius() const { return radius_; }
  Mat metric(int chart, const Vec& x) const override;
  bool in_domain(int chart, const Vec& x) const override;
  std::optional<Christoffel> analytic_christoffel(int chart, const Vec& x) const override;
  ChartPoint change_chart(const ChartPoint& p, int to) const override;
  Mat transition_jacobian(const ChartPoint& p, int to) const override;
  int preferred_chart(const ChartPoint& p) const override;
  Vec embed(const ChartPoint& p) const override;
  ChartPoint random_point(int chart, Rng& rng) const override;

  // Conformal factor sqrt: g = lambda(x)^2 delta with lambda = 2 r / (1 + |x|^2).
  double lambda(const Vec& x) const;

  static constexpr double kSwitchRadius = 1.5;

 private:
  int dim_;
  double radius_;
};

Christoffel christoffel(const BaseManifold& m, const ChartPoint& p, const FdOptions& opt = {});

CurvatureTensor riemann_base(const BaseManifold& m, const ChartPoint& p, const FdOptions& opt = {});

// Normalized sectional curvature of span{X, Y}.
double sectional_base(const BaseManifold& m, const ChartPoint& p, const Vec& x, const Vec& y,
                      const FdOptions& opt = {});

// Extra state carried along a geodesic (e.g. connection-parallel fiber
// vectors). `rhs` returns dz/dt; `change_chart` maps z across a transition.
struct TransportHooks {
  std::function<Vec(int chart, const Vec& x, const Vec& velocity, const Vec& z)> rhs;
  std::function<Vec(const ChartPoint& from, int to, const Vec& z)> change_chart;
};

struct GeodesicState {
  ChartPoint point;
  Vec velocity;
  std::vector<Vec> frame;  // Levi-Civita parallel
  Vec extra;               // hook-driven state
};

// RK4 integration of the geodesic through (p, X) and parallel transport of
// `frame`, over t in [0, t_end] (t_end may be negative). Switches charts when
// the manifold prefers another chart; throws DomainError if the curve leaves
// every chart.
GeodesicState geodesic_transport(const BaseManifold& m, const ChartPoint& p, const Vec& x,
                                 const std::vector<Vec>& frame, double t_end, int steps,
                                 const FdOptions& opt = {}, const TransportHooks* hooks = nullptr,
                                 const Vec& extra0 = Vec());

// Express the tangent vectors of a state in another chart.
GeodesicState change_chart(const BaseManifold& m, const GeodesicState& s, int to);

// States at the given times, all of one sign and increasing in magnitude,
// integrated in a single pass with steps no longer than max_step.
std::vector<GeodesicState> geodesic_checkpoints(const BaseManifold& m, const ChartPoint& p, const Vec& x,
                                                const std::vector<Vec>& frame, const std::vector<double>& times,
                                                double max_step, const FdOptions& opt = {},
                                                const TransportHooks* hooks = nullptr, const Vec& extra0 = Vec());

// f evaluated on the stencil offsets of StencilSamples along the geodesic
// through (p, X), with `frame` and the hook state transported.
StencilSamples sample_along_geodesic(const BaseManifold& m, const ChartPoint& p, const Vec& x,
                                     const std::vector<Vec>& frame,
                                     const std::function<double(const GeodesicState&)>& f, double h,
                                     int steps_per_h, const FdOptions& opt = {},
                                     const TransportHooks* hooks = nullptr, const Vec& extra0 = Vec());

// d^2/dt^2 f(gamma(t)) at t = 0 along the geodesic with gamma'(0) = X, using
// the 5-point stencil with step h. This is hess f(X, X).
StencilResult directional_hessian(const BaseManifold& m, const ChartPoint& p, const Vec& x,
                                  const std::function<double(const GeodesicState&)>& f, double h = 1e-2,
                                  int steps_per_h = 4, const FdOptions& opt = {});

// Convenience: orthonormalize vectors with respect to a metric (Gram-Schmidt).
std::vector<Vec> gram_schmidt(const std::vector<Vec>& vs, const Mat& g);

}  // namespace curvgate
