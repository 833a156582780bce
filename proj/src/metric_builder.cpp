#include "curvgate/metric_builder.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

#include "curvgate/errors.hpp"

namespace curvgate {

const char* to_string(WarpingKind k) {
  switch (k) {
    case WarpingKind::FromRF: return "from-rf";
    case WarpingKind::Rotational: return "rotational";
    case WarpingKind::Custom: return "custom";
  }
  return "?";
}

double FiberProfile::G(double r) const {
  const double d = 3.0 + C * r * r;
  if (d <= 0.0) throw DomainError("fiber profile: 3 + C r^2 <= 0");
  return r * std::sqrt(3.0 / d);
}

double FiberProfile::max_radius() const {
  return C >= 0.0 ? std::numeric_limits<double>::infinity() : std::sqrt(-3.0 / C);
}

WarpingFunction warping_from_RF(const VerticalCurvatureField& rf) {
  WarpingFunction f;
  f.kind = WarpingKind::FromRF;
  f.rank = rf.rank;
  auto at = rf.at;
  const int k = rf.rank;
  f.matrix = [at, k](const ChartPoint& p, const Vec& w) {
    return Mat(Mat::Identity(k, k) - symmetrize(at(p)).quadratic_in_first_pair(w) / 3.0);
  };
  f.soul_curvature = rf;
  return f;
}

WarpingFunction warping_rotational(const FiberProfile& profile, int k) {
  if (k < 2) throw StructuralError("warping_rotational: rank must be at least 2");
  WarpingFunction f;
  f.kind = WarpingKind::Rotational;
  f.rank = k;
  f.profile = profile;
  const double c = profile.C;
  f.matrix = [c, k](const ChartPoint&, const Vec& w) {
    const double d = 3.0 + c * w.squaredNorm();
    if (d <= 0.0) throw DomainError("rotational warping: 3 + C r^2 <= 0");
    return Mat((3.0 * Mat::Identity(k, k) + c * w * w.transpose()) / d);
  };
  f.soul_curvature = rf_constant(k, c);
  return f;
}

WarpingFunction warping_custom(int rank, std::function<Mat(const ChartPoint&, const Vec&)> matrix,
                               VerticalCurvatureField soul_curvature) {
  WarpingFunction f;
  f.kind = WarpingKind::Custom;
  f.rank = rank;
  f.matrix = std::move(matrix);
  f.soul_curvature = std::move(soul_curvature);
  return f;
}

namespace {

double mixed_second(const std::function<double(double, double)>& f, double h) {
  // Fourth-order mixed stencil on the 4x4 grid {-2,-1,1,2}h.
  const double off[4] = {-2.0, -1.0, 1.0, 2.0};
  const double c[4] = {1.0, -8.0, 8.0, -1.0};
  double acc = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) acc += c[i] * c[j] * f(off[i] * h, off[j] * h);
  return acc / (144.0 * h * h);
}

}  // namespace

WarpingReport check_warping(const WarpingFunction& f, const ChartPoint& p, const Vec& w1, const Vec& w2,
                            const Vec& u, const Vec& v, double h) {
  WarpingReport r;
  const Mat m = f.matrix(p, w1);
  r.symmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  r.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
  r.radial = std::abs(f(p, w1, w1, u) - w1.dot(u));
  r.at_zero = std::abs(f(p, Vec::Zero(f.rank), u, v) - u.dot(v));
  r.first_order = std::abs(d1_5pt([&](double t) { return f(p, t * w1, u, v); }, h));
  const double a = mixed_second([&](double t, double s) { return f(p, t * w1 + s * w2, u, v); }, h);
  const double b = mixed_second([&](double t, double s) { return f(p, t * u + s * v, w1, w2); }, h);
  r.mixed = std::abs(a - b);
  return r;
}

double recovered_symmetrized(const WarpingFunction& f, const ChartPoint& p, const Vec& w, const Vec& u, const Vec& v,
                             double h) {
  return -1.5 * mixed_second([&](double t, double s) { return f(p, (t + s) * w, u, v); }, h);
}

Vec TotalPoint::q() const {
  Vec out(x.size() + v.size());
  out << x, v;
  return out;
}

TotalMetricField::TotalMetricField(std::shared_ptr<const BundleSpec> bundle, WarpingFunction f, double r_max)
    : bundle_(std::move(bundle)), f_(std::move(f)), r_max_(r_max) {
  if (f_.rank != bundle_->rank) throw StructuralError("TotalMetricField: warping rank differs from bundle rank");
  if (!(r_max_ > 0.0)) throw DomainError("TotalMetricField: r_max must be positive");
}

TotalPoint TotalMetricField::split_point(int chart, const Vec& q) const {
  if (q.size() != dim()) throw StructuralError("TotalMetricField: point has wrong dimension");
  return {chart, q.head(base_dim()), q.tail(rank())};
}

Mat TotalMetricField::metric(int chart, const Vec& q) const {
  const TotalPoint p = split_point(chart, q);
  if (p.v.norm() >= r_max_) throw DomainError("total metric: |v| beyond r_max");
  const int m = base_dim(), k = rank();
  const ChartPoint bp{chart, p.x};
  const auto w = bundle_->connection(chart, p.x);
  Mat b(k, m);  // columns omega(d_i) v
  for (int i = 0; i < m; ++i) b.col(i) = w[i] * p.v;
  const Mat fm = f_.matrix(bp, p.v);
  const Mat fs = 0.5 * (fm + fm.transpose());
  Mat g(m + k, m + k);
  g.topLeftCorner(m, m) = bundle_->base->metric(chart, p.x) + b.transpose() * fs * b;
  g.topRightCorner(m, k) = b.transpose() * fs;
  g.bottomLeftCorner(k, m) = fs * b;
  g.bottomRightCorner(k, k) = fs;
  return g;
}

MetricFn TotalMetricField::metric_fn(int chart) const {
  return [this, chart](const Vec& q) { return metric(chart, q); };
}

Mat TotalMetricField::horizontal_basis(const TotalPoint& p) const {
  const int m = base_dim(), k = rank();
  const auto w = bundle_->connection(p.chart, p.x);
  Mat h = Mat::Zero(m + k, m);
  h.topRows(m) = Mat::Identity(m, m);
  for (int i = 0; i < m; ++i) h.block(m, i, k, 1) = -w[i] * p.v;
  return h;
}

Vec TotalMetricField::horizontal_lift(const TotalPoint& p, const Vec& xdot) const {
  return horizontal_basis(p) * xdot;
}

Vec TotalMetricField::vertical(const Vec& u) const {
  Vec out = Vec::Zero(dim());
  out.tail(rank()) = u;
  return out;
}

TotalMetricField::Splitting TotalMetricField::split(const TotalPoint& p) const {
  const Mat g = metric(p);
  const Mat h = horizontal_basis(p);
  Splitting s;
  s.horizontal_proj = h * (h.transpose() * g * h).ldlt().solve(h.transpose() * g);
  const Mat fiber = Mat::Identity(dim(), dim()) - s.horizontal_proj;
  const double r = p.v.norm();
  s.radial = Vec::Zero(dim());
  if (r > 0.0) {
    s.radial = vertical(p.v);
    s.radial /= std::sqrt(s.radial.dot(g * s.radial));
  }
  s.radial_proj = s.radial * (g * s.radial).transpose();
  s.vertical_proj = fiber - s.radial_proj;
  return s;
}

RadiusCheck validate_r_max(const BundleSpec& b, const WarpingFunction& f, double requested, std::uint64_t seed,
                           int samples) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto min_eig = [&](const ChartPoint& p, const Vec& w) {
    try {
      const Mat m = f.matrix(p, w);
      return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
    } catch (const DomainError&) {
      return -1.0;
    }
  };
  double r_ok = requested;
  for (int i = 0; i < samples; ++i) {
    const ChartPoint p = b.base->random_point(i % b.base->chart_count(), rng);
    Vec dir(f.rank);
    for (int j = 0; j < f.rank; ++j) dir[j] = nd(rng);
    dir.normalize();
    if (min_eig(p, r_ok * dir) > 0.0) continue;
    double lo = 0.0, hi = r_ok;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (min_eig(p, mid * dir) > 0.0 ? lo : hi) = mid;
    }
    r_ok = lo;
  }
  // Keep a margin below the first degenerate radius found.
  if (r_ok < requested) return {0.9 * r_ok, true};
  return {requested, false};
}

BuiltMetric build_total_metric(std::shared_ptr<const BundleSpec> b, const WarpingFunction& f, double r_max,
                               std::uint64_t seed) {
  if (f.kind == WarpingKind::Rotational && r_max >= f.profile.max_radius()) {
    throw DomainError("build_total_metric: 3 + C r^2 <= 0 inside r_max");
  }
  BuiltMetric out;
  out.radius = validate_r_max(*b, f, r_max, seed);
  out.metric = std::make_shared<TotalMetricField>(std::move(b), f, out.radius.r_max);
  return out;
}

SphereBundleMetric::SphereBundleMetric(std::shared_ptr<const TotalMetricField> g, double r0)
    : g_(std::move(g)), r0_(r0) {
  if (!(r0_ > 0.0) || r0_ >= g_->r_max()) throw DomainError("sphere_bundle_metric: r0 outside (0, r_max)");
}

Vec SphereBundleMetric::sphere_point(int fiber_chart, const Vec& s) {
  const int n = static_cast<int>(s.size());
  const double s2 = s.squaredNorm();
  Vec u(n + 1);
  u.head(n) = (2.0 / (1.0 + s2)) * s;
  u[n] = (fiber_chart == 0 ? 1.0 : -1.0) * (1.0 - s2) / (1.0 + s2);
  return u;
}

Mat SphereBundleMetric::sphere_jacobian(int fiber_chart, const Vec& s) {
  const int n = static_cast<int>(s.size());
  const double d = 1.0 + s.squaredNorm();
  Mat j(n + 1, n);
  j.topRows(n) = (2.0 / d) * Mat::Identity(n, n) - (4.0 / (d * d)) * s * s.transpose();
  j.row(n) = (fiber_chart == 0 ? -4.0 : 4.0) / (d * d) * s.transpose();
  return j;
}

TotalPoint SphereBundleMetric::total_point(int chart, const Vec& y) const {
  const int m = g_->base_dim();
  return {chart / 2, y.head(m), r0_ * sphere_point(chart % 2, y.tail(dim() - m))};
}

Mat SphereBundleMetric::inclusion_jacobian(int chart, const Vec& y) const {
  const int m = g_->base_dim(), k = g_->rank();
  Mat j = Mat::Zero(m + k, dim());
  j.topLeftCorner(m, m) = Mat::Identity(m, m);
  j.bottomRightCorner(k, k - 1) = r0_ * sphere_jacobian(chart % 2, y.tail(k - 1));
  return j;
}

Mat SphereBundleMetric::metric(int chart, const Vec& y) const {
  const Mat j = inclusion_jacobian(chart, y);
  return j.transpose() * g_->metric(total_point(chart, y)) * j;
}

MetricFn SphereBundleMetric::metric_fn(int chart) const {
  return [this, chart](const Vec& y) { return metric(chart, y); };
}

double fiber_circle_length(const TotalMetricField& g, int chart, const Vec& x, double r0, int nodes) {
  if (g.rank() != 2) throw StructuralError("fiber_circle_length: rank-2 bundles only");
  // Trapezoid rule on a periodic integrand.
  double len = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double th = 2 * M_PI * i / nodes;
    Vec v(2), dv(2);
    v << r0 * std::cos(th), r0 * std::sin(th);
    dv << -r0 * std::sin(th), r0 * std::cos(th);
    const Vec t = g.vertical(dv);
    len += std::sqrt(t.dot(g.metric(TotalPoint{chart, x, v}) * t));
  }
  return len * 2 * M_PI / nodes;
}

}  // namespace curvgate
