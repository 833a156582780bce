#include "curvgate/base_geometry.hpp"

#include <cmath>
#include <string>

#include "curvgate/errors.hpp"

namespace curvgate {

ChartPoint BaseManifold::change_chart(const ChartPoint& p, int to) const {
  if (to != p.chart) throw DomainError(name() + ": no transition between charts");
  return p;
}

Mat BaseManifold::transition_jacobian(const ChartPoint& p, int to) const {
  if (to != p.chart) throw DomainError(name() + ": no transition between charts");
  return Mat::Identity(dim(), dim());
}

// ---- flat torus -------------------------------------------------------------

Mat FlatTorus::metric(int /*chart*/, const Vec& /*x*/) const { return Mat::Identity(dim_, dim_); }

bool FlatTorus::in_domain(int chart, const Vec& x) const { return chart == 0 && x.size() == dim_ && x.allFinite(); }

std::optional<Christoffel> FlatTorus::analytic_christoffel(int /*chart*/, const Vec& /*x*/) const {
  return Christoffel(dim_, Mat::Zero(dim_, dim_));
}

ChartPoint FlatTorus::normalize(const ChartPoint& p) const {
  ChartPoint q = p;
  for (int i = 0; i < dim_; ++i) q.x[i] -= std::floor(q.x[i]);
  return q;
}

Vec FlatTorus::embed(const ChartPoint& p) const {
  Vec e(2 * dim_);
  for (int i = 0; i < dim_; ++i) {
    e[2 * i] = std::cos(2 * M_PI * p.x[i]);
    e[2 * i + 1] = std::sin(2 * M_PI * p.x[i]);
  }
  return e;
}

ChartPoint FlatTorus::random_point(int /*chart*/, Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(dim_);
  for (int i = 0; i < dim_; ++i) x[i] = u(rng);
  return {0, x};
}

// ---- round sphere -----------------------------------------------------------

std::string RoundSphere::name() const {
  return "round-s" + std::to_string(dim_) + (radius_ == 1.0 ? "" : "(r=" + std::to_string(radius_) + ")");
}

double RoundSphere::lambda(const Vec& x) const { return 2.0 * radius_ / (1.0 + x.squaredNorm()); }

Mat RoundSphere::metric(int /*chart*/, const Vec& x) const {
  const double l = lambda(x);
  return (l * l) * Mat::Identity(dim_, dim_);
}

bool RoundSphere::in_domain(int chart, const Vec& x) const {
  return (chart == 0 || chart == 1) && x.size() == dim_ && x.allFinite() && x.squaredNorm() < 1e8;
}

std::optional<Christoffel> RoundSphere::analytic_christoffel(int /*chart*/, const Vec& x) const {
  // g = exp(2 phi) delta, phi = log lambda, d_i phi = -2 x_i / (1 + |x|^2).
  const Vec dphi = (-2.0 / (1.0 + x.squaredNorm())) * x;
  Christoffel gamma(dim_, Mat::Zero(dim_, dim_));
  for (int k = 0; k < dim_; ++k)
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        gamma[k](i, j) = (k == i ? dphi[j] : 0.0) + (k == j ? dphi[i] : 0.0) - (i == j ? dphi[k] : 0.0);
  return gamma;
}

namespace {

Vec reflect(Vec x) {
  if (x.size() >= 2) x[1] = -x[1];
  return x;
}

}  // namespace

ChartPoint RoundSphere::change_chart(const ChartPoint& p, int to) const {
  if (to == p.chart) return p;
  const double r2 = p.x.squaredNorm();
  if (r2 < 1e-300) throw DomainError(name() + ": chart transition at a pole");
  return {to, reflect(p.x) / r2};
}

Mat RoundSphere::transition_jacobian(const ChartPoint& p, int to) const {
  if (to == p.chart) return Mat::Identity(dim_, dim_);
  const double r2 = p.x.squaredNorm();
  if (r2 < 1e-300) throw DomainError(name() + ": chart transition at a pole");
  Mat j = Mat::Identity(dim_, dim_) / r2 - (2.0 / (r2 * r2)) * p.x * p.x.transpose();
  if (dim_ >= 2) j.row(1) *= -1.0;
  return j;
}

int RoundSphere::preferred_chart(const ChartPoint& p) const {
  return p.x.norm() > kSwitchRadius ? 1 - p.chart : p.chart;
}

Vec RoundSphere::embed(const ChartPoint& p) const {
  const double r2 = p.x.squaredNorm();
  Vec e(dim_ + 1);
  const Vec horiz = (p.chart == 0 ? p.x : reflect(p.x)) * (2.0 / (1.0 + r2));
  e.head(dim_) = horiz;
  e[dim_] = (p.chart == 0 ? 1.0 : -1.0) * (1.0 - r2) / (1.0 + r2);
  return radius_ * e;
}

ChartPoint RoundSphere::random_point(int chart, Rng& rng) const {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec x(dim_);
  do {
    for (int i = 0; i < dim_; ++i) x[i] = u(rng);
  } while (x.squaredNorm() > 1.0);
  return {chart, x};
}

// ---- calculus ----------------------------------------------------------------

Christoffel christoffel(const BaseManifold& m, const ChartPoint& p, const FdOptions& opt) {
  if (!m.in_domain(p.chart, p.x)) throw DomainError("christoffel: point outside chart domain");
  if (opt.prefer_analytic) {
    if (auto g = m.analytic_christoffel(p.chart, p.x)) return *g;
  }
  const auto jet = metric_jet(m.metric_fn(p.chart), p.x, opt.h, false);
  require_well_conditioned(jet.g, "christoffel");
  return christoffel_from_jet(jet);
}

CurvatureTensor riemann_base(const BaseManifold& m, const ChartPoint& p, const FdOptions& opt) {
  if (!m.in_domain(p.chart, p.x)) throw DomainError("riemann_base: point outside chart domain");
  const auto jet = metric_jet(m.metric_fn(p.chart), p.x, opt.h, true);
  require_well_conditioned(jet.g, "riemann_base");
  return CurvatureTensor::unchecked(riemann_from_jet(jet, christoffel_from_jet(jet)));
}

double sectional_base(const BaseManifold& m, const ChartPoint& p, const Vec& x, const Vec& y, const FdOptions& opt) {
  const Mat g = m.metric(p.chart, p.x);
  const double area = wedge_norm_sq(x, y, g);
  if (area <= 0.0) throw DomainError("sectional_base: degenerate plane");
  return riemann_base(m, p, opt).k(x, y) / area;
}

std::vector<Vec> gram_schmidt(const std::vector<Vec>& vs, const Mat& g) {
  std::vector<Vec> out;
  for (const Vec& v : vs) {
    Vec w = v;
    for (const Vec& e : out) w -= e.dot(g * w) * e;
    const double n2 = w.dot(g * w);
    if (n2 <= 1e-24) throw DomainError("gram_schmidt: linearly dependent vectors");
    out.push_back(w / std::sqrt(n2));
  }
  return out;
}

GeodesicState change_chart(const BaseManifold& m, const GeodesicState& s, int to) {
  if (to == s.point.chart) return s;
  GeodesicState out;
  const Mat jac = m.transition_jacobian(s.point, to);
  out.point = m.change_chart(s.point, to);
  out.velocity = jac * s.velocity;
  for (const Vec& f : s.frame) out.frame.push_back(jac * f);
  out.extra = s.extra;
  return out;
}

namespace {

struct Packed {
  int m = 0;
  int nframe = 0;
  int nextra = 0;
  int size() const { return 2 * m + m * nframe + nextra; }
};

Vec pack(const Packed& pk, const GeodesicState& s) {
  Vec y(pk.size());
  y.segment(0, pk.m) = s.point.x;
  y.segment(pk.m, pk.m) = s.velocity;
  for (int f = 0; f < pk.nframe; ++f) y.segment(2 * pk.m + f * pk.m, pk.m) = s.frame[f];
  if (pk.nextra > 0) y.tail(pk.nextra) = s.extra;
  return y;
}

void unpack(const Packed& pk, const Vec& y, GeodesicState& s) {
  s.point.x = y.segment(0, pk.m);
  s.velocity = y.segment(pk.m, pk.m);
  for (int f = 0; f < pk.nframe; ++f) s.frame[f] = y.segment(2 * pk.m + f * pk.m, pk.m);
  if (pk.nextra > 0) s.extra = y.tail(pk.nextra);
}

Vec rhs(const BaseManifold& mf, const Packed& pk, int chart, const Vec& y, const FdOptions& opt,
        const TransportHooks* hooks) {
  const Vec x = y.segment(0, pk.m);
  const Vec v = y.segment(pk.m, pk.m);
  const Christoffel gamma = christoffel(mf, {chart, x}, opt);
  Vec dy(pk.size());
  dy.segment(0, pk.m) = v;
  dy.segment(pk.m, pk.m) = -contract_christoffel(gamma, v, v);
  for (int f = 0; f < pk.nframe; ++f) {
    dy.segment(2 * pk.m + f * pk.m, pk.m) = -contract_christoffel(gamma, v, y.segment(2 * pk.m + f * pk.m, pk.m));
  }
  if (pk.nextra > 0) dy.tail(pk.nextra) = hooks->rhs(chart, x, v, y.tail(pk.nextra));
  return dy;
}

void rk4_step(const BaseManifold& mf, const Packed& pk, GeodesicState& s, double dt, const FdOptions& opt,
              const TransportHooks* hooks) {
  const int chart = s.point.chart;
  const Vec y = pack(pk, s);
  const Vec k1 = rhs(mf, pk, chart, y, opt, hooks);
  const Vec k2 = rhs(mf, pk, chart, y + 0.5 * dt * k1, opt, hooks);
  const Vec k3 = rhs(mf, pk, chart, y + 0.5 * dt * k2, opt, hooks);
  const Vec k4 = rhs(mf, pk, chart, y + dt * k3, opt, hooks);
  unpack(pk, y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), s);
}

void settle_chart(const BaseManifold& mf, GeodesicState& s, const TransportHooks* hooks) {
  s.point = mf.normalize(s.point);
  const int to = mf.preferred_chart(s.point);
  if (to != s.point.chart) {
    const ChartPoint from = s.point;
    GeodesicState moved = change_chart(mf, s, to);
    if (hooks && s.extra.size() > 0) moved.extra = hooks->change_chart(from, to, s.extra);
    s = std::move(moved);
  }
  if (!mf.in_domain(s.point.chart, s.point.x)) {
    throw DomainError("geodesic_transport: curve left every chart of " + mf.name());
  }
}

}  // namespace

std::vector<GeodesicState> geodesic_checkpoints(const BaseManifold& m, const ChartPoint& p, const Vec& x,
                                                const std::vector<Vec>& frame, const std::vector<double>& times,
                                                double max_step, const FdOptions& opt, const TransportHooks* hooks,
                                                const Vec& extra0) {
  if (!m.in_domain(p.chart, p.x)) throw DomainError("geodesic_transport: start point outside chart");
  if (x.size() != m.dim()) throw StructuralError("geodesic_transport: velocity has wrong dimension");
  if (extra0.size() > 0 && (hooks == nullptr || !hooks->rhs)) {
    throw StructuralError("geodesic_transport: extra state without transport hooks");
  }
  Packed pk{m.dim(), static_cast<int>(frame.size()), static_cast<int>(extra0.size())};
  GeodesicState s{p, x, frame, extra0};
  std::vector<GeodesicState> out;
  out.reserve(times.size());
  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    if (span != 0.0) {
      const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / max_step - 1e-9)));
      const double dt = span / steps;
      for (int i = 0; i < steps; ++i) {
        rk4_step(m, pk, s, dt, opt, hooks);
        settle_chart(m, s, hooks);
      }
    }
    t = target;
    out.push_back(s);
  }
  return out;
}

GeodesicState geodesic_transport(const BaseManifold& m, const ChartPoint& p, const Vec& x,
                                 const std::vector<Vec>& frame, double t_end, int steps, const FdOptions& opt,
                                 const TransportHooks* hooks, const Vec& extra0) {
  if (steps < 1) throw StructuralError("geodesic_transport: steps must be positive");
  if (t_end == 0.0) return {p, x, frame, extra0};
  return geodesic_checkpoints(m, p, x, frame, {t_end}, std::abs(t_end) / steps, opt, hooks, extra0).back();
}

StencilSamples sample_along_geodesic(const BaseManifold& m, const ChartPoint& p, const Vec& x,
                                     const std::vector<Vec>& frame,
                                     const std::function<double(const GeodesicState&)>& f, double h,
                                     int steps_per_h, const FdOptions& opt, const TransportHooks* hooks,
                                     const Vec& extra0) {
  StencilSamples s;
  s.h = h;
  const double max_step = h / std::max(1, steps_per_h);
  const auto fwd = geodesic_checkpoints(m, p, x, frame, {0.5 * h, h, 2 * h}, max_step, opt, hooks, extra0);
  const auto bwd = geodesic_checkpoints(m, p, x, frame, {-0.5 * h, -h, -2 * h}, max_step, opt, hooks, extra0);
  s.f[0] = f(bwd[2]);
  s.f[1] = f(bwd[1]);
  s.f[2] = f(bwd[0]);
  s.f[3] = f(GeodesicState{p, x, frame, extra0});
  s.f[4] = f(fwd[0]);
  s.f[5] = f(fwd[1]);
  s.f[6] = f(fwd[2]);
  return s;
}

StencilResult directional_hessian(const BaseManifold& m, const ChartPoint& p, const Vec& x,
                                  const std::function<double(const GeodesicState&)>& f, double h,
                                  int steps_per_h, const FdOptions& opt) {
  return sample_along_geodesic(m, p, x, {}, f, h, steps_per_h, opt).d2();
}

}  // namespace curvgate
