#include "curvgate/curvature_engine.hpp"

#include <cmath>

#include "curvgate/errors.hpp"

namespace curvgate {

Christoffel christoffel_total(const TotalMetricField& g, const TotalPoint& q, double h) {
  return christoffel_from_jet(metric_jet(g.metric_fn(q.chart), q.q(), h, false));
}

CurvatureTensor riemann_total(const TotalMetricField& g, const TotalPoint& q, double h) {
  const MetricJet jet = metric_jet(g.metric_fn(q.chart), q.q(), h, true);
  return CurvatureTensor::unchecked(riemann_from_jet(jet, christoffel_from_jet(jet)));
}

SectionalValue sectional(const CurvatureTensor& r, const Mat& g, const Vec& e1, const Vec& e2) {
  const double w = wedge_norm_sq(e1, e2, g);
  const double scale = e1.dot(g * e1) * e2.dot(g * e2);
  if (!(w > 1e-14 * scale) || scale == 0.0) throw DomainError("sectional: degenerate plane");
  SectionalValue s;
  s.unnormalized = r.k(e1, e2);
  s.normalized = s.unnormalized / w;
  return s;
}

SectionalValue sectional(const TotalMetricField& g, const TotalPoint& q, const Vec& e1, const Vec& e2, double h) {
  return sectional(riemann_total(g, q, h), g.metric(q), e1, e2);
}

namespace {

Vec radial_q(const Vec& x, const Vec& w, double t) {
  Vec q(x.size() + w.size());
  q << x, t * w;
  return q;
}

}  // namespace

std::vector<std::vector<Vec>> radial_transport(const TotalMetricField& g, int chart, const Vec& x, const Vec& w,
                                               const std::vector<Vec>& vectors, const std::vector<double>& times,
                                               double max_step, double h) {
  const int n = g.dim();
  const int count = static_cast<int>(vectors.size());
  Vec vel = Vec::Zero(n);
  vel.tail(g.rank()) = w;
  const MetricFn fn = g.metric_fn(chart);
  auto rhs = [&](double t, const Vec& z) {
    const Christoffel gam = christoffel_from_jet(metric_jet(fn, radial_q(x, w, t), h, false));
    Vec dz(z.size());
    for (int i = 0; i < count; ++i) dz.segment(i * n, n) = -contract_christoffel(gam, vel, z.segment(i * n, n));
    return dz;
  };
  Vec z = stack(vectors);
  double t = 0.0;
  std::vector<std::vector<Vec>> out;
  for (double target : times) {
    if (target * t < 0.0 || std::abs(target) < std::abs(t)) {
      throw StructuralError("radial_transport: times must share a sign and increase in magnitude");
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(target - t) / max_step)));
    const double dt = (target - t) / steps;
    for (int s = 0; s < steps; ++s) {
      const Vec k1 = rhs(t, z);
      const Vec k2 = rhs(t + dt / 2, z + dt / 2 * k1);
      const Vec k3 = rhs(t + dt / 2, z + dt / 2 * k2);
      const Vec k4 = rhs(t + dt, z + dt * k3);
      z += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += dt;
    }
    t = target;
    out.push_back(unstack(z, count));
  }
  return out;
}

double radial_geodesic_residual(const TotalMetricField& g, int chart, const Vec& x, const Vec& w, double t,
                                double h) {
  const Vec q = radial_q(x, w, t);
  const Christoffel gam = christoffel_from_jet(metric_jet(g.metric_fn(chart), q, h, false));
  Vec vel = Vec::Zero(g.dim());
  vel.tail(g.rank()) = w;
  // The coordinate acceleration of t -> (x, t W) is zero.
  const Vec acc = contract_christoffel(gam, vel, vel);
  return std::sqrt(std::abs(acc.dot(g.metric(chart, q) * acc)));
}

namespace {

struct PsiVectors {
  std::vector<Vec> v;  // X, Y, U, V, Xhat, Vhat in total coordinates
};

PsiVectors psi_vectors(const TotalMetricField& g, const PsiInput& in) {
  const int m = g.base_dim(), k = g.rank();
  auto base = [&](const Vec& a) {
    Vec out = Vec::Zero(m + k);
    if (a.size() > 0) out.head(m) = a;
    return out;
  };
  auto fib = [&](const Vec& a) {
    Vec out = Vec::Zero(m + k);
    if (a.size() > 0) out.tail(k) = a;
    return out;
  };
  return {{base(in.X), base(in.Y), fib(in.U), fib(in.V), base(in.Xhat), fib(in.Vhat)}};
}

double psi_eval(const TotalMetricField& g, const PsiInput& in, double t, const std::vector<Vec>& vs, double h) {
  const TotalPoint q{in.chart, in.x, t * in.W};
  const CurvatureTensor r = riemann_total(g, q, h);
  const Vec a = vs[0] + t * vs[4] + t * vs[2];
  const Vec b = t * vs[1] + vs[3] + t * vs[5];
  return r.k(a, b);
}

double default_ht(const TotalMetricField& g, const PsiInput& in, const PsiOptions& opt) {
  if (opt.h_t > 0.0) return opt.h_t;
  const double wn = in.W.norm();
  return 1e-2 * g.r_max() / (wn > 0.0 ? wn : 1.0);
}

void check_input(const TotalMetricField& g, const PsiInput& in) {
  const int m = g.base_dim(), k = g.rank();
  auto ok = [](const Vec& v, int n, bool optional) { return v.size() == n || (optional && v.size() == 0); };
  if (in.x.size() != m || !ok(in.X, m, false) || !ok(in.Y, m, false) || !ok(in.U, k, false) ||
      !ok(in.V, k, false) || !ok(in.W, k, false) || !ok(in.Xhat, m, true) || !ok(in.Vhat, k, true)) {
    throw StructuralError("PsiInput: vector sizes do not match the bundle");
  }
}

}  // namespace

double psi(const TotalMetricField& g, const PsiInput& in, double t, const PsiOptions& opt) {
  check_input(g, in);
  if (std::abs(t) * in.W.norm() + 2 * opt.h_metric >= g.r_max()) throw DomainError("psi: t W leaves r_max");
  const PsiVectors pv = psi_vectors(g, in);
  if (t == 0.0) return psi_eval(g, in, 0.0, pv.v, opt.h_metric);
  const double max_step = default_ht(g, in, opt) / opt.steps_per_ht;
  const auto moved = radial_transport(g, in.chart, in.x, in.W, pv.v, {t}, max_step, opt.h_metric);
  return psi_eval(g, in, t, moved[0], opt.h_metric);
}

PsiDerivatives psi_derivatives_numeric(const TotalMetricField& g, const PsiInput& in, const PsiOptions& opt) {
  check_input(g, in);
  const double ht = default_ht(g, in, opt);
  if (2 * ht * in.W.norm() + 2 * opt.h_metric >= g.r_max()) throw DomainError("psi: stencil leaves r_max");
  const PsiVectors pv = psi_vectors(g, in);
  const double max_step = ht / opt.steps_per_ht;
  StencilSamples s;
  s.h = ht;
  s.f[3] = psi_eval(g, in, 0.0, pv.v, opt.h_metric);
  for (int sign : {-1, 1}) {
    const std::vector<double> times = {sign * 0.5 * ht, sign * ht, sign * 2.0 * ht};
    const auto moved = radial_transport(g, in.chart, in.x, in.W, pv.v, times, max_step, opt.h_metric);
    const int idx[3] = {sign > 0 ? 4 : 2, sign > 0 ? 5 : 1, sign > 0 ? 6 : 0};
    for (int i = 0; i < 3; ++i) s.f[idx[i]] = psi_eval(g, in, times[i], moved[i], opt.h_metric);
  }
  PsiDerivatives out;
  out.first = s.d1();
  out.second = s.d2();
  out.h_t = ht;
  for (int i = 0; i < 7; ++i) out.samples[i] = s.f[i];
  return out;
}

double PsiTerms::magnitude() const {
  return std::abs(k_sigma) + std::abs(k_f) + std::abs(r_uv) + std::abs(adjoint) + std::abs(dr) + std::abs(hess) +
         std::abs(drs);
}

PsiTerms psi_second_analytic(const BundleSpec& b, const VerticalCurvatureField& rf, const PsiInput& in) {
  const ChartPoint p{in.chart, in.x};
  PsiTerms t;
  t.k_sigma = 2.0 * riemann_base(*b.base, p).k(in.X, in.Y);
  t.k_f = 2.0 * rf.at(p).k(in.U, in.V);
  t.r_uv = -6.0 * in.V.dot(curvature_form(b, p, in.X, in.Y) * in.U);
  t.adjoint = 0.5 * adjoint_norm_sq(b, p, in.X, in.W, in.V);
  t.dr = -2.0 * covariant_derivative_R(b, p, in.X, in.X, in.Y, in.W, in.V).value;
  if (!rf.transport_constant) {
    t.hess = kF_and_hessian(b, rf, p, in.X, in.W, in.V).hess.value / 3.0;
    const double a = covariant_derivative_RFs(b, rf, p, in.X, in.W, in.U, in.V, in.V).value;
    const double c = covariant_derivative_RFs(b, rf, p, in.X, in.W, in.V, in.U, in.V).value;
    t.drs = 4.0 / 3.0 * (a - c);
  }
  return t;
}

namespace {

Vec vec_d1(const std::function<Vec(double)>& f, double h) {
  return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
}

// Levi-Civita derivative at q of the field `field` in the direction e.
Vec nabla(const TotalMetricField& g, const TotalPoint& q, const Christoffel& gam, const Vec& e,
          const std::function<Vec(const TotalPoint&)>& field, double h) {
  const Vec q0 = q.q();
  const Vec d = vec_d1([&](double s) { return field(g.split_point(q.chart, q0 + s * e)); }, h);
  return d + contract_christoffel(gam, e, field(q));
}

}  // namespace

OneillAT oneill_AT(const TotalMetricField& g, const TotalPoint& q, const Vec& x, const Vec& y, const Vec& u,
                   const Vec& v, double h) {
  const Christoffel gam = christoffel_total(g, q, h);
  const auto sp = g.split(q);
  const Mat hor = sp.horizontal_proj;
  const Mat ver = Mat::Identity(g.dim(), g.dim()) - hor;
  auto lift = [&](const Vec& a) { return [&g, a](const TotalPoint& p) { return g.horizontal_lift(p, a); }; };
  auto fib = [&](const Vec& a) { return [&g, a](const TotalPoint&) { return g.vertical(a); }; };
  const Vec xl = g.horizontal_lift(q, x);
  const Vec ul = g.vertical(u);
  OneillAT out;
  out.A_XY = ver * nabla(g, q, gam, xl, lift(y), h);
  out.A_XU = hor * nabla(g, q, gam, xl, fib(u), h);
  out.T_UX = ver * nabla(g, q, gam, ul, lift(x), h);
  out.T_UV = hor * nabla(g, q, gam, ul, fib(v), h);
  return out;
}

OneillDerivatives oneill_derivatives(const TotalMetricField& g, int chart, const Vec& x, const Vec& dir,
                                     const Vec& bx, const Vec& by, const Vec& u, const Vec& v, double h) {
  auto at = [&](double s) { return oneill_AT(g, TotalPoint{chart, x, s * dir}, bx, by, u, v); };
  const OneillAT a[4] = {at(-2 * h), at(-h), at(h), at(2 * h)};
  auto d = [&](Vec OneillAT::*m) { return Vec((a[0].*m - 8 * (a[1].*m) + 8 * (a[2].*m) - a[3].*m) / (12 * h)); };
  return {d(&OneillAT::A_XY), d(&OneillAT::A_XU), d(&OneillAT::T_UX), d(&OneillAT::T_UV)};
}

double second_T_derivative(const TotalMetricField& g, int chart, const Vec& x, const Vec& w, const Vec& u,
                           const Vec& v, const Vec& bx, double h) {
  auto f = [&](double s) {
    const TotalPoint q{chart, x, s * w};
    const Vec t = oneill_AT(g, q, bx, bx, u, v).T_UV;
    return t.dot(g.metric(q) * g.horizontal_lift(q, bx));
  };
  return d2_5pt(f, h);
}

}  // namespace curvgate
