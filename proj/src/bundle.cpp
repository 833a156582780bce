#include "curvgate/bundle.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <regex>

#include "curvgate/errors.hpp"

namespace curvgate {

namespace {

// RK4 substeps per stencil step; transport error is amplified by 1/h^2.
constexpr int kStepsPerH = 16;

}  // namespace

Mat BundleSpec::transition(const ChartPoint& p, int to) const {
  if (to == p.chart || !fiber_transition) return Mat::Identity(rank, rank);
  return fiber_transition(p, to);
}

Mat BundleSpec::omega(int chart, const Vec& x, const Vec& dir) const {
  const auto w = connection(chart, x);
  Mat out = Mat::Zero(rank, rank);
  for (int i = 0; i < static_cast<int>(w.size()); ++i) out += dir[i] * w[i];
  return out;
}

namespace {

Mat rot2(double a) {
  Mat r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

Mat cross_matrix(const Vec& a) {
  Mat m(3, 3);
  m << 0, -a[2], a[1], a[2], 0, -a[0], -a[1], a[0], 0;
  return m;
}

// Left multiplication by the quaternion q = (1, i, j, k) components.
Mat quat_left(const Vec& q) {
  Mat m(4, 4);
  m << q[0], -q[1], -q[2], -q[3],
       q[1], q[0], -q[3], q[2],
       q[2], q[3], q[0], -q[1],
       q[3], -q[2], q[1], q[0];
  return m;
}

Vec quat_conj(Vec q) {
  q.tail(3) *= -1.0;
  return q;
}

Vec quat_mul(const Vec& a, const Vec& b) { return quat_left(a) * b; }

// d P / d x for the unit-sphere stereographic embedding.
Mat sphere_embed_jacobian(int chart, const Vec& x) {
  const int m = static_cast<int>(x.size());
  const double r2 = x.squaredNorm();
  const double s = 1.0 + r2;
  Mat j(m + 1, m);
  j.topRows(m) = (2.0 / s) * Mat::Identity(m, m) - (4.0 / (s * s)) * x * x.transpose();
  j.row(m) = (-4.0 / (s * s)) * x.transpose();
  if (chart == 1) {
    if (m >= 2) j.row(1) *= -1.0;
    j.row(m) *= -1.0;
  }
  return j;
}

std::shared_ptr<BundleSpec> trivial(const std::string& id, std::shared_ptr<const BaseManifold> base, int rank) {
  auto b = std::make_shared<BundleSpec>();
  b->id = id;
  b->base = std::move(base);
  b->rank = rank;
  const int m = b->base->dim();
  b->connection = [m, rank](int, const Vec&) { return std::vector<Mat>(m, Mat::Zero(rank, rank)); };
  b->oriented = rank == 2;
  return b;
}

std::shared_ptr<BundleSpec> line_bundle(int n) {
  auto b = std::make_shared<BundleSpec>();
  b->id = "o(" + std::to_string(n) + ")-s2";
  b->base = std::make_shared<RoundSphere>(2);
  b->rank = 2;
  b->oriented = true;
  const Mat jm = complex_structure();
  // alpha = n (x dy - y dx) / (1 + |x|^2) in either chart.
  b->connection = [n, jm](int, const Vec& x) {
    const double s = n / (1.0 + x.squaredNorm());
    return std::vector<Mat>{(-s * x[1]) * jm, (s * x[0]) * jm};
  };
  auto base = b->base;
  b->fiber_transition = [n, base](const ChartPoint& p, int to) {
    const Vec xn = p.chart == 0 ? p.x : base->change_chart(p, 0).x;
    const double theta = std::atan2(xn[1], xn[0]);
    return rot2(to == 1 ? n * theta : -n * theta);
  };
  return b;
}

std::shared_ptr<BundleSpec> tangent_s2() {
  auto b = std::make_shared<BundleSpec>();
  b->id = "ts2";
  auto sphere = std::make_shared<RoundSphere>(2);
  b->base = sphere;
  b->rank = 2;
  b->oriented = true;
  // Levi-Civita connection in the frame d_i / lambda.
  b->connection = [](int, const Vec& x) {
    const Vec phi = (-2.0 / (1.0 + x.squaredNorm())) * x;
    std::vector<Mat> w(2, Mat::Zero(2, 2));
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i) w[j](k, i) = (k == j ? phi[i] : 0.0) - (i == j ? phi[k] : 0.0);
    return w;
  };
  b->fiber_transition = [sphere](const ChartPoint& p, int to) {
    const ChartPoint q = sphere->change_chart(p, to);
    return Mat((sphere->lambda(q.x) / sphere->lambda(p.x)) * sphere->transition_jacobian(p, to));
  };
  return b;
}

constexpr double kTwist = 0.8;

std::shared_ptr<BundleSpec> twisted_s2() {
  auto b = std::make_shared<BundleSpec>();
  b->id = "twisted-3-s2";
  b->base = std::make_shared<RoundSphere>(2);
  b->rank = 3;

  // omega(X) = kappa (dP X) x, P the unit-sphere embedding.
  b->connection = [](int chart, const Vec& x) {
    const Mat jac = sphere_embed_jacobian(chart, x);
    return std::vector<Mat>{kTwist * cross_matrix(jac.col(0)), kTwist * cross_matrix(jac.col(1))};
  };
  return b;
}

// Regular-gauge instanton in chart 0, its gauge transform by x/|x| in chart 1.
std::vector<Mat> instanton_north(const Vec& x) {
  std::vector<Mat> w;
  const Vec xb = quat_conj(x);
  const double s = 1.0 + x.squaredNorm();
  for (int mu = 0; mu < 4; ++mu) {
    Vec e = Vec::Zero(4);
    e[mu] = 1.0;
    Vec q = quat_mul(xb, e);
    q[0] = 0.0;
    w.push_back(quat_left(q) / s);
  }
  return w;
}

std::shared_ptr<BundleSpec> hopf_s4() {
  auto b = std::make_shared<BundleSpec>();
  b->id = "hopf-s4";
  auto sphere = std::make_shared<RoundSphere>(4);
  b->base = sphere;
  b->rank = 4;
  b->fiber_transition = [sphere](const ChartPoint& p, int to) {
    const Vec xn = p.chart == 0 ? p.x : sphere->change_chart(p, 0).x;
    const Vec u = xn / xn.norm();
    return to == 1 ? quat_left(u) : quat_left(quat_conj(u));
  };
  b->connection = [sphere](int chart, const Vec& y) {
    if (chart == 0) return instanton_north(y);
    const ChartPoint p1{1, y};
    const Vec x = sphere->change_chart(p1, 0).x;
    const double r = x.norm();
    const Mat t = quat_left(x / r);
    const Mat tinv = t.transpose();
    const auto wn = instanton_north(x);
    const Mat jac = sphere->transition_jacobian(p1, 0);  // dx/dy
    std::vector<Mat> gauge(4);
    for (int i = 0; i < 4; ++i) {
      Vec e = Vec::Zero(4);
      e[i] = 1.0;
      const Mat dt = quat_left(e / r - x * (x[i] / (r * r * r)));
      gauge[i] = t * wn[i] * tinv - dt * tinv;
    }
    std::vector<Mat> w(4, Mat::Zero(4, 4));
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) w[j] += jac(i, j) * gauge[i];
    return w;
  };
  return b;
}

}  // namespace

std::vector<std::string> catalog_ids() {
  std::vector<std::string> ids = {"trivial-2-torus", "trivial-3-torus", "trivial-2-s2", "trivial-3-s2"};
  for (int n = -2; n <= 3; ++n) ids.push_back("o(" + std::to_string(n) + ")-s2");
  ids.insert(ids.end(), {"ts2", "twisted-3-s2", "hopf-s4"});
  return ids;
}

std::vector<std::string> catalog_descriptions() {
  std::vector<std::string> out;
  for (const auto& id : catalog_ids()) {
    const auto b = make_bundle(id);
    std::string note;
    if (id.rfind("trivial", 0) == 0) note = "product bundle, flat connection";
    else if (id == "ts2") note = "tangent bundle, Levi-Civita connection, Chern number -2 with J = +90 deg rotation";
    else if (id == "twisted-3-s2") note = "trivial R^3 bundle, connection kappa (dP X) x with kappa = 0.8";
    else if (id == "hopf-s4") note = "quaternionic line bundle, instanton connection";
    else note = "line bundle with rotation-invariant connection, Chern number " + id.substr(2, id.find(')') - 2);
    out.push_back(id + "  base=" + b->base->name() + "  rank=" + std::to_string(b->rank) + "  " + note);
  }
  return out;
}

std::shared_ptr<const BundleSpec> make_bundle(const std::string& id) {
  if (id == "trivial-2-torus") return trivial(id, std::make_shared<FlatTorus>(2), 2);
  if (id == "trivial-3-torus") return trivial(id, std::make_shared<FlatTorus>(2), 3);
  if (id == "trivial-2-s2") return trivial(id, std::make_shared<RoundSphere>(2), 2);
  if (id == "trivial-3-s2") return trivial(id, std::make_shared<RoundSphere>(2), 3);
  if (id == "ts2") return tangent_s2();
  if (id == "twisted-3-s2") return twisted_s2();
  if (id == "hopf-s4") return hopf_s4();
  static const std::regex line(R"(o\((-?[0-9]+)\)-s2)");
  std::smatch m;
  if (std::regex_match(id, m, line)) return line_bundle(std::stoi(m[1]));
  throw StructuralError("unknown catalog id '" + id + "'");
}

double compatibility_residual(const BundleSpec& b, const ChartPoint& p) {
  double worst = 0.0;
  for (const Mat& w : b.connection(p.chart, p.x)) worst = std::max(worst, (w + w.transpose()).cwiseAbs().maxCoeff());
  return worst;
}

std::vector<std::vector<Mat>> curvature_components(const BundleSpec& b, const ChartPoint& p, double h) {
  const int m = b.base_dim();
  const int k = b.rank;
  const auto w0 = b.connection(p.chart, p.x);
  // dw[i][j] = d_i omega_j
  std::vector<std::vector<Mat>> dw(m);
  for (int i = 0; i < m; ++i) {
    std::vector<Mat> acc(m, Mat::Zero(k, k));
    const double coef[4] = {1.0, -8.0, 8.0, -1.0};
    const double off[4] = {-2.0, -1.0, 1.0, 2.0};
    for (int s = 0; s < 4; ++s) {
      Vec x = p.x;
      x[i] += off[s] * h;
      const auto w = b.connection(p.chart, x);
      for (int j = 0; j < m; ++j) acc[j] += coef[s] * w[j];
    }
    for (auto& a : acc) a /= 12.0 * h;
    dw[i] = std::move(acc);
  }
  std::vector<std::vector<Mat>> r(m, std::vector<Mat>(m, Mat::Zero(k, k)));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Mat rij = dw[i][j] - dw[j][i] + w0[i] * w0[j] - w0[j] * w0[i];
      rij = 0.5 * (rij - rij.transpose());
      r[i][j] = rij;
      r[j][i] = -rij;
    }
  return r;
}

Mat curvature_form(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& y, double h) {
  const auto r = curvature_components(b, p, h);
  const int m = b.base_dim();
  Mat out = Mat::Zero(b.rank, b.rank);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) out += (x[i] * y[j]) * r[i][j];
  return out;
}

Mat curvature_adjoint(const BundleSpec& b, const ChartPoint& p, const Vec& w, const Vec& v, double h) {
  const auto r = curvature_components(b, p, h);
  const int m = b.base_dim();
  Mat bm(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) bm(i, j) = i == j ? 0.0 : v.dot(r[i][j] * w);
  const Mat g = b.base->metric(p.chart, p.x);
  return g.ldlt().solve(Mat(bm.transpose()));
}

double adjoint_norm_sq(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& w, const Vec& v) {
  const Vec ax = curvature_adjoint(b, p, w, v) * x;
  return ax.dot(b.base->metric(p.chart, p.x) * ax);
}

Vec stack(const std::vector<Vec>& vs) {
  int n = 0;
  for (const Vec& v : vs) n += static_cast<int>(v.size());
  Vec z(n);
  int o = 0;
  for (const Vec& v : vs) {
    z.segment(o, v.size()) = v;
    o += static_cast<int>(v.size());
  }
  return z;
}

std::vector<Vec> unstack(const Vec& z, int count) {
  std::vector<Vec> out;
  if (count == 0) return out;
  const int k = static_cast<int>(z.size()) / count;
  for (int i = 0; i < count; ++i) out.push_back(z.segment(i * k, k));
  return out;
}

TransportHooks fiber_hooks(const BundleSpec& b, int count) {
  TransportHooks h;
  const int k = b.rank;
  h.rhs = [&b, count, k](int chart, const Vec& x, const Vec& vel, const Vec& z) {
    const Mat w = b.omega(chart, x, vel);
    Vec dz(z.size());
    for (int i = 0; i < count; ++i) dz.segment(i * k, k) = -w * z.segment(i * k, k);
    return dz;
  };
  h.change_chart = [&b, count, k](const ChartPoint& from, int to, const Vec& z) {
    const Mat t = b.transition(from, to);
    Vec out(z.size());
    for (int i = 0; i < count; ++i) out.segment(i * k, k) = t * z.segment(i * k, k);
    return out;
  };
  return h;
}

FiberTransport nabla_transport(const BundleSpec& b, const ChartPoint& p, const Vec& x, const std::vector<Vec>& fiber,
                               double t_end, int steps, const std::vector<Vec>& base_frame) {
  const auto hooks = fiber_hooks(b, static_cast<int>(fiber.size()));
  auto s = geodesic_transport(*b.base, p, x, base_frame, t_end, steps, {}, &hooks, stack(fiber));
  auto f = unstack(s.extra, static_cast<int>(fiber.size()));
  return {std::move(s), std::move(f)};
}

StencilResult covariant_derivative_R(const BundleSpec& b, const ChartPoint& p, const Vec& z, const Vec& x,
                                     const Vec& y, const Vec& w, const Vec& v, double h) {
  const auto hooks = fiber_hooks(b, 2);
  auto f = [&b](const GeodesicState& s) {
    const auto fv = unstack(s.extra, 2);
    return fv[1].dot(curvature_form(b, s.point, s.frame[0], s.frame[1]) * fv[0]);
  };
  return sample_along_geodesic(*b.base, p, z, {x, y}, f, h, kStepsPerH, {}, &hooks, stack({w, v})).d1();
}

// ---- vertical curvature fields ----------------------------------------------

VerticalCurvatureField rf_zero(int rank) {
  return {"zero", rank, [rank](const ChartPoint&) { return CurvatureTensor::zero(rank); }, true};
}

VerticalCurvatureField rf_constant(int rank, double c) {
  const auto rc = constant_curvature_tensor(rank, c);
  return {"constant(" + std::to_string(c) + ")", rank, [rc](const ChartPoint&) { return rc; }, true};
}

VerticalCurvatureField rf_scaled(std::shared_ptr<const BaseManifold> base,
                                 const std::function<double(const Vec& embedded)>& f, const CurvatureTensor& r,
                                 std::string name) {
  return {std::move(name), r.dim(), [base, f, r](const ChartPoint& p) { return r.scaled(f(base->embed(p))); },
          false};
}

VerticalCurvatureField rf_sum(const VerticalCurvatureField& a, const VerticalCurvatureField& b) {
  if (a.rank != b.rank) throw StructuralError("rf_sum: rank mismatch");
  auto fa = a.at;
  auto fb = b.at;
  return {a.name + "+" + b.name, a.rank, [fa, fb](const ChartPoint& p) { return fa(p) + fb(p); },
          a.transport_constant && b.transport_constant};
}

VerticalCurvatureField boost_RF(const VerticalCurvatureField& rf, double c) {
  return rf_sum(rf_constant(rf.rank, c), rf);
}

VerticalCurvatureField rf_catalog(const std::string& kind, const BundleSpec& b, double amplitude) {
  const int k = b.rank;
  auto height = [](const Vec& e) { return e[e.size() - 1]; };
  if (kind == "zero") return rf_zero(k);
  if (kind == "height") return rf_scaled(b.base, height, constant_curvature_tensor(k, amplitude), "height*R1");
  if (kind == "anisotropic") {
    if (b.fiber_transition) throw StructuralError("rf kind 'anisotropic' needs a globally trivialized bundle");
    Mat s = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) s(i, i) = 1.0 + i;
    s(0, k - 1) = s(k - 1, 0) = 0.5;
    auto first = [](const Vec& e) { return e[0]; };
    return rf_sum(rf_scaled(b.base, height, constant_curvature_tensor(k, amplitude), "height*R1"),
                  rf_scaled(b.base, first, kulkarni_nomizu_tensor(0.5 * amplitude * s), "x*R_S"));
  }
  throw StructuralError("unknown vertical curvature kind '" + kind + "'");
}

KFHessian kF_and_hessian(const BundleSpec& b, const VerticalCurvatureField& rf, const ChartPoint& p, const Vec& x,
                         const Vec& w, const Vec& v, double h) {
  KFHessian out;
  out.kf = rf.at(p).k(w, v);
  if (rf.transport_constant) return out;
  const auto hooks = fiber_hooks(b, 2);
  auto f = [&rf](const GeodesicState& s) {
    const auto fv = unstack(s.extra, 2);
    return rf.at(s.point).k(fv[0], fv[1]);
  };
  out.hess = sample_along_geodesic(*b.base, p, x, {}, f, h, kStepsPerH, {}, &hooks, stack({w, v})).d2();
  return out;
}

StencilResult covariant_derivative_RFs(const BundleSpec& b, const VerticalCurvatureField& rf, const ChartPoint& p,
                                       const Vec& x, const Vec& a, const Vec& bb, const Vec& c, const Vec& d,
                                       double h) {
  if (rf.transport_constant) return {};
  const auto hooks = fiber_hooks(b, 4);
  auto f = [&rf](const GeodesicState& s) {
    const auto fv = unstack(s.extra, 4);
    return symmetrize(rf.at(s.point)).eval(fv[0], fv[1], fv[2], fv[3]);
  };
  return sample_along_geodesic(*b.base, p, x, {}, f, h, kStepsPerH, {}, &hooks, stack({a, bb, c, d})).d1();
}

// ---- rank 2 -----------------------------------------------------------------

Mat complex_structure() {
  Mat j(2, 2);
  j << 0, -1, 1, 0;
  return j;
}

double omega_form(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& y, const Vec& w) {
  if (b.rank != 2 || !b.oriented) throw StructuralError("omega_form: needs an oriented rank-2 bundle");
  return (complex_structure() * w).dot(curvature_form(b, p, x, y) * w) / w.squaredNorm();
}

double omega_form(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& y) {
  return omega_form(b, p, x, y, Vec::Unit(2, 0));
}

double chern_number(const BundleSpec& b, int angular_nodes) {
  if (b.rank != 2 || !b.oriented || b.base->dim() != 2 || b.base->chart_count() != 2) {
    throw StructuralError("chern_number: needs an oriented rank-2 bundle over S^2");
  }
  const Vec e1 = Vec::Unit(2, 0), e2 = Vec::Unit(2, 1);
  auto hemisphere = [&](int chart, auto rule) {
    auto ring = [&](double r) {
      double acc = 0.0;
      for (int i = 0; i < angular_nodes; ++i) {
        const double th = 2 * M_PI * i / angular_nodes;
        Vec x(2);
        x << r * std::cos(th), r * std::sin(th);
        acc += omega_form(b, {chart, x}, e1, e2);
      }
      return acc * (2 * M_PI / angular_nodes) * r;
    };
    return rule(ring);
  };
  auto coarse = [](const auto& f) { return boost::math::quadrature::gauss<double, 20>::integrate(f, 0.0, 1.0); };
  auto fine = [](const auto& f) { return boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, 1.0); };
  const double a = (hemisphere(0, fine) + hemisphere(1, fine)) / (2 * M_PI);
  const double c = (hemisphere(0, coarse) + hemisphere(1, coarse)) / (2 * M_PI);
  if (std::abs(a - c) > 1e-6) {
    throw NumericalError("chern_number: quadrature not converged (" + std::to_string(a) + " vs " +
                         std::to_string(c) + ")");
  }
  return a;
}

}  // namespace curvgate
