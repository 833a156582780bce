#include "curvgate/inequality_checker.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "curvgate/errors.hpp"

namespace curvgate {

const char* to_string(Gauge g) {
  switch (g) {
    case Gauge::General: return "general";
    case Gauge::Orthonormal: return "orthonormal";
    case Gauge::UnitXV: return "unit-xv";
  }
  return "?";
}

Gauge parse_gauge(const std::string& s) {
  for (Gauge g : {Gauge::General, Gauge::Orthonormal, Gauge::UnitXV}) {
    if (s == to_string(g)) return g;
  }
  throw StructuralError("unknown gauge '" + s + "'");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::HoldsStrictly: return "HoldsStrictly";
    case Verdict::Violated: return "Violated";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

Vec gaussian(int n, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

double g_norm(const Vec& x, const Mat& g) { return std::sqrt(x.dot(g * x)); }

}  // namespace

std::vector<TupleSample> draw_samples(const BundleSpec& b, const SamplePlan& plan) {
  return draw_samples(b, plan, plan.gauge);
}

std::vector<TupleSample> draw_samples(const BundleSpec& b, const SamplePlan& plan, Gauge gauge) {
  Rng rng(plan.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int m = b.base_dim(), k = b.rank;
  std::vector<TupleSample> out;
  int index = 0;
  for (int c = 0; c < b.base->chart_count(); ++c) {
    for (int i = 0; i < plan.n_points; ++i) {
      const ChartPoint p = b.base->random_point(c, rng);
      const Mat gs = b.base->metric(p.chart, p.x);
      for (int j = 0; j < plan.n_tuples; ++j) {
        TupleSample s;
        s.index = index++;
        s.p = p;
        s.X = gaussian(m, rng);
        s.Y = gaussian(m, rng);
        s.U = gaussian(k, rng);
        s.V = gaussian(k, rng);
        s.W = gaussian(k, rng);
        if (gauge == Gauge::Orthonormal) {
          const auto xy = gram_schmidt({s.X, s.Y}, gs);
          s.X = xy[0];
          s.Y = xy[1];
          const auto wv = gram_schmidt({s.W, s.V}, Mat::Identity(k, k));
          s.W = wv[0];
          s.V = wv[1];
        } else if (gauge == Gauge::UnitXV) {
          s.X /= g_norm(s.X, gs);
          // Spread |Y| over [0, 2) so small and large values both occur.
          s.Y *= 2.0 * unif(rng) / g_norm(s.Y, gs);
          const auto wv = gram_schmidt({s.W, s.V}, Mat::Identity(k, k));
          s.W = wv[0];
          s.V = wv[1];
          s.U -= s.U.dot(s.W) * s.W;
        }
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CURVGATE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int t = std::min(std::max(1, threads), std::max(1, n));
  if (t == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void MarginReport::finalize() {
  worst = -1;
  worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
    if (entries[i].margin < worst_margin) {
      worst_margin = entries[i].margin;
      worst = i;
    }
  }
  if (worst < 0) {
    worst_margin = 0.0;
    verdict = Verdict::Inconclusive;
    return;
  }
  if (strict) {
    verdict = worst_margin > tol ? Verdict::HoldsStrictly : Verdict::Violated;
  } else if (worst_margin < -tol) {
    verdict = Verdict::Violated;
  } else {
    verdict = worst_margin > tol ? Verdict::HoldsStrictly : Verdict::Holds;
  }
}

double MarginReport::extra(const std::string& key) const {
  for (const auto& [k, v] : extras)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

MarginEntry entry(const TupleSample& s, double lhs, double rhs) {
  return {s.index, s.p.chart, lhs, rhs, rhs - lhs};
}

MarginReport run_report(const std::string& id, const std::string& ref, double tol, bool strict,
                        const std::vector<TupleSample>& samples, int threads,
                        const std::function<MarginEntry(const TupleSample&)>& fn) {
  MarginReport r;
  r.id = id;
  r.paper_ref = ref;
  r.tol = tol;
  r.strict = strict;
  r.entries.resize(samples.size());
  parallel_for(static_cast<int>(samples.size()), resolve_threads(threads),
               [&](int i) { r.entries[i] = fn(samples[i]); });
  r.finalize();
  return r;
}

std::vector<ConnectionTerms> all_terms(const BundleSpec& b, const VerticalCurvatureField& rf,
                                       const std::vector<TupleSample>& samples, int threads) {
  std::vector<ConnectionTerms> out(samples.size());
  parallel_for(static_cast<int>(samples.size()), resolve_threads(threads),
               [&](int i) { out[i] = connection_terms(b, rf, samples[i]); });
  return out;
}

Vec total_base(const TotalMetricField& g, const Vec& x) {
  Vec out = Vec::Zero(g.dim());
  out.head(g.base_dim()) = x;
  return out;
}

}  // namespace

ConnectionTerms connection_terms(const BundleSpec& b, const VerticalCurvatureField& rf, const TupleSample& s) {
  ConnectionTerms t;
  t.d = covariant_derivative_R(b, s.p, s.X, s.X, s.Y, s.W, s.V).value;
  t.adjoint = adjoint_norm_sq(b, s.p, s.X, s.W, s.V);
  if (!rf.transport_constant) t.hess = kF_and_hessian(b, rf, s.p, s.X, s.W, s.V).hess.value;
  t.k_sigma = riemann_base(*b.base, s.p).k(s.X, s.Y);
  return t;
}

MarginEntry theoremA_margin(const BundleSpec& b, const VerticalCurvatureField& rf, const TupleSample& s) {
  const ConnectionTerms t = connection_terms(b, rf, s);
  return entry(s, t.d * t.d, (t.adjoint + 2.0 / 3.0 * t.hess) * t.k_sigma);
}

MarginEntry strake_walschap_margin(const BundleSpec& b, const TupleSample& s, double eps_diam) {
  const ConnectionTerms t = connection_terms(b, rf_zero(b.rank), s);
  const double rw = (curvature_form(b, s.p, s.X, s.Y) * s.W).squaredNorm();
  return entry(s, t.d * t.d, t.adjoint * (t.k_sigma - 0.75 * eps_diam * eps_diam * rw));
}

MarginEntry walschap_corollary(const TotalMetricField& g, const TupleSample& s) {
  const CurvatureTensor r = riemann_total(g, TotalPoint{s.p.chart, s.p.x, Vec::Zero(g.rank())});
  const Vec x = total_base(g, s.X), y = total_base(g, s.Y), u = g.vertical(s.U), v = g.vertical(s.V);
  const double c = r.eval(x, y, u, v);
  return entry(s, 9.0 * c * c, 4.0 * r.k(x, y) * r.k(u, v));
}

QuadraticForm q_form(const BundleSpec& b, const VerticalCurvatureField& rf, const TupleSample& s) {
  const ConnectionTerms t = connection_terms(b, rf, s);
  Mat q(2, 2);
  q << 2.0 * t.k_sigma, t.d, t.d, 0.5 * t.adjoint + t.hess / 3.0;
  return QuadraticForm(q);
}

QuadraticForm q3_form(const TotalMetricField& g, const TupleSample& s, double r, double eps) {
  const Mat gs = g.bundle().base->metric(s.p.chart, s.p.x);
  const Vec w = s.W.normalized();
  auto perp = [&](const Vec& a) {
    Vec out = a - a.dot(w) * w;
    return Vec(out / out.norm());
  };
  const std::vector<Vec> vs = {total_base(g, s.X / g_norm(s.X, gs)), total_base(g, s.Y / g_norm(s.Y, gs)),
                               g.vertical(perp(s.U)), g.vertical(perp(s.V))};
  const auto moved = radial_transport(g, s.p.chart, s.p.x, w, vs, {r}, r / 16)[0];
  const TotalPoint q{s.p.chart, s.p.x, r * w};
  const CurvatureTensor R = riemann_total(g, q);
  const Vec dr = g.split(q).radial;
  const Vec &X = moved[0], &Y = moved[1], &U = moved[2], &V = moved[3];
  Mat m(3, 3);
  m(0, 0) = eps * R.k(X, Y);
  m(0, 1) = m(1, 0) = 1.5 * R.eval(X, Y, dr, V);
  m(0, 2) = m(2, 0) = -1.5 * R.eval(X, Y, dr, U);
  m(1, 1) = R.k(dr, V);
  m(1, 2) = m(2, 1) = R.eval(dr, V, dr, U);
  m(2, 2) = R.k(dr, U);
  return QuadraticForm(m);
}

MarginReport check_theoremA(const BundleSpec& b, const VerticalCurvatureField& rf, const SamplePlan& plan) {
  return run_report("thmA", "Theorem A", kStencilTol, false, draw_samples(b, plan), plan.threads,
                    [&](const TupleSample& s) { return theoremA_margin(b, rf, s); });
}

MarginReport check_theoremB(const BundleSpec& b, const SamplePlan& plan) {
  const auto samples = draw_samples(b, plan, Gauge::Orthonormal);
  const auto terms = all_terms(b, rf_zero(b.rank), samples, plan.threads);
  MarginReport r;
  r.id = "thmB";
  r.paper_ref = "Theorem B";
  r.tol = kStencilTol;
  r.strict = true;
  double witness = std::numeric_limits<double>::infinity(), max_lhs = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& t = terms[i];
    r.entries.push_back(entry(samples[i], t.d * t.d, t.adjoint * t.k_sigma));
    witness = std::min(witness, std::sqrt(t.adjoint));
    max_lhs = std::max(max_lhs, t.d * t.d);
  }
  r.extras = {{"fatness_witness", samples.empty() ? 0.0 : witness}, {"max_lhs", max_lhs}};
  r.finalize();
  return r;
}

MarginReport check_theoremC(const BundleSpec& b, const VerticalCurvatureField& rf, const SamplePlan& plan) {
  const auto samples = draw_samples(b, plan, Gauge::Orthonormal);
  const auto terms = all_terms(b, rf, samples, plan.threads);
  MarginReport r;
  r.id = "thmC";
  r.paper_ref = "Theorem C";
  r.tol = kStencilTol;
  r.strict = true;
  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& t = terms[i];
    r.entries.push_back(entry(samples[i], t.d * t.d, (t.adjoint + 2.0 / 3.0 * t.hess) * t.k_sigma));
    delta = std::min(delta, 0.5 * t.adjoint + t.hess / 3.0);
  }
  r.extras = {{"delta", samples.empty() ? 0.0 : delta}};
  r.finalize();
  return r;
}

MarginReport check_strake_walschap(const BundleSpec& b, const SamplePlan& plan, double eps_diam) {
  MarginReport r = run_report("sw", "Theorem B", kStencilTol, false, draw_samples(b, plan), plan.threads,
                              [&](const TupleSample& s) { return strake_walschap_margin(b, s, eps_diam); });
  r.extras = {{"eps_diam", eps_diam}};
  return r;
}

MarginReport check_walschap_corollary(const TotalMetricField& g, const SamplePlan& plan) {
  return run_report("cor26", "Theorem C, Claim 1", kAlgebraicTol, false, draw_samples(g.bundle(), plan),
                    plan.threads, [&](const TupleSample& s) { return walschap_corollary(g, s); });
}

namespace {

MarginReport eps_report(const std::vector<TupleSample>& samples, const std::vector<ConnectionTerms>& terms,
                        double eps) {
  MarginReport r;
  r.id = "eps";
  r.paper_ref = "Theorem C, Claim 2";
  r.tol = kStencilTol;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& t = terms[i];
    r.entries.push_back(entry(samples[i], t.d * t.d, (1.0 - eps) * (t.adjoint + 2.0 / 3.0 * t.hess) * t.k_sigma));
  }
  r.extras = {{"eps_hypothesis", eps}};
  r.finalize();
  return r;
}

}  // namespace

MarginReport check_eps_inequality(const BundleSpec& b, const VerticalCurvatureField& rf, const SamplePlan& plan,
                                  double eps) {
  const auto samples = draw_samples(b, plan, Gauge::Orthonormal);
  return eps_report(samples, all_terms(b, rf, samples, plan.threads), eps);
}

double choose_eps(const BundleSpec& b, const VerticalCurvatureField& rf, const SamplePlan& plan) {
  const auto samples = draw_samples(b, plan, Gauge::Orthonormal);
  const auto terms = all_terms(b, rf, samples, plan.threads);
  for (double eps = 0.5; eps >= std::ldexp(1.0, -20); eps /= 2) {
    if (eps_report(samples, terms, eps).verdict != Verdict::Violated) return eps;
  }
  return 0.0;
}

MarginReport check_q3(const TotalMetricField& g, const SamplePlan& plan, double r, double eps) {
  if (!(r > 0.0) || r >= g.r_max()) throw DomainError("check_q3: radius outside (0, r_max)");
  MarginReport rep = run_report("q3", "Theorem B part 2", kAlgebraicTol, false,
                                draw_samples(g.bundle(), plan, Gauge::Orthonormal), plan.threads,
                                [&](const TupleSample& s) {
                                  const double lo = q3_form(g, s, r, eps).eigenvalues().minCoeff();
                                  return entry(s, 0.0, lo);
                                });
  rep.extras = {{"radius", r}, {"eps_hypothesis", eps}};
  return rep;
}

namespace {

// Sphere-bundle chart and coordinates of the unit fiber direction w over p.
std::pair<int, Vec> sphere_coords(const ChartPoint& p, const Vec& w) {
  const int n = static_cast<int>(w.size()) - 1;
  const double last = w[n];
  const int fc = last >= 0.0 ? 0 : 1;
  const Vec s = w.head(n) / (1.0 + std::abs(last));
  Vec y(p.x.size() + n);
  y << p.x, s;
  return {2 * p.chart + fc, y};
}

double intrinsic_sectional(const SphereBundleMetric& sb, int chart, const Vec& y, const Vec& a, const Vec& b) {
  const Mat j = sb.inclusion_jacobian(chart, y);
  const auto qr = j.colPivHouseholderQr();
  const Vec ay = qr.solve(a), by = qr.solve(b);
  const MetricJet jet = metric_jet(sb.metric_fn(chart), y, 1e-3, true);
  const CurvatureTensor r = CurvatureTensor::unchecked(riemann_from_jet(jet, christoffel_from_jet(jet)));
  return sectional(r, jet.g, ay, by).normalized;
}

}  // namespace

MarginReport check_sphere_bundle_positive(const TotalMetricField& g, double r0, const SamplePlan& plan) {
  auto holder = std::shared_ptr<const TotalMetricField>(std::shared_ptr<const TotalMetricField>{}, &g);
  const SphereBundleMetric sb(holder, r0);
  const auto samples = draw_samples(g.bundle(), plan, Gauge::General);
  std::vector<double> gauss(samples.size(), 0.0);
  MarginReport rep;
  rep.id = "e1pos";
  rep.paper_ref = "Theorem C";
  rep.tol = kAlgebraicTol;
  rep.strict = true;
  rep.entries.resize(samples.size());
  parallel_for(static_cast<int>(samples.size()), resolve_threads(plan.threads), [&](int i) {
    const TupleSample& s = samples[i];
    const Vec w = s.W.normalized();
    const TotalPoint q{s.p.chart, s.p.x, r0 * w};
    auto tangent_fiber = [&](const Vec& u) { return g.vertical(u - u.dot(w) * w); };
    const Vec xl = g.horizontal_lift(q, s.X), yl = g.horizontal_lift(q, s.Y);
    const Vec a = xl + tangent_fiber(s.U), b = yl + tangent_fiber(s.V);
    const auto [chart, y] = sphere_coords(s.p, w);
    const double k = intrinsic_sectional(sb, chart, y, a, b);
    rep.entries[i] = entry(s, 0.0, k);
    // Planes containing a horizontal vector: intrinsic and extrinsic agree.
    const Vec a2 = xl + tangent_fiber(s.V);
    const double ki = intrinsic_sectional(sb, chart, y, a2, yl);
    const double ke = sectional(g, q, a2, yl).normalized;
    gauss[i] = std::abs(ki - ke) / std::max(1.0, std::abs(ke));
  });
  rep.finalize();
  rep.extras = {{"r0", r0}, {"gauss_residual", *std::max_element(gauss.begin(), gauss.end())}};
  return rep;
}

namespace {

// Radius uniform in [0, r] unless fixed.
MarginReport plane_sweep(const TotalMetricField& g, const SamplePlan& plan, double r_test, bool fixed) {
  const auto samples = draw_samples(g.bundle(), plan, Gauge::General);
  // Radii and plane coefficients from a second stream so the tuples match
  // the other checks.
  Rng rng(plan.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> radius(samples.size());
  std::vector<Vec> coeff(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    radius[i] = r_test * unif(rng);
    if (fixed) radius[i] = r_test;
    coeff[i] = gaussian(6, rng);
  }
  std::vector<double> soul_mixed(samples.size(), 0.0);
  MarginReport rep;
  rep.id = "nbhd";
  rep.paper_ref = "Theorem B part 2";
  rep.tol = kAlgebraicTol;
  rep.entries.resize(samples.size());
  parallel_for(static_cast<int>(samples.size()), resolve_threads(plan.threads), [&](int i) {
    const TupleSample& s = samples[i];
    const Vec w = s.W.normalized();
    const TotalPoint q{s.p.chart, s.p.x, radius[i] * w};
    const Vec xl = g.horizontal_lift(q, s.X), yl = g.horizontal_lift(q, s.Y);
    Vec a, b;
    if (i % 2 == 0) {
      a = xl + g.vertical(s.U);
      b = yl + g.vertical(s.V);
    } else {
      // a X + b dr + c V against d dr + e Y + f U: planes near the mixed ones.
      Vec dr = g.vertical(w);
      dr /= std::sqrt(dr.dot(g.metric(q) * dr));
      auto perp = [&](const Vec& u) { return g.vertical(u - u.dot(w) * w); };
      const Vec& c = coeff[i];
      a = c[0] * xl + 0.1 * c[1] * dr + 0.1 * c[2] * perp(s.V);
      b = 0.1 * c[3] * dr + 0.1 * c[4] * yl + c[5] * perp(s.U);
    }
    rep.entries[i] = entry(s, 0.0, sectional(g, q, a, b).normalized);
    const TotalPoint soul{s.p.chart, s.p.x, Vec::Zero(g.rank())};
    soul_mixed[i] = std::abs(sectional(g, soul, total_base(g, s.X), g.vertical(s.V)).normalized);
  });
  rep.finalize();
  rep.extras = {{"r_test", r_test}, {"soul_mixed_max", *std::max_element(soul_mixed.begin(), soul_mixed.end())}};
  return rep;
}

}  // namespace

MarginReport check_neighborhood(const TotalMetricField& g, const SamplePlan& plan, double r_test) {
  if (!(r_test >= 0.0) || r_test >= g.r_max()) throw DomainError("check_neighborhood: r_test outside [0, r_max)");
  return plane_sweep(g, plan, r_test, false);
}

MarginReport sectional_at_radius(const TotalMetricField& g, const SamplePlan& plan, double r) {
  if (!(r >= 0.0) || r >= g.r_max()) throw DomainError("sectional_at_radius: r outside [0, r_max)");
  MarginReport rep = plane_sweep(g, plan, r, true);
  rep.id = "scan";
  return rep;
}

std::shared_ptr<const TotalMetricField> boosted_metric(std::shared_ptr<const BundleSpec> b,
                                                       const VerticalCurvatureField& rf, double C,
                                                       const CSearchOptions& opt) {
  if (opt.rotational) {
    if (!rf.transport_constant) throw StructuralError("rotational profile needs a transport-constant R_F");
    return build_total_metric(b, warping_rotational(FiberProfile{C}, b->rank), opt.r_max).metric;
  }
  return build_total_metric(b, warping_from_RF(boost_RF(rf, C)), opt.r_max).metric;
}

EpsilonDelta choose_C(std::shared_ptr<const BundleSpec> b, const VerticalCurvatureField& rf, const SamplePlan& plan,
                      const CSearchOptions& opt) {
  EpsilonDelta out;
  out.note = "C is sufficient, not minimal";
  const auto s1 = draw_samples(*b, plan, Gauge::Orthonormal);
  const auto s2 = draw_samples(*b, plan, Gauge::UnitXV);
  const int threads = resolve_threads(plan.threads);

  // fiber gate pieces: orthonormal (X, Y) and (U, V) := (W, V).
  struct C1 {
    double c, k_sigma, kf, wedge;
  };
  std::vector<C1> c1(s1.size());
  parallel_for(static_cast<int>(s1.size()), threads, [&](int i) {
    const auto& s = s1[i];
    c1[i] = {s.V.dot(curvature_form(*b, s.p, s.X, s.Y) * s.W), riemann_base(*b->base, s.p).k(s.X, s.Y),
             rf.at(s.p).k(s.W, s.V), wedge_norm_sq(s.W, s.V)};
  });
  std::vector<PsiTerms> t2(s2.size());
  parallel_for(static_cast<int>(s2.size()), threads, [&](int i) {
    const auto& s = s2[i];
    t2[i] = psi_second_analytic(*b, rf, PsiInput{s.p.chart, s.p.x, s.X, s.Y, s.U, s.V, s.W, {}, {}});
  });

  out.eps = choose_eps(*b, rf, plan);
  double dmax = 0.0;
  out.delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s2.size(); ++i) {
    out.delta = std::min(out.delta, t2[i].adjoint + t2[i].hess);
    const double y = s2[i].Y.norm();
    if (y > 0.0) dmax = std::max(dmax, std::abs(t2[i].dr) / y);
  }
  if (s2.empty()) out.delta = 0.0;
  out.delta2 = 0.5 * out.delta;
  // |Y| is sampled in [0, 2); a larger delta1 puts every sample in one branch.
  out.delta1 = dmax > 0.0 ? std::min(2.0, out.delta / (4.0 * dmax)) : 2.0;

  auto fiber_gate = [&](double C) {
    MarginReport r;
    r.id = "fiber-gate";
    r.paper_ref = "Theorem C, Claim 1";
    r.tol = kAlgebraicTol;
    r.strict = true;
    for (std::size_t i = 0; i < s1.size(); ++i) {
      const auto& c = c1[i];
      r.entries.push_back(entry(s1[i], 9.0 * c.c * c.c, 4.0 * c.k_sigma * (c.kf + C * c.wedge)));
    }
    r.finalize();
    return r;
  };
  auto psi_gate = [&](double C) {
    MarginReport r;
    r.id = "psi-gate";
    r.paper_ref = "Theorem C, Claim 2";
    r.tol = kStencilTol;
    r.strict = true;
    bool split_ok = true;
    for (std::size_t i = 0; i < s2.size(); ++i) {
      const PsiTerms& t = t2[i];
      const double boost = 2.0 * C * wedge_norm_sq(s2[i].U, s2[i].V);
      const double h = out.eps * t.k_sigma + t.k_f + boost + t.r_uv + t.drs;
      const double second = t.total() + boost;
      r.entries.push_back(entry(s2[i], 0.0, second));
      const double need = s2[i].Y.norm() <= out.delta1 ? h + out.delta2 : h;
      if (need < -r.tol) split_ok = false;
    }
    r.finalize();
    r.extras = {{"split_ok", split_ok ? 1.0 : 0.0}};
    if (!split_ok && r.verdict == Verdict::HoldsStrictly) r.verdict = Verdict::Violated;
    return r;
  };

  if (out.eps == 0.0 || !(out.delta > kStencilTol)) {
    out.note += "; hypothesis margins not positive on samples";
    out.C = opt.C0;
    out.reports = {fiber_gate(opt.C0), psi_gate(opt.C0)};
    return out;
  }
  for (double C = opt.C0; C <= opt.C_cap; C *= 2, ++out.doublings) {
    out.C = C;
    out.reports = {fiber_gate(C), psi_gate(C)};
    bool ok = out.reports[0].verdict == Verdict::HoldsStrictly && out.reports[1].verdict == Verdict::HoldsStrictly;
    if (ok && opt.q3_radius > 0.0) {
      const auto g = boosted_metric(b, rf, C, opt);
      out.reports.push_back(check_q3(*g, plan, opt.q3_radius, out.eps));
      ok = out.reports.back().verdict != Verdict::Violated;
    }
    if (ok) {
      out.verdict = Verdict::HoldsStrictly;
      return out;
    }
  }
  out.note += "; no tested C up to the cap passed";
  return out;
}

}  // namespace curvgate
