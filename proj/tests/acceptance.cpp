// Acceptance run: one PASS/FAIL line per criterion. Criterion 9 is reported
// but does not affect the exit status.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curvgate/cli_report.hpp"
#include "curvgate/curvature_engine.hpp"
#include "curvgate/inequality_checker.hpp"
#include "test_support.hpp"

using namespace curvgate;
using curvgate::testing::random_algebraic_tensor;
using curvgate::testing::random_bianchi_tensor;
using curvgate::testing::random_vec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Vec unit(int n, std::mt19937_64& rng) { return random_vec(n, rng).normalized(); }

Vec lift(const TotalMetricField& g, const Vec& x) {
  Vec out = Vec::Zero(g.dim());
  out.head(g.base_dim()) = x;
  return out;
}

struct Named {
  std::string name;
  std::shared_ptr<const TotalMetricField> g;
  VerticalCurvatureField rf;
};

// The connection metric on O(1) and a warped metric whose R_F varies over the base.
std::vector<Named> soul_metrics() {
  const auto o1 = make_bundle("o(1)-s2");
  const auto tw = make_bundle("twisted-3-s2");
  const auto rf_tw = boost_RF(rf_catalog("anisotropic", *tw, 0.5), 1.0);
  return {
      {"o(1)-s2 connection", build_total_metric(o1, warping_rotational(FiberProfile{1.0}, 2), 0.5).metric,
       rf_constant(2, 1.0)},
      {"twisted-3-s2 warped", build_total_metric(tw, warping_from_RF(rf_tw), 0.5).metric, rf_tw},
  };
}

PsiInput unit_xv_sample(const TotalMetricField& g, std::mt19937_64& rng) {
  const auto& b = g.bundle();
  const ChartPoint p = b.base->random_point(static_cast<int>(rng() % b.base->chart_count()), rng);
  const Mat gs = b.base->metric(p.chart, p.x);
  const int m = b.base_dim(), k = b.rank;
  PsiInput in;
  in.chart = p.chart;
  in.x = p.x;
  in.X = random_vec(m, rng);
  in.X /= std::sqrt(in.X.dot(gs * in.X));
  in.Y = random_vec(m, rng);
  const auto wv = gram_schmidt({random_vec(k, rng), random_vec(k, rng)}, Mat::Identity(k, k));
  in.W = wv[0];
  in.V = wv[1];
  in.U = random_vec(k, rng);
  in.U -= in.U.dot(in.W) * in.W;
  return in;
}

// ---- 1: algebraic layer -----------------------------------------------------

Outcome algebraic() {
  std::mt19937_64 rng(101);
  double worst_sym = 0.0, worst_pol = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 5;
    const CurvatureTensor r =
        trial % 2 == 0 ? CurvatureTensor(random_algebraic_tensor(n, rng)) : random_bianchi_tensor(n, rng);
    const auto rs = symmetrize(r);
    const Vec w = unit(n, rng), w2 = unit(n, rng), u = unit(n, rng), v = unit(n, rng);
    const double x = rs.eval(w, w2, u, v);
    for (double d : {rs.eval(w, w, w, u), x - rs.eval(w2, w, u, v), x - rs.eval(w, w2, v, u),
                     x - rs.eval(u, v, w, w2), rs.eval(w, w, u, u) - r.k(w, u),
                     x - 0.5 * (r.eval(w, u, v, w2) + r.eval(w2, u, v, w))})
      worst_sym = std::max(worst_sym, std::abs(d));

    // Constant curvature recovered from its sectional data by polarization.
    const double c = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    const auto rc = constant_curvature_tensor(n, c);
    auto kq = [&](const Vec& a, const Vec& b) { return c * wedge_norm_sq(a, b); };
    auto mixed = [&](const Vec& a, const Vec& z, const Vec& b, const Vec& y) {
      return kq(a + z, b + y) - kq(a - z, b + y) - kq(a + z, b - y) + kq(a - z, b - y);
    };
    const double pol = (mixed(w, v, w2, u) - mixed(w, u, w2, v)) / 24.0;
    worst_pol = std::max(worst_pol, std::abs(pol - rc.eval(w, w2, u, v)));
  }
  const bool ok = worst_sym <= 1e-10 && worst_pol <= 1e-10;
  return {ok, "1000 instances, dim 2..6: symmetrization identities " + fmt("%.2e", worst_sym) +
                  ", polarization " + fmt("%.2e", worst_pol) + " (tol 1e-10)"};
}

// ---- 2: base oracle ----------------------------------------------------------

Mat embed_jacobian(const BaseManifold& m, const ChartPoint& p) {
  const double h = 1e-6;
  Mat j(m.embed(p).size(), m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    ChartPoint a = p, b = p;
    a.x[i] += h;
    b.x[i] -= h;
    j.col(i) = (m.embed(a) - m.embed(b)) / (2 * h);
  }
  return j;
}

Outcome base_oracle() {
  RoundSphere s2;
  std::mt19937_64 rng(102);
  double worst = 0.0;
  int per_chart[2] = {0, 0};
  for (int i = 0; i < 100; ++i) {
    const auto p = s2.random_point(i % 2, rng);
    ++per_chart[p.chart];
    worst = std::max(worst, std::abs(sectional_base(s2, p, random_vec(2, rng), random_vec(2, rng)) - 1.0));
  }

  // Holonomy around a geodesic triangle against its area (Girard).
  auto on_sphere = [](double x, double y, double z) {
    Vec v(3);
    v << x, y, z;
    return Vec(v.normalized());
  };
  const Vec a = on_sphere(0.0, 0.0, 1.0), b = on_sphere(0.5, 0.0, 1.0), c = on_sphere(0.1, 0.45, 1.0);
  auto angle_at = [](const Vec& v, const Vec& p, const Vec& q) {
    Vec tp = p - v.dot(p) * v, tq = q - v.dot(q) * v;
    return std::acos(tp.normalized().dot(tq.normalized()));
  };
  const double area = angle_at(a, b, c) + angle_at(b, c, a) + angle_at(c, a, b) - M_PI;
  ChartPoint p{0, Vec::Zero(2)};
  Vec e0(2);
  e0 << 1.0, 0.0;
  std::vector<Vec> frame = {Vec(e0 / s2.lambda(p.x))};
  for (const Vec& target : {b, c, a}) {
    const Vec from = s2.embed(p);
    const double theta = std::acos(std::clamp(from.dot(target), -1.0, 1.0));
    Vec dir = (target - from.dot(target) * from).normalized();
    const Vec vel = embed_jacobian(s2, p).colPivHouseholderQr().solve(theta * dir);
    const auto s = geodesic_transport(s2, p, vel, frame, 1.0, 400);
    p = s.point;
    frame = s.frame;
  }
  const Vec z1 = frame[0] * s2.lambda(p.x);
  const double rel = std::abs(std::abs(std::atan2(z1[1], z1[0])) - area) / area;
  const bool ok = worst <= 1e-5 && rel <= 0.02 && per_chart[0] > 0 && per_chart[1] > 0;
  return {ok, "S2 sectional max |k-1| " + fmt("%.2e", worst) + " over 100 points (" +
                  std::to_string(per_chart[0]) + "/" + std::to_string(per_chart[1]) +
                  " per chart), triangle holonomy rel err " + fmt("%.2e", rel)};
}

// ---- 3: Chern numbers --------------------------------------------------------

Outcome chern() {
  double worst = 0.0;
  for (int n = -2; n <= 3; ++n)
    worst = std::max(worst, std::abs(chern_number(*make_bundle("o(" + std::to_string(n) + ")-s2")) - n));
  const double ts2 = chern_number(*make_bundle("ts2"));
  const bool ok = worst <= 1e-3 && std::abs(ts2 + 2.0) <= 1e-3;
  return {ok, "O(n), n=-2..3: max |c1 - n| " + fmt("%.2e", worst) + "; ts2 " + fmt("%.6f", ts2) +
                  " (J = +90 deg rotation)"};
}

// ---- 4: soul structure -------------------------------------------------------

Outcome soul() {
  std::mt19937_64 rng(104);
  double mixed = 0.0, sff = 0.0, ident = 0.0;
  for (const auto& c : soul_metrics()) {
    const auto& b = c.g->bundle();
    const int m = b.base_dim(), k = b.rank;
    for (int s = 0; s < 100; ++s) {
      const ChartPoint p = b.base->random_point(s % b.base->chart_count(), rng);
      const TotalPoint q{p.chart, p.x, Vec::Zero(k)};
      const CurvatureTensor r = riemann_total(*c.g, q);
      const Vec X = lift(*c.g, random_vec(m, rng)), Y = lift(*c.g, random_vec(m, rng));
      const Vec u = random_vec(k, rng), v = random_vec(k, rng);
      const Vec U = c.g->vertical(u), V = c.g->vertical(v);
      mixed = std::max(mixed, std::abs(sectional(r, c.g->metric(q), X, U).normalized));
      const double lhs = r.k(X + U, Y + V);
      const double rhs = riemann_base(*b.base, p).k(X.head(m), Y.head(m)) + c.g->warping().soul_curvature.at(p).k(u, v) -
                         3.0 * r.eval(X, Y, U, V);
      ident = std::max(ident, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      const Christoffel gam = christoffel_total(*c.g, q);
      for (int a = m; a < m + k; ++a) sff = std::max(sff, gam[a].topLeftCorner(m, m).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = mixed <= 1e-6 && sff <= 1e-6 && ident <= 1e-4;
  return {ok, "mixed |k| " + fmt("%.2e", mixed) + ", second fundamental form " + fmt("%.2e", sff) +
                  ", splitting identity rel err " + fmt("%.2e", ident) + " (100 samples x 2 metrics)"};
}

// ---- 5: O'Neill layer --------------------------------------------------------

Outcome oneill() {
  std::mt19937_64 rng(105);
  double at_max = 0.0, da = 0.0, dt = 0.0;
  for (const auto& c : soul_metrics()) {
    const auto& b = c.g->bundle();
    const int m = b.base_dim(), k = b.rank;
    for (int s = 0; s < 20; ++s) {
      const ChartPoint p = b.base->random_point(s % b.base->chart_count(), rng);
      const Vec x = random_vec(m, rng), y = random_vec(m, rng), u = random_vec(k, rng), v = random_vec(k, rng);
      const auto at = oneill_AT(*c.g, TotalPoint{p.chart, p.x, Vec::Zero(k)}, x, y, u, v);
      for (const Vec* t : {&at.A_XY, &at.A_XU, &at.T_UX, &at.T_UV}) at_max = std::max(at_max, t->norm());
      const auto dv = oneill_derivatives(*c.g, p.chart, p.x, v, x, y, u, v);
      da = std::max(da, (dv.dA_XY + 0.5 * c.g->vertical(curvature_form(b, p, x, y) * v)).norm());
      const auto dw = oneill_derivatives(*c.g, p.chart, p.x, random_vec(k, rng), x, y, u, v);
      dt = std::max({dt, dw.dT_UX.norm(), dw.dT_UV.norm()});
    }
  }
  const bool ok = at_max <= 1e-6 && da <= 1e-4 && dt <= 1e-4;
  return {ok, "|A|,|T| at soul " + fmt("%.2e", at_max) + ", (D_V A)_X Y + R(X,Y)V/2 " + fmt("%.2e", da) +
                  ", fiber derivative of T " + fmt("%.2e", dt)};
}

// ---- 6: Psi machinery --------------------------------------------------------

Outcome psi_machinery() {
  std::mt19937_64 rng(106);
  const auto metrics = soul_metrics();
  const auto& c = metrics[1];
  double first = 0.0, rel = 0.0, scaling = 0.0;
  int exercised = 0;
  for (int s = 0; s < 200; ++s) {
    const PsiInput in = unit_xv_sample(*c.g, rng);
    const auto num = psi_derivatives_numeric(*c.g, in);
    const auto ana = psi_second_analytic(*c.g, in);
    first = std::max(first, std::abs(num.first.value));
    rel = std::max(rel, std::abs(num.second.value - ana.total()) / std::max(1.0, std::abs(ana.total())));
    if (ana.k_sigma != 0 && ana.k_f != 0 && ana.r_uv != 0 && ana.adjoint != 0 && ana.dr != 0 && ana.hess != 0 &&
        ana.drs != 0)
      ++exercised;
    if (s < 50) {
      const double v0 = ana.total();
      for (double a : {0.5, 2.0, -1.5}) {
        PsiInput t = in;
        t.Y *= a;
        t.U *= a;
        t.W *= a;
        scaling = std::max(scaling, std::abs(psi_second_analytic(*c.g, t).total() - a * a * v0) /
                                        std::max(1.0, std::abs(a * a * v0)));
      }
    }
  }
  const bool ok = first <= 1e-5 && rel <= 1e-3 && scaling <= 1e-10 && exercised >= 190;
  return {ok, "200 samples on " + c.name + ": |Psi'(0)| " + fmt("%.2e", first) + ", Psi'' rel err " +
                  fmt("%.2e", rel) + ", all seven terms nonzero in " + std::to_string(exercised) +
                  ", scaling law " + fmt("%.2e", scaling)};
}

// ---- 7: positivity gates on O(1) --------------------------------------------

Outcome positivity_gates() {
  const auto o1 = make_bundle("o(1)-s2");
  SamplePlan plan;
  plan.seed = 107;
  plan.n_points = 10;
  plan.n_tuples = 5;
  const auto b_rep = check_theoremB(*o1, plan);
  const bool b_ok = b_rep.verdict == Verdict::HoldsStrictly && b_rep.extra("max_lhs") <= 1e-8 &&
                    b_rep.extra("fatness_witness") > 0.0;

  CSearchOptions opt;
  opt.q3_radius = 0.05;
  const auto e = choose_C(o1, rf_zero(2), plan, opt);
  const bool c_ok = e.verdict == Verdict::HoldsStrictly;
  const auto g = boosted_metric(o1, rf_zero(2), e.C, opt);

  int psd = 0, total = 0;
  for (const auto& s : draw_samples(*o1, plan, Gauge::Orthonormal)) {
    ++total;
    if (definiteness(q3_form(*g, s, 0.05, e.eps), kAlgebraicTol) != Definiteness::Indefinite) ++psd;
  }
  const auto nb = check_neighborhood(*g, plan, 0.05);
  const auto sp = check_sphere_bundle_positive(*g, 0.05, plan);
  const bool ok = b_ok && c_ok && total >= 100 && psd == total && nb.worst_margin >= -1e-6 &&
                  sp.verdict == Verdict::HoldsStrictly && sp.worst_margin > 0.0;
  return {ok, "thmB " + std::string(to_string(b_rep.verdict)) + " (max LHS " + fmt("%.1e", b_rep.extra("max_lhs")) +
                  ", fatness " + fmt("%.3f", b_rep.extra("fatness_witness")) + "); C = " + fmt("%g", e.C) +
                  " eps = " + fmt("%g", e.eps) + "; Q3 PSD " + std::to_string(psd) + "/" + std::to_string(total) +
                  "; nbhd min " + fmt("%.2e", nb.worst_margin) + "; e1pos min " + fmt("%.2e", sp.worst_margin)};
}

// ---- 8: negative controls ------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome negative_controls() {
  const std::string text =
      "bundle = trivial-2-torus\nchecks = thmA, thmB, e1pos\nplan.seed = 42\nmetric.C = 0\n"
      "expect.thmA = Holds\nexpect.thmB = Violated\nexpect.e1pos = Violated\n";
  const auto root = std::filesystem::temp_directory_path() / "curvgate-acceptance";
  std::filesystem::remove_all(root);
  std::ostringstream log;
  int status[2];
  for (int i = 0; i < 2; ++i) {
    RunConfig cfg = parse_config(text);
    cfg.output = (root / ("run" + std::to_string(i))).string();
    status[i] = run_check_command(cfg, log);
  }
  const std::string a = slurp(root / "run0" / "report.csv"), b = slurp(root / "run1" / "report.csv");
  const CheckRun run = run_checks(parse_config(text));
  bool zero = true;
  for (const auto& e : run.reports[0].entries) zero = zero && e.margin == 0.0 && e.lhs == 0.0 && e.rhs == 0.0;
  const bool ok = zero && run.reports[1].verdict == Verdict::Violated &&
                  run.reports[2].verdict == Verdict::Violated && status[0] == 0 && status[1] == 0 && !a.empty() &&
                  a == b;
  return {ok, std::string("thmA margins all exactly 0: ") + (zero ? "yes" : "no") + "; thmB " +
                  to_string(run.reports[1].verdict) + "; e1pos " + to_string(run.reports[2].verdict) +
                  "; CSV byte-identical across runs: " + (a == b && !a.empty() ? "yes" : "no") + " (" +
                  std::to_string(a.size()) + " bytes)"};
}

// ---- 9: stretch, second fiber derivative of T ------------------------------------

Outcome second_T() {
  std::mt19937_64 rng(109);
  const auto metrics = soul_metrics();
  const auto& c = metrics[1];
  const auto& b = c.g->bundle();
  const int m = b.base_dim(), k = b.rank;
  double diff = 0.0, scale = 0.0;
  for (int s = 0; s < 20; ++s) {
    const ChartPoint p = b.base->random_point(s % b.base->chart_count(), rng);
    const Vec x = random_vec(m, rng), u = random_vec(k, rng), v = random_vec(k, rng), w = random_vec(k, rng);
    const double lhs = second_T_derivative(*c.g, p.chart, p.x, w, u, v, x);
    const double rhs = covariant_derivative_RFs(b, c.rf, p, x, w, w, u, v).value / 3.0;
    diff = std::max(diff, std::abs(lhs - rhs));
    scale = std::max(scale, std::abs(rhs));
  }
  const double rel = scale > 0.0 ? diff / scale : diff;
  return {rel <= 0.05, "(D_W D_W T)_U V against grad of the symmetrized R_F / 3 on " + c.name +
                           ": max residual / max size " + fmt("%.2e", rel) + " (tol 5%)"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;
    bool gating;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "algebraic layer", 5, true, algebraic},
      {2, "base oracle", 30, true, base_oracle},
      {3, "Chern integrator", 30, true, chern},
      {4, "soul structure", 120, true, soul},
      {5, "O'Neill layer", 60, true, oneill},
      {6, "Psi machinery", 180, true, psi_machinery},
      {7, "positivity gates on O(1)", 300, true, positivity_gates},
      {8, "negative controls", 60, true, negative_controls},
      {9, "stretch: second fiber derivative of T", 600, false, second_T},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    std::printf("criterion %d %s: %s%s | %s | %.2fs of %.0fs%s\n", c.id, pass ? "PASS" : "FAIL",
                c.title, c.gating ? "" : " (non-gating)", o.detail.c_str(), secs, c.budget_s,
                in_time ? "" : " OVER BUDGET");
    if (!pass && c.gating) ++failed;
  }
  std::printf("acceptance: %s\n", failed == 0 ? "all gating criteria pass" : "gating failures present");
  return failed == 0 ? 0 : 1;
}
