#include "doctest.h"

#include <cmath>
#include <random>

#include "curvgate/bundle.hpp"
#include "curvgate/errors.hpp"
#include "test_support.hpp"

using namespace curvgate;
using curvgate::testing::random_vec;

namespace {

// A point of the overlap annulus 0.7 < |x| < 1.4 of a sphere chart.
ChartPoint overlap_point(const BaseManifold& m, std::mt19937_64& rng) {
  ChartPoint p = m.random_point(0, rng);
  const double r = std::uniform_real_distribution<double>(0.7, 1.4)(rng);
  p.x = p.x.normalized() * r;
  return p;
}

std::vector<Vec> orthonormal(int n, int count, std::mt19937_64& rng, const Mat& g) {
  std::vector<Vec> vs;
  for (int i = 0; i < count; ++i) vs.push_back(random_vec(n, rng));
  return gram_schmidt(vs, g);
}

double rotation_angle(const Vec& a, const Vec& b) { return std::atan2(a[0] * b[1] - a[1] * b[0], a.dot(b)); }

}  // namespace

TEST_CASE("catalog: every connection is skew, i.e. compatible with the fiber inner product") {
  std::mt19937_64 rng(1);
  for (const auto& id : catalog_ids()) {
    const auto b = make_bundle(id);
    for (int i = 0; i < 10; ++i) {
      const auto p = b->base->random_point(i % b->base->chart_count(), rng);
      CHECK(compatibility_residual(*b, p) < 1e-14);
    }
  }
  CHECK_THROWS_AS(make_bundle("no-such-bundle"), StructuralError);
  CHECK(make_bundle("o(7)-s2")->rank == 2);
}

TEST_CASE("curvature_form: flat connection gives zero") {
  const auto b = make_bundle("trivial-3-s2");
  std::mt19937_64 rng(2);
  const auto p = b->base->random_point(0, rng);
  CHECK(curvature_form(*b, p, random_vec(2, rng), random_vec(2, rng)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("curvature_form: O(n) is curved for n != 0 and antisymmetric exactly") {
  std::mt19937_64 rng(3);
  for (int n : {-2, -1, 1, 2, 3}) {
    const auto b = make_bundle("o(" + std::to_string(n) + ")-s2");
    for (int i = 0; i < 10; ++i) {
      const auto p = b->base->random_point(i % 2, rng);
      const auto xy = orthonormal(2, 2, rng, b->base->metric(p.chart, p.x));
      const Mat r = curvature_form(*b, p, xy[0], xy[1]);
      CHECK(r.norm() > 0.1);
      CHECK((r + curvature_form(*b, p, xy[1], xy[0])).cwiseAbs().maxCoeff() == 0.0);
      CHECK((r + r.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("curvature_adjoint: defining relation on all basis pairs") {
  std::mt19937_64 rng(4);
  for (const char* id : {"o(2)-s2", "twisted-3-s2", "hopf-s4", "ts2"}) {
    const auto b = make_bundle(id);
    const int m = b->base_dim();
    for (int i = 0; i < 5; ++i) {
      const auto p = b->base->random_point(i % 2, rng);
      const Vec w = random_vec(b->rank, rng), v = random_vec(b->rank, rng);
      const Mat a = curvature_adjoint(*b, p, w, v);
      const Mat g = b->base->metric(p.chart, p.x);
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          const Vec ek = Vec::Unit(m, k), el = Vec::Unit(m, l);
          CHECK(std::abs((a * ek).dot(g * el) - v.dot(curvature_form(*b, p, ek, el) * w)) < 1e-10);
        }
    }
  }
}

TEST_CASE("curvature_adjoint examples") {
  std::mt19937_64 rng(5);
  const auto o1 = make_bundle("o(1)-s2");
  const auto p = o1->base->random_point(0, rng);
  const Vec w = random_vec(2, rng);
  CHECK(curvature_adjoint(*o1, p, w, 3.0 * w).cwiseAbs().maxCoeff() < 1e-14);
  const auto flat = make_bundle("trivial-2-torus");
  CHECK(curvature_adjoint(*flat, {0, Vec::Constant(2, 0.3)}, w, random_vec(2, rng)).cwiseAbs().maxCoeff() == 0.0);
  // |R(W,V)X| = |i_X Omega| for orthonormal W, V and unit X.
  for (int i = 0; i < 10; ++i) {
    const auto q = o1->base->random_point(i % 2, rng);
    const Mat g = o1->base->metric(q.chart, q.x);
    const auto xy = orthonormal(2, 2, rng, g);
    const double ix = std::abs(omega_form(*o1, q, xy[0], xy[1]));  // |i_X Omega| with Y the unit complement
    CHECK(std::sqrt(adjoint_norm_sq(*o1, q, xy[0], Vec::Unit(2, 0), Vec::Unit(2, 1))) == doctest::Approx(ix).epsilon(1e-9));
    CHECK(ix == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("Omega: antisymmetric, independent of the unit vector, J^2 = -1") {
  const Mat j = complex_structure();
  CHECK((j * j + Mat::Identity(2, 2)).norm() == 0.0);
  std::mt19937_64 rng(6);
  for (const char* id : {"o(3)-s2", "ts2"}) {
    const auto b = make_bundle(id);
    for (int i = 0; i < 10; ++i) {
      const auto p = b->base->random_point(i % 2, rng);
      const Vec x = random_vec(2, rng), y = random_vec(2, rng);
      const double o = omega_form(*b, p, x, y);
      CHECK(omega_form(*b, p, y, x) == doctest::Approx(-o));
      CHECK(omega_form(*b, p, x, y, random_vec(2, rng)) == doctest::Approx(o).epsilon(1e-12));
    }
  }
}

TEST_CASE("nabla_transport: flat connection leaves fiber vectors constant") {
  const auto b = make_bundle("trivial-3-torus");
  const Vec w = Vec::LinSpaced(3, 1, 3);
  const auto t = nabla_transport(*b, {0, Vec::Constant(2, 0.2)}, Vec::Constant(2, 0.7), {w}, 3.0, 100);
  CHECK((t.fiber[0] - w).norm() == 0.0);
}

TEST_CASE("nabla_transport: inner products preserved over t in [0, pi]") {
  std::mt19937_64 rng(7);
  for (const auto& id : catalog_ids()) {
    const auto b = make_bundle(id);
    const auto p = b->base->random_point(0, rng);
    const Vec x = random_vec(b->base_dim(), rng).normalized() / std::sqrt(b->base->metric(0, p.x)(0, 0));
    const Vec w = random_vec(b->rank, rng), v = random_vec(b->rank, rng);
    const auto t = nabla_transport(*b, p, x, {w, v}, M_PI, 400);
    CHECK(t.fiber[0].norm() == doctest::Approx(w.norm()).epsilon(1e-6));
    CHECK(t.fiber[0].dot(t.fiber[1]) == doctest::Approx(w.dot(v)).epsilon(1e-6));
  }
}

TEST_CASE("nabla_transport: O(1) holonomy around the equator equals the hemisphere integral of Omega") {
  const auto b = make_bundle("o(1)-s2");
  // The equator is |x| = 1 in chart 0, where lambda = 1.
  const ChartPoint p{0, Vec::Unit(2, 0)};
  const Vec w = Vec::Unit(2, 0);
  const auto t = nabla_transport(*b, p, Vec::Unit(2, 1), {w}, 2 * M_PI, 2000);
  CHECK((t.state.point.x - p.x).norm() < 1e-6);
  // Hemisphere integral of Omega is pi (half the Chern integral 2 pi).
  CHECK(std::abs(rotation_angle(w, t.fiber[0])) == doctest::Approx(M_PI).epsilon(0.01));
  // For O(2) the hemisphere integral is 2 pi, so the holonomy is trivial.
  const auto b2 = make_bundle("o(2)-s2");
  const auto t2 = nabla_transport(*b2, p, Vec::Unit(2, 1), {w}, 2 * M_PI, 2000);
  CHECK((t2.fiber[0] - w).norm() < 1e-6);
}

TEST_CASE("covariant_derivative_R examples") {
  std::mt19937_64 rng(8);
  const auto flat = make_bundle("trivial-2-s2");
  const auto p0 = flat->base->random_point(0, rng);
  CHECK(covariant_derivative_R(*flat, p0, random_vec(2, rng), random_vec(2, rng), random_vec(2, rng),
                               random_vec(2, rng)).value == 0.0);
  for (int n : {-2, 1, 3}) {
    const auto b = make_bundle("o(" + std::to_string(n) + ")-s2");
    for (int i = 0; i < 20; ++i) {
      const auto p = b->base->random_point(i % 2, rng);
      const auto d = covariant_derivative_R(*b, p, random_vec(2, rng), random_vec(2, rng), random_vec(2, rng),
                                            random_vec(2, rng));
      CHECK(std::abs(d.value) < 1e-5);
    }
  }
}

TEST_CASE("covariant_derivative_R: linearity and antisymmetries") {
  std::mt19937_64 rng(9);
  {
    const auto b = make_bundle("twisted-3-s2");
    const int m = b->base_dim(), k = b->rank;
    for (int i = 0; i < 10; ++i) {
      const auto p = b->base->random_point(i % 2, rng);
      const Vec x = random_vec(m, rng), y = random_vec(m, rng), w = random_vec(k, rng), v = random_vec(k, rng);
      const double d = covariant_derivative_R(*b, p, x, y, w, v).value;
      CHECK(std::abs(d) > 1e-3);
      CHECK(covariant_derivative_R(*b, p, x, 2.0 * y, w, v).value == doctest::Approx(2 * d).epsilon(1e-9));
      CHECK(covariant_derivative_R(*b, p, x, y, w, 2.0 * v).value == doctest::Approx(2 * d).epsilon(1e-9));
      CHECK(std::abs(covariant_derivative_R(*b, p, x, y, v, w).value + d) < 1e-10 * (1 + std::abs(d)));
      CHECK(std::abs(covariant_derivative_R(*b, p, x, y, x, w, v).value + d) < 1e-10 * (1 + std::abs(d)));
    }
  }
}

TEST_CASE("covariant_derivative_R: the homogeneous instanton has parallel curvature") {
  std::mt19937_64 rng(15);
  const auto b = make_bundle("hopf-s4");
  for (int i = 0; i < 10; ++i) {
    const auto p = b->base->random_point(i % 2, rng);
    const auto d = covariant_derivative_R(*b, p, random_vec(4, rng), random_vec(4, rng), random_vec(4, rng),
                                          random_vec(4, rng));
    CHECK(std::abs(d.value) < 1e-6);
  }
}

TEST_CASE("gauge invariance: scalar outputs agree across overlapping charts") {
  std::mt19937_64 rng(10);
  for (const char* id : {"o(1)-s2", "o(-2)-s2", "ts2", "hopf-s4", "twisted-3-s2"}) {
    const auto b = make_bundle(id);
    const auto rf = rf_catalog("height", *b, 0.7);
    const int m = b->base_dim(), k = b->rank;
    for (int i = 0; i < 20; ++i) {
      const auto p = overlap_point(*b->base, rng);
      const auto q = b->base->change_chart(p, 1);
      const Mat jb = b->base->transition_jacobian(p, 1);
      const Mat tf = b->transition(p, 1);
      const Vec x = random_vec(m, rng), y = random_vec(m, rng), w = random_vec(k, rng), v = random_vec(k, rng);
      const Vec xq = jb * x, yq = jb * y, wq = tf * w, vq = tf * v;
      CHECK(std::abs((tf.transpose() * tf - Mat::Identity(k, k)).maxCoeff()) < 1e-12);
      CHECK(vq.dot(curvature_form(*b, q, xq, yq) * wq) == doctest::Approx(v.dot(curvature_form(*b, p, x, y) * w)).epsilon(1e-5).scale(1.0));
      CHECK(adjoint_norm_sq(*b, q, xq, wq, vq) == doctest::Approx(adjoint_norm_sq(*b, p, x, w, v)).epsilon(1e-5).scale(1.0));
      CHECK(covariant_derivative_R(*b, q, xq, yq, wq, vq).value ==
            doctest::Approx(covariant_derivative_R(*b, p, x, y, w, v).value).epsilon(1e-5).scale(1.0));
      CHECK(kF_and_hessian(*b, rf, q, xq, wq, vq).hess.value ==
            doctest::Approx(kF_and_hessian(*b, rf, p, x, w, v).hess.value).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("hopf-s4: instanton energy density is constant on S^4 in both charts") {
  const auto b = make_bundle("hopf-s4");
  std::mt19937_64 rng(11);
  auto density = [&](const ChartPoint& p) {
    const double l = std::static_pointer_cast<const RoundSphere>(b->base)->lambda(p.x);
    const auto r = curvature_components(*b, p);
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s += r[i][j].squaredNorm();
    return s / std::pow(l, 4);
  };
  const double ref = density({0, Vec::Zero(4)});
  CHECK(ref > 0.1);
  for (int i = 0; i < 10; ++i) CHECK(density(b->base->random_point(i % 2, rng)) == doctest::Approx(ref).epsilon(1e-6));
  CHECK(density({1, Vec::Constant(4, 1e-3)}) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("kF_and_hessian examples") {
  std::mt19937_64 rng(12);
  const auto b = make_bundle("o(1)-s2");
  const auto p = b->base->random_point(0, rng);
  const Vec x = random_vec(2, rng), w = random_vec(2, rng), v = random_vec(2, rng);
  const auto rc = rf_constant(2, 1.7);
  const auto r = kF_and_hessian(*b, rc, p, x, w, v);
  CHECK(r.kf == doctest::Approx(1.7 * wedge_norm_sq(w, v)));
  CHECK(r.hess.value == 0.0);
  const auto rh = rf_catalog("height", *b, 1.0);
  const auto par = kF_and_hessian(*b, rh, p, x, w, 2.0 * w);
  CHECK(std::abs(par.kf) < 1e-14);
  CHECK(std::abs(par.hess.value) < 1e-12);
  // f = height, |W ^ V| = 1, north pole: hess f(X) = -1.
  const auto north = kF_and_hessian(*b, rh, {0, Vec::Zero(2)}, Vec::Unit(2, 0) * 0.5, Vec::Unit(2, 0), Vec::Unit(2, 1));
  CHECK(north.kf == doctest::Approx(1.0));
  CHECK(north.hess.value == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("boost_RF adds constant curvature and leaves hessians unchanged") {
  std::mt19937_64 rng(13);
  const auto b = make_bundle("twisted-3-s2");
  const auto zero_boost = boost_RF(rf_zero(3), 1.0);
  const auto r1 = constant_curvature_tensor(3, 1.0);
  const auto at = zero_boost.at({0, Vec::Zero(2)});
  for (std::size_t i = 0; i < at.raw().data().size(); ++i) CHECK(at.raw().data()[i] == r1.raw().data()[i]);
  const auto rf = rf_catalog("anisotropic", *b, 1.0);
  const auto boosted = boost_RF(rf, 2.5);
  for (int i = 0; i < 10; ++i) {
    const auto p = b->base->random_point(i % 2, rng);
    const Vec x = random_vec(2, rng), u = random_vec(3, rng), v = random_vec(3, rng);
    const auto a = kF_and_hessian(*b, rf, p, x, u, v);
    const auto c = kF_and_hessian(*b, boosted, p, x, u, v);
    CHECK(c.kf == doctest::Approx(a.kf + 2.5 * wedge_norm_sq(u, v)));
    CHECK(std::abs(c.hess.value - a.hess.value) < 1e-8);
  }
  CHECK_THROWS_AS(rf_catalog("anisotropic", *make_bundle("ts2"), 1.0), StructuralError);
}

TEST_CASE("covariant_derivative_RFs: zero for transport-constant fields, linear otherwise") {
  std::mt19937_64 rng(14);
  const auto b = make_bundle("twisted-3-s2");
  const auto p = b->base->random_point(0, rng);
  const Vec x = random_vec(2, rng), w = random_vec(3, rng), u = random_vec(3, rng), v = random_vec(3, rng);
  CHECK(covariant_derivative_RFs(*b, rf_constant(3, 4.0), p, x, w, u, v, v).value == 0.0);
  const auto rf = rf_catalog("anisotropic", *b, 1.0);
  const double d = covariant_derivative_RFs(*b, rf, p, x, w, u, v, v).value;
  CHECK(std::abs(d) > 1e-4);
  CHECK(covariant_derivative_RFs(*b, rf, p, x, 2.0 * w, u, v, v).value == doctest::Approx(2 * d).epsilon(1e-9));
  // Pair symmetry survives differentiation.
  CHECK(covariant_derivative_RFs(*b, rf, p, x, v, v, w, u).value == doctest::Approx(d).epsilon(1e-9));
}

TEST_CASE("chern_number over S^2") {
  CHECK(std::abs(chern_number(*make_bundle("trivial-2-s2"))) < 1e-6);
  for (int n = -2; n <= 3; ++n) {
    CHECK(std::abs(chern_number(*make_bundle("o(" + std::to_string(n) + ")-s2")) - n) < 1e-3);
  }
  CHECK(std::abs(chern_number(*make_bundle("ts2")) + 2.0) < 1e-3);
  CHECK_THROWS_AS(chern_number(*make_bundle("trivial-3-s2")), StructuralError);
}
