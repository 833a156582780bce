#pragma once

// Euclidean vector bundles with metric-compatible connections over the base
// catalog. Fiber vectors are components in a chart-wise orthonormal
// trivialization, so compatibility means the connection matrices are skew.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "curvgate/base_geometry.hpp"
#include "curvgate/tensor.hpp"

namespace curvgate {

struct BundleSpec {
  std::string id;
  std::shared_ptr<const BaseManifold> base;
  int rank = 0;
  // omega[i] = omega(d_i), a rank x rank skew matrix; nabla = d + omega.
  std::function<std::vector<Mat>(int chart, const Vec& x)> connection;
  // v_to = T v_from for fiber components over p (p given in its own chart).
  // Empty means the trivialization is global.
  std::function<Mat(const ChartPoint& p, int to)> fiber_transition;
  // Rank 2 with SO(2) transitions; J is the +90 degree rotation.
  bool oriented = false;

  int base_dim() const { return base->dim(); }
  Mat transition(const ChartPoint& p, int to) const;
  // omega(X) = sum_i X^i omega(d_i).
  Mat omega(int chart, const Vec& x, const Vec& dir) const;
};

std::vector<std::string> catalog_ids();
// Throws StructuralError for an unknown id.
std::shared_ptr<const BundleSpec> make_bundle(const std::string& id);
// One line per catalog entry: id, base, rank and a short note.
std::vector<std::string> catalog_descriptions();

// Sampled check that every omega(d_i) is skew; returns the worst residual.
double compatibility_residual(const BundleSpec& b, const ChartPoint& p);

// R^nabla(d_i, d_j) for all i, j (antisymmetric in i, j by construction).
std::vector<std::vector<Mat>> curvature_components(const BundleSpec& b, const ChartPoint& p, double h = 1e-3);

// R^nabla(X, Y) = d omega(X,Y) + [omega(X), omega(Y)].
Mat curvature_form(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& y, double h = 1e-3);

// Matrix A with A X = R^nabla(W,V)X, defined by
// g(R^nabla(W,V)X, Y) = <R^nabla(X,Y)W, V>.
Mat curvature_adjoint(const BundleSpec& b, const ChartPoint& p, const Vec& w, const Vec& v, double h = 1e-3);

// |R^nabla(W,V)X|^2 in the base metric.
double adjoint_norm_sq(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& w, const Vec& v);

// Geodesic hooks transporting `count` fiber vectors (stacked) by nabla.
TransportHooks fiber_hooks(const BundleSpec& b, int count);

Vec stack(const std::vector<Vec>& vs);
std::vector<Vec> unstack(const Vec& z, int count);

// Fiber vectors nabla-parallel along the base geodesic through (p, X) up to
// time t_end.
struct FiberTransport {
  GeodesicState state;
  std::vector<Vec> fiber;
};
FiberTransport nabla_transport(const BundleSpec& b, const ChartPoint& p, const Vec& x,
                               const std::vector<Vec>& fiber, double t_end, int steps,
                               const std::vector<Vec>& base_frame = {});

// <(D_Z R^nabla)(X,Y)W, V>, differentiating along the geodesic with initial
// velocity Z while X, Y are Levi-Civita parallel and W, V are nabla-parallel.
StencilResult covariant_derivative_R(const BundleSpec& b, const ChartPoint& p, const Vec& z, const Vec& x,
                                     const Vec& y, const Vec& w, const Vec& v, double h = 1e-2);

inline StencilResult covariant_derivative_R(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& y,
                                            const Vec& w, const Vec& v, double h = 1e-2) {
  return covariant_derivative_R(b, p, x, x, y, w, v, h);
}

// ---- vertical curvature fields ----------------------------------------------

// (R_F)_p in the fiber trivialization of p's chart.
struct VerticalCurvatureField {
  std::string name;
  int rank = 0;
  std::function<CurvatureTensor(const ChartPoint& p)> at;
  // Components constant in nabla-parallel frames (zero, R_C): the hessian and
  // covariant derivative terms vanish identically.
  bool transport_constant = false;
};

VerticalCurvatureField rf_zero(int rank);
VerticalCurvatureField rf_constant(int rank, double c);
// f(p) * R for a fixed tensor R in the trivialization. Only meaningful on
// bundles whose trivialization is global, unless R is O(k)-invariant.
VerticalCurvatureField rf_scaled(std::shared_ptr<const BaseManifold> base,
                                 const std::function<double(const Vec& embedded)>& f, const CurvatureTensor& r,
                                 std::string name);
VerticalCurvatureField rf_sum(const VerticalCurvatureField& a, const VerticalCurvatureField& b);
// R'_F = R_C + R_F.
VerticalCurvatureField boost_RF(const VerticalCurvatureField& rf, double c);

// Named fields for configs: "zero", "height" (amplitude * height * R_1, valid
// on every bundle) and "anisotropic" (adds first-coordinate * KN(S) with a
// fixed non-scalar S; globally trivialized bundles only).
VerticalCurvatureField rf_catalog(const std::string& kind, const BundleSpec& b, double amplitude);

struct KFHessian {
  double kf = 0.0;
  StencilResult hess;
};

// k_F(W,V) at p and hess_{k_F(W,V)}(X).
KFHessian kF_and_hessian(const BundleSpec& b, const VerticalCurvatureField& rf, const ChartPoint& p, const Vec& x,
                         const Vec& w, const Vec& v, double h = 1e-2);

// d/dt Rs_F(A_t, B_t, C_t, D_t) along the geodesic through (p, X), fiber
// vectors nabla-parallel. Rs is the symmetrization.
StencilResult covariant_derivative_RFs(const BundleSpec& b, const VerticalCurvatureField& rf, const ChartPoint& p,
                                       const Vec& x, const Vec& a, const Vec& bb, const Vec& c, const Vec& d,
                                       double h = 1e-2);

// ---- rank 2 -----------------------------------------------------------------

Mat complex_structure();  // [[0,-1],[1,0]]

// Omega(X,Y) = <R^nabla(X,Y)W, JW> for unit W.
double omega_form(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& y, const Vec& w);
double omega_form(const BundleSpec& b, const ChartPoint& p, const Vec& x, const Vec& y);

// (1/2pi) * integral of Omega over S^2, from the two hemispheres |x| <= 1 of
// the stereographic charts.
double chern_number(const BundleSpec& b, int angular_nodes = 64);

}  // namespace curvgate
