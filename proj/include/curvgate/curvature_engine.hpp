#pragma once

// Riemannian geometry of a total-space metric by finite differences:
// curvature, radial transport, the function Psi(t) and its derivatives, and
// the O'Neill tensors of the projection.

#include <array>
#include <vector>

#include "curvgate/metric_builder.hpp"

namespace curvgate {

Christoffel christoffel_total(const TotalMetricField& g, const TotalPoint& q, double h = 1e-3);
CurvatureTensor riemann_total(const TotalMetricField& g, const TotalPoint& q, double h = 1e-3);

struct SectionalValue {
  double unnormalized = 0.0;
  double normalized = 0.0;
};
// Throws DomainError for a degenerate plane.
SectionalValue sectional(const CurvatureTensor& r, const Mat& g, const Vec& e1, const Vec& e2);
SectionalValue sectional(const TotalMetricField& g, const TotalPoint& q, const Vec& e1, const Vec& e2,
                         double h = 1e-3);

// Vectors parallel along t -> (x, t W), evaluated at each of `times` (same
// sign, increasing magnitude).
std::vector<std::vector<Vec>> radial_transport(const TotalMetricField& g, int chart, const Vec& x, const Vec& w,
                                               const std::vector<Vec>& vectors, const std::vector<double>& times,
                                               double max_step, double h = 1e-3);

// |gamma'' + Gamma(gamma', gamma')| for gamma(t) = (x, t W).
double radial_geodesic_residual(const TotalMetricField& g, int chart, const Vec& x, const Vec& w, double t,
                                double h = 1e-3);

// Base vectors X, Y, Xhat and fiber vectors U, V, Vhat, W at a point of the
// zero-section. Xhat and Vhat may be left empty.
struct PsiInput {
  int chart = 0;
  Vec x;
  Vec X, Y, U, V, W;
  Vec Xhat, Vhat;
};

struct PsiOptions {
  double h_t = 0.0;         // 0: 1e-2 * r_max / |W|
  double h_metric = 5e-3;   // finite-difference step for the curvature inside Psi
  int steps_per_ht = 8;
};

// k(X_t + t Xhat_t + t U_t, t Y_t + V_t + t Vhat_t) with all vectors parallel
// along t -> exp(t W).
double psi(const TotalMetricField& g, const PsiInput& in, double t, const PsiOptions& opt = {});

struct PsiDerivatives {
  StencilResult first;
  StencilResult second;
  double h_t = 0.0;
  std::array<double, 7> samples{};
};
PsiDerivatives psi_derivatives_numeric(const TotalMetricField& g, const PsiInput& in, const PsiOptions& opt = {});

// The seven groups of the closed form for Psi''(0).
struct PsiTerms {
  double k_sigma = 0.0;   // 2 k_Sigma(X,Y)
  double k_f = 0.0;       // 2 k_F(U,V)
  double r_uv = 0.0;      // -6 <R(X,Y)U, V>
  double adjoint = 0.0;   // 1/2 |R(W,V)X|^2
  double dr = 0.0;        // -2 <(D_X R)(X,Y)W, V>
  double hess = 0.0;      // 1/3 hess k_F(W,V) (X)
  double drs = 0.0;       // 4/3 D_X Rs(W,U,V,V) - 4/3 D_X Rs(W,V,U,V)
  double total() const { return k_sigma + k_f + r_uv + adjoint + dr + hess + drs; }
  // Sum of absolute values; the natural size for relative errors.
  double magnitude() const;
};
PsiTerms psi_second_analytic(const BundleSpec& b, const VerticalCurvatureField& rf, const PsiInput& in);
inline PsiTerms psi_second_analytic(const TotalMetricField& g, const PsiInput& in) {
  return psi_second_analytic(g.bundle(), g.warping().soul_curvature, in);
}

// O'Neill tensors at a total point for base vectors X, Y (lifted
// horizontally) and fiber vectors U, V (as vertical coordinate vectors).
struct OneillAT {
  Vec A_XY, A_XU, T_UX, T_UV;
};
OneillAT oneill_AT(const TotalMetricField& g, const TotalPoint& q, const Vec& x, const Vec& y, const Vec& u,
                   const Vec& v, double h = 1e-3);

// Fiber-direction derivatives at the zero-section point (chart, x), taken
// along s -> (x, s D). Valid where the differentiated tensor vanishes at s = 0.
struct OneillDerivatives {
  Vec dA_XY;  // (D_D A)_X Y
  Vec dA_XU;  // (D_D A)_X U
  Vec dT_UX;  // (D_D T)_U X
  Vec dT_UV;  // (D_D T)_U V
};
OneillDerivatives oneill_derivatives(const TotalMetricField& g, int chart, const Vec& x, const Vec& dir,
                                     const Vec& bx, const Vec& by, const Vec& u, const Vec& v, double h = 1e-3);

// g_E((D_W D_W T)_U V, lift X) at the zero-section, by second differences
// along s -> (x, s W).
double second_T_derivative(const TotalMetricField& g, int chart, const Vec& x, const Vec& w, const Vec& u,
                           const Vec& v, const Vec& bx, double h = 1e-2);

}  // namespace curvgate
