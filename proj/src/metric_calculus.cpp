#include "curvgate/metric_calculus.hpp"

#include <array>
#include <cmath>
#include <string>

#include "curvgate/errors.hpp"

namespace curvgate {

namespace {

constexpr std::array<int, 4> kOffsets = {-2, -1, 1, 2};
constexpr std::array<double, 4> kFirst = {1.0, -8.0, 8.0, -1.0};  // / 12h

}  // namespace

MetricJet metric_jet(const MetricFn& gfn, const Vec& x, double h, bool second_derivatives) {
  const int n = static_cast<int>(x.size());
  MetricJet jet;
  jet.g = gfn(x);
  if (jet.g.rows() != n || jet.g.cols() != n) throw StructuralError("metric_jet: metric has wrong shape");
  jet.dg.assign(n, Mat::Zero(n, n));
  if (second_derivatives) jet.ddg.assign(n, std::vector<Mat>(n, Mat::Zero(n, n)));

  for (int a = 0; a < n; ++a) {
    std::array<Mat, 4> s;
    for (int i = 0; i < 4; ++i) {
      Vec y = x;
      y[a] += kOffsets[i] * h;
      s[i] = gfn(y);
    }
    jet.dg[a] = (s[0] - 8.0 * s[1] + 8.0 * s[2] - s[3]) / (12.0 * h);
    if (second_derivatives) {
      jet.ddg[a][a] = (-s[0] + 16.0 * s[1] - 30.0 * jet.g + 16.0 * s[2] - s[3]) / (12.0 * h * h);
    }
  }
  if (!second_derivatives) return jet;

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      Mat acc = Mat::Zero(n, n);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          Vec y = x;
          y[a] += kOffsets[i] * h;
          y[b] += kOffsets[j] * h;
          acc += (kFirst[i] * kFirst[j]) * gfn(y);
        }
      }
      acc /= (144.0 * h * h);
      jet.ddg[a][b] = acc;
      jet.ddg[b][a] = acc;
    }
  }
  return jet;
}

void require_well_conditioned(const Mat& g, const char* where, double max_condition) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  const Vec ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > max_condition) {
    throw NumericalError(std::string(where) + ": metric singular or ill-conditioned (eigenvalues " +
                         std::to_string(lo) + " .. " + std::to_string(hi) + ", condition " +
                         std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
  }
}

Christoffel christoffel_from_jet(const MetricJet& jet) {
  const int n = static_cast<int>(jet.g.rows());
  const Mat ginv = jet.g.inverse();
  // Lowered: G(e,i,j) = 1/2 (d_i g_ej + d_j g_ei - d_e g_ij)
  Christoffel gamma(n, Mat::Zero(n, n));
  std::vector<Mat> lowered(n, Mat::Zero(n, n));
  for (int e = 0; e < n; ++e)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        lowered[e](i, j) = 0.5 * (jet.dg[i](e, j) + jet.dg[j](e, i) - jet.dg[e](i, j));
  for (int k = 0; k < n; ++k)
    for (int e = 0; e < n; ++e) {
      const double c = ginv(k, e);
      if (c != 0.0) gamma[k] += c * lowered[e];
    }
  return gamma;
}

Tensor4 riemann_from_jet(const MetricJet& jet, const Christoffel& gamma) {
  if (jet.ddg.empty()) throw StructuralError("riemann_from_jet: jet lacks second derivatives");
  const int n = static_cast<int>(jet.g.rows());
  // Fully covariant tensor in the ordering R_{abcd} with R_{abab} = K |a^b|^2:
  //   R_{abcd} = 1/2 (g_ad,bc + g_bc,ad - g_ac,bd - g_bd,ac)
  //            + g_mn (G^m_bc G^n_ad - G^m_bd G^n_ac).
  // Our convention R(a,b,c,d) = <R(d_a,d_b)d_c, d_d> equals -R_{abcd}.
  // Contracted products P(b,c,a,d) = g_mn G^m_bc G^n_ad.
  std::vector<Vec> gvec(static_cast<std::size_t>(n) * n, Vec::Zero(n));
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      Vec v(n);
      for (int m = 0; m < n; ++m) v[m] = gamma[m](b, c);
      gvec[b * n + c] = v;
    }
  std::vector<Vec> lowered(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n * n; ++i) lowered[i] = jet.g * gvec[i];

  Tensor4 r(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double second = 0.5 * (jet.ddg[b][c](a, d) + jet.ddg[a][d](b, c) - jet.ddg[b][d](a, c) -
                                       jet.ddg[a][c](b, d));
          const double quad = lowered[b * n + c].dot(gvec[a * n + d]) - lowered[b * n + d].dot(gvec[a * n + c]);
          r(a, b, c, d) = -(second + quad);
        }
  return r;
}

Vec contract_christoffel(const Christoffel& gamma, const Vec& u, const Vec& w) {
  const int n = static_cast<int>(gamma.size());
  Vec out(n);
  for (int k = 0; k < n; ++k) out[k] = u.dot(gamma[k] * w);
  return out;
}

}  // namespace curvgate
