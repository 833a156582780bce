#pragma once

// Levi-Civita calculus for a metric given as a callable in coordinates:
// finite-difference jets, Christoffel symbols and the Riemann tensor.

#include <functional>
#include <vector>

#include "curvgate/tensor.hpp"

namespace curvgate {

using MetricFn = std::function<Mat(const Vec&)>;

// gamma[k](i,j) = Gamma^k_{ij}.
using Christoffel = std::vector<Mat>;

struct MetricJet {
  Mat g;
  std::vector<Mat> dg;                // dg[a](b,c) = d_a g_bc
  std::vector<std::vector<Mat>> ddg;  // ddg[a][b](c,d) = d_a d_b g_cd (empty unless requested)
};

// Fourth-order central differences with step h.
MetricJet metric_jet(const MetricFn& g, const Vec& x, double h, bool second_derivatives);

// Throws NumericalError when g is singular or badly conditioned at the point.
void require_well_conditioned(const Mat& g, const char* where, double max_condition = 1e12);

Christoffel christoffel_from_jet(const MetricJet& jet);

// R(a,b,c,d) = <R(d_a,d_b)d_c, d_d> with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
Tensor4 riemann_from_jet(const MetricJet& jet, const Christoffel& gamma);

// Gamma(u, w)^k = Gamma^k_ij u^i w^j.
Vec contract_christoffel(const Christoffel& gamma, const Vec& u, const Vec& w);

}  // namespace curvgate
