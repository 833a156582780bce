#include "curvgate/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curvgate/errors.hpp"

namespace curvgate {

double Tensor4::eval(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const {
  if (a.size() != dim_ || b.size() != dim_ || c.size() != dim_ || d.size() != dim_) {
    throw StructuralError("Tensor4::eval: vector dimension does not match tensor dimension");
  }
  double sum = 0.0;
  for (int i = 0; i < dim_; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; j < dim_; ++j) {
      if (b[j] == 0.0) continue;
      double inner = 0.0;
      for (int k = 0; k < dim_; ++k) {
        if (c[k] == 0.0) continue;
        const double* row = &data_[index(i, j, k, 0)];
        double s = 0.0;
        for (int l = 0; l < dim_; ++l) s += row[l] * d[l];
        inner += c[k] * s;
      }
      sum += a[i] * b[j] * inner;
    }
  }
  return sum;
}

Tensor4& Tensor4::operator+=(const Tensor4& o) {
  if (o.dim_ != dim_) throw StructuralError("Tensor4: dimension mismatch in sum");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor4& Tensor4::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double SymmetryReport::worst(bool with_bianchi) const {
  double w = std::max({antisym_first, antisym_second, pair});
  return with_bianchi ? std::max(w, bianchi) : w;
}

SymmetryReport check_symmetries(const Tensor4& t) {
  SymmetryReport r;
  const int n = t.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = t(i, j, k, l);
          r.antisym_first = std::max(r.antisym_first, std::abs(v + t(j, i, k, l)));
          r.antisym_second = std::max(r.antisym_second, std::abs(v + t(i, j, l, k)));
          r.pair = std::max(r.pair, std::abs(v - t(k, l, i, j)));
          r.bianchi = std::max(r.bianchi, std::abs(v + t(j, k, i, l) + t(k, i, j, l)));
        }
  return r;
}

CurvatureTensor::CurvatureTensor(Tensor4 t, bool require_bianchi, double tol) : t_(std::move(t)) {
  const auto rep = check_symmetries(t_);
  const double scale = std::max(1.0, t_.max_abs());
  if (rep.worst(false) > tol * scale) {
    throw StructuralError("CurvatureTensor: index symmetries violated (residual " +
                          std::to_string(rep.worst(false)) + ")");
  }
  if (require_bianchi && rep.bianchi > tol * scale) {
    throw StructuralError("CurvatureTensor: first Bianchi identity violated (residual " +
                          std::to_string(rep.bianchi) + ")");
  }
}

CurvatureTensor CurvatureTensor::unchecked(Tensor4 t) {
  CurvatureTensor c;
  c.t_ = std::move(t);
  return c;
}

CurvatureTensor CurvatureTensor::zero(int dim) { return unchecked(Tensor4(dim)); }

Vec CurvatureTensor::apply(const Vec& x, const Vec& y, const Vec& z, const Mat& metric) const {
  const int n = dim();
  Vec lowered(n);
  Vec e = Vec::Zero(n);
  for (int d = 0; d < n; ++d) {
    e.setZero();
    e[d] = 1.0;
    lowered[d] = t_.eval(x, y, z, e);
  }
  return metric.ldlt().solve(lowered);
}

bool CurvatureTensor::satisfies_bianchi(double tol) const {
  return check_symmetries(t_).bianchi <= tol * std::max(1.0, t_.max_abs());
}

CurvatureTensor CurvatureTensor::operator+(const CurvatureTensor& o) const {
  Tensor4 sum = t_;
  sum += o.t_;
  return unchecked(std::move(sum));
}

CurvatureTensor CurvatureTensor::scaled(double s) const {
  Tensor4 out = t_;
  out *= s;
  return unchecked(std::move(out));
}

Mat SymmetrizedTensor::quadratic_in_first_pair(const Vec& w) const {
  const int n = dim();
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (w[j] == 0.0) continue;
      const double ww = w[i] * w[j];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) m(a, b) += ww * t_(i, j, a, b);
    }
  }
  return m;
}

SymmetrizedTensor symmetrize(const CurvatureTensor& r) {
  const int n = r.dim();
  if (n <= 0) throw StructuralError("symmetrize: empty tensor");
  Tensor4 s(n);
  for (int w1 = 0; w1 < n; ++w1)
    for (int w2 = 0; w2 < n; ++w2)
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) s(w1, w2, u, v) = 0.5 * (r(w1, u, v, w2) + r(w2, u, v, w1));
  return SymmetrizedTensor(std::move(s));
}

CurvatureTensor constant_curvature_tensor(int dim, double c, const Mat& metric) {
  if (dim < 2) throw StructuralError("constant_curvature_tensor: dim must be >= 2");
  const Mat g = metric.size() == 0 ? Mat::Identity(dim, dim) : metric;
  if (g.rows() != dim || g.cols() != dim) throw StructuralError("constant_curvature_tensor: metric has wrong shape");
  Tensor4 t(dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      for (int cc = 0; cc < dim; ++cc)
        for (int d = 0; d < dim; ++d) t(a, b, cc, d) = c * (g(a, d) * g(b, cc) - g(a, cc) * g(b, d));
  return CurvatureTensor::unchecked(std::move(t));
}

CurvatureTensor kulkarni_nomizu_tensor(const Mat& s) {
  const int n = static_cast<int>(s.rows());
  if (n < 2 || s.cols() != n) throw StructuralError("kulkarni_nomizu_tensor: need a square matrix, dim >= 2");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw StructuralError("kulkarni_nomizu_tensor: matrix is not symmetric");
  }
  auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  Tensor4 t(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          t(a, b, c, d) = 0.5 * (s(a, d) * delta(b, c) + delta(a, d) * s(b, c) - s(a, c) * delta(b, d) -
                                 delta(a, c) * s(b, d));
  return CurvatureTensor::unchecked(std::move(t));
}

double wedge_norm_sq(const Vec& x, const Vec& y, const Mat& g) {
  if (x.size() != y.size()) throw StructuralError("wedge_norm_sq: dimension mismatch");
  if (g.size() == 0) return x.squaredNorm() * y.squaredNorm() - std::pow(x.dot(y), 2);
  if (g.rows() != x.size() || g.cols() != x.size()) throw StructuralError("wedge_norm_sq: metric has wrong shape");
  const double xx = x.dot(g * x);
  const double yy = y.dot(g * y);
  const double xy = x.dot(g * y);
  return xx * yy - xy * xy;
}

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite:
      return "PositiveDefinite";
    case Definiteness::PositiveSemidefinite:
      return "PositiveSemidefinite";
    case Definiteness::Indefinite:
      return "Indefinite";
  }
  return "?";
}

QuadraticForm::QuadraticForm(Mat m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw StructuralError("QuadraticForm: matrix must be square");
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * std::max(1.0, m_.cwiseAbs().maxCoeff())) {
    throw StructuralError("QuadraticForm: matrix is not symmetric (residual " + std::to_string(asym) + ")");
  }
  m_ = 0.5 * (m_ + m_.transpose()).eval();
}

Vec QuadraticForm::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Definiteness definiteness(const QuadraticForm& q, double tol) {
  const Vec ev = q.eigenvalues();
  if (ev.minCoeff() > tol) return Definiteness::PositiveDefinite;
  if (ev.minCoeff() >= -tol) return Definiteness::PositiveSemidefinite;
  return Definiteness::Indefinite;
}

}  // namespace curvgate
