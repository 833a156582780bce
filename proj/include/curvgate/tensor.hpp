#pragma once

// Dense rank-4 curvature tensors, symmetrization and small quadratic forms.
//
// Index convention: R(a,b,c,d) = <R(e_a,e_b)e_c, e_d> with the unnormalized
// sectional curvature k(X,Y) = R(X,Y,Y,X). All tensors here are expressed in
// a basis whose inner product is given separately (identity by default).

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace curvgate {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kSymmetryTol = 1e-9;

// Plain dim^4 array with row-major (i,j,k,l) layout.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

  // Full contraction T(a,b,c,d) a^i b^j c^k d^l.
  double eval(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const;

  Tensor4& operator+=(const Tensor4& o);
  Tensor4& operator*=(double s);
  double max_abs() const;

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * dim_ + j) * dim_ + k) * dim_ + l;
  }
  int dim_ = 0;
  std::vector<double> data_;
};

struct SymmetryReport {
  double antisym_first = 0.0;   // max |R(i,j,k,l) + R(j,i,k,l)|
  double antisym_second = 0.0;  // max |R(i,j,k,l) + R(i,j,l,k)|
  double pair = 0.0;            // max |R(i,j,k,l) - R(k,l,i,j)|
  double bianchi = 0.0;         // max |R(i,j,k,l) + R(j,k,i,l) + R(k,i,j,l)|
  double worst(bool with_bianchi) const;
};

SymmetryReport check_symmetries(const Tensor4& t);

// A tensor with the algebraic symmetries of a curvature tensor. The first
// Bianchi identity is only enforced when requested: vertical curvature tensors
// need not satisfy it.
class CurvatureTensor {
 public:
  CurvatureTensor() = default;
  // Throws StructuralError if the symmetries fail beyond `tol`.
  explicit CurvatureTensor(Tensor4 t, bool require_bianchi = false, double tol = kSymmetryTol);

  // Skips validation; for numerically assembled tensors whose residuals are
  // reported separately.
  static CurvatureTensor unchecked(Tensor4 t);
  static CurvatureTensor zero(int dim);

  int dim() const { return t_.dim(); }
  double operator()(int i, int j, int k, int l) const { return t_(i, j, k, l); }
  double eval(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const { return t_.eval(a, b, c, d); }
  // Unnormalized sectional curvature R(X,Y,Y,X).
  double k(const Vec& x, const Vec& y) const { return t_.eval(x, y, y, x); }
  // Vector R(X,Y)Z with index raised by the inverse of `metric`.
  Vec apply(const Vec& x, const Vec& y, const Vec& z, const Mat& metric) const;

  const Tensor4& raw() const { return t_; }
  bool satisfies_bianchi(double tol = kSymmetryTol) const;

  CurvatureTensor operator+(const CurvatureTensor& o) const;
  CurvatureTensor scaled(double s) const;

 private:
  Tensor4 t_;
};

// Rs(W1,W2,U,V) = 1/2 (R(W1,U,V,W2) + R(W2,U,V,W1)), the tensor induced on
// symmetric 2-forms.
class SymmetrizedTensor {
 public:
  SymmetrizedTensor() = default;
  explicit SymmetrizedTensor(Tensor4 t) : t_(std::move(t)) {}
  int dim() const { return t_.dim(); }
  double operator()(int i, int j, int k, int l) const { return t_(i, j, k, l); }
  double eval(const Vec& w1, const Vec& w2, const Vec& u, const Vec& v) const { return t_.eval(w1, w2, u, v); }
  // Matrix M(a,b) = Rs(W,W,e_a,e_b).
  Mat quadratic_in_first_pair(const Vec& w) const;
  const Tensor4& raw() const { return t_; }

 private:
  Tensor4 t_;
};

SymmetrizedTensor symmetrize(const CurvatureTensor& r);

// Constant curvature C with respect to `metric` (identity when empty):
// R(a,b,c,d) = C (g(a,d) g(b,c) - g(a,c) g(b,d)).
CurvatureTensor constant_curvature_tensor(int dim, double c, const Mat& metric = Mat());

// Curvature operator of the form 1/2 (S(a,d)g(b,c) + g(a,d)S(b,c) - S(a,c)g(b,d) - g(a,c)S(b,d))
// built from a symmetric matrix S in an orthonormal basis; S = C*I recovers
// constant curvature C. Satisfies Bianchi.
CurvatureTensor kulkarni_nomizu_tensor(const Mat& s);

// g(X,X) g(Y,Y) - g(X,Y)^2; identity metric when `g` is empty.
double wedge_norm_sq(const Vec& x, const Vec& y, const Mat& g = Mat());

enum class Definiteness { PositiveDefinite, PositiveSemidefinite, Indefinite };
const char* to_string(Definiteness d);

class QuadraticForm {
 public:
  // Throws StructuralError when `m` is not square or not symmetric to `tol`.
  explicit QuadraticForm(Mat m, double tol = kSymmetryTol);
  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  double operator()(const Vec& z) const { return z.dot(m_ * z); }
  Vec eigenvalues() const;

 private:
  Mat m_;
};

Definiteness definiteness(const QuadraticForm& q, double tol);

}  // namespace curvgate
