#pragma once

// Sampled verification of the curvature inequalities on catalog bundles:
// per-sample margins, verdicts, the quadratic-form gates and the search for
// the boost constant C.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "curvgate/curvature_engine.hpp"

namespace curvgate {

inline constexpr double kAlgebraicTol = 1e-6;
inline constexpr double kStencilTol = 1e-3;

// General: Gaussian vectors. Orthonormal: X, Y orthonormal in g_Sigma and W, V
// orthonormal in the fiber. UnitXV: |X| = |V| = |W| = 1 with W orthogonal to
// U and V.
enum class Gauge { General, Orthonormal, UnitXV };
const char* to_string(Gauge g);
// Throws StructuralError for an unknown name.
Gauge parse_gauge(const std::string& s);

struct SamplePlan {
  std::uint64_t seed = 42;
  int n_points = 8;  // base points per chart
  int n_tuples = 4;  // vector tuples per point
  Gauge gauge = Gauge::General;
  int threads = 0;   // 0: CURVGATE_THREADS, else hardware concurrency
};

struct TupleSample {
  int index = 0;
  ChartPoint p;
  Vec X, Y;     // base
  Vec U, V, W;  // fiber
};

// Same plan, same samples.
std::vector<TupleSample> draw_samples(const BundleSpec& b, const SamplePlan& plan);
std::vector<TupleSample> draw_samples(const BundleSpec& b, const SamplePlan& plan, Gauge gauge);

int resolve_threads(int requested);
// Runs fn(i) for i in [0, n) on worker threads; fn must be safe to call
// concurrently for distinct i.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

enum class Verdict { Holds, HoldsStrictly, Violated, Inconclusive };
const char* to_string(Verdict v);

struct MarginEntry {
  int sample_index = 0;
  int chart = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
};

struct MarginReport {
  std::string id;
  std::string paper_ref;
  double tol = kAlgebraicTol;
  bool strict = false;
  std::vector<MarginEntry> entries;
  double worst_margin = 0.0;
  int worst = -1;  // position in entries
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::pair<std::string, double>> extras;
  std::string note;

  // Strict: HoldsStrictly iff worst > tol, else Violated. Non-strict:
  // Violated iff worst < -tol, HoldsStrictly iff worst > tol, else Holds.
  void finalize();
  // NaN when absent.
  double extra(const std::string& key) const;
};

// ---- per-sample quantities ----------------------------------------------

struct ConnectionTerms {
  double d = 0.0;          // <(D_X R)(X,Y)W, V>
  double adjoint = 0.0;    // |R(W,V)X|^2
  double hess = 0.0;       // hess k_F(W,V) (X)
  double k_sigma = 0.0;    // k_Sigma(X,Y)
};
ConnectionTerms connection_terms(const BundleSpec& b, const VerticalCurvatureField& rf, const TupleSample& s);

MarginEntry theoremA_margin(const BundleSpec& b, const VerticalCurvatureField& rf, const TupleSample& s);
MarginEntry strake_walschap_margin(const BundleSpec& b, const TupleSample& s, double eps_diam);
// Uses the curvature of g at the zero-section.
MarginEntry walschap_corollary(const TotalMetricField& g, const TupleSample& s);

// [[2 k_Sigma, D], [D, 1/2 |R(W,V)X|^2 + 1/3 hess]].
QuadraticForm q_form(const BundleSpec& b, const VerticalCurvatureField& rf, const TupleSample& s);
// 3x3 form at the total point (x, r W/|W|) for unit lifts of X, Y and of the
// parts of U, V orthogonal to W.
QuadraticForm q3_form(const TotalMetricField& g, const TupleSample& s, double r, double eps);

// ---- reports --------------------------------------------------------------

MarginReport check_theoremA(const BundleSpec& b, const VerticalCurvatureField& rf, const SamplePlan& plan);
// Orthonormal samples; extras fatness_witness (min |R(W,V)X|) and max_lhs.
MarginReport check_theoremB(const BundleSpec& b, const SamplePlan& plan);
// Strict form of the pointwise inequality on orthonormal samples; extra
// delta = min (1/2 |R(W,V)X|^2 + 1/3 hess).
MarginReport check_theoremC(const BundleSpec& b, const VerticalCurvatureField& rf, const SamplePlan& plan);
MarginReport check_strake_walschap(const BundleSpec& b, const SamplePlan& plan, double eps_diam);
MarginReport check_walschap_corollary(const TotalMetricField& g, const SamplePlan& plan);
// D^2 <= (1 - eps)(|R(W,V)X|^2 + 2/3 hess) k_Sigma on orthonormal samples.
MarginReport check_eps_inequality(const BundleSpec& b, const VerticalCurvatureField& rf, const SamplePlan& plan,
                                  double eps);
// Margin is the smallest eigenvalue of Q3.
MarginReport check_q3(const TotalMetricField& g, const SamplePlan& plan, double r, double eps);
// Intrinsic sectional curvature of 2-planes tangent to the distance sphere of
// radius r0; extra gauss_residual compares planes span{X+V, Y} with their
// curvature in the total space.
MarginReport check_sphere_bundle_positive(const TotalMetricField& g, double r0, const SamplePlan& plan);
// Normalized sectional curvature of 2-planes at radius <= r_test; extra
// soul_mixed_max is the largest |k| of mixed planes at the zero-section.
MarginReport check_neighborhood(const TotalMetricField& g, const SamplePlan& plan, double r_test);
// Same planes with every sample at radius exactly r; margins are the
// normalized sectional curvatures.
MarginReport sectional_at_radius(const TotalMetricField& g, const SamplePlan& plan, double r);

// Largest eps in {1/2, 1/4, ...} (down to 2^-20) whose inequality holds on
// the samples; 0 when none does.
double choose_eps(const BundleSpec& b, const VerticalCurvatureField& rf, const SamplePlan& plan);

struct CSearchOptions {
  double C0 = 1.0;
  double C_cap = 1024.0 * 1024.0;
  // > 0 adds the Q3 gate at this radius on the metric built for each C.
  double q3_radius = 0.0;
  // true: rotational fiber profile (connection metric; rf must be transport
  // constant); false: warping from the boosted rf.
  bool rotational = true;
  double r_max = 0.5;
};

struct EpsilonDelta {
  double eps = 0.0;
  double delta = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double C = 0.0;  // sufficient, not minimal
  int doublings = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<MarginReport> reports;  // fiber gate, psi gate and optionally q3 at the returned C
  std::string note;
};

// Doubling search over C = C0 * 2^j.
EpsilonDelta choose_C(std::shared_ptr<const BundleSpec> b, const VerticalCurvatureField& rf, const SamplePlan& plan,
                      const CSearchOptions& opt = {});

// The metric the search certifies for a given C.
std::shared_ptr<const TotalMetricField> boosted_metric(std::shared_ptr<const BundleSpec> b,
                                                       const VerticalCurvatureField& rf, double C,
                                                       const CSearchOptions& opt);

}  // namespace curvgate
