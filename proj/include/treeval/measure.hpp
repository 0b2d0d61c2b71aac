#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "treeval/paths.hpp"
#include "treeval/rng.hpp"

namespace treeval {

enum class MarginalFamily { Normal, Uniform, Logistic };

/// Univariate law with a closed-form CDF. Normal(loc, scale),
/// Uniform(loc, loc + scale), Logistic(loc, scale).
struct Marginal {
  MarginalFamily family = MarginalFamily::Normal;
  double loc = 0.0;
  double scale = 1.0;

  static Marginal standard_normal() { return {}; }
  double cdf(double x) const;
  double quantile(double u) const;
  bool operator==(const Marginal&) const = default;
};

/// Q_s as a product of independent marginals.
struct ProductPeriod {
  std::vector<Marginal> marginals;
};

enum class CopulaFamily { Independence, Clayton };

/// Q_s[(-inf, x]] = C(F_1(x_1), ..., F_d(x_d)).
struct CopulaPeriod {
  CopulaFamily family = CopulaFamily::Independence;
  double theta = 1.0;  // Clayton parameter, > 0
  std::vector<Marginal> marginals;

  double copula(std::span<const double> u) const;
  void validate() const;
};

struct GaussianKernelSpec {
  std::vector<double> mean;        // length m
  std::vector<double> covariance;  // m x m, row-major

  std::size_t dim() const { return mean.size(); }
  void validate() const;
};

struct GaussianOptions {
  double abs_tol = 1e-6;
  std::size_t shifts = 12;          // randomizations of the lattice rule
  std::size_t max_points = 1u << 20;  // per shift
  std::uint64_t seed = 0x5eedu;
};

struct GaussianProb {
  double value = 0.0;
  double error = 0.0;  // 3 standard errors across randomizations
  bool converged = true;
};

/// Q_s multivariate normal.
struct GaussianPeriod {
  GaussianKernelSpec kernel;
  GaussianOptions options;
};

/// prod_j (F_j(b_j) - F_j(a_j)).
double rect_prob_product(const ProductPeriod& q, std::span<const double> a,
                         std::span<const double> b);

/// Signed sum of the copula over the 2^d corners of (a, b]. Tiny negative
/// round-off (>= -1e-12) is clamped to 0. Rejects d > 25.
double rect_prob_copula(const CopulaPeriod& q, std::span<const double> a,
                        std::span<const double> b);

/// P[N(mean, cov) in (a, b]]. Exact for m = 1, for diagonal covariances and
/// for zero-variance coordinates (which contribute an indicator of their
/// mean); otherwise separation-of-variables quadrature over a randomized
/// Richtmyer lattice with an error estimate.
GaussianProb rect_prob_gaussian(const GaussianKernelSpec& k,
                                std::span<const double> a,
                                std::span<const double> b,
                                const GaussianOptions& opts = {});

using PeriodMeasure = std::variant<ProductPeriod, CopulaPeriod, GaussianPeriod>;

/// Q = Q_1 x ... x Q_T, one law on R^d per period.
class MeasureSpec {
 public:
  MeasureSpec() = default;
  MeasureSpec(std::size_t components, std::vector<PeriodMeasure> periods);

  static MeasureSpec standard_normal(std::size_t d, std::size_t T);

  std::size_t components() const { return d_; }
  std::size_t periods() const { return periods_.size(); }
  const PeriodMeasure& period(std::size_t s) const { return periods_[s]; }

  /// Q_{s+1}[(a, b]] for the 0-based period index s.
  double period_prob(std::size_t s, std::span<const double> a,
                     std::span<const double> b) const;

  /// Draws one period's vector given uniforms from rng.
  void sample_period(std::size_t s, CounterRng& rng, std::span<double> out) const;

  /// n i.i.d. paths; path i uses Philox lane i of `stream`. For the
  /// standard normal measure this equals sample_driver().
  DriverSample sample(std::size_t n, std::uint64_t seed, Stream stream) const;

  /// Stable text description, used in report metadata.
  std::string describe() const;

 private:
  std::size_t d_ = 0;
  std::vector<PeriodMeasure> periods_;
};

/// Memo of period probabilities keyed by (s, a, b). Not thread-safe: use
/// one per thread. Never changes returned values.
class ProbabilityCache {
 public:
  explicit ProbabilityCache(const MeasureSpec& measure) : measure_(measure) {}

  double get(std::size_t s, std::span<const double> a, std::span<const double> b);
  std::size_t hits() const { return hits_; }
  std::size_t size() const { return table_.size(); }

 private:
  const MeasureSpec& measure_;
  std::unordered_map<std::string, double> table_;
  std::size_t hits_ = 0;
};

}  // namespace treeval
