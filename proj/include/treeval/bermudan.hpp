#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "treeval/ensemble.hpp"
#include "treeval/flat.hpp"
#include "treeval/measure.hpp"
#include "treeval/paths.hpp"

namespace treeval {

/// Discounted exercise values g_t(Z_t), t = 0..T, on a local-vol state.
struct ExerciseSpec {
  LocalVolModel model;
  std::function<double(std::size_t, std::span<const double>)> payoff;

  std::size_t periods() const { return model.periods; }
  void validate() const;

  /// Put on exp(Z) with uniform exercise dates t*dt, dt = maturity/periods:
  /// g_t = exp(-r t dt) (K - exp(z))^+.
  static ExerciseSpec bermudan_put(double strike, double sigma, double rate,
                                   std::size_t periods, double maturity,
                                   double z0 = 0.0);
};

/// E[F(mu + L X)] for a flat model F on R^m and X standard normal, where
/// L L^T is the covariance.
class ContinuationEvaluator {
 public:
  ContinuationEvaluator() = default;
  explicit ContinuationEvaluator(FlatEnsemble fe, GaussianOptions opts = {});

  const FlatEnsemble& model() const { return fe_; }

  /// General form: sum_i beta_i P[N(mean, cov) in A_i].
  double operator()(std::span<const double> mean, std::span<const double> cov) const;

  /// m = 1 via merged breakpoints: v0 + sum_k jump_k * Phi((mu - c_k)/sd).
  /// Terms more than nine standard deviations away are taken as 0 or 1.
  double scalar(double mean, double sd) const;

  /// Cell-by-cell rectangle probabilities, the reference for both forms.
  double direct(std::span<const double> mean, std::span<const double> cov) const;

 private:
  FlatEnsemble fe_;
  GaussianOptions opts_;
  double base_ = 0.0;               // F at -inf (m = 1)
  std::vector<double> breaks_;      // sorted distinct finite bounds
  std::vector<double> jumps_;       // F(c+) - F(c)
  std::vector<double> jump_prefix_; // prefix sums of jumps_
};

enum class BermudanMethod { RegressLater, RegressNow };

struct BermudanValue {
  BermudanMethod method = BermudanMethod::RegressLater;
  ExerciseSpec spec;
  /// Regress-later: fitted[t] approximates V_{t+1} on Z_{t+1}.
  /// Regress-now: fitted[t] approximates C_t on Z_t. Size T.
  std::vector<FlatEnsemble> fitted;
  std::vector<ContinuationEvaluator> evaluators;  // regress-later only
  double price = 0.0;                             // V_{X,0}

  double continuation(std::size_t t, std::span<const double> z) const;
  /// max(g_t, C_t) for t < T, g_T at T.
  double value(std::size_t t, std::span<const double> z) const;
  /// C_t <= g_t + 1e-12 (1 + |g_t|); always true at T.
  bool exercise(std::size_t t, std::span<const double> z) const;
};

/// Derives per-round ensemble seeds so each induction step trains with its
/// own randomness.
EnsembleConfig with_seed(EnsembleConfig cfg, std::uint64_t seed);

/// Backward induction with closed-form continuation values. `paths` is the
/// training sample of Z, n x (T+1) x m, shared by every step.
BermudanValue price_regress_later(const ExerciseSpec& spec, const Tensor3& paths,
                                  const EnsembleConfig& cfg);

/// Backward induction with C_t fitted directly on Z_t.
BermudanValue price_regress_now(const ExerciseSpec& spec, const Tensor3& paths,
                                const EnsembleConfig& cfg);

/// Value labels max(g_t, C_t) evaluated along every path at date t.
std::vector<double> value_column(const BermudanValue& bv, const Tensor3& paths,
                                 std::size_t t);

/// C_t(Z_t) for t < T along every path, n x T row-major.
std::vector<double> continuation_table(const BermudanValue& bv, const Tensor3& paths);

/// Empirical law of the first exercise date over `paths`; length T+1.
std::vector<double> stopping_distribution(const BermudanValue& bv, const Tensor3& paths);
/// Same, reusing a table from continuation_table().
std::vector<double> stopping_distribution(const BermudanValue& bv, const Tensor3& paths,
                                          std::span<const double> table);

/// Black's put on a log-price z with time to maturity tau.
double black_put_price(double z, double strike, double rate, double sigma, double tau);

}  // namespace treeval
