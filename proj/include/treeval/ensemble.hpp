#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "treeval/cart.hpp"

namespace treeval {

enum class Sampling {
  Bootstrap,           // with replacement, n~ = n
  SubsampleWith,       // with replacement, n~ <= n
  SubsampleWithout,    // without replacement, n~ <= n
};

struct ForestConfig {
  std::size_t trees = 100;  // M
  std::size_t nodesize = 5;
  std::optional<std::size_t> features;  // p, unset = d*T
  std::optional<std::size_t> max_depth;
  Sampling sampling = Sampling::Bootstrap;
  std::optional<std::size_t> subsample;  // n~, unset = n
  std::uint64_t seed = 0;

  void validate(std::size_t n, std::size_t dim) const;
};

/// Differentiable loss psi(y, f). Only squared error ships; the boosting
/// loop talks to the loss through this interface.
class Loss {
 public:
  virtual ~Loss() = default;
  virtual double value(double y, double f) const = 0;
  /// d psi / d f
  virtual double gradient(double y, double f) const = 0;
  /// argmin over gamma >= 0 of sum_i psi(y_i, f_i - gamma * g_i).
  virtual double line_search(std::span<const double> y, std::span<const double> f,
                             std::span<const double> g) const = 0;
};

class SquaredLoss final : public Loss {
 public:
  double value(double y, double f) const override {
    return 0.5 * (y - f) * (y - f);
  }
  double gradient(double y, double f) const override { return f - y; }
  double line_search(std::span<const double> y, std::span<const double> f,
                     std::span<const double> g) const override;
};

struct EarlyStopping {
  FeatureView inputs;
  std::span<const double> responses;
  std::size_t patience = 20;
};

struct BoostConfig {
  std::size_t rounds = 100;  // t_max
  double learning_rate = 0.1;
  std::size_t nodesize = 1;  // min points in each child of a split
  std::optional<std::size_t> max_depth = 6;
  std::optional<EarlyStopping> early_stopping;
  const Loss* loss = nullptr;  // null selects squared error
  std::uint64_t seed = 0;

  void validate() const;
};

struct FittedForest {
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const;
};

/// f_0 - sum_t step_t * g_t(x) where step_t = learning_rate * gamma_t.
struct FittedBoost {
  std::size_t dim = 0;
  double base = 0.0;
  double learning_rate = 1.0;
  std::vector<RegressionTree> trees;
  std::vector<double> gammas;
  std::vector<double> train_loss;  // mean loss after round t (index 0 = f_0)
  std::vector<double> valid_loss;  // same on the validation set, if any

  double step(std::size_t t) const { return learning_rate * gammas[t]; }
  double predict(std::span<const double> x) const;
};

FittedForest fit_forest(FeatureView x, std::span<const double> responses,
                        const ForestConfig& cfg);

FittedBoost fit_boost(FeatureView x, std::span<const double> responses,
                      const BoostConfig& cfg);

using EnsembleConfig = std::variant<ForestConfig, BoostConfig>;

/// Either ensemble kind behind one value type.
class Model {
 public:
  Model() = default;
  explicit Model(FittedForest f) : impl_(std::move(f)) {}
  explicit Model(FittedBoost b) : impl_(std::move(b)) {}

  double predict(std::span<const double> x) const;
  std::vector<double> predict(FeatureView x) const;

  bool is_forest() const { return std::holds_alternative<FittedForest>(impl_); }
  const FittedForest& forest() const { return std::get<FittedForest>(impl_); }
  const FittedBoost& boost() const { return std::get<FittedBoost>(impl_); }
  std::size_t dim() const;
  std::size_t leaf_count() const;

 private:
  std::variant<FittedForest, FittedBoost> impl_;
};

Model fit_model(FeatureView x, std::span<const double> responses,
                const EnsembleConfig& cfg);

/// Row indices drawn for tree m. Depends only on (seed, m, n, cfg).
std::vector<std::size_t> resample_rows(const ForestConfig& cfg, std::size_t n,
                                       std::size_t m);

}  // namespace treeval
