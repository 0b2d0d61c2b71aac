#include "treeval/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "treeval/error.hpp"
#include "treeval/parallel.hpp"
#include "treeval/rng.hpp"

namespace treeval {

void ForestConfig::validate(std::size_t n, std::size_t dim) const {
  require(trees >= 1, ErrorKind::Config, "forest: M must be >= 1");
  require(nodesize >= 2, ErrorKind::Config, "forest: nodesize must be >= 2");
  if (features)
    require(*features >= 1 && *features <= dim, ErrorKind::Config,
            "forest: p must lie in 1.." + std::to_string(dim));
  if (subsample) {
    require(*subsample >= 1, ErrorKind::Config, "forest: subsample must be >= 1");
    if (sampling == Sampling::SubsampleWithout)
      require(*subsample <= n, ErrorKind::Config,
              "forest: subsample without replacement needs n~ <= n");
  }
}

void BoostConfig::validate() const {
  require(rounds >= 1, ErrorKind::Config, "boost: rounds must be >= 1");
  require(learning_rate > 0.0 && learning_rate <= 1.0, ErrorKind::Config,
          "boost: learning_rate must lie in (0, 1]");
  require(nodesize >= 1, ErrorKind::Config, "boost: nodesize must be >= 1");
  if (early_stopping)
    require(early_stopping->patience >= 1 &&
                early_stopping->inputs.rows == early_stopping->responses.size() &&
                early_stopping->inputs.rows >= 1,
            ErrorKind::Config, "boost: early stopping needs a validation set");
}

double SquaredLoss::line_search(std::span<const double> y,
                                std::span<const double> f,
                                std::span<const double> g) const {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += (f[i] - y[i]) * g[i];
    den += g[i] * g[i];
  }
  if (!(den > 0.0)) return 0.0;
  return std::max(num / den, 0.0);
}

double FittedForest::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

double FittedBoost::predict(std::span<const double> x) const {
  double v = base;
  for (std::size_t t = 0; t < trees.size(); ++t) v -= step(t) * trees[t].predict(x);
  return v;
}

std::vector<std::size_t> resample_rows(const ForestConfig& cfg, std::size_t n,
                                       std::size_t m) {
  CounterRng rng(cfg.seed, Stream::Resample, static_cast<std::uint32_t>(m));
  std::vector<std::size_t> rows;
  switch (cfg.sampling) {
    case Sampling::Bootstrap:
      rows.resize(n);
      for (auto& r : rows) r = rng.next_below(n);
      break;
    case Sampling::SubsampleWith: {
      rows.resize(cfg.subsample.value_or(n));
      for (auto& r : rows) r = rng.next_below(n);
      break;
    }
    case Sampling::SubsampleWithout: {
      const std::size_t k = cfg.subsample.value_or(n);
      std::vector<std::size_t> pool(n);
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      for (std::size_t i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + rng.next_below(n - i)]);
      pool.resize(k);
      std::sort(pool.begin(), pool.end());
      rows = std::move(pool);
      break;
    }
  }
  return rows;
}

FittedForest fit_forest(FeatureView x, std::span<const double> responses,
                        const ForestConfig& cfg) {
  require(x.rows >= 1, ErrorKind::Precondition, "fit_forest: empty sample");
  cfg.validate(x.rows, x.cols);
  FittedForest out;
  out.trees.resize(cfg.trees);
  parallel_for(cfg.trees, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m) {
      TreeConfig tc;
      tc.nodesize = cfg.nodesize;
      tc.max_depth = cfg.max_depth;
      tc.feature_subset = cfg.features;
      tc.seed = cfg.seed;
      tc.lane = static_cast<std::uint32_t>(m);
      const auto rows = resample_rows(cfg, x.rows, m);
      out.trees[m] = fit_tree(x, responses, rows, tc);
    }
  });
  return out;
}

namespace {

double mean_loss(const Loss& loss, std::span<const double> y,
                 std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += loss.value(y[i], f[i]);
  return s / static_cast<double>(y.size());
}

}  // namespace

FittedBoost fit_boost(FeatureView x, std::span<const double> responses,
                      const BoostConfig& cfg) {
  require(x.rows >= 1, ErrorKind::Precondition, "fit_boost: empty sample");
  require(responses.size() == x.rows, ErrorKind::Dimension,
          "fit_boost: responses and inputs differ in length");
  cfg.validate();
  static const SquaredLoss kSquared;
  const Loss& loss = cfg.loss ? *cfg.loss : kSquared;
  const std::size_t n = x.rows;

  FittedBoost model;
  model.dim = x.cols;
  model.learning_rate = cfg.learning_rate;
  model.base = std::accumulate(responses.begin(), responses.end(), 0.0) /
               static_cast<double>(n);

  std::vector<double> fit(n, model.base), grad(n), g(n);
  model.train_loss.push_back(mean_loss(loss, responses, fit));

  const EarlyStopping* es = cfg.early_stopping ? &*cfg.early_stopping : nullptr;
  std::vector<double> vfit;
  std::size_t best_round = 0;
  double best_valid = 0.0;
  if (es) {
    vfit.assign(es->inputs.rows, model.base);
    best_valid = mean_loss(loss, es->responses, vfit);
    model.valid_loss.push_back(best_valid);
  }

  TreeConfig tc;
  tc.min_leaf = cfg.nodesize;
  tc.nodesize = std::max<std::size_t>(2, 2 * cfg.nodesize);
  tc.max_depth = cfg.max_depth;
  tc.seed = cfg.seed;

  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = loss.gradient(responses[i], fit[i]);
    tc.lane = static_cast<std::uint32_t>(t);
    RegressionTree tree = fit_tree(x, grad, tc);
    for (std::size_t i = 0; i < n; ++i) g[i] = tree.predict(x.row(i));
    const double gamma = loss.line_search(responses, fit, g);
    if (!(gamma > 0.0)) break;

    const double step = cfg.learning_rate * gamma;
    for (std::size_t i = 0; i < n; ++i) fit[i] -= step * g[i];
    model.train_loss.push_back(mean_loss(loss, responses, fit));

    if (es) {
      for (std::size_t i = 0; i < vfit.size(); ++i)
        vfit[i] -= step * tree.predict(es->inputs.row(i));
      const double vl = mean_loss(loss, es->responses, vfit);
      model.valid_loss.push_back(vl);
      if (vl < best_valid) {
        best_valid = vl;
        best_round = t;
      }
    }
    model.trees.push_back(std::move(tree));
    model.gammas.push_back(gamma);
    if (es && t - best_round >= es->patience) break;
  }

  if (es) {
    model.trees.resize(best_round);
    model.gammas.resize(best_round);
    model.train_loss.resize(best_round + 1);
    model.valid_loss.resize(best_round + 1);
  }
  return model;
}

double Model::predict(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, impl_);
}

std::vector<double> Model::predict(FeatureView x) const {
  std::vector<double> out(x.rows);
  parallel_for(x.rows, 512, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = predict(x.row(i));
  });
  return out;
}

std::size_t Model::dim() const {
  if (is_forest()) return forest().trees.at(0).dim();
  return boost().dim;
}

std::size_t Model::leaf_count() const {
  return std::visit(
      [](const auto& m) {
        std::size_t n = 0;
        for (const auto& t : m.trees) n += t.leaf_count();
        return n;
      },
      impl_);
}

Model fit_model(FeatureView x, std::span<const double> responses,
                const EnsembleConfig& cfg) {
  if (const auto* f = std::get_if<ForestConfig>(&cfg))
    return Model(fit_forest(x, responses, *f));
  return Model(fit_boost(x, responses, std::get<BoostConfig>(cfg)));
}

}  // namespace treeval
